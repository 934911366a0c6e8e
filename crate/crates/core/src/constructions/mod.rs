//! Structure-producing constructions.

mod connected_sum;
mod interpolate;
mod lutz;
mod products;
mod vanishing;

pub use connected_sum::{divisor_connected_sum, divisor_local_model, ConnectedSum, GluingReport};
pub use interpolate::{interpolate_to_standard, BlendReport, Interpolation};
pub use lutz::{detect_overtwisted_disk, lutz_profile, lutz_profile_with_match, lutz_twist, LutzProfile, Twist};
pub use products::{contactize, symplectize};
pub use vanishing::{cutoff, vanishing_lutz_family, Interval, MaskEntry, NestedIntervals, VanishingLutzFamily};
