//! Integral curves, contact-connection transport and the Gray flow.

mod gray;
mod integrate;
mod lift;
mod transport;

pub use gray::{gray_flow, gray_flow_with_offset, gray_velocity, AlphaDot, ConjugationReport, ContactFamily, GrayFlowResult, GrayFlowState, GrayVelocity};
pub use integrate::{integrate_flow, Trajectory};
pub use lift::mapping_torus_lift;
pub use transport::{parallel_transport, parallel_transport_with_offset, PreservationReport};
