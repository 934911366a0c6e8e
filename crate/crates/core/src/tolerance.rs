//! Numeric constants shared by every verifier.
//!
//! Two tolerance tiers are used throughout: [`Tier::Exact`] for quantities
//! assembled from closed-form partial derivatives and [`Tier::Fd`] for
//! anything that went through a central finite difference. Every report
//! states the tier it was judged against.

use serde::{Deserialize, Serialize};

/// Tolerance for closed-form / exact-partial paths.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for finite-difference paths.
pub const FD_TOL: f64 = 1e-4;

/// Central-difference step for charts of size O(1).
pub const FD_STEP: f64 = 1e-5;

/// A contact ratio must exceed this to count as positive.
pub const POSITIVITY_MARGIN: f64 = 1e-9;

/// Smallest radius used by generic operations on polar charts.
pub const R_MIN: f64 = 1e-6;

/// Default samples per grid axis.
pub const DEFAULT_GRID: usize = 17;

/// Hard cap on the number of grid points in a single sweep.
pub const GRID_CAP: usize = 1_000_000;

/// Default fixed RK4 step.
pub const DEFAULT_FLOW_STEP: f64 = 1e-3;

/// Offset between neighbouring trajectories used for flow differentials.
pub const FLOW_FD_OFFSET: f64 = 1e-5;

/// Relative singular value below which a pointwise system is rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exact,
    Fd,
}

impl Tier {
    pub fn join(self, other: Tier) -> Tier {
        if self == Tier::Fd || other == Tier::Fd {
            Tier::Fd
        } else {
            Tier::Exact
        }
    }
}

/// Active tolerances; the CLI may override the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub fd: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: EXACT_TOL,
            fd: FD_TOL,
            positivity: POSITIVITY_MARGIN,
        }
    }
}

impl Tolerances {
    pub fn for_tier(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Exact => self.exact,
            Tier::Fd => self.fd,
        }
    }
}
