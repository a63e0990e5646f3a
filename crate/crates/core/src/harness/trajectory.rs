//! The fixed evaluation walk shipped with the crate.

use serde::{Deserialize, Serialize};

use crate::world::WalkPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestTrajectory {
    /// Seed the plan was sampled from with the default world settings.
    pub seed: u64,
    pub duration_s: f64,
    pub plan: WalkPlan,
}

const ASSET: &str = include_str!("../../assets/test_trajectory.json");

impl TestTrajectory {
    pub fn builtin() -> Self {
        serde_json::from_str(ASSET).expect("bundled test trajectory parses")
    }
}
