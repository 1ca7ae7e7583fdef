//! Policy action plus social-force correction, and the planner modes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::Vec2;
use crate::policy::{Action, Policy};
use crate::sensing::Observation;
use crate::sfm::{repulsive_velocity_change, AgentState, SfmParams};
use crate::world::{Pose, ROBOT_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    /// Raw policy, no correction.
    OpDdpg,
    Hybrid,
    #[serde(rename = "at")]
    HybridAt,
    #[serde(rename = "arp")]
    HybridArp,
    #[serde(rename = "app")]
    HybridApp,
    #[serde(rename = "app_at")]
    HybridAppAt,
}

impl PlannerMode {
    pub const ALL: [PlannerMode; 6] = [
        PlannerMode::OpDdpg,
        PlannerMode::Hybrid,
        PlannerMode::HybridAt,
        PlannerMode::HybridArp,
        PlannerMode::HybridApp,
        PlannerMode::HybridAppAt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerMode::OpDdpg => "op_ddpg",
            PlannerMode::Hybrid => "hybrid",
            PlannerMode::HybridAt => "at",
            PlannerMode::HybridArp => "arp",
            PlannerMode::HybridApp => "app",
            PlannerMode::HybridAppAt => "app_at",
        }
    }

    pub fn uses_sfm(&self) -> bool {
        *self != PlannerMode::OpDdpg
    }

    pub fn uses_at(&self) -> bool {
        matches!(self, PlannerMode::HybridAt | PlannerMode::HybridAppAt)
    }

    pub fn uses_arp(&self) -> bool {
        *self == PlannerMode::HybridArp
    }

    pub fn uses_app(&self) -> bool {
        matches!(self, PlannerMode::HybridApp | PlannerMode::HybridAppAt)
    }
}

impl fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PlannerMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = PlannerMode::ALL.iter().map(|m| m.as_str()).collect();
                Error::Config(format!("unknown planner mode {s:?} (expected one of {})", known.join(", ")))
            })
    }
}

/// Adds the velocity change and saturates to the action box.
pub fn combine(a: Action, dv: (f64, f64)) -> Action {
    Action::new(a.linear + dv.0, a.angular + dv.1).clamped()
}

/// What the hybrid planner needs to know about the robot and its surroundings.
pub struct PlannerInput<'a> {
    pub obs: &'a Observation,
    pub pose: &'a Pose,
    /// Current robot velocity in the world frame.
    pub velocity: &'a Vec2,
    pub agents: &'a [AgentState],
}

/// Policy action, corrected by the SFM when `use_sfm` is set.
pub fn hybrid_action(
    policy: &dyn Policy,
    input: &PlannerInput<'_>,
    sfm: &SfmParams,
    use_sfm: bool,
    dt: f64,
) -> Action {
    let a = policy.act(input.obs).clamped();
    if !use_sfm {
        return a;
    }
    let dv = repulsive_velocity_change(input.pose, input.velocity, ROBOT_RADIUS, input.agents, sfm, dt);
    combine(a, dv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn combine_examples() {
        assert_eq!(combine(Action::new(0.5, 0.0), (0.0, 0.0)), Action::new(0.5, 0.0));
        assert_eq!(combine(Action::new(0.9, 0.8), (0.3, 0.4)), Action::new(1.0, 1.0));
        assert_eq!(combine(Action::new(-0.1, -0.9), (-0.3, -0.3)), Action::new(-0.2, -1.0));
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in PlannerMode::ALL {
            assert_eq!(m.as_str().parse::<PlannerMode>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("hybird".parse::<PlannerMode>().is_err());
    }

    fn action() -> impl Strategy<Value = Action> {
        (-0.2..=1.0f64, -1.0..=1.0f64).prop_map(|(l, a)| Action::new(l, a))
    }

    proptest! {
        #[test]
        fn output_within_bounds(a in action(), dl in -5.0..5.0f64, dp in -5.0..5.0f64) {
            prop_assert!(combine(a, (dl, dp)).within_bounds());
        }

        #[test]
        fn zero_correction_is_identity(a in action()) {
            prop_assert_eq!(combine(a, (0.0, 0.0)), a);
        }

        #[test]
        fn monotone_in_linear_correction(a in action(), d1 in -3.0..3.0f64, extra in 0.0..3.0f64) {
            prop_assert!(combine(a, (d1 + extra, 0.0)).linear >= combine(a, (d1, 0.0)).linear);
        }
    }
}
