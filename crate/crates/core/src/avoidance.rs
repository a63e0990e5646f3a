//! Environment-level potential-field collision avoidance between two MAVs.

use serde::{Deserialize, Serialize};

use crate::geometry::{rotation_yaw, Vec3};
use crate::rewards::v_pot;
use crate::world::{Action, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvoidanceConfig {
    /// Distance at which the repulsive field vanishes, meters.
    pub radius: f64,
    /// Repulsion at full field strength, in units of `v_max`.
    pub gain: f64,
}

impl Default for AvoidanceConfig {
    fn default() -> Self {
        Self {
            radius: 2.5,
            // cancels the largest approach speed a per-axis bounded command can reach
            gain: 3f64.sqrt(),
        }
    }
}

/// Adds a repulsive ego-frame velocity pointing away from the neighbor, then
/// rescales each command back into the per-axis bounds. Identity when the
/// MAVs are at least `radius` apart or when there is no neighbor.
pub fn potential_field_avoidance(
    proposed: &[Action],
    world: &WorldState,
    cfg: &AvoidanceConfig,
) -> Vec<Action> {
    let dist = match world.inter_mav_distance() {
        Some(d) if d < cfg.radius => d,
        _ => return proposed.to_vec(),
    };
    let strength = v_pot(dist, cfg.radius) * cfg.gain * world.config.v_max;
    proposed
        .iter()
        .enumerate()
        .map(|(k, action)| {
            let me = &world.mavs[k];
            let other = &world.mavs[1 - k];
            let away = if dist > 0.0 {
                (me.position - other.position) / dist
            } else if k == 0 {
                Vec3::new(-1.0, 0.0, 0.0)
            } else {
                Vec3::new(1.0, 0.0, 0.0)
            };
            let push = rotation_yaw(me.yaw).transpose() * away * strength;
            let mut v = Vec3::from(action.velocity) + push;
            let peak = v.amax();
            if peak > world.config.v_max {
                v *= world.config.v_max / peak;
            }
            Action {
                velocity: [v.x, v.y, v.z],
                yaw_rate: action.yaw_rate,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CameraModel;
    use crate::world::{with_mavs, MavState, WalkPlan, WorldConfig};

    fn pair(a: [f64; 3], yaw_a: f64, b: [f64; 3], yaw_b: f64) -> WorldState {
        let cam = CameraModel::default();
        with_mavs(
            &WorldConfig::default(),
            WalkPlan::stationary([0.0, 0.0], 0.0),
            vec![
                MavState::at_rest(Vec3::from(a), yaw_a, cam),
                MavState::at_rest(Vec3::from(b), yaw_b, cam),
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn far_apart_is_identity() {
        let w = pair([0.0, 0.0, 5.0], 0.0, [10.0, 0.0, 5.0], 1.0);
        let p = vec![
            Action {
                velocity: [1.0, -0.5, 0.2],
                yaw_rate: 0.3,
            },
            Action::ZERO,
        ];
        assert_eq!(
            potential_field_avoidance(&p, &w, &AvoidanceConfig::default()),
            p
        );
    }

    #[test]
    fn close_pair_separates_symmetrically() {
        let w = pair([0.0, 0.0, 5.0], 0.7, [0.5, 0.0, 5.0], 0.7);
        let out = potential_field_avoidance(&[Action::ZERO; 2], &w, &AvoidanceConfig::default());
        let world_v = |w: &WorldState, out: &[Action], k: usize| {
            rotation_yaw(w.mavs[k].yaw) * Vec3::from(out[k].velocity)
        };
        let (v0, v1) = (world_v(&w, &out, 0), world_v(&w, &out, 1));
        assert!((v0 + v1).norm() < 1e-12);
        assert!(v0.x < 0.0 && v0.y.abs() < 1e-12 && v0.z.abs() < 1e-12);
        assert!(out[0]
            .velocity
            .iter()
            .all(|v| v.abs() <= w.config.v_max + 1e-12));

        // different headings: per-axis rescaling may differ, directions stay opposite
        let w = pair([0.0, 0.0, 5.0], 0.7, [0.5, 0.0, 5.0], -2.0);
        let out = potential_field_avoidance(&[Action::ZERO; 2], &w, &AvoidanceConfig::default());
        let (v0, v1) = (world_v(&w, &out, 0), world_v(&w, &out, 1));
        assert!(v0.normalize().dot(&v1.normalize()) < -1.0 + 1e-12);
        assert!(v0.x < 0.0 && v1.x > 0.0);
    }

    #[test]
    fn bounds_are_respected() {
        let w = pair([0.0, 0.0, 5.0], 0.3, [0.3, 0.3, 5.0], 0.0);
        let p = vec![
            Action {
                velocity: [2.0, 2.0, 2.0],
                yaw_rate: 0.0,
            };
            2
        ];
        for a in potential_field_avoidance(&p, &w, &AvoidanceConfig::default()) {
            assert!(a.velocity.iter().all(|v| v.abs() <= 2.0 + 1e-12));
        }
    }
}
