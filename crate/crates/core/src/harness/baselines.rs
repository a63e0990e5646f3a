//! Scripted camera strategies. Both read the subject's true state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{rotation_yaw, wrap_angle, Vec3};
use crate::world::{Action, MavState, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Orbit,
    Frontal,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Orbit => "orbit",
            Strategy::Frontal => "frontal",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orbit" => Ok(Strategy::Orbit),
            "frontal" => Ok(Strategy::Frontal),
            _ => Err(format!(
                "unknown strategy `{s}` (expected orbit or frontal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub orbit_radius: f64,
    pub orbit_speed: f64,
    pub frontal_distance: f64,
    /// Proportional gain on position errors, 1/s.
    pub gain: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            orbit_radius: 5.0,
            orbit_speed: 1.0,
            frontal_distance: 5.0,
            gain: 1.0,
        }
    }
}

impl BaselineConfig {
    pub fn action(&self, strategy: Strategy, world: &WorldState, agent: usize) -> Action {
        match strategy {
            Strategy::Orbit => baseline_orbit(world, agent, self),
            Strategy::Frontal => baseline_frontal(world, agent, self),
        }
    }
}

/// Altitude at which the camera axis meets the subject's root `range` meters away.
pub fn viewing_altitude(world: &WorldState, agent: usize, range: f64) -> f64 {
    let ws = &world.config.workspace;
    let z = world.person.root.z + range * world.mavs[agent].camera.pitch.tan();
    z.clamp(ws.lower[2], ws.upper[2])
}

/// Counter-clockwise circle around the subject at fixed radius and altitude.
pub fn baseline_orbit(world: &WorldState, agent: usize, cfg: &BaselineConfig) -> Action {
    let mav = &world.mavs[agent];
    let v_max = world.config.v_max;
    let p = &world.person;
    let rel = Vec3::new(mav.position.x - p.root.x, mav.position.y - p.root.y, 0.0);
    let rho = rel.norm();
    let radial = if rho > 1e-9 {
        rel / rho
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let tangent = Vec3::new(-radial.y, radial.x, 0.0);
    let v_radial = (-cfg.gain * (rho - cfg.orbit_radius)).clamp(-v_max, v_max);
    let mut v = radial * v_radial + tangent * cfg.orbit_speed;
    v += Vec3::new(p.velocity.x, p.velocity.y, 0.0);
    v.z = cfg.gain * (viewing_altitude(world, agent, cfg.orbit_radius) - mav.position.z);
    to_action(world, agent, v)
}

/// Holds the point `frontal_distance` ahead of the subject along its body yaw.
pub fn baseline_frontal(world: &WorldState, agent: usize, cfg: &BaselineConfig) -> Action {
    let mav = &world.mavs[agent];
    let p = &world.person;
    let target = Vec3::new(
        p.root.x + cfg.frontal_distance * p.yaw.cos(),
        p.root.y + cfg.frontal_distance * p.yaw.sin(),
        viewing_altitude(world, agent, cfg.frontal_distance),
    );
    let mut v = (target - mav.position) * cfg.gain;
    v += Vec3::new(p.velocity.x, p.velocity.y, 0.0);
    to_action(world, agent, v)
}

/// Yaw rate that turns toward the subject, saturated at the rate limit.
pub fn facing_rate(world: &WorldState, mav: &MavState) -> f64 {
    let cfg = &world.config;
    let to = world.person.root - mav.position;
    (wrap_angle(to.y.atan2(to.x) - mav.yaw) / cfg.dt).clamp(-cfg.omega_max, cfg.omega_max)
}

/// World-frame velocity to an ego-frame command, scaled uniformly into bounds.
fn to_action(world: &WorldState, agent: usize, v_world: Vec3) -> Action {
    let mav = &world.mavs[agent];
    let v_max = world.config.v_max;
    let mut v = rotation_yaw(mav.yaw).transpose() * v_world;
    let peak = v.amax();
    if peak > v_max {
        v *= v_max / peak;
    }
    Action {
        velocity: [v.x, v.y, v.z],
        yaw_rate: facing_rate(world, mav),
    }
}
