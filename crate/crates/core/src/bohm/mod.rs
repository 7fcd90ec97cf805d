//! de Broglie–Bohm trajectories: guidance velocities v = (ħ/m) Im(∂ψ/ψ) for
//! the free one-dimensional state and for the coupled system–pointer state,
//! integrated with fixed-step RK4.

mod ensemble;
mod field;
mod io;

pub use ensemble::{
    fixed_offset_starts, integrate_trajectory, ordering_preserved, sample_starts, step_schedule, trajectory_ensemble,
    trajectory_ensemble_2d, EnsembleSummary,
};
pub use field::{grid_velocities, velocity_1d, velocity_2d};
pub use io::{write_summary_json, write_trajectory_csv};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Step outside the coupling window.
    pub dt: f64,
    /// Step while the coupling is on.
    pub dt_coupled: f64,
    /// Below this density the velocity of the previous step is kept.
    pub eps_density: f64,
    /// Speed cap.
    pub v_max: f64,
    /// Trajectories closer than this to a box wall are stopped and flagged.
    pub wall_margin: f64,
    /// Keep every n-th step in the recorded samples (the last is always kept).
    pub record_every: usize,
    /// One-dimensional runs split a step in halves while a full step and two
    /// half steps disagree by more than this (0 disables the refinement).
    pub local_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            dt_coupled: 1e-3,
            eps_density: 1e-12,
            v_max: 50.0,
            wall_margin: 1.0,
            record_every: 1,
            local_tolerance: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt", self.dt),
            ("dt_coupled", self.dt_coupled),
            ("eps_density", self.eps_density),
            ("v_max", self.v_max),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.local_tolerance >= 0.0) {
            return Err(Error::invalid("local_tolerance", "must be >= 0"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohmTrajectory {
    pub samples: Vec<TrajectoryPoint>,
    /// x changed sign relative to the start at some point.
    pub crossed_midpoint: bool,
    /// Stopped early at a box wall.
    pub aborted: bool,
    /// Steps at which the density fell below the floor.
    pub regularized_steps: usize,
}

impl BohmTrajectory {
    pub fn start(&self) -> &TrajectoryPoint {
        &self.samples[0]
    }

    pub fn end(&self) -> &TrajectoryPoint {
        self.samples.last().unwrap()
    }

    /// Position at `t` by linear interpolation between samples.
    pub fn x_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        let forward = s.len() < 2 || s[1].t > s[0].t;
        let i = s.partition_point(|p| if forward { p.t < t } else { p.t > t });
        if i == 0 {
            return s[0].x;
        }
        if i == s.len() {
            return s[s.len() - 1].x;
        }
        let (a, b) = (&s[i - 1], &s[i]);
        a.x + (b.x - a.x) * (t - a.t) / (b.t - a.t)
    }
}

#[cfg(test)]
mod tests;
