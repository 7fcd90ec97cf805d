//! Classical path skeletons ("weak trajectories") behind a weak value: a
//! straight segment from a point of the initial state to the pointer at
//! `t_w`, then a second one from the pointer to a point of the post-selection.
//!
//! Only the stationary-phase skeleton is built. Paths carry density weights,
//! not Feynman amplitudes.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::qcore::{fmt_num, Component};
use crate::sampling::{normal_quantile, open_unit, rng};
use crate::weakval::{PostSelection, ProjectorWindow, WindowProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub x_start: f64,
    pub t_start: f64,
    pub x_end: f64,
    pub t_end: f64,
    pub momentum: f64,
}

impl PathSegment {
    pub fn new(x_start: f64, t_start: f64, x_end: f64, t_end: f64, mass: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::NonPositiveInterval {
                from: t_start,
                to: t_end,
            });
        }
        Ok(Self {
            x_start,
            t_start,
            x_end,
            t_end,
            momentum: mass * (x_end - x_start) / (t_end - t_start),
        })
    }

    pub fn position(&self, t: f64) -> f64 {
        let s = (t - self.t_start) / (self.t_end - self.t_start);
        self.x_start + s * (self.x_end - self.x_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTrajectory {
    pub leg_in: PathSegment,
    pub leg_out: PathSegment,
    pub weight: f64,
    /// Index of the packet the path starts from.
    pub source: usize,
}

impl WeakTrajectory {
    /// Momentum change at the pointer.
    pub fn kink(&self) -> f64 {
        self.leg_out.momentum - self.leg_in.momentum
    }

    pub fn pointer(&self) -> (f64, f64) {
        (self.leg_in.x_end, self.leg_in.t_end)
    }
}

/// Two straight legs x_i → (w, t_w) → x_f, with the path starting at t = 0.
pub fn build_weak_trajectory(x_i: f64, w: f64, t_w: f64, x_f: f64, t_f: f64, mass: f64) -> Result<WeakTrajectory> {
    if !(t_w > 0.0 && t_w < t_f) {
        return Err(Error::invalid("t_w", format!("need 0 < t_w < t_f = {t_f}, got {t_w}")));
    }
    let leg_in = PathSegment::new(x_i, 0.0, w, t_w, mass)?;
    let leg_out = PathSegment::new(w, t_w, x_f, t_f, mass)?;
    debug_assert!(leg_in.x_end == leg_out.x_start && leg_in.t_end == leg_out.t_start);
    Ok(WeakTrajectory {
        leg_in,
        leg_out,
        weight: 1.0,
        source: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BundleOptions {
    /// Paths sampled per contributing packet.
    pub n_samples: usize,
    pub seed: u64,
    /// Paths with |p| above this on either leg are dropped.
    pub momentum_cutoff: f64,
    /// Gaussian samples are confined to this many standard deviations.
    pub truncation: f64,
    /// A packet contributes when its amplitude at the pointer is at least this
    /// fraction of the largest packet amplitude there.
    pub significance: f64,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            n_samples: 40,
            seed: 0,
            momentum_cutoff: 50.0,
            truncation: 4.0,
            significance: 1e-3,
        }
    }
}

fn truncated_normal(mean: f64, std: f64, trunc: f64, u: f64) -> f64 {
    if std == 0.0 {
        return mean;
    }
    let edge = Normal::new(0.0, 1.0).unwrap().cdf(-trunc);
    normal_quantile(mean, std, edge + u * (1.0 - 2.0 * edge))
}

fn gaussian_density(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

/// Samples classical skeletons through the pointer window.
///
/// Start points come from each contributing packet's initial density, end
/// points from the post-selection's detection density (a delta pins them to
/// x_R) and pointer positions from the window. The weight is the product of
/// the sampled densities times |c_k|².
pub fn path_bundle(
    components: &[Component],
    window: &ProjectorWindow,
    t_w: f64,
    post: &PostSelection,
    opts: &BundleOptions,
) -> Result<Vec<WeakTrajectory>> {
    if opts.n_samples == 0 {
        return Err(Error::invalid("n_samples", "need at least one sample"));
    }
    if components.is_empty() {
        return Err(Error::EmptySupport("no packets".into()));
    }
    window.validate()?;
    let amp: Vec<f64> = components
        .iter()
        .map(|c| (c.weight * c.params.amplitude(window.center, t_w)).norm())
        .collect();
    let top = amp.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::EmptySupport(format!("no packet reaches w = {}", window.center)));
    }
    let (xf_mean, xf_std) = post.detection_density();
    let mut bundle = Vec::new();
    for (k, c) in components.iter().enumerate() {
        if amp[k] < opts.significance * top {
            continue;
        }
        let mut r = rng(opts.seed, k as u64);
        let p = &c.params;
        for _ in 0..opts.n_samples {
            let x_i = truncated_normal(p.x0, p.d, opts.truncation, open_unit(&mut r));
            let (w, w_density) = if window.is_point() {
                (window.center, 1.0)
            } else {
                match window.profile {
                    WindowProfile::TopHat => {
                        let u = open_unit(&mut r);
                        (window.center + (u - 0.5) * window.width, 1.0 / window.width)
                    }
                    WindowProfile::Gaussian => {
                        let w = truncated_normal(window.center, window.width, opts.truncation, open_unit(&mut r));
                        (w, gaussian_density(w, window.center, window.width))
                    }
                }
            };
            let (x_f, f_density) = if xf_std == 0.0 {
                (xf_mean, 1.0)
            } else {
                let x = truncated_normal(xf_mean, xf_std, opts.truncation, open_unit(&mut r));
                (x, gaussian_density(x, xf_mean, xf_std))
            };
            let mut traj = build_weak_trajectory(x_i, w, t_w, x_f, post.t_f, p.m)?;
            traj.weight = c.weight.norm_sqr() * gaussian_density(x_i, p.x0, p.d) * w_density * f_density;
            traj.source = k;
            if traj.leg_in.momentum.abs() <= opts.momentum_cutoff && traj.leg_out.momentum.abs() <= opts.momentum_cutoff {
                bundle.push(traj);
            }
        }
    }
    Ok(bundle)
}

/// Keeps trajectories whose outgoing momentum lies in `p_center ± p_halfwidth`.
pub fn filter_bundle_by_momentum(bundle: &[WeakTrajectory], p_center: f64, p_halfwidth: f64) -> Vec<WeakTrajectory> {
    bundle
        .iter()
        .filter(|t| (t.leg_out.momentum - p_center).abs() <= p_halfwidth)
        .copied()
        .collect()
}

/// Momentum window (centre, half-width) admitted by a post-selection: its
/// mean momentum ± `n_sigma` momentum spreads. `None` when it does not filter.
pub fn matched_momentum_filter(post: &PostSelection, n_sigma: f64) -> Option<(f64, f64)> {
    post.momentum_filter().map(|(p, dp)| (p, n_sigma * dp))
}

/// Writes the bundle as `traj_id,leg,x_start,t_start,x_end,t_end,p,weight`.
pub fn write_bundle_csv<W: Write>(bundle: &[WeakTrajectory], comments: &[String], out: &mut W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "traj_id,leg,x_start,t_start,x_end,t_end,p,weight")?;
    for (id, t) in bundle.iter().enumerate() {
        for (name, leg) in [("in", &t.leg_in), ("out", &t.leg_out)] {
            writeln!(
                out,
                "{id},{name},{},{},{},{},{},{}",
                fmt_num(leg.x_start),
                fmt_num(leg.t_start),
                fmt_num(leg.x_end),
                fmt_num(leg.t_end),
                fmt_num(leg.momentum),
                fmt_num(t.weight)
            )?;
        }
    }
    Ok(())
}
