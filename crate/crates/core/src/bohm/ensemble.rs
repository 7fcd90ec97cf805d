use serde::{Deserialize, Serialize};

use super::{velocity_1d, velocity_2d, BohmTrajectory, IntegratorConfig, TrajectoryPoint};
use crate::bipartite::{BipartiteEvolver, BipartiteState};
use crate::qcore::{FreeState, Grid1D};
use crate::sampling::{rng, TabulatedDistribution};
use crate::{Error, Exec, Result};

/// Time nodes from `t0` to `t1` (either direction): steps of `cfg.dt`, or
/// `cfg.dt_coupled` inside `window`, whose edges are hit exactly.
pub fn step_schedule(t0: f64, t1: f64, window: Option<(f64, f64)>, cfg: &IntegratorConfig) -> Vec<f64> {
    let (a, b) = (t0.min(t1), t0.max(t1));
    let mut cuts = vec![a];
    if let Some((on, off)) = window {
        for c in [on, off] {
            if c > a && c < b {
                cuts.push(c);
            }
        }
    }
    cuts.push(b);
    let mut times = vec![a];
    for seg in cuts.windows(2) {
        let (s, e) = (seg[0], seg[1]);
        if e <= s {
            continue;
        }
        let inside = window.is_some_and(|(on, off)| s >= on && e <= off);
        let h = if inside { cfg.dt_coupled } else { cfg.dt };
        let n = ((e - s) / h - 1e-9).ceil().max(1.0) as usize;
        times.extend((1..=n).map(|k| if k == n { e } else { s + (e - s) * k as f64 / n as f64 }));
    }
    if t1 < t0 {
        times.reverse();
    }
    times
}

struct Walker {
    traj: BohmTrajectory,
    pos: (f64, f64),
    prev: (f64, f64),
    sign: f64,
    steps: usize,
}

impl Walker {
    fn new(x: f64, y: Option<f64>, t: f64) -> Self {
        Self {
            traj: BohmTrajectory {
                samples: vec![TrajectoryPoint { t, x, y }],
                crossed_midpoint: false,
                aborted: false,
                regularized_steps: 0,
            },
            pos: (x, y.unwrap_or(0.0)),
            prev: (0.0, 0.0),
            sign: x.signum(),
            steps: 0,
        }
    }

    fn record(&mut self, t: f64, two_d: bool, every: usize, last: bool) {
        self.steps += 1;
        if self.pos.0.signum() != self.sign && self.pos.0 != 0.0 && self.sign != 0.0 {
            self.traj.crossed_midpoint = true;
        }
        if self.steps.is_multiple_of(every) || last {
            self.traj.samples.push(TrajectoryPoint {
                t,
                x: self.pos.0,
                y: two_d.then_some(self.pos.1),
            });
        }
    }
}

fn rk4_1d<S: FreeState + ?Sized>(state: &S, x: f64, t: f64, h: f64, prev: f64, cfg: &IntegratorConfig) -> (f64, f64, bool) {
    let (k1, r1) = velocity_1d(state, x, t, cfg, prev);
    let (k2, r2) = velocity_1d(state, x + 0.5 * h * k1, t + 0.5 * h, cfg, k1);
    let (k3, r3) = velocity_1d(state, x + 0.5 * h * k2, t + 0.5 * h, cfg, k2);
    let (k4, r4) = velocity_1d(state, x + h * k3, t + h, cfg, k3);
    (x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k4, r1 || r2 || r3 || r4)
}

const MAX_REFINE: u32 = 10;

/// One RK4 step checked against two half steps, halving recursively until
/// they agree to `cfg.local_tolerance`. Returns position, last velocity and
/// the number of regularized sub-steps.
fn refined_step<S: FreeState + ?Sized>(
    state: &S,
    x: f64,
    t: f64,
    h: f64,
    prev: f64,
    cfg: &IntegratorConfig,
    depth: u32,
) -> (f64, f64, usize) {
    let (full, v, reg) = rk4_1d(state, x, t, h, prev, cfg);
    if cfg.local_tolerance == 0.0 || depth == MAX_REFINE {
        return (full, v, usize::from(reg));
    }
    let (xm, vm, ra) = rk4_1d(state, x, t, 0.5 * h, prev, cfg);
    let (xe, ve, rb) = rk4_1d(state, xm, t + 0.5 * h, 0.5 * h, vm, cfg);
    if (xe - full).abs() <= cfg.local_tolerance {
        return (xe, ve, usize::from(ra) + usize::from(rb));
    }
    let (xm, vm, ra) = refined_step(state, x, t, 0.5 * h, prev, cfg, depth + 1);
    let (xe, ve, rb) = refined_step(state, xm, t + 0.5 * h, 0.5 * h, vm, cfg, depth + 1);
    (xe, ve, ra + rb)
}

/// RK4 integration of one trajectory of a free state from (x0, t0) to
/// `t_end` (which may lie before t0). Leaving `bounds` stops it with a flag.
pub fn integrate_trajectory<S: FreeState + ?Sized>(
    state: &S,
    x0: f64,
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    bounds: Option<(f64, f64)>,
) -> Result<BohmTrajectory> {
    cfg.validate()?;
    let times = step_schedule(t0, t_end, None, cfg);
    let mut w = Walker::new(x0, None, t0);
    w.prev.0 = velocity_1d(state, x0, t0, cfg, 0.0).0;
    for (n, pair) in times.windows(2).enumerate() {
        let (t, h) = (pair[0], pair[1] - pair[0]);
        let (x, v, reg) = refined_step(state, w.pos.0, t, h, w.prev.0, cfg, 0);
        w.traj.regularized_steps += reg;
        w.pos.0 = x;
        w.prev.0 = v;
        let out = bounds.is_some_and(|(lo, hi)| w.pos.0 < lo || w.pos.0 > hi);
        w.record(pair[1], false, cfg.record_every, out || n + 2 == times.len());
        if out {
            w.traj.aborted = true;
            break;
        }
    }
    Ok(w.traj)
}

/// Integrates every start in `starts` from t = 0 to `t_end`.
pub fn trajectory_ensemble<S: FreeState + ?Sized>(
    state: &S,
    starts: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
    bounds: Option<(f64, f64)>,
    exec: Exec,
) -> Result<Vec<BohmTrajectory>> {
    if starts.is_empty() {
        return Err(Error::invalid("n", "need at least one trajectory"));
    }
    exec.map(starts, |&x| integrate_trajectory(state, x, 0.0, t_end, cfg, bounds))
        .into_iter()
        .collect()
}

/// `n` starts drawn from |ψ(x, 0)|² tabulated on `grid`.
pub fn sample_starts<S: FreeState + ?Sized>(state: &S, grid: &Grid1D, n: usize, seed: u64) -> Result<Vec<f64>> {
    let density: Vec<f64> = grid.points().map(|x| state.amplitude(x, 0.0).norm_sqr()).collect();
    let dist = TabulatedDistribution::new(grid, &density)?;
    let mut r = rng(seed, 0);
    Ok((0..n).map(|_| dist.sample(&mut r)).collect())
}

/// `per_center` starts spaced by `spacing` and centred on each of `centers`.
pub fn fixed_offset_starts(centers: &[f64], per_center: usize, spacing: f64) -> Vec<f64> {
    let mid = (per_center as f64 - 1.0) / 2.0;
    centers
        .iter()
        .flat_map(|&c| (0..per_center).map(move |k| c + (k as f64 - mid) * spacing))
        .collect()
}

/// Integrates trajectories of the coupled state in lockstep with its
/// evolution: each RK4 step uses the state at t, t + h/2 and t + h.
/// Returns the trajectories and the state at `t_end`.
pub fn trajectory_ensemble_2d(
    evolver: &BipartiteEvolver,
    initial: &BipartiteState,
    starts: &[(f64, f64)],
    t_end: f64,
    system_mass: f64,
    cfg: &IntegratorConfig,
    exec: Exec,
) -> Result<(Vec<BohmTrajectory>, BipartiteState)> {
    cfg.validate()?;
    if starts.is_empty() {
        return Err(Error::invalid("n", "need at least one trajectory"));
    }
    let masses = (system_mass, evolver.pointer().mass);
    let basis = evolver.basis();
    let (xlo, xhi) = (basis.x.min() + cfg.wall_margin, basis.x.max() - cfg.wall_margin);
    let (ylo, yhi) = (basis.y.min() + cfg.wall_margin, basis.y.max() - cfg.wall_margin);
    let cw = evolver.pointer().coupling;
    let times = step_schedule(initial.t, t_end, Some((cw.t_on, cw.t_off)), cfg);
    if t_end < initial.t {
        return Err(Error::NonPositiveInterval {
            from: initial.t,
            to: t_end,
        });
    }
    let mut walkers: Vec<Walker> = starts
        .iter()
        .map(|&(x, y)| {
            let mut w = Walker::new(x, Some(y), initial.t);
            w.prev = velocity_2d(initial, x, y, masses, cfg, (0.0, 0.0)).0;
            w
        })
        .collect();
    let mut now = initial.clone();
    for (n, pair) in times.windows(2).enumerate() {
        let (t, h) = (pair[0], pair[1] - pair[0]);
        let mid = evolver.evolve(&now, t + 0.5 * h)?;
        let next = evolver.evolve(&mid, pair[1])?;
        let last = n + 2 == times.len();
        exec.for_each_mut(&mut walkers, |w| {
            if w.traj.aborted {
                return;
            }
            let (x, y) = w.pos;
            let (k1, r1) = velocity_2d(&now, x, y, masses, cfg, w.prev);
            let (k2, r2) = velocity_2d(&mid, x + 0.5 * h * k1.0, y + 0.5 * h * k1.1, masses, cfg, k1);
            let (k3, r3) = velocity_2d(&mid, x + 0.5 * h * k2.0, y + 0.5 * h * k2.1, masses, cfg, k2);
            let (k4, r4) = velocity_2d(&next, x + h * k3.0, y + h * k3.1, masses, cfg, k3);
            w.traj.regularized_steps += usize::from(r1 || r2 || r3 || r4);
            w.pos = (
                x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            );
            w.prev = k4;
            let out = w.pos.0 < xlo || w.pos.0 > xhi || w.pos.1 < ylo || w.pos.1 > yhi;
            w.record(pair[1], true, cfg.record_every, last || out);
            w.traj.aborted = out;
        });
        now = next;
    }
    Ok((walkers.into_iter().map(|w| w.traj).collect(), now))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub crossings: usize,
    pub aborted: usize,
    pub regularized_steps: usize,
    /// Trajectories ending at x > 0.
    pub reached_right: usize,
    /// Kolmogorov–Smirnov distance of the end positions from the reference
    /// distribution, when one was supplied.
    pub ks: Option<f64>,
}

impl EnsembleSummary {
    pub fn new(trajs: &[BohmTrajectory]) -> Self {
        Self {
            n: trajs.len(),
            crossings: trajs.iter().filter(|t| t.crossed_midpoint).count(),
            aborted: trajs.iter().filter(|t| t.aborted).count(),
            regularized_steps: trajs.iter().map(|t| t.regularized_steps).sum(),
            reached_right: trajs.iter().filter(|t| t.end().x > 0.0).count(),
            ks: None,
        }
    }

    pub fn with_ks<F: Fn(f64) -> f64>(mut self, trajs: &[BohmTrajectory], cdf: F) -> Self {
        let ends: Vec<f64> = trajs.iter().map(|t| t.end().x).collect();
        self.ks = Some(crate::sampling::ks_distance(&ends, cdf));
        self
    }
}

/// Whether trajectories sorted by start position stay sorted at every
/// common sample (they must share sample times).
pub fn ordering_preserved(trajs: &[BohmTrajectory]) -> bool {
    let mut idx: Vec<usize> = (0..trajs.len()).collect();
    idx.sort_by(|&a, &b| trajs[a].start().x.total_cmp(&trajs[b].start().x));
    let len = trajs.iter().map(|t| t.samples.len()).min().unwrap_or(0);
    (0..len).all(|k| idx.windows(2).all(|p| trajs[p[0]].samples[k].x <= trajs[p[1]].samples[k].x))
}
