//! The pipelines behind each scenario kind.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::Write as _;

use num_complex::Complex64;

use super::config::{Expectation, Preparation, ScenarioConfig};
use super::manifest::{Artifacts, CheckOutcome, Relation};
use crate::bipartite::{
    conditional_pointer_state, project_initial, write_marginal_csv, write_wps1, BipartiteEvolver, EvolveOptions,
};
use crate::bohm::{
    fixed_offset_starts, integrate_trajectory, ordering_preserved, sample_starts, trajectory_ensemble,
    trajectory_ensemble_2d, write_summary_json, write_trajectory_csv, EnsembleSummary,
};
use crate::paths::{filter_bundle_by_momentum, matched_momentum_filter, path_bundle, write_bundle_csv, BundleOptions};
use crate::qcore::{free_propagator, FreeState, Grid1D, Superposition};
use crate::sampling::TabulatedDistribution;
use crate::weakval::{
    scan_integral, weak_value_scan_with, weak_value_time_averaged, write_scan_csv, PostSelection,
    PostSelectionKind, WeakValueEngine, WeakValueResult, WeakValueType,
};
use crate::{Error, Exec, Result};

/// What a pipeline hands back besides its files.
#[derive(Default)]
pub(super) struct Outcome {
    pub checks: Vec<CheckOutcome>,
    pub results: BTreeMap<String, f64>,
}

impl Outcome {
    fn check(&mut self, c: CheckOutcome) {
        self.checks.push(c);
    }

    fn result(&mut self, key: &str, v: f64) {
        self.results.insert(key.to_string(), v);
    }

    fn weak_value(&mut self, prefix: &str, a: Complex64) {
        self.result(&format!("{prefix}re"), a.re);
        self.result(&format!("{prefix}im"), a.im);
    }
}

pub(super) struct Ctx<'a> {
    pub cfg: &'a ScenarioConfig,
    pub name: &'a str,
    pub exec: Exec,
}

impl Ctx<'_> {
    fn comments(&self) -> Vec<String> {
        let p = &self.cfg.physics;
        vec![
            format!("scenario={} seed={}", self.name, self.cfg.seed),
            format!(
                "x0={} p0={} d={} m={} t_f={} x_r={} g={}",
                p.x0, p.p0, p.d, p.m, p.t_f, p.x_r, p.g
            ),
            format!("pointer w={} t_w={}", self.cfg.pointer_position(), self.cfg.coupling_time()),
        ]
    }

    fn system(&self) -> Result<Superposition> {
        let p = &self.cfg.physics;
        match self.cfg.study.preparation {
            Preparation::TwoPacket => Superposition::two_slit(p.x0, p.p0, p.d, p.m),
            Preparation::LeftPacket => Superposition::single(self.cfg.left_packet()?),
        }
    }

    fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            exec: self.exec,
            ..self.cfg.numerics.evolve.clone()
        }
    }

    fn bundle_options(&self) -> BundleOptions {
        BundleOptions {
            seed: self.cfg.seed,
            ..self.cfg.numerics.bundle.clone()
        }
    }

    fn scan_grid(&self) -> Vec<f64> {
        let s = &self.cfg.numerics.scan;
        let h = (s.w_max - s.w_min) / (s.n - 1) as f64;
        (0..s.n).map(|i| s.w_min + h * i as f64).collect()
    }

    /// Point-projector scan at the coupling time, written to `file`; checks
    /// that the weak values integrate to one.
    fn scan<S: FreeState + ?Sized>(
        &self,
        state: &S,
        post: &PostSelection,
        file: &str,
        art: &mut Artifacts,
        out: &mut Outcome,
    ) -> Result<()> {
        let n = &self.cfg.numerics;
        let points = weak_value_scan_with(
            state,
            post,
            self.cfg.coupling_time(),
            n.scan.width,
            &self.scan_grid(),
            &n.weak,
            self.exec,
        )?;
        let comments = self.comments();
        art.emit(file, |w| write_scan_csv(&points, self.cfg.physics.g, &comments, w))?;
        if n.scan.width == 0.0 {
            let total = scan_integral(&points)?;
            let stem = file.trim_end_matches(".csv");
            out.check(CheckOutcome::new(
                &format!("{stem}_completeness"),
                (total - 1.0).norm(),
                Relation::Lt,
                1e-6,
            ));
        }
        Ok(())
    }
}

/// K(x_R, t_f; w, t_w) ψ_k(w, t_w) / ψ_j(x_R, t_f) with bare packets.
fn propagator_form(sys: &Superposition, post: &PostSelection, k: usize, j: usize, w: f64, t_w: f64) -> Result<Option<Complex64>> {
    let PostSelectionKind::PositionDelta { x_r } = post.kind else {
        return Ok(None);
    };
    let c = sys.components();
    let kern = free_propagator(x_r, post.t_f, w, t_w, post.mass)?;
    Ok(Some(kern * c[k].params.amplitude(w, t_w) / c[j].params.amplitude(x_r, post.t_f)))
}

fn significant(r: &WeakValueResult, frac: f64) -> BTreeSet<usize> {
    let total: f64 = r.component_numerators.iter().map(|n| n.norm()).sum();
    (0..r.component_numerators.len())
        .filter(|&k| r.component_numerators[k].norm() >= frac * total)
        .collect()
}

fn type_code(t: WeakValueType) -> f64 {
    match t {
        WeakValueType::Type1 => 1.0,
        WeakValueType::Type2 => 2.0,
        WeakValueType::Type3 => 3.0,
        WeakValueType::SinglePacket => 0.0,
    }
}

/// Self post-selected single packet: the weak value is the density.
pub(super) fn single(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let sys = ctx.system()?;
    let post = ctx.cfg.post_selection()?;
    ctx.scan(&sys, &post, "scan.csv", art, &mut out)?;
    let packet = ctx.cfg.left_packet()?;
    let t_w = ctx.cfg.coupling_time();
    let engine = WeakValueEngine::new(&sys, &post, &ctx.cfg.numerics.weak)?;
    let grid = ctx.scan_grid();
    let peak = grid.iter().map(|&w| packet.amplitude(w, t_w).norm_sqr()).fold(0.0, f64::max);
    let mut worst = 0.0_f64;
    for &w in &grid {
        let rho = packet.amplitude(w, t_w).norm_sqr();
        if rho < 1e-6 * peak {
            continue;
        }
        let a = engine.point(w, t_w)?.value;
        worst = worst.max((a - rho).norm() / rho);
    }
    out.check(CheckOutcome::new("weak_value_equals_density", worst, Relation::Lt, 1e-6));
    let at = engine.point(ctx.cfg.pointer_position(), t_w)?;
    out.weak_value("weak_value_", at.value);
    Ok(out)
}

/// Weak value at one pointer of the two-packet state, its scan and the
/// weak-trajectory bundle through it.
pub(super) fn weak_pointer(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let sys = ctx.system()?;
    let post = ctx.cfg.post_selection()?;
    ctx.scan(&sys, &post, "scan.csv", art, &mut out)?;
    let (w, t_w) = (ctx.cfg.pointer_position(), ctx.cfg.coupling_time());
    let opts = &ctx.cfg.numerics.weak;
    let r = WeakValueEngine::new(&sys, &post, opts)?.point(w, t_w)?;
    out.weak_value("weak_value_", r.value);
    out.result("weak_value_type", type_code(r.wv_type));
    out.result("shift_prediction", ctx.cfg.physics.g * r.value.re);
    if let Some(expected) = ctx.cfg.study.expected_type {
        out.check(CheckOutcome::flag(&format!("classified_{}", expected.label()), r.wv_type == expected));
    }
    let sources = significant(&r, opts.significance);
    if matches!(r.wv_type, WeakValueType::Type1 | WeakValueType::Type2) && sources.len() == 1 {
        let k = *sources.iter().next().unwrap();
        if let Some(oracle) = propagator_form(&sys, &post, k, r.post_selected, w, t_w)? {
            let resolved = r.packet_resolved(k, r.post_selected);
            out.weak_value("packet_resolved_", resolved);
            out.check(CheckOutcome::new(
                "propagator_form",
                (resolved - oracle).norm() / oracle.norm(),
                Relation::Lt,
                1e-8,
            ));
        }
    }
    let bundle = path_bundle(sys.components(), &ctx.cfg.pointer(ctx.cfg.physics.g).window, t_w, &post, &ctx.bundle_options())?;
    let comments = ctx.comments();
    art.emit("bundle.csv", |wr| write_bundle_csv(&bundle, &comments, wr))?;
    let drawn: BTreeSet<usize> = bundle.iter().map(|t| t.source).collect();
    out.result("bundle_size", bundle.len() as f64);
    out.check(CheckOutcome::new("bundle_size", bundle.len() as f64, Relation::Ge, 1.0));
    out.check(CheckOutcome::flag("bundle_sources_match_weak_value", drawn == sources));
    Ok(out)
}

/// Type-2 weak value and bundle with and without a momentum-filtering
/// post-selection.
pub(super) fn momentum_filter(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let sys = ctx.system()?;
    let p = &ctx.cfg.physics;
    let filtered = ctx.cfg.post_selection()?;
    let Some((p_sel, dp)) = filtered.momentum_filter() else {
        return Err(Error::Config("this scenario needs a gaussian_filter post-selection".into()));
    };
    let delta = PostSelection::position_delta(p.x_r, p.t_f, p.m)?;
    ctx.scan(&sys, &delta, "scan_delta.csv", art, &mut out)?;
    ctx.scan(&sys, &filtered, "scan_filter.csv", art, &mut out)?;
    let (w, t_w) = (ctx.cfg.pointer_position(), ctx.cfg.coupling_time());
    let opts = &ctx.cfg.numerics.weak;
    let a_delta = WeakValueEngine::new(&sys, &delta, opts)?.point(w, t_w)?;
    let a_filter = WeakValueEngine::new(&sys, &filtered, opts)?.point(w, t_w)?;
    out.weak_value("weak_value_delta_", a_delta.value);
    out.weak_value("weak_value_filter_", a_filter.value);
    let classical = p.m * (p.x_r - w) / (p.t_f - t_w);
    out.result("classical_momentum", classical);
    out.check(CheckOutcome::new("filter_excludes_classical_momentum", (classical - p_sel).abs() / dp, Relation::Ge, 5.0));
    out.check(CheckOutcome::new(
        "suppression_ratio",
        a_filter.value.norm() / a_delta.value.norm(),
        Relation::Lt,
        1e-2,
    ));
    let window = ctx.cfg.pointer(p.g).window;
    let bundle = path_bundle(sys.components(), &window, t_w, &delta, &ctx.bundle_options())?;
    let (centre, half) = matched_momentum_filter(&filtered, ctx.cfg.study.filter_sigmas).expect("filter post-selection");
    let kept = filter_bundle_by_momentum(&bundle, centre, half);
    let comments = ctx.comments();
    art.emit("bundle.csv", |wr| write_bundle_csv(&bundle, &comments, wr))?;
    let mut fc = comments.clone();
    fc.push(format!("momentum filter {centre} +- {half}"));
    art.emit("bundle_filtered.csv", |wr| write_bundle_csv(&kept, &fc, wr))?;
    out.check(CheckOutcome::new("bundle_size", bundle.len() as f64, Relation::Ge, 1.0));
    out.check(CheckOutcome::new("filtered_bundle_size", kept.len() as f64, Relation::Eq, 0.0));
    Ok(out)
}

/// Pointer shifts of full system–pointer simulations against the weak value.
pub(super) fn shift_scaling(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let sys = ctx.system()?;
    let post = cfg.post_selection()?;
    let basis = cfg.basis()?;
    let b = &cfg.numerics.basis;
    let y_grid = Grid1D::new(basis.y.min(), basis.y.max(), b.sample_points)?;
    let unit = cfg.pointer(1.0);
    let a = weak_value_time_averaged(&sys, &post, &unit.window, &unit.coupling, &cfg.numerics.weak)?.value;
    out.weak_value("weak_value_", a);
    let mut gs = vec![0.0];
    gs.extend(&cfg.study.g_values);
    let means: Vec<Result<f64>> = ctx.exec.map(&gs, |&g| {
        let pointer = cfg.pointer(g);
        let s0 = project_initial(&sys, &pointer, &basis)?;
        // the outer map is already parallel
        let opts = EvolveOptions {
            exec: Exec::Sequential,
            ..ctx.evolve_options()
        };
        let s = BipartiteEvolver::new(basis, p.m, pointer, opts)?.evolve(&s0, p.t_f)?;
        Ok(conditional_pointer_state(&s, &post, &y_grid, cfg.numerics.weak.eps_den)?.mean_position())
    });
    let means = means.into_iter().collect::<Result<Vec<_>>>()?;
    let drift = p.t_f / (p.sigma_y * p.sigma_y * p.pointer_mass);
    let mut rows = Vec::new();
    for (g, m) in gs.iter().zip(&means).skip(1) {
        let shift = m - means[0];
        let first = g * a.re;
        let residual = shift - first;
        rows.push((*g, shift, first, residual, residual.abs() / first.abs(), g * (a.re + a.im * drift)));
    }
    let comments = ctx.comments();
    art.emit("gscale.csv", |w| {
        for c in &comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "g,shift,g_re_a,residual,rel_error,prediction_full")?;
        for r in &rows {
            writeln!(w, "{},{:e},{:e},{:e},{:e},{:e}", r.0, r.1, r.2, r.3, r.4, r.5)?;
        }
        Ok(())
    })?;
    // least-squares slope of log|residual| against log g
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0.ln(), r.3.abs().ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    out.result("residual_slope", slope);
    out.check(CheckOutcome::new("residual_slope", slope, Relation::Ge, 1.8));
    let at = rows
        .iter()
        .find(|r| (r.0 - cfg.study.g_check).abs() <= 1e-12 * cfg.study.g_check)
        .ok_or_else(|| Error::invalid("study.g_check", "must be one of study.g_values"))?;
    out.result("relative_error_at_check", at.4);
    out.check(CheckOutcome::new("relative_error_at_check", at.4, Relation::Lt, 0.1));
    Ok(out)
}

/// Bohmian trajectories in the coupled system–pointer configuration space.
pub(super) fn bohm_coupled(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let sys = ctx.system()?;
    let pointer = cfg.pointer(p.g);
    let basis = cfg.basis()?;
    let s0 = project_initial(&sys, &pointer, &basis)?;
    let ev = BipartiteEvolver::new(basis, p.m, pointer, ctx.evolve_options())?;
    let xs = fixed_offset_starts(&[-p.x0, p.x0], cfg.study.starts_per_packet, cfg.study.start_spacing);
    let y0 = pointer.y_init + cfg.study.y_start_offset;
    let starts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, y0)).collect();
    let integ = &cfg.numerics.integrator;
    let (trajs, end) = trajectory_ensemble_2d(&ev, &s0, &starts, p.t_f, p.m, integ, ctx.exec)?;
    let summary = EnsembleSummary::new(&trajs);
    let comments = ctx.comments();
    art.emit("trajectories.csv", |w| write_trajectory_csv(&trajs, &comments, w))?;
    art.emit("summary.json", |w| write_summary_json(&summary, w))?;
    let b = &cfg.numerics.basis;
    let xg = Grid1D::new(basis.x.min(), basis.x.max(), b.sample_points)?;
    let yg = Grid1D::new(basis.y.min(), basis.y.max(), b.sample_points)?;
    art.emit("marginal_x.csv", |w| write_marginal_csv("x", &xg, &end.system_marginal(&xg), &comments, w))?;
    art.emit("marginal_y.csv", |w| write_marginal_csv("y", &yg, &end.pointer_marginal(&yg), &comments, w))?;
    if cfg.study.dump_state {
        art.emit("state.wps1", |w| write_wps1(&end, w))?;
    }
    let free = trajectory_ensemble(&sys, &xs, p.t_f, integ, None, ctx.exec)?;
    let deviation = trajs
        .iter()
        .zip(&free)
        .flat_map(|(a, f)| a.samples.iter().map(move |s| (s.x - f.x_at(s.t)).abs()))
        .fold(0.0, f64::max);
    let right = cfg.study.starts_per_packet;
    let right_reached = trajs[right..].iter().filter(|t| t.end().x > 0.0).count();
    out.result("crossings", summary.crossings as f64);
    out.result("max_deviation_from_uncoupled", deviation);
    out.result("right_starts_reaching_right", right_reached as f64);
    out.check(CheckOutcome::new("norm_drift", (end.norm_sqr() - s0.norm_sqr()).abs(), Relation::Lt, 1e-8));
    out.check(CheckOutcome::new("aborted", summary.aborted as f64, Relation::Eq, 0.0));
    match cfg.study.crossings {
        Expectation::None => {
            out.check(CheckOutcome::new("crossings", summary.crossings as f64, Relation::Eq, 0.0));
            out.check(CheckOutcome::new("right_starts_reaching_right", right_reached as f64, Relation::Eq, right as f64));
            out.check(CheckOutcome::new(
                "max_deviation_from_uncoupled",
                deviation,
                Relation::Lt,
                cfg.study.similarity_limit,
            ));
        }
        Expectation::Some => {
            out.check(CheckOutcome::new("crossings", summary.crossings as f64, Relation::Ge, 1.0));
        }
    }
    Ok(out)
}

/// Free one-dimensional ensemble sampled from the initial density.
pub(super) fn bohm_free(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome> {
    let mut out = Outcome::default();
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let sys = ctx.system()?;
    let grid = &cfg.numerics.weak.grid;
    let starts = sample_starts(&sys, grid, cfg.study.n_trajectories, cfg.seed)?;
    let trajs = trajectory_ensemble(&sys, &starts, p.t_f, &cfg.numerics.integrator, None, ctx.exec)?;
    let density: Vec<f64> = grid.points().map(|x| sys.amplitude(x, p.t_f).norm_sqr()).collect();
    let dist = TabulatedDistribution::new(grid, &density)?;
    let summary = EnsembleSummary::new(&trajs).with_ks(&trajs, |x| dist.cdf(x));
    let comments = ctx.comments();
    art.emit("trajectories.csv", |w| write_trajectory_csv(&trajs, &comments, w))?;
    art.emit("summary.json", |w| write_summary_json(&summary, w))?;
    let ks = summary.ks.unwrap_or(f64::NAN);
    out.result("ks_distance", ks);
    out.check(CheckOutcome::new("ks_distance", ks, Relation::Lt, 0.05));
    out.check(CheckOutcome::new("crossings", summary.crossings as f64, Relation::Eq, 0.0));
    out.check(CheckOutcome::flag("ordering_preserved", ordering_preserved(&trajs)));
    let centre = integrate_trajectory(&sys, p.x0, 0.0, p.t_f, &cfg.numerics.integrator, None)?;
    out.result("right_centre_final_x", centre.end().x);
    Ok(out)
}
