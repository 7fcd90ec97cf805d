use super::*;
use crate::bipartite::{project_initial, BipartiteEvolver, BoxBasis, EvolveOptions, PointerConfig, SineAxis};
use crate::qcore::{FreeState, GaussianParams, Grid1D, Superposition};
use crate::sampling::TabulatedDistribution;
use crate::weakval::{CouplingWindow, ProjectorWindow};
use crate::Exec;

fn two_slit() -> Superposition {
    Superposition::two_slit(10.0, 2.0, 1.0, 1.0).unwrap()
}

#[test]
fn centre_start_follows_the_classical_line() {
    let p = GaussianParams::new(-10.0, 2.0, 1.0, 1.0).unwrap();
    let t = integrate_trajectory(&p, -10.0, 0.0, 10.0, &IntegratorConfig::default(), None).unwrap();
    for s in &t.samples {
        assert!((s.x - (-10.0 + 2.0 * s.t)).abs() < 1e-6);
    }
    assert!((t.end().t - 10.0).abs() < 1e-12);
    assert!(t.crossed_midpoint);
}

#[test]
fn free_trajectories_do_not_cross() {
    let s = two_slit();
    let starts = fixed_offset_starts(&[-10.0, 10.0], 11, 0.25);
    assert_eq!(starts.len(), 22);
    let trajs = trajectory_ensemble(&s, &starts, 10.0, &IntegratorConfig::default(), None, Exec::default()).unwrap();
    let summary = EnsembleSummary::new(&trajs);
    assert_eq!(summary.crossings, 0);
    assert_eq!(summary.reached_right, 11);
    // the antisymmetric state has a permanent node at the midpoint
    for t in &trajs[11..] {
        assert!(t.samples.iter().all(|p| p.x > 0.0));
    }
    assert!(ordering_preserved(&trajs));
}

#[test]
fn integration_is_reversible() {
    let s = two_slit();
    let cfg = IntegratorConfig::default();
    for x0 in [-10.5, 9.25, 11.0] {
        let fwd = integrate_trajectory(&s, x0, 0.0, 10.0, &cfg, None).unwrap();
        let back = integrate_trajectory(&s, fwd.end().x, 10.0, 0.0, &cfg, None).unwrap();
        assert!((back.end().x - x0).abs() < 1e-4, "{x0}: {}", back.end().x);
        assert!((back.x_at(5.0) - fwd.x_at(5.0)).abs() < 1e-4);
    }
}

#[test]
fn halving_the_step_converges() {
    let s = two_slit();
    let coarse = IntegratorConfig::default();
    let fine = IntegratorConfig {
        dt: coarse.dt / 2.0,
        ..coarse
    };
    for x0 in [-11.0, -10.0, 9.5, 10.75] {
        let a = integrate_trajectory(&s, x0, 0.0, 10.0, &coarse, None).unwrap().end().x;
        let b = integrate_trajectory(&s, x0, 0.0, 10.0, &fine, None).unwrap().end().x;
        assert!((a - b).abs() < 1e-5, "{x0}: {a} vs {b}");
    }
}

#[test]
fn ensemble_reproduces_the_density() {
    let s = two_slit();
    let grid = Grid1D::new(-30.0, 30.0, 6001).unwrap();
    let starts = sample_starts(&s, &grid, 400, 7).unwrap();
    let trajs = trajectory_ensemble(&s, &starts, 10.0, &IntegratorConfig::default(), None, Exec::default()).unwrap();
    let final_grid = Grid1D::new(-45.0, 45.0, 9001).unwrap();
    let dens: Vec<f64> = final_grid.points().map(|x| s.amplitude(x, 10.0).norm_sqr()).collect();
    let dist = TabulatedDistribution::new(&final_grid, &dens).unwrap();
    let summary = EnsembleSummary::new(&trajs).with_ks(&trajs, |x| dist.cdf(x));
    assert!(summary.ks.unwrap() < 0.1, "{:?}", summary.ks);
    assert!(ordering_preserved(&trajs));
}

#[test]
fn bounds_stop_trajectories() {
    let p = GaussianParams::new(0.0, 2.0, 1.0, 1.0).unwrap();
    let t = integrate_trajectory(&p, 0.0, 0.0, 10.0, &IntegratorConfig::default(), Some((-5.0, 5.0))).unwrap();
    assert!(t.aborted);
    assert!(t.end().x > 5.0 && t.end().t < 2.6);
}

#[test]
fn schedule_hits_window_edges() {
    let cfg = IntegratorConfig::default();
    let ts = step_schedule(0.0, 1.0, Some((0.3, 0.5)), &cfg);
    assert_eq!(ts.first(), Some(&0.0));
    assert_eq!(ts.last(), Some(&1.0));
    assert!(ts.contains(&0.3) && ts.contains(&0.5));
    assert_eq!(ts.len(), 1 + 30 + 200 + 50);
    let back = step_schedule(1.0, 0.0, None, &cfg);
    assert_eq!(back.first(), Some(&1.0));
    assert!(back.windows(2).all(|w| w[1] < w[0]));
}

fn small_setup(g: f64) -> (BipartiteEvolver, crate::bipartite::BipartiteState, PointerConfig) {
    let basis = BoxBasis::new(SineAxis::new(-40.0, 40.0, 512).unwrap(), SineAxis::new(-20.0, 10.0, 64).unwrap()).unwrap();
    let ptr = PointerConfig {
        mass: 10.0,
        y_init: -5.0,
        sigma_y: 2.0,
        coupling: CouplingWindow::from_integrated(g, 2.5, 0.4),
        window: ProjectorWindow::gaussian(-5.0, 0.5),
    };
    let s0 = project_initial(&two_slit(), &ptr, &basis).unwrap();
    (BipartiteEvolver::new(basis, 1.0, ptr, EvolveOptions::default()).unwrap(), s0, ptr)
}

#[test]
fn product_state_velocities_factorize() {
    let (ev, s0, ptr) = small_setup(0.0);
    let cfg = IntegratorConfig::default();
    let s = ev.evolve(&s0, 3.0).unwrap();
    let packet = ptr.initial_packet();
    for (x, y) in [(-4.0, -5.0), (3.0, -6.5), (-1.0, -2.0)] {
        let ((vx, vy), _) = velocity_2d(&s, x, y, (1.0, 10.0), &cfg, (0.0, 0.0));
        let (vx1, _) = velocity_1d(&two_slit(), x, 3.0, &cfg, 0.0);
        let (vy1, _) = velocity_1d(&packet, y, 3.0, &cfg, 0.0);
        assert!((vx - vx1).abs() < 1e-6, "{vx} vs {vx1}");
        assert!((vy - vy1).abs() < 1e-6, "{vy} vs {vy1}");
    }
    let ((_, vy), _) = velocity_2d(&s0, -10.0, -5.0, (1.0, 10.0), &cfg, (0.0, 0.0));
    assert!(vy.abs() < 1e-9);
    // no probability current through the walls
    for (x, y) in [(-40.0, -5.0), (40.0, -3.0), (-10.0, -20.0), (-10.0, 10.0)] {
        let (psi, dx, dy) = s.amplitude_with_gradient(x, y);
        assert!((psi.conj() * dx).im.abs() < 1e-20 && (psi.conj() * dy).im.abs() < 1e-20);
    }
}

#[test]
fn uncoupled_lockstep_matches_one_dimensional_flow() {
    let (ev, s0, _) = small_setup(0.0);
    let cfg = IntegratorConfig {
        dt_coupled: 1e-2,
        // the lockstep integrator takes fixed steps; compare like with like
        local_tolerance: 0.0,
        ..IntegratorConfig::default()
    };
    let starts = [(-10.5, -5.0), (9.75, -4.0)];
    let (trajs, end) = trajectory_ensemble_2d(&ev, &s0, &starts, 10.0, 1.0, &cfg, Exec::default()).unwrap();
    assert!((end.t - 10.0).abs() < 1e-12);
    for ((x0, _), t2) in starts.iter().zip(&trajs) {
        let t1 = integrate_trajectory(&two_slit(), *x0, 0.0, 10.0, &cfg, None).unwrap();
        assert!((t1.end().x - t2.end().x).abs() < 1e-6, "{} vs {}", t1.end().x, t2.end().x);
        assert!(t2.end().y.is_some());
    }
}

#[test]
fn csv_and_summary_layout() {
    let p = GaussianParams::new(-1.0, 2.0, 1.0, 1.0).unwrap();
    let cfg = IntegratorConfig {
        dt: 0.5,
        ..IntegratorConfig::default()
    };
    let t = integrate_trajectory(&p, -1.0, 0.0, 1.0, &cfg, None).unwrap();
    let mut out = Vec::new();
    write_trajectory_csv(std::slice::from_ref(&t), &[], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "traj_id,t,x,crossed");
    assert_eq!(lines[1], "0,0,-1e0,0");
    assert!(lines[3].starts_with("0,1e0,") && lines[3].ends_with(",1"));
    let mut json = Vec::new();
    write_summary_json(&EnsembleSummary::new(&[t]), &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["crossings"], 1);
}
