use num_complex::Complex64;

use super::IntegratorConfig;
use crate::bipartite::BipartiteState;
use crate::qcore::{FreeState, WaveState, HBAR};

fn clamp(v: f64, cap: f64) -> f64 {
    v.clamp(-cap, cap)
}

/// (ħ/m) Im(ψ*∂ψ)/|ψ|², or `None` below the density floor.
fn guidance(psi: Complex64, dpsi: Complex64, mass: f64, eps: f64) -> Option<f64> {
    let rho = psi.norm_sqr();
    (rho >= eps).then(|| HBAR / mass * (psi.conj() * dpsi).im / rho)
}

/// Guidance velocity of a free state; near nodes the previous velocity `prev`
/// is held. Returns the velocity and whether it was regularized.
pub fn velocity_1d<S: FreeState + ?Sized>(state: &S, x: f64, t: f64, cfg: &IntegratorConfig, prev: f64) -> (f64, bool) {
    match guidance(state.amplitude(x, t), state.derivative(x, t), state.mass(), cfg.eps_density) {
        Some(v) => (clamp(v, cfg.v_max), false),
        None => (clamp(prev, cfg.v_max), true),
    }
}

/// Velocities (v_x, v_y) of the coupled state from mode-exact derivatives.
pub fn velocity_2d(
    state: &BipartiteState,
    x: f64,
    y: f64,
    masses: (f64, f64),
    cfg: &IntegratorConfig,
    prev: (f64, f64),
) -> ((f64, f64), bool) {
    let (psi, psi_x, psi_y) = state.amplitude_with_gradient(x, y);
    match (
        guidance(psi, psi_x, masses.0, cfg.eps_density),
        guidance(psi, psi_y, masses.1, cfg.eps_density),
    ) {
        (Some(vx), Some(vy)) => ((clamp(vx, cfg.v_max), clamp(vy, cfg.v_max)), false),
        _ => ((clamp(prev.0, cfg.v_max), clamp(prev.1, cfg.v_max)), true),
    }
}

/// Velocities at the grid nodes of a sampled state from fourth-order central
/// differences (second order next to the ends). Nodes below the density floor
/// get zero.
pub fn grid_velocities(state: &WaveState, mass: f64, eps: f64) -> Vec<f64> {
    let a = &state.amplitudes;
    let n = a.len();
    let h = state.grid.dx();
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                (a[i - 2] - a[i - 1] * 8.0 + a[i + 1] * 8.0 - a[i + 2]) / (12.0 * h)
            } else if i >= 1 && i + 1 < n {
                (a[i + 1] - a[i - 1]) / (2.0 * h)
            } else {
                return 0.0;
            };
            guidance(a[i], d, mass, eps).unwrap_or(0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{GaussianParams, Grid1D, Superposition};

    #[test]
    fn packet_centre_moves_classically() {
        let cfg = IntegratorConfig::default();
        let p = GaussianParams::new(-10.0, 2.0, 1.0, 1.0).unwrap();
        for t in [0.0, 2.5, 7.0] {
            let (v, reg) = velocity_1d(&p, p.center(t), t, &cfg, 0.0);
            assert!(!reg);
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_of_antisymmetric_state_is_at_rest() {
        let cfg = IntegratorConfig::default();
        let s = Superposition::two_slit(10.0, 2.0, 1.0, 1.0).unwrap();
        for t in [1.0, 5.0, 9.0] {
            // the density vanishes at the node; next to it the current is tiny
            let (v, _) = velocity_1d(&s, 0.0, t, &cfg, 0.0);
            assert_eq!(v, 0.0);
            let (v, _) = velocity_1d(&s, 1e-6, t, &cfg, 0.0);
            assert!(v.abs() < 1e-4, "t={t}: {v}");
        }
    }

    #[test]
    fn finite_differences_agree_with_analytic() {
        let cfg = IntegratorConfig::default();
        let s = Superposition::two_slit(10.0, 2.0, 1.0, 1.0).unwrap();
        let grid = Grid1D::new(-30.0, 30.0, 6001).unwrap();
        let t = 5.0;
        let state = s.evolve(t, &grid);
        let v = grid_velocities(&state, 1.0, 1e-12);
        for (i, x) in grid.points().enumerate() {
            // away from the interference nodes
            if state.amplitudes[i].norm_sqr() < 1e-3 {
                continue;
            }
            let (va, _) = velocity_1d(&s, x, t, &cfg, 0.0);
            assert!((v[i] - va).abs() < 1e-4, "x={x}: {} vs {va}", v[i]);
        }
    }

    #[test]
    fn node_holds_previous_velocity() {
        let cfg = IntegratorConfig::default();
        let p = GaussianParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let (v, reg) = velocity_1d(&p, 30.0, 0.0, &cfg, 3.0);
        assert!(reg);
        assert_eq!(v, 3.0);
        let (v, _) = velocity_1d(&p, 30.0, 0.0, &cfg, -400.0);
        assert_eq!(v, -50.0);
    }
}
