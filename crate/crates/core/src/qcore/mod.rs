//! Single-particle free dynamics: analytic Gaussian packets, the free
//! propagator, packet superpositions and uniformly sampled grid states.

mod gaussian;
mod grid;
mod propagator;
mod spectral;
mod superposition;

pub use gaussian::{gaussian_amplitude, packet_center, GaussianParams};
pub use grid::{inner_product, Grid1D, WaveState};
pub(crate) use grid::fmt_num;
pub use propagator::free_propagator;
pub use spectral::SpectralState;
pub use superposition::{evolve_analytic, superposition_initial, Component, Superposition};

use num_complex::Complex64;

/// Reduced Planck constant in atomic units.
pub const HBAR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const ATOMIC: PhysicalConstants = PhysicalConstants { hbar: HBAR };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::ATOMIC
    }
}

/// A freely evolving single-particle state that can be evaluated at any (x, t).
///
/// States built from several packets expose them as weighted components whose
/// sum is the full amplitude; weak values use this to resolve which packet
/// reaches a pointer.
pub trait FreeState: Sync {
    fn mass(&self) -> f64;

    fn amplitude(&self, x: f64, t: f64) -> Complex64;

    /// ∂ψ/∂x.
    fn derivative(&self, x: f64, t: f64) -> Complex64;

    fn component_count(&self) -> usize {
        1
    }

    /// Weighted contribution of component `k` (the weight is included).
    fn component_amplitude(&self, k: usize, x: f64, t: f64) -> Complex64 {
        debug_assert_eq!(k, 0);
        self.amplitude(x, t)
    }

    fn component_weight(&self, k: usize) -> Complex64 {
        debug_assert_eq!(k, 0);
        Complex64::new(1.0, 0.0)
    }

    fn sample(&self, grid: &Grid1D, t: f64) -> WaveState {
        let amplitudes = grid.points().map(|x| self.amplitude(x, t)).collect();
        WaveState::new(grid.clone(), amplitudes, t).expect("length matches grid")
    }
}
