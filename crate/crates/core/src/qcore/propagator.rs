use num_complex::Complex64;

use super::HBAR;
use crate::{Error, Result};

/// Free-particle propagator K(x', t'; x, t) = ⟨x'|U(t', t)|x⟩ for mass `m`.
///
/// The prefactor (m / 2iπħΔt)^{1/2} uses the principal square root, i.e.
/// (1 − i)/√2 · √(m / 2πħΔt), the branch for which K → δ(x' − x) as Δt → 0⁺.
/// Coincident or reversed times are rejected: the kernel is a distribution there.
pub fn free_propagator(x_to: f64, t_to: f64, x_from: f64, t_from: f64, m: f64) -> Result<Complex64> {
    let dt = t_to - t_from;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveInterval {
            from: t_from,
            to: t_to,
        });
    }
    Ok(kernel(x_to - x_from, dt, m))
}

/// Propagator for a displacement `dx` over a positive interval `dt`.
pub(crate) fn kernel(dx: f64, dt: f64, m: f64) -> Complex64 {
    let prefactor = (Complex64::new(m, 0.0) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * HBAR * dt)).sqrt();
    prefactor * Complex64::new(0.0, m * dx * dx / (2.0 * HBAR * dt)).exp()
}
