use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FreeState, HBAR};
use crate::{Error, Result};

/// A free Gaussian packet: initial centre `x0`, mean momentum `p0`, width `d`
/// (standard deviation of |ψ|² at t = 0) and mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub x0: f64,
    pub p0: f64,
    pub d: f64,
    pub m: f64,
}

impl GaussianParams {
    pub fn new(x0: f64, p0: f64, d: f64, m: f64) -> Result<Self> {
        let p = Self { x0, p0, d, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::invalid("d", format!("width must be > 0, got {}", self.d)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::invalid("m", format!("mass must be > 0, got {}", self.m)));
        }
        if !self.x0.is_finite() || !self.p0.is_finite() {
            return Err(Error::invalid("x0/p0", "must be finite"));
        }
        Ok(())
    }

    pub fn center(&self, t: f64) -> f64 {
        packet_center(self, t)
    }

    /// Standard deviation of |ψ|² at time `t` (dispersion included).
    pub fn width_at(&self, t: f64) -> f64 {
        let s = HBAR * t / (2.0 * self.d * self.d * self.m);
        self.d * (1.0 + s * s).sqrt()
    }

    pub fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        gaussian_amplitude(self, x, t)
    }

    /// Complex width parameter 4d²m + 2iħt appearing in the exponent.
    fn beta(&self, t: f64) -> Complex64 {
        Complex64::new(4.0 * self.d * self.d * self.m, 2.0 * HBAR * t)
    }

    pub fn derivative(&self, x: f64, t: f64) -> Complex64 {
        let u = x - self.center(t);
        let log_slope = -2.0 * self.m * u / self.beta(t) + Complex64::new(0.0, self.p0 / HBAR);
        self.amplitude(x, t) * log_slope
    }

    /// The same packet mirrored through x = 0 (centre and momentum flipped).
    pub fn mirrored(&self) -> Self {
        Self {
            x0: -self.x0,
            p0: -self.p0,
            ..*self
        }
    }
}

/// Position of the packet centre, x₀ + p₀t/m.
pub fn packet_center(params: &GaussianParams, t: f64) -> f64 {
    params.x0 + params.p0 * t / params.m
}

/// Freely evolved Gaussian amplitude ψ_G(x, t; x₀, p₀).
///
/// Valid for any real `t`; negative times give the backward-evolved packet.
/// The square root in the prefactor is the principal branch, which is
/// continuous in `t` because its argument has a positive real part.
pub fn gaussian_amplitude(params: &GaussianParams, x: f64, t: f64) -> Complex64 {
    let GaussianParams { p0, d, m, .. } = *params;
    let u = x - params.center(t);
    let prefactor = (2.0 / std::f64::consts::PI).powf(0.25) * (d * m).sqrt()
        / Complex64::new(2.0 * d * d * m, HBAR * t).sqrt();
    let exponent = -(m * u * u) / params.beta(t)
        + Complex64::new(0.0, p0 * u / HBAR + p0 * p0 * t / (2.0 * HBAR * m));
    prefactor * exponent.exp()
}

impl FreeState for GaussianParams {
    fn mass(&self) -> f64 {
        self.m
    }

    fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        gaussian_amplitude(self, x, t)
    }

    fn derivative(&self, x: f64, t: f64) -> Complex64 {
        GaussianParams::derivative(self, x, t)
    }
}
