use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::HBAR;
use crate::{Error, Result};

/// Standing waves s_n(ξ) = √(2/L) sin(nπ(ξ − offset)/L), n = 1..=modes, on
/// [offset, offset + L] with hard walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineAxis {
    pub length: f64,
    pub offset: f64,
    pub modes: usize,
}

impl SineAxis {
    pub fn new(min: f64, max: f64, modes: usize) -> Result<Self> {
        let a = Self {
            length: max - min,
            offset: min,
            modes,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.offset.is_finite() {
            return Err(Error::invalid("box", format!("length must be > 0, got {}", self.length)));
        }
        if self.modes < 8 {
            return Err(Error::invalid("box", format!("need at least 8 modes, got {}", self.modes)));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.offset
    }

    pub fn max(&self) -> f64 {
        self.offset + self.length
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi >= self.min() && xi <= self.max()
    }

    /// Wavenumber of mode `n` (1-based).
    pub fn wavenumber(&self, n: usize) -> f64 {
        n as f64 * PI / self.length
    }

    /// Kinetic energies ħ²k_n²/2m, indexed from 0 for n = 1.
    pub fn energies(&self, mass: f64) -> Vec<f64> {
        (1..=self.modes)
            .map(|n| {
                let k = self.wavenumber(n);
                HBAR * HBAR * k * k / (2.0 * mass)
            })
            .collect()
    }

    /// Values of all modes at ξ.
    pub fn values(&self, xi: f64, out: &mut [f64]) {
        let theta = PI * (xi - self.offset) / self.length;
        let norm = (2.0 / self.length).sqrt();
        for (i, o) in out.iter_mut().enumerate().take(self.modes) {
            *o = norm * ((i + 1) as f64 * theta).sin();
        }
    }

    /// Values and first derivatives of all modes at ξ.
    pub fn values_and_derivatives(&self, xi: f64, vals: &mut [f64], ders: &mut [f64]) {
        let theta = PI * (xi - self.offset) / self.length;
        let norm = (2.0 / self.length).sqrt();
        for i in 0..self.modes {
            let n = (i + 1) as f64;
            let (s, c) = (n * theta).sin_cos();
            vals[i] = norm * s;
            ders[i] = norm * n * PI / self.length * c;
        }
    }

    /// Interior collocation points ξ_k = offset + kL/(N+1), k = 1..=N.
    pub fn collocation_points(&self) -> Vec<f64> {
        let h = self.length / (self.modes + 1) as f64;
        (1..=self.modes).map(|k| self.offset + h * k as f64).collect()
    }

    /// The orthogonal, symmetric sine-transform matrix
    /// T_nk = √(2/(N+1)) sin(nkπ/(N+1)). Grid values at the collocation points
    /// are √((N+1)/L)·T·c for mode coefficients c.
    pub fn transform(&self) -> DMatrix<f64> {
        let n = self.modes;
        let s = (2.0 / (n + 1) as f64).sqrt();
        DMatrix::from_fn(n, n, |i, k| s * (((i + 1) * (k + 1)) as f64 * PI / (n + 1) as f64).sin())
    }

    /// Mode coefficients ∫ f s_n dξ by the trapezoidal rule on the
    /// collocation points (the walls contribute nothing).
    pub fn project<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        let pts = self.collocation_points();
        let samples: Vec<Complex64> = pts.iter().map(|&x| f(x)).collect();
        let t = self.transform();
        let scale = (self.length / (self.modes + 1) as f64).sqrt();
        (0..self.modes)
            .map(|n| {
                let acc: Complex64 = samples.iter().enumerate().map(|(k, v)| v * t[(n, k)]).sum();
                acc * scale
            })
            .collect()
    }

    /// Σ c_n s_n(ξ).
    pub fn evaluate(&self, coeffs: &[Complex64], xi: f64) -> Complex64 {
        let mut vals = vec![0.0; self.modes];
        self.values(xi, &mut vals);
        coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum()
    }

    /// ⟨s_m| d/dξ |s_n⟩ = 4mn / (L(m² − n²)) for m + n odd, zero otherwise.
    pub fn derivative_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.modes, self.modes, |i, j| {
            let (m, n) = ((i + 1) as f64, (j + 1) as f64);
            if (i + j) % 2 == 1 {
                4.0 * m * n / (self.length * (m * m - n * n))
            } else {
                0.0
            }
        })
    }

    /// Momentum matrix −iħ⟨s_m|d/dξ|s_n⟩, Hermitian.
    pub fn momentum_matrix(&self) -> DMatrix<Complex64> {
        self.derivative_matrix().map(|d| Complex64::new(0.0, -HBAR * d))
    }

    /// ⟨s_m| f(ξ) |s_n⟩ by the trapezoidal rule on `points` interior nodes.
    pub fn multiplication_matrix<F: Fn(f64) -> f64>(&self, f: F, points: usize) -> DMatrix<f64> {
        let h = self.length / (points + 1) as f64;
        let mut vals = vec![0.0; self.modes];
        let mut out = DMatrix::zeros(self.modes, self.modes);
        for q in 1..=points {
            let xi = self.offset + h * q as f64;
            let w = h * f(xi);
            if w == 0.0 {
                continue;
            }
            self.values(xi, &mut vals);
            for j in 0..self.modes {
                let vj = w * vals[j];
                for i in 0..self.modes {
                    out[(i, j)] += vals[i] * vj;
                }
            }
        }
        out
    }
}

/// Tensor-product sine basis for the system (x) and pointer (y) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxBasis {
    pub x: SineAxis,
    pub y: SineAxis,
}

impl BoxBasis {
    pub fn new(x: SineAxis, y: SineAxis) -> Result<Self> {
        x.validate()?;
        y.validate()?;
        Ok(Self { x, y })
    }

    pub fn l_x(&self) -> f64 {
        self.x.length
    }

    pub fn l_y(&self) -> f64 {
        self.y.length
    }

    pub fn n_x(&self) -> usize {
        self.x.modes
    }

    pub fn n_y(&self) -> usize {
        self.y.modes
    }

    pub fn len(&self) -> usize {
        self.x.modes * self.y.modes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::CompositeRule;

    fn axis() -> SineAxis {
        SineAxis::new(-20.0, 10.0, 24).unwrap()
    }

    #[test]
    fn derivative_matrix_matches_quadrature() {
        let a = axis();
        let d = a.derivative_matrix();
        let rule = CompositeRule::new(a.min(), a.max(), 200, 10);
        for (m, n) in [(0, 1), (3, 6), (5, 2), (10, 11), (2, 2), (4, 6)] {
            let q = rule.integrate(|x| {
                let mut v = vec![0.0; a.modes];
                let mut dv = vec![0.0; a.modes];
                a.values_and_derivatives(x, &mut v, &mut dv);
                v[m] * dv[n]
            });
            assert!((q - d[(m, n)]).abs() < 1e-11, "({m},{n}): {q} vs {}", d[(m, n)]);
        }
    }

    #[test]
    fn momentum_parity_and_hermiticity() {
        let p = axis().momentum_matrix();
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                if (i + j) % 2 == 0 {
                    assert_eq!(p[(i, j)], Complex64::new(0.0, 0.0));
                }
                assert!((p[(i, j)] - p[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_is_orthogonal() {
        let t = axis().transform();
        let e = &t * &t - DMatrix::identity(t.nrows(), t.ncols());
        assert!(e.abs().max() < 1e-13);
    }

    #[test]
    fn unit_window_gives_identity() {
        let a = axis();
        let f = a.multiplication_matrix(|_| 1.0, 4 * a.modes);
        let e = f - DMatrix::identity(a.modes, a.modes);
        assert!(e.abs().max() < 1e-12);
    }

    #[test]
    fn gaussian_window_matches_closed_form() {
        // ∫ e^{-(ξ-c)²/2s²} s_m s_n over the line, the box walls being far away
        let a = SineAxis::new(-40.0, 40.0, 64).unwrap();
        let (c, s) = (-5.0, 0.5);
        let f = a.multiplication_matrix(|x| (-(x - c) * (x - c) / (2.0 * s * s)).exp(), 4 * a.modes);
        let l = a.length;
        let u = c - a.offset;
        for (m, n) in [(1usize, 1usize), (3, 8), (20, 21), (40, 64)] {
            let (km, kn) = (a.wavenumber(m), a.wavenumber(n));
            let g = |k: f64| (k * u).cos() * (-(k * k) * s * s / 2.0).exp();
            let expect = (2.0 * PI).sqrt() * s / l * (g(km - kn) - g(km + kn));
            assert!((f[(m - 1, n - 1)] - expect).abs() < 1e-12, "({m},{n})");
        }
    }

    #[test]
    fn projection_reconstructs_smooth_functions() {
        let a = SineAxis::new(-15.0, 15.0, 64).unwrap();
        let f = |x: f64| Complex64::new((-(x - 1.0).powi(2) / 4.0).exp(), 0.3 * (-(x * x) / 2.0).exp() * x);
        let c = a.project(f);
        for x in [-3.0, 0.0, 0.7, 2.5] {
            assert!((a.evaluate(&c, x) - f(x)).norm() < 1e-10);
        }
    }
}
