use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BipartiteState, BoxBasis, PointerConfig};
use crate::qcore::HBAR;
use crate::weakval::ProjectorWindow;
use crate::{Error, Exec, Result};

/// The interaction operator f_w(x̂) ⊗ P̂_y in the mode basis.
#[derive(Debug, Clone)]
pub struct CouplingOperator {
    /// ⟨n'|f_w(x̂)|n⟩, real symmetric.
    pub x_factor: DMatrix<f64>,
    /// ⟨n'|P̂|n⟩, Hermitian.
    pub y_factor: DMatrix<Complex64>,
}

impl CouplingOperator {
    /// Largest deviation of the full operator from its conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let sx = (&self.x_factor - self.x_factor.transpose()).abs().max();
        let py = &self.y_factor - self.y_factor.adjoint();
        let dy = py.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let nx = self.x_factor.abs().max();
        let ny = self.y_factor.iter().map(|c| c.norm()).fold(0.0, f64::max);
        sx * ny + nx * dy
    }

    /// Kronecker product with the x index fastest (small bases only).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let (nx, ny) = (self.x_factor.nrows(), self.y_factor.nrows());
        DMatrix::from_fn(nx * ny, nx * ny, |r, c| {
            let (i, j) = (r % nx, r / nx);
            let (k, l) = (c % nx, c / nx);
            self.y_factor[(j, l)] * self.x_factor[(i, k)]
        })
    }
}

/// Matrix elements of the coupling by trapezoidal quadrature with
/// `quad_points` interior nodes along x.
pub fn coupling_matrix(basis: &BoxBasis, window: &ProjectorWindow, quad_points: usize) -> CouplingOperator {
    CouplingOperator {
        x_factor: basis.x.multiplication_matrix(|x| window.weight(x), quad_points),
        y_factor: basis.y.momentum_matrix(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    /// Step length while the coupling is on; free stretches are one exact step.
    pub dt: f64,
    /// Largest allowed change of the norm in one step.
    pub step_tolerance: f64,
    /// Largest allowed change of the norm over one call to `evolve`.
    pub total_tolerance: f64,
    /// Collocation points where f_w falls below this are left uncoupled.
    pub window_floor: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            step_tolerance: 1e-10,
            total_tolerance: 1e-8,
            window_floor: 1e-15,
            exec: Exec::default(),
        }
    }
}

/// Split-step propagator: exact kinetic phases around an exactly
/// exponentiated interaction. The x-factor f_w(x̂) is taken in the
/// collocation representation, where it is diagonal; only the collocation
/// points inside the window take part, so each step costs O(r·N_x·N_y) with r
/// the number of such points.
pub struct BipartiteEvolver {
    basis: BoxBasis,
    pointer: PointerConfig,
    opts: EvolveOptions,
    ex: Vec<f64>,
    ey: Vec<f64>,
    /// f_w at the retained collocation points.
    pub(super) lambda: Vec<f64>,
    /// Rows of the sine transform for the retained points, each of length N_x.
    pub(super) rows: Vec<f64>,
    /// Eigenvectors (columns) and eigenvalues of the pointer momentum matrix.
    v: DMatrix<Complex64>,
    mu: Vec<f64>,
}

impl BipartiteEvolver {
    pub fn new(basis: BoxBasis, system_mass: f64, pointer: PointerConfig, opts: EvolveOptions) -> Result<Self> {
        pointer.validate()?;
        if !(system_mass > 0.0) {
            return Err(Error::invalid("m", "must be > 0"));
        }
        if !(opts.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        let nx = basis.n_x();
        let t = basis.x.transform();
        let mut lambda = Vec::new();
        let mut rows = Vec::new();
        for (k, x) in basis.x.collocation_points().into_iter().enumerate() {
            let f = pointer.window.weight(x);
            if f.abs() > opts.window_floor {
                lambda.push(f);
                rows.extend((0..nx).map(|n| t[(n, k)]));
            }
        }
        let eig = SymmetricEigen::new(basis.y.momentum_matrix());
        Ok(Self {
            ex: basis.x.energies(system_mass),
            ey: basis.y.energies(pointer.mass),
            basis,
            pointer,
            opts,
            lambda,
            rows,
            v: eig.eigenvectors,
            mu: eig.eigenvalues.iter().copied().collect(),
        })
    }

    pub fn basis(&self) -> &BoxBasis {
        &self.basis
    }

    pub fn pointer(&self) -> &PointerConfig {
        &self.pointer
    }

    pub fn options(&self) -> &EvolveOptions {
        &self.opts
    }

    /// Number of collocation points the coupling acts on.
    pub fn coupling_rank(&self) -> usize {
        self.lambda.len()
    }

    fn kinetic(&self, c: &mut [Complex64], tau: f64) {
        if tau == 0.0 {
            return;
        }
        let nx = self.basis.n_x();
        let px: Vec<Complex64> = self.ex.iter().map(|e| Complex64::from_polar(1.0, -e * tau / HBAR)).collect();
        let py: Vec<Complex64> = self.ey.iter().map(|e| Complex64::from_polar(1.0, -e * tau / HBAR)).collect();
        let mut cols: Vec<(usize, &mut [Complex64])> = c.chunks_mut(nx).enumerate().collect();
        self.opts.exec.for_each_mut(&mut cols, |(j, col)| {
            let pj = py[*j];
            col.iter_mut().zip(&px).for_each(|(a, p)| *a *= p * pj);
        });
    }

    /// Applies exp(−i G f_w(x̂) P̂ / ħ).
    fn interaction(&self, c: &mut [Complex64], big_g: f64) {
        let (nx, ny, r) = (self.basis.n_x(), self.basis.n_y(), self.lambda.len());
        if big_g == 0.0 || r == 0 {
            return;
        }
        let rows = &self.rows;
        // grid values at the coupled points, one column per pointer mode
        let a: Vec<Vec<Complex64>> = self.opts.exec.map_range(ny, |j| {
            let col = &c[j * nx..(j + 1) * nx];
            (0..r)
                .map(|k| {
                    let row = &rows[k * nx..(k + 1) * nx];
                    col.iter().zip(row).map(|(z, u)| z * u).sum()
                })
                .collect()
        });
        // to the momentum eigenbasis, apply the phase minus identity, and back
        let mut d = vec![vec![Complex64::default(); r]; ny];
        for k in 0..r {
            for l in 0..ny {
                let mut b = Complex64::default();
                for (j, aj) in a.iter().enumerate() {
                    b += aj[k] * self.v[(j, l)].conj();
                }
                let phase = Complex64::from_polar(1.0, -big_g * self.lambda[k] * self.mu[l] / HBAR) - 1.0;
                b *= phase;
                for (j, dj) in d.iter_mut().enumerate() {
                    dj[k] += b * self.v[(j, l)];
                }
            }
        }
        let mut cols: Vec<(usize, &mut [Complex64])> = c.chunks_mut(nx).enumerate().collect();
        self.opts.exec.for_each_mut(&mut cols, |(j, col)| {
            for (k, dk) in d[*j].iter().enumerate() {
                let row = &rows[k * nx..(k + 1) * nx];
                col.iter_mut().zip(row).for_each(|(z, u)| *z += dk * u);
            }
        });
    }

    /// Advances `state` to `t_to`.
    pub fn evolve_in_place(&self, state: &mut BipartiteState, t_to: f64) -> Result<()> {
        if state.basis != self.basis {
            return Err(Error::Mismatch("state and evolver use different bases".into()));
        }
        let t0 = state.t;
        if t_to < t0 {
            return Err(Error::NonPositiveInterval { from: t0, to: t_to });
        }
        let cw = &self.pointer.coupling;
        let (s, e) = (t0.max(cw.t_on), t_to.min(cw.t_off));
        let norm0 = state.norm_sqr();
        if s >= e {
            self.kinetic(&mut state.coeffs, t_to - t0);
            state.t = t_to;
            let now = state.norm_sqr();
            return self.check(norm0, now, now, t_to);
        }
        self.kinetic(&mut state.coeffs, s - t0);
        let steps = (((e - s) / self.opts.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = (e - s) / steps as f64;
        let mut prev = state.norm_sqr();
        for n in 0..steps {
            let a = s + h * n as f64;
            let b = if n + 1 == steps { e } else { a + h };
            self.kinetic(&mut state.coeffs, 0.5 * (b - a));
            self.interaction(&mut state.coeffs, cw.integral(a, b));
            self.kinetic(&mut state.coeffs, 0.5 * (b - a));
            let now = state.norm_sqr();
            self.check(norm0, prev, now, b)?;
            prev = now;
        }
        self.kinetic(&mut state.coeffs, t_to - e);
        state.t = t_to;
        let now = state.norm_sqr();
        self.check(norm0, now, now, t_to)
    }

    fn check(&self, norm0: f64, prev: f64, now: f64, t: f64) -> Result<()> {
        let (step, total) = ((now - prev).abs(), (now - norm0).abs());
        let (drift, tolerance) = if step > self.opts.step_tolerance {
            (step, self.opts.step_tolerance)
        } else {
            (total, self.opts.total_tolerance)
        };
        if drift > tolerance || !now.is_finite() {
            return Err(Error::NormDrift {
                drift,
                tolerance,
                t,
                norm: now,
            });
        }
        Ok(())
    }

    pub fn evolve(&self, state: &BipartiteState, t_to: f64) -> Result<BipartiteState> {
        let mut s = state.clone();
        self.evolve_in_place(&mut s, t_to)?;
        Ok(s)
    }
}
