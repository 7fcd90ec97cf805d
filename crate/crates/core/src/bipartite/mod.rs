//! Coupled system–pointer evolution in a hard-walled box.
//!
//! Ψ(x, y, t) = Σ c_ij(t) s_i(x) s_j(y) with standing waves in each
//! coordinate. The Hamiltonian is the sum of the free kinetic terms (mass m
//! for x, M for y) and g(t) f_w(x̂) P̂_y, which translates the pointer by
//! ∫g f_w(x) where the system is.
//!
//! Coefficients are stored column-major: `c[i + n_x * j]`.

mod basis;
mod evolve;
mod io;

pub use basis::{BoxBasis, SineAxis};
pub use evolve::{coupling_matrix, BipartiteEvolver, CouplingOperator, EvolveOptions};
pub use io::{read_wps1, write_marginal_csv, write_wps1};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{FreeState, GaussianParams, Grid1D, WaveState};
use crate::weakval::{CouplingWindow, PostSelection, PostSelectionKind, ProjectorWindow};
use crate::{Error, Result};

/// Amplitude allowed at the box walls when projecting an initial state.
pub const WALL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    /// Pointer mass M.
    pub mass: f64,
    /// Centre of the initial pointer Gaussian.
    pub y_init: f64,
    /// Width of the initial pointer amplitude, φ ∝ exp(−(y − y_init)²/2σ_y²).
    pub sigma_y: f64,
    pub coupling: CouplingWindow,
    /// Spatial window f_w of the coupling; must have a finite width.
    pub window: ProjectorWindow,
}

impl PointerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::invalid("pointer.mass", "must be > 0"));
        }
        if !(self.sigma_y > 0.0) {
            return Err(Error::invalid("pointer.sigma_y", "must be > 0"));
        }
        if !(self.coupling.t_off > self.coupling.t_on) {
            return Err(Error::invalid("pointer.coupling", "need t_off > t_on"));
        }
        self.window.validate()?;
        if !(self.window.width > 0.0) {
            return Err(Error::invalid("pointer.window.width", "must be > 0"));
        }
        Ok(())
    }

    /// The initial pointer packet (at rest).
    pub fn initial_packet(&self) -> GaussianParams {
        GaussianParams {
            x0: self.y_init,
            p0: 0.0,
            d: self.sigma_y / std::f64::consts::SQRT_2,
            m: self.mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    pub basis: BoxBasis,
    pub coeffs: Vec<Complex64>,
    pub t: f64,
}

impl BipartiteState {
    pub fn new(basis: BoxBasis, coeffs: Vec<Complex64>, t: f64) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Mismatch(format!(
                "{} coefficients for a {}x{} basis",
                coeffs.len(),
                basis.n_x(),
                basis.n_y()
            )));
        }
        Ok(Self { basis, coeffs, t })
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs[i + self.basis.n_x() * j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(self.basis.n_x(), self.basis.n_y(), &self.coeffs)
    }

    /// Number of singular values above `rel_tol` times the largest.
    pub fn schmidt_rank(&self, rel_tol: f64) -> usize {
        let sv = self.matrix().singular_values();
        let top = sv.max();
        sv.iter().filter(|&&s| s > rel_tol * top).count()
    }

    /// Ψ(x, y) with its partial derivatives ∂_xΨ and ∂_yΨ.
    pub fn amplitude_with_gradient(&self, x: f64, y: f64) -> (Complex64, Complex64, Complex64) {
        let (nx, ny) = (self.basis.n_x(), self.basis.n_y());
        let mut ax = vec![0.0; nx];
        let mut dx = vec![0.0; nx];
        let mut ay = vec![0.0; ny];
        let mut dy = vec![0.0; ny];
        self.basis.x.values_and_derivatives(x, &mut ax, &mut dx);
        self.basis.y.values_and_derivatives(y, &mut ay, &mut dy);
        let (mut psi, mut psi_x, mut psi_y) = (Complex64::default(), Complex64::default(), Complex64::default());
        for j in 0..ny {
            let col = &self.coeffs[j * nx..(j + 1) * nx];
            let (mut v, mut vd) = (Complex64::default(), Complex64::default());
            for ((c, a), d) in col.iter().zip(&ax).zip(&dx) {
                v += c * a;
                vd += c * d;
            }
            psi += v * ay[j];
            psi_y += v * dy[j];
            psi_x += vd * ay[j];
        }
        (psi, psi_x, psi_y)
    }

    pub fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        self.amplitude_with_gradient(x, y).0
    }

    /// Mode values of `axis` at the grid points, one row per point.
    fn sampled_modes(axis: &SineAxis, grid: &Grid1D) -> DMatrix<Complex64> {
        let mut vals = vec![0.0; axis.modes];
        let mut m = DMatrix::zeros(grid.n_points, axis.modes);
        for (r, x) in grid.points().enumerate() {
            axis.values(x, &mut vals);
            for (c, v) in vals.iter().enumerate() {
                m[(r, c)] = Complex64::new(*v, 0.0);
            }
        }
        m
    }

    /// Ψ on the tensor grid, rows along x and columns along y.
    pub fn on_grid(&self, x_grid: &Grid1D, y_grid: &Grid1D) -> DMatrix<Complex64> {
        let sx = Self::sampled_modes(&self.basis.x, x_grid);
        let sy = Self::sampled_modes(&self.basis.y, y_grid);
        sx * self.matrix() * sy.transpose()
    }

    /// Reduced density of the system, ∫|Ψ(x, y)|² dy, on `grid`.
    pub fn system_marginal(&self, grid: &Grid1D) -> Vec<f64> {
        let v = Self::sampled_modes(&self.basis.x, grid) * self.matrix();
        v.row_iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum()).collect()
    }

    /// Reduced density of the pointer, ∫|Ψ(x, y)|² dx, on `grid`.
    pub fn pointer_marginal(&self, grid: &Grid1D) -> Vec<f64> {
        let v = Self::sampled_modes(&self.basis.y, grid) * self.matrix().transpose();
        v.row_iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum()).collect()
    }
}

fn check_walls(what: &'static str, f: impl Fn(f64) -> Complex64, axis: &SineAxis) -> Result<()> {
    let amplitude = f(axis.min()).norm().max(f(axis.max()).norm());
    if !(amplitude < WALL_TOLERANCE) {
        return Err(Error::WallLeakage {
            what,
            amplitude,
            threshold: WALL_TOLERANCE,
        });
    }
    Ok(())
}

fn product_state(basis: BoxBasis, cx: &[Complex64], cy: &[Complex64], t: f64) -> Result<BipartiteState> {
    let mut coeffs = Vec::with_capacity(basis.len());
    for b in cy {
        coeffs.extend(cx.iter().map(|a| a * b));
    }
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    BipartiteState::new(basis, coeffs, t)
}

/// Product of the system state (evaluated at t = 0) and the pointer Gaussian,
/// projected on the basis and normalized.
pub fn project_initial<S: FreeState + ?Sized>(
    system: &S,
    pointer: &PointerConfig,
    basis: &BoxBasis,
) -> Result<BipartiteState> {
    pointer.validate()?;
    let packet = pointer.initial_packet();
    check_walls("system", |x| system.amplitude(x, 0.0), &basis.x)?;
    check_walls("pointer", |y| packet.amplitude(y, 0.0), &basis.y)?;
    let cx = basis.x.project(|x| system.amplitude(x, 0.0));
    let cy = basis.y.project(|y| packet.amplitude(y, 0.0));
    product_state(*basis, &cx, &cy, 0.0)
}

/// As [`project_initial`] for a sampled system state, integrating with the
/// trapezoidal rule on the state's own grid.
pub fn project_wave_state(system: &WaveState, pointer: &PointerConfig, basis: &BoxBasis) -> Result<BipartiteState> {
    pointer.validate()?;
    let packet = pointer.initial_packet();
    let g = &system.grid;
    if g.x_min < basis.x.min() || g.x_max > basis.x.max() {
        return Err(Error::Mismatch("system grid extends beyond the box".into()));
    }
    let edge = system.amplitudes[0].norm().max(system.amplitudes[g.n_points - 1].norm());
    if !(edge < WALL_TOLERANCE) {
        return Err(Error::WallLeakage {
            what: "system",
            amplitude: edge,
            threshold: WALL_TOLERANCE,
        });
    }
    check_walls("pointer", |y| packet.amplitude(y, 0.0), &basis.y)?;
    let nx = basis.n_x();
    let mut cx = vec![Complex64::default(); nx];
    let mut vals = vec![0.0; nx];
    for (i, (x, a)) in g.points().zip(&system.amplitudes).enumerate() {
        let w = if i == 0 || i == g.n_points - 1 { 0.5 } else { 1.0 } * g.dx();
        basis.x.values(x, &mut vals);
        cx.iter_mut().zip(&vals).for_each(|(c, v)| *c += a * (w * v));
    }
    let cy = basis.y.project(|y| packet.amplitude(y, 0.0));
    product_state(*basis, &cx, &cy, system.t)
}

/// Mode coefficients of conj(χ): the bra ⟨χ| applied on the x index.
fn post_selection_bra(post: &PostSelection, axis: &SineAxis) -> Vec<Complex64> {
    match post.kind {
        PostSelectionKind::PositionDelta { x_r } => {
            let mut v = vec![0.0; axis.modes];
            axis.values(x_r, &mut v);
            v.into_iter().map(|s| Complex64::new(s, 0.0)).collect()
        }
        _ => axis.project(|x| post.chi(x).unwrap()).into_iter().map(|c| c.conj()).collect(),
    }
}

/// Pointer mode coefficients of ⟨χ|Ψ(t_f)⟩ (unnormalized).
pub fn conditional_pointer_coeffs(state: &BipartiteState, post: &PostSelection) -> Vec<Complex64> {
    let bra = post_selection_bra(post, &state.basis.x);
    let nx = state.basis.n_x();
    (0..state.basis.n_y())
        .map(|j| {
            state.coeffs[j * nx..(j + 1) * nx]
                .iter()
                .zip(&bra)
                .map(|(c, b)| c * b)
                .sum()
        })
        .collect()
}

/// The normalized pointer amplitude φ_f(y) ∝ ∫ χ*(x) Ψ(x, y, t_f) dx on `y_grid`.
pub fn conditional_pointer_state(
    state: &BipartiteState,
    post: &PostSelection,
    y_grid: &Grid1D,
    eps_den: f64,
) -> Result<WaveState> {
    if (state.t - post.t_f).abs() > 1e-9 * post.t_f.abs().max(1.0) {
        return Err(Error::Mismatch(format!(
            "state at t = {} but post-selection at t_f = {}",
            state.t, post.t_f
        )));
    }
    let phi = conditional_pointer_coeffs(state, post);
    let overlap = phi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(overlap >= eps_den) {
        return Err(Error::NearOrthogonalPostSelection {
            overlap,
            floor: eps_den,
        });
    }
    let amps: Vec<Complex64> = y_grid.points().map(|y| state.basis.y.evaluate(&phi, y)).collect();
    Ok(WaveState::new(y_grid.clone(), amps, state.t)?.normalized())
}

/// ⟨y⟩ of `phi` minus ⟨y⟩ of `reference`.
pub fn pointer_mean_shift(phi: &WaveState, reference: &WaveState) -> f64 {
    phi.mean_position() - reference.mean_position()
}
