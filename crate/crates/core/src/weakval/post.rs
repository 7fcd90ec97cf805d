use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{free_propagator, gaussian_amplitude, FreeState, GaussianParams, Grid1D, HBAR};
use crate::quad::{trapezoid_complex, CompositeRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostSelectionKind {
    /// Detection at the point `x_r`.
    PositionDelta { x_r: f64 },
    /// Gaussian of spatial width `sigma_sel` at `x_r` carrying mean momentum
    /// `p_sel`; its momentum spread is ħ/(2σ_sel).
    GaussianFilter { x_r: f64, p_sel: f64, sigma_sel: f64 },
    /// The freely evolved packet `params` itself, taken at t_f.
    EvolvedGaussian { params: GaussianParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostSelection {
    pub kind: PostSelectionKind,
    pub t_f: f64,
    pub mass: f64,
}

impl PostSelection {
    pub fn new(kind: PostSelectionKind, t_f: f64, mass: f64) -> Result<Self> {
        let p = Self { kind, t_f, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn position_delta(x_r: f64, t_f: f64, mass: f64) -> Result<Self> {
        Self::new(PostSelectionKind::PositionDelta { x_r }, t_f, mass)
    }

    pub fn gaussian_filter(x_r: f64, p_sel: f64, sigma_sel: f64, t_f: f64, mass: f64) -> Result<Self> {
        Self::new(PostSelectionKind::GaussianFilter { x_r, p_sel, sigma_sel }, t_f, mass)
    }

    /// Post-selection onto the freely evolved packet (self post-selection).
    pub fn evolved(params: GaussianParams, t_f: f64) -> Result<Self> {
        Self::new(PostSelectionKind::EvolvedGaussian { params }, t_f, params.m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_f > 0.0) {
            return Err(Error::invalid("t_f", format!("post-selection time must be > 0, got {}", self.t_f)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::invalid("m", "mass must be > 0"));
        }
        match self.kind {
            PostSelectionKind::GaussianFilter { sigma_sel, .. } if !(sigma_sel > 0.0) => {
                Err(Error::invalid("sigma_sel", format!("filter width must be > 0, got {sigma_sel}")))
            }
            PostSelectionKind::EvolvedGaussian { params } => {
                params.validate()?;
                if params.m != self.mass {
                    return Err(Error::invalid("m", "post-selected packet mass differs"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The post-selected state as a Gaussian packet plus its age at t_f.
    fn as_packet(&self) -> Option<(GaussianParams, f64)> {
        match self.kind {
            PostSelectionKind::PositionDelta { .. } => None,
            PostSelectionKind::GaussianFilter { x_r, p_sel, sigma_sel } => Some((
                GaussianParams {
                    x0: x_r,
                    p0: p_sel,
                    d: sigma_sel,
                    m: self.mass,
                },
                0.0,
            )),
            PostSelectionKind::EvolvedGaussian { params } => Some((params, self.t_f)),
        }
    }

    /// χ(x, t_f); `None` for a position delta.
    pub fn chi(&self, x: f64) -> Option<Complex64> {
        self.as_packet().map(|(p, age)| gaussian_amplitude(&p, x, age))
    }

    /// Centre and spread of the detection density |χ(x, t_f)|²; spread 0 for a delta.
    pub fn detection_density(&self) -> (f64, f64) {
        match self.as_packet() {
            None => match self.kind {
                PostSelectionKind::PositionDelta { x_r } => (x_r, 0.0),
                _ => unreachable!(),
            },
            Some((p, age)) => (p.center(age), p.width_at(age)),
        }
    }

    /// Mean momentum and momentum spread of χ (spread 0 means unfiltered).
    pub fn momentum_filter(&self) -> Option<(f64, f64)> {
        match self.kind {
            PostSelectionKind::GaussianFilter { p_sel, sigma_sel, .. } => Some((p_sel, HBAR / (2.0 * sigma_sel))),
            PostSelectionKind::EvolvedGaussian { params } => Some((params.p0, HBAR / (2.0 * params.d))),
            PostSelectionKind::PositionDelta { .. } => None,
        }
    }

    /// ⟨χ(t_f)|ψ(t_f)⟩ for component `k` of `state` (weighted), or the full
    /// state when `k` is `None`. Gaussian post-selections use the trapezoidal
    /// rule on `grid`.
    pub fn overlap<S: FreeState + ?Sized>(&self, state: &S, k: Option<usize>, grid: &Grid1D) -> Complex64 {
        let psi = |x: f64| match k {
            Some(k) => state.component_amplitude(k, x, self.t_f),
            None => state.amplitude(x, self.t_f),
        };
        match self.kind {
            PostSelectionKind::PositionDelta { x_r } => psi(x_r),
            _ => {
                let vals: Vec<Complex64> = grid.points().map(|x| self.chi(x).unwrap().conj() * psi(x)).collect();
                trapezoid_complex(&vals, grid.dx())
            }
        }
    }
}

/// ⟨χ(t_f)|U(t_f, t)|x⟩, the amplitude for reaching the post-selection from (x, t).
///
/// Gaussian post-selections use the closed form: the Gaussian propagated
/// backward to `t` and conjugated.
pub fn backward_amplitude(post: &PostSelection, x: f64, t: f64) -> Result<Complex64> {
    if !(t < post.t_f) {
        return Err(Error::NonPositiveInterval { from: t, to: post.t_f });
    }
    Ok(match post.kind {
        PostSelectionKind::PositionDelta { x_r } => free_propagator(x_r, post.t_f, x, t, post.mass)?,
        _ => {
            let (p, age) = post.as_packet().unwrap();
            gaussian_amplitude(&p, x, age - (post.t_f - t)).conj()
        }
    })
}

/// Quadrature evaluation of ∫ χ*(x', t_f) K(x', t_f; x, t) dx', the oracle for
/// the closed form above. Falls back to the exact kernel for a delta.
pub fn backward_amplitude_quadrature(post: &PostSelection, x: f64, t: f64) -> Result<Complex64> {
    if !(t < post.t_f) {
        return Err(Error::NonPositiveInterval { from: t, to: post.t_f });
    }
    let Some((p, age)) = post.as_packet() else {
        return backward_amplitude(post, x, t);
    };
    let (c, w) = (p.center(age), p.width_at(age));
    let dt = post.t_f - t;
    // resolve both the packet and the propagator chirp across the support
    let reach = 14.0 * w;
    let max_k = ((c - x).abs() + reach) * post.mass / (HBAR * dt) + p.p0.abs() + 10.0 / w;
    let panel = (0.5 / max_k).min(0.05);
    let rule = CompositeRule::with_max_panel(c - reach, c + reach, panel, 10);
    Ok(rule.integrate_complex(|xp| {
        gaussian_amplitude(&p, xp, age).conj() * crate::qcore::free_propagator(xp, post.t_f, x, t, post.mass).unwrap()
    }))
}
