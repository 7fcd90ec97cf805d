use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FreeState, GaussianParams, Grid1D, WaveState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: Complex64,
    pub params: GaussianParams,
}

/// Weighted sum of Gaussian packets sharing one mass, evolved exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superposition {
    components: Vec<Component>,
}

impl Superposition {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::EmptySupport("superposition without components".into()))?;
        for c in &components {
            c.params.validate()?;
            if c.params.m != first.params.m {
                return Err(Error::invalid("m", "all components must share one mass"));
            }
        }
        Ok(Self { components })
    }

    pub fn single(params: GaussianParams) -> Result<Self> {
        Self::new(vec![Component {
            weight: Complex64::new(1.0, 0.0),
            params,
        }])
    }

    /// (ψ₁ − ψ₂)/√2 with ψ₁ at −x₀ moving with +p₀ and ψ₂ its mirror image.
    ///
    /// Logs a warning when x₀ < 4d, where the packets are no longer well separated.
    pub fn two_slit(x0: f64, p0: f64, d: f64, m: f64) -> Result<Self> {
        if x0 < 4.0 * d {
            log::warn!("packets at ±{x0} with width {d} are not well separated (x0 < 4d)");
        }
        let left = GaussianParams::new(-x0, p0, d, m)?;
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(vec![
            Component {
                weight: Complex64::new(w, 0.0),
                params: left,
            },
            Component {
                weight: Complex64::new(-w, 0.0),
                params: left.mirrored(),
            },
        ])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn evolve(&self, t: f64, grid: &Grid1D) -> WaveState {
        self.sample(grid, t)
    }

    /// Mirror image x → −x of every component (weights kept).
    pub fn mirrored(&self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component {
                    weight: c.weight,
                    params: c.params.mirrored(),
                })
                .collect(),
        }
    }
}

impl FreeState for Superposition {
    fn mass(&self) -> f64 {
        self.components[0].params.m
    }

    fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        self.components.iter().map(|c| c.weight * c.params.amplitude(x, t)).sum()
    }

    fn derivative(&self, x: f64, t: f64) -> Complex64 {
        self.components.iter().map(|c| c.weight * c.params.derivative(x, t)).sum()
    }

    fn component_count(&self) -> usize {
        self.components.len()
    }

    fn component_amplitude(&self, k: usize, x: f64, t: f64) -> Complex64 {
        let c = &self.components[k];
        c.weight * c.params.amplitude(x, t)
    }

    fn component_weight(&self, k: usize) -> Complex64 {
        self.components[k].weight
    }
}

/// The two-packet initial state sampled on `grid` at t = 0.
pub fn superposition_initial(x0: f64, p0: f64, d: f64, m: f64, grid: &Grid1D) -> Result<WaveState> {
    Ok(Superposition::two_slit(x0, p0, d, m)?.sample(grid, 0.0))
}

/// Evolves each Gaussian component exactly and samples the weighted sum.
pub fn evolve_analytic(components: &[Component], t: f64, grid: &Grid1D) -> Result<WaveState> {
    Ok(Superposition::new(components.to_vec())?.sample(grid, t))
}
