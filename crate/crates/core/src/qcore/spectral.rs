use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{FreeState, Grid1D, WaveState, HBAR};
use crate::{Error, Result};

/// Free evolution of an arbitrary grid state by its Fourier series.
///
/// The grid is treated as one period of a periodic domain (the last sample is
/// dropped), so evolution is exact as long as the state stays clear of the
/// edges. Off-grid evaluation sums the series directly.
pub struct SpectralState {
    grid: Grid1D,
    mass: f64,
    t0: f64,
    /// Fourier coefficients divided by N, ordered like the FFT output.
    coeffs: Vec<Complex64>,
    wavenumbers: Vec<f64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralState {
    pub fn new(state: &WaveState, mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::invalid("m", "mass must be > 0"));
        }
        let n = state.grid.n_points - 1;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut buf: Vec<Complex64> = state.amplitudes[..n].to_vec();
        forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        let period = n as f64 * state.grid.dx();
        let wavenumbers = (0..n)
            .map(|j| {
                let jj = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * jj / period
            })
            .collect();
        Ok(Self {
            grid: state.grid.clone(),
            mass,
            t0: state.t,
            coeffs: buf,
            wavenumbers,
            inverse,
        })
    }

    fn phase(&self, k: f64, t: f64) -> Complex64 {
        Complex64::new(0.0, -HBAR * k * k * (t - self.t0) / (2.0 * self.mass)).exp()
    }

    fn series(&self, x: f64, t: f64, derivative: bool) -> Complex64 {
        let s = x - self.grid.x_min;
        self.coeffs
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| {
                let term = c * self.phase(k, t) * Complex64::new(0.0, k * s).exp();
                if derivative {
                    term * Complex64::new(0.0, k)
                } else {
                    term
                }
            })
            .sum()
    }
}

impl FreeState for SpectralState {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        self.series(x, t, false)
    }

    fn derivative(&self, x: f64, t: f64) -> Complex64 {
        self.series(x, t, true)
    }

    fn sample(&self, grid: &Grid1D, t: f64) -> WaveState {
        if *grid != self.grid {
            let amplitudes = grid.points().map(|x| self.amplitude(x, t)).collect();
            return WaveState::new(grid.clone(), amplitudes, t).expect("length matches grid");
        }
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| c * self.phase(k, t))
            .collect();
        self.inverse.process(&mut buf);
        buf.push(buf[0]);
        WaveState::new(grid.clone(), buf, t).expect("length matches grid")
    }
}
