use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::trapezoid_complex;
use crate::{Error, Result};

/// Uniform 1D grid including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::invalid("grid", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 2 {
            return Err(Error::invalid("grid.n_points", format!("need at least 2 points, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |i| self.x_min + i as f64 * dx)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Same bounds, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..self.clone()
        }
    }
}

/// Complex amplitudes sampled on a [`Grid1D`] at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub grid: Grid1D,
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
}

impl WaveState {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>, t: f64) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::Mismatch(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amplitudes", "non-finite value"));
        }
        Ok(Self { grid, amplitudes, t })
    }

    pub fn norm_sqr(&self) -> f64 {
        let dens: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        crate::quad::trapezoid(&dens, self.grid.dx())
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨x⟩ by trapezoid, relative to the state's own norm.
    pub fn mean_position(&self) -> f64 {
        let dens = self.density();
        let first: Vec<f64> = self.grid.points().zip(&dens).map(|(x, d)| x * d).collect();
        let dx = self.grid.dx();
        crate::quad::trapezoid(&first, dx) / crate::quad::trapezoid(&dens, dx)
    }

    /// Linear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        if !self.grid.contains(x) {
            return Complex64::new(0.0, 0.0);
        }
        let s = (x - self.grid.x_min) / self.grid.dx();
        let i = (s.floor() as usize).min(self.grid.n_points - 2);
        let f = s - i as f64;
        self.amplitudes[i] * (1.0 - f) + self.amplitudes[i + 1] * f
    }

    /// CSV with header `x,re,im`; `comments` become `#`-prefixed lines before it.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        writeln!(out, "# t={}", fmt_num(self.t))?;
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "x,re,im")?;
        for (x, a) in self.grid.points().zip(&self.amplitudes) {
            writeln!(out, "{},{},{}", fmt_num(x), fmt_num(a.re), fmt_num(a.im))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut t = 0.0;
        let mut xs = Vec::new();
        let mut amps = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if let Some(c) = line.strip_prefix('#') {
                if let Some(v) = c.trim().strip_prefix("t=") {
                    t = v.parse().map_err(|_| Error::Format(format!("line {}: bad timestamp", lineno + 1)))?;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != "x,re,im" {
                    return Err(Error::Format(format!("line {}: expected header `x,re,im`", lineno + 1)));
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("line {}: bad number", lineno + 1)))?;
            if cols.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 columns", lineno + 1)));
            }
            xs.push(cols[0]);
            amps.push(Complex64::new(cols[1], cols[2]));
        }
        if xs.len() < 2 {
            return Err(Error::Format("fewer than two rows".into()));
        }
        let grid = Grid1D::new(xs[0], xs[xs.len() - 1], xs.len())?;
        WaveState::new(grid, amps, t)
    }
}

/// Shortest round-trip representation; identical inputs give identical text.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

/// ⟨a|b⟩ by the trapezoidal rule. Both states must share grid and timestamp.
pub fn inner_product(a: &WaveState, b: &WaveState) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::Mismatch("inner product of states on different grids".into()));
    }
    if a.t != b.t {
        return Err(Error::Mismatch(format!("inner product at different times {} and {}", a.t, b.t)));
    }
    let prod: Vec<Complex64> = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).collect();
    Ok(trapezoid_complex(&prod, a.grid.dx()))
}
