use serde::{Deserialize, Serialize};

/// Raised-cosine switching function g(t) on [t_on, t_off].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingWindow {
    pub g_peak: f64,
    pub t_on: f64,
    pub t_off: f64,
}

impl CouplingWindow {
    /// Window of total duration `duration` centred on `t_w` with ∫g dt = `g`.
    pub fn from_integrated(g: f64, t_w: f64, duration: f64) -> Self {
        Self {
            g_peak: 2.0 * g / duration,
            t_on: t_w - 0.5 * duration,
            t_off: t_w + 0.5 * duration,
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_off - self.t_on
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.t_on + self.t_off)
    }

    pub fn g(&self, t: f64) -> f64 {
        if t < self.t_on || t > self.t_off {
            return 0.0;
        }
        let phase = 2.0 * std::f64::consts::PI * (t - self.t_on) / self.duration();
        0.5 * self.g_peak * (1.0 - phase.cos())
    }

    fn antiderivative(&self, t: f64) -> f64 {
        let tau = self.duration();
        let s = (t.clamp(self.t_on, self.t_off) - self.t_on).max(0.0);
        0.5 * self.g_peak * (s - tau / (2.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI * s / tau).sin())
    }

    /// ∫_a^b g(t) dt.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    /// Integrated strength g = ∫ g(t) dt.
    pub fn integrated(&self) -> f64 {
        0.5 * self.g_peak * self.duration()
    }

    pub fn overlaps(&self, a: f64, b: f64) -> bool {
        b > self.t_on && a < self.t_off && self.g_peak != 0.0
    }
}
