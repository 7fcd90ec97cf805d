use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{backward_amplitude, CouplingWindow, PostSelection};
use crate::qcore::{FreeState, Grid1D};
use crate::quad::CompositeRule;
use crate::{Error, Result};

/// Which overlap divides the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorConvention {
    /// ⟨χ(t_f)|ψ(t_f)⟩ with the full pre-selected state.
    #[default]
    FullState,
    /// Only the given (weighted) packet, c_k⟨χ(t_f)|ψ_k(t_f)⟩. Differs from the
    /// full state by the other packets' tails at the detector.
    Component(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakValueOptions {
    /// Smallest |denominator| for which a weak value is reported.
    pub eps_den: f64,
    pub convention: DenominatorConvention,
    /// Quadrature grid for overlaps with Gaussian post-selections.
    pub grid: Grid1D,
    /// A packet counts as reaching the pointer when its share of the
    /// numerator magnitude is at least this fraction.
    pub significance: f64,
    /// Scan points below this fraction of the scan maximum are annotated as zeros.
    pub zero_tolerance: f64,
}

impl Default for WeakValueOptions {
    fn default() -> Self {
        Self {
            eps_den: 1e-12,
            convention: DenominatorConvention::FullState,
            grid: Grid1D::new(-40.0, 40.0, 2048).unwrap(),
            significance: 1e-3,
            zero_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowProfile {
    /// Sharp window of total width `width`.
    TopHat,
    /// exp(−(x−w)²/2σ²) with σ = `width`, peak 1.
    Gaussian,
}

/// Spatial window f_w of a pointer; `width == 0` is the point projector |w⟩⟨w|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorWindow {
    pub center: f64,
    pub width: f64,
    pub profile: WindowProfile,
}

impl ProjectorWindow {
    pub fn point(center: f64) -> Self {
        Self {
            center,
            width: 0.0,
            profile: WindowProfile::TopHat,
        }
    }

    pub fn top_hat(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            profile: WindowProfile::TopHat,
        }
    }

    pub fn gaussian(center: f64, sigma: f64) -> Self {
        Self {
            center,
            width: sigma,
            profile: WindowProfile::Gaussian,
        }
    }

    pub fn is_point(&self) -> bool {
        self.width == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width >= 0.0) || !self.center.is_finite() {
            return Err(Error::invalid("window", format!("width must be >= 0, got {}", self.width)));
        }
        Ok(())
    }

    pub fn weight(&self, x: f64) -> f64 {
        let u = x - self.center;
        match self.profile {
            WindowProfile::TopHat => {
                if u.abs() <= 0.5 * self.width {
                    1.0
                } else {
                    0.0
                }
            }
            WindowProfile::Gaussian => (-u * u / (2.0 * self.width * self.width)).exp(),
        }
    }

    /// Interval outside which the weight is zero (or below e^-40).
    pub fn support(&self) -> (f64, f64) {
        let half = match self.profile {
            WindowProfile::TopHat => 0.5 * self.width,
            WindowProfile::Gaussian => 9.0 * self.width,
        };
        (self.center - half, self.center + half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakMeasurementEvent {
    pub window: ProjectorWindow,
    pub t_w: f64,
    /// Integrated coupling strength ∫g(t)dt.
    pub g: f64,
}

impl WeakMeasurementEvent {
    pub fn new(window: ProjectorWindow, t_w: f64, g: f64) -> Self {
        Self { window, t_w, g }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakValueType {
    /// Only the post-selected packet is at the pointer.
    Type1,
    /// Only a packet orthogonal to the post-selection is at the pointer.
    Type2,
    /// Several packets overlap at the pointer.
    Type3,
    /// The pre-selected state is one packet.
    SinglePacket,
}

impl WeakValueType {
    pub fn label(&self) -> &'static str {
        match self {
            WeakValueType::Type1 => "type1",
            WeakValueType::Type2 => "type2",
            WeakValueType::Type3 => "type3",
            WeakValueType::SinglePacket => "single",
        }
    }
}

/// Point projectors give a density (1/length); windows a probability-like number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakValueUnits {
    PerLength,
    Dimensionless,
}

/// Why a weak value vanishes: nothing arrives at the pointer, the packets
/// cancel there, or what the pointer touches cannot reach the post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    Absent,
    DestructiveInterference,
    OrthogonalToPostSelection,
}

impl ZeroKind {
    pub fn label(&self) -> &'static str {
        match self {
            ZeroKind::Absent => "absent",
            ZeroKind::DestructiveInterference => "interference",
            ZeroKind::OrthogonalToPostSelection => "orthogonal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub value: Complex64,
    pub numerator: Complex64,
    pub denominator: Complex64,
    pub wv_type: WeakValueType,
    pub units: WeakValueUnits,
    /// Weighted contribution of each packet to the numerator.
    pub component_numerators: Vec<Complex64>,
    /// c_k⟨χ(t_f)|ψ_k(t_f)⟩ for each packet.
    pub component_denominators: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Packet with the largest overlap with the post-selection.
    pub post_selected: usize,
    /// ψ(w, t_w) and ⟨χ|U|w⟩, point projectors only.
    pub local_amplitude: Option<Complex64>,
    pub backward: Option<Complex64>,
    pub zero: Option<ZeroKind>,
}

impl WeakValueResult {
    /// The weak value written with bare packets: the part of the numerator
    /// carried by packet `interacting` over the overlap of packet
    /// `post_selected`, both stripped of their superposition weights.
    pub fn packet_resolved(&self, interacting: usize, post_selected: usize) -> Complex64 {
        let num = self.component_numerators[interacting] / self.weights[interacting];
        let den = self.component_denominators[post_selected] / self.weights[post_selected];
        num / den
    }
}

/// g·Re(A^w), the first-order displacement of the pointer.
pub fn pointer_shift_prediction(result: &WeakValueResult, g: f64) -> f64 {
    g * result.value.re
}

/// Weak values for one pre-selected state and post-selection; the overlaps
/// at t_f are computed once and shared by every pointer position and time.
pub struct WeakValueEngine<'a, S: FreeState + ?Sized> {
    state: &'a S,
    post: &'a PostSelection,
    opts: &'a WeakValueOptions,
    component_denominators: Vec<Complex64>,
    denominator: Complex64,
    post_selected: usize,
}

impl<'a, S: FreeState + ?Sized> WeakValueEngine<'a, S> {
    pub fn new(state: &'a S, post: &'a PostSelection, opts: &'a WeakValueOptions) -> Result<Self> {
        post.validate()?;
        if state.mass() != post.mass {
            return Err(Error::invalid("m", "post-selection mass differs from the state's"));
        }
        let n = state.component_count();
        let component_denominators: Vec<Complex64> = (0..n).map(|k| post.overlap(state, Some(k), &opts.grid)).collect();
        let post_selected = (0..n)
            .max_by(|&a, &b| component_denominators[a].norm().total_cmp(&component_denominators[b].norm()))
            .unwrap_or(0);
        let denominator = match opts.convention {
            DenominatorConvention::FullState => {
                if n == 1 {
                    component_denominators[0]
                } else {
                    post.overlap(state, None, &opts.grid)
                }
            }
            DenominatorConvention::Component(k) => *component_denominators
                .get(k)
                .ok_or_else(|| Error::invalid("convention", format!("no component {k}")))?,
        };
        if !(denominator.norm() >= opts.eps_den) {
            return Err(Error::NearOrthogonalPostSelection {
                overlap: denominator.norm(),
                floor: opts.eps_den,
            });
        }
        Ok(Self {
            state,
            post,
            opts,
            component_denominators,
            denominator,
            post_selected,
        })
    }

    pub fn denominator(&self) -> Complex64 {
        self.denominator
    }

    pub fn post_selection(&self) -> &PostSelection {
        self.post
    }

    fn check_time(&self, t_w: f64) -> Result<()> {
        if !(t_w > 0.0 && t_w < self.post.t_f) {
            return Err(Error::invalid("t_w", format!("need 0 < t_w < t_f = {}, got {t_w}", self.post.t_f)));
        }
        Ok(())
    }

    fn build(
        &self,
        component_numerators: Vec<Complex64>,
        units: WeakValueUnits,
        local: Option<(Complex64, Complex64)>,
    ) -> WeakValueResult {
        let numerator: Complex64 = component_numerators.iter().sum();
        let n = component_numerators.len();
        let wv_type = if n == 1 {
            WeakValueType::SinglePacket
        } else {
            let total: f64 = component_numerators.iter().map(|c| c.norm()).sum();
            let significant: Vec<usize> = (0..n)
                .filter(|&k| total > 0.0 && component_numerators[k].norm() >= self.opts.significance * total)
                .collect();
            match significant.as_slice() {
                [k] if *k == self.post_selected => WeakValueType::Type1,
                [_] => WeakValueType::Type2,
                _ => WeakValueType::Type3,
            }
        };
        WeakValueResult {
            value: numerator / self.denominator,
            numerator,
            denominator: self.denominator,
            wv_type,
            units,
            component_numerators,
            component_denominators: self.component_denominators.clone(),
            weights: (0..n).map(|k| self.state.component_weight(k)).collect(),
            post_selected: self.post_selected,
            local_amplitude: local.map(|l| l.0),
            backward: local.map(|l| l.1),
            zero: None,
        }
    }

    /// Point projector |w⟩⟨w| at `t_w`.
    pub fn point(&self, w: f64, t_w: f64) -> Result<WeakValueResult> {
        self.check_time(t_w)?;
        let back = backward_amplitude(self.post, w, t_w)?;
        let comps: Vec<Complex64> = (0..self.state.component_count())
            .map(|k| self.state.component_amplitude(k, w, t_w))
            .collect();
        let local: Complex64 = comps.iter().sum();
        let nums = comps.iter().map(|c| back * c).collect();
        Ok(self.build(nums, WeakValueUnits::PerLength, Some((local, back))))
    }

    fn window_numerators(&self, window: &ProjectorWindow, t_w: f64) -> Result<Vec<Complex64>> {
        let (a, b) = window.support();
        let rule = CompositeRule::with_max_panel(a, b, (0.1f64).min((b - a) / 4.0), 8);
        let n = self.state.component_count();
        let mut nums = vec![Complex64::new(0.0, 0.0); n];
        for (&x, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let f = window.weight(x) * wq;
            if f == 0.0 {
                continue;
            }
            let back = backward_amplitude(self.post, x, t_w)? * f;
            for (k, acc) in nums.iter_mut().enumerate() {
                *acc += back * self.state.component_amplitude(k, x, t_w);
            }
        }
        Ok(nums)
    }

    /// Window f_w of finite width, ∫ f_w(x)⟨χ|U|x⟩ψ(x,t_w)dx / denominator.
    pub fn window(&self, window: &ProjectorWindow, t_w: f64) -> Result<WeakValueResult> {
        window.validate()?;
        if window.is_point() {
            return Err(Error::invalid("window.width", "finite-width weak value needs width > 0"));
        }
        self.check_time(t_w)?;
        let nums = self.window_numerators(window, t_w)?;
        Ok(self.build(nums, WeakValueUnits::Dimensionless, None))
    }

    /// Weak value averaged over the switching function:
    /// ∫ g(t) A^w(t) dt / ∫ g(t) dt, the first-order response of a pointer
    /// coupled during `coupling`.
    pub fn time_averaged(&self, window: &ProjectorWindow, coupling: &CouplingWindow) -> Result<WeakValueResult> {
        if !(coupling.t_on >= 0.0 && coupling.t_off < self.post.t_f && coupling.t_on < coupling.t_off) {
            return Err(Error::invalid(
                "coupling",
                format!("switching window [{}, {}] must lie inside (0, t_f)", coupling.t_on, coupling.t_off),
            ));
        }
        // the average depends only on the shape, so g = 0 is allowed
        let shape = CouplingWindow {
            g_peak: 1.0,
            ..*coupling
        };
        let rule = CompositeRule::new(coupling.t_on, coupling.t_off, 8, 8);
        let norm: f64 = rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| w * shape.g(t)).sum();
        let n = self.state.component_count();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let nums = if window.is_point() {
                let back = backward_amplitude(self.post, window.center, t)?;
                (0..n).map(|k| back * self.state.component_amplitude(k, window.center, t)).collect()
            } else {
                self.window_numerators(window, t)?
            };
            let c = w * shape.g(t) / norm;
            acc.iter_mut().zip(nums).for_each(|(a, v)| *a += v * c);
        }
        let units = if window.is_point() {
            WeakValueUnits::PerLength
        } else {
            WeakValueUnits::Dimensionless
        };
        Ok(self.build(acc, units, None))
    }
}

/// Weak value of the point projector at `event.window.center` and `event.t_w`.
pub fn weak_value_projector<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    event: &WeakMeasurementEvent,
    opts: &WeakValueOptions,
) -> Result<WeakValueResult> {
    WeakValueEngine::new(initial, post, opts)?.point(event.window.center, event.t_w)
}

/// Weak value of the finite window `event.window` (width > 0).
pub fn weak_value_finite_width<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    event: &WeakMeasurementEvent,
    opts: &WeakValueOptions,
) -> Result<WeakValueResult> {
    WeakValueEngine::new(initial, post, opts)?.window(&event.window, event.t_w)
}

/// Dispatches on the window width.
pub fn weak_value<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    event: &WeakMeasurementEvent,
    opts: &WeakValueOptions,
) -> Result<WeakValueResult> {
    if event.window.is_point() {
        weak_value_projector(initial, post, event, opts)
    } else {
        weak_value_finite_width(initial, post, event, opts)
    }
}

pub fn weak_value_time_averaged<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    window: &ProjectorWindow,
    coupling: &CouplingWindow,
    opts: &WeakValueOptions,
) -> Result<WeakValueResult> {
    WeakValueEngine::new(initial, post, opts)?.time_averaged(window, coupling)
}
