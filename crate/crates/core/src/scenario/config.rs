use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bipartite::{BoxBasis, EvolveOptions, PointerConfig, SineAxis};
use crate::bohm::IntegratorConfig;
use crate::paths::BundleOptions;
use crate::qcore::{GaussianParams, Grid1D};
use crate::weakval::{CouplingWindow, PostSelection, ProjectorWindow, WeakValueOptions, WeakValueType};
use crate::{Error, Result};

/// Physical parameters shared by every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// The two packets start at ∓x0.
    pub x0: f64,
    pub p0: f64,
    pub d: f64,
    pub m: f64,
    pub t_f: f64,
    /// Detector position on the right.
    pub x_r: f64,
    pub w_a: f64,
    pub w_b: f64,
    pub w_c: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Integrated coupling strength ∫g dt.
    pub g: f64,
    pub pointer_mass: f64,
    /// Width of the Gaussian coupling window f_w.
    pub sigma_w: f64,
    /// Width of the initial pointer amplitude.
    pub sigma_y: f64,
    /// Total duration of the raised-cosine switching function.
    pub coupling_duration: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            x0: 10.0,
            p0: 2.0,
            d: 1.0,
            m: 1.0,
            t_f: 10.0,
            x_r: 10.0,
            w_a: -5.0,
            w_b: 0.0,
            w_c: 5.0,
            t1: 2.5,
            t2: 5.0,
            t3: 7.5,
            g: 0.05,
            pointer_mass: 10.0,
            sigma_w: 0.5,
            sigma_y: 2.0,
            coupling_duration: 0.4,
        }
    }
}

/// Post-selection at t_f, located at `physics.x_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PostConfig {
    #[default]
    PositionDelta,
    GaussianFilter { p_sel: f64, sigma_sel: f64 },
    /// The freely evolved left packet (self post-selection).
    EvolvedPacket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerSlot {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSlot {
    T1,
    T2,
    T3,
}

/// Which pre-selected state a scenario uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// (ψ1 − ψ2)/√2 with ψ1 starting at −x0 moving right.
    TwoPacket,
    /// ψ1 alone.
    LeftPacket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    None,
    Some,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub w_min: f64,
    pub w_max: f64,
    pub n: usize,
    /// 0 for point projectors, otherwise the width of a top-hat window.
    pub width: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            w_min: -30.0,
            w_max: 30.0,
            n: 601,
            width: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    /// The pointer box is y_init ± this.
    pub y_half_width: f64,
    pub n_y: usize,
    /// Points of the grids the marginals and the conditional pointer are sampled on.
    pub sample_points: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            x_min: -40.0,
            x_max: 40.0,
            n_x: 512,
            y_half_width: 15.0,
            n_y: 64,
            sample_points: 1201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub weak: WeakValueOptions,
    pub scan: ScanConfig,
    pub bundle: BundleOptions,
    pub basis: BasisConfig,
    pub evolve: EvolveOptions,
    pub integrator: IntegratorConfig,
}

/// Scenario-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study {
    pub preparation: Preparation,
    pub pointer: PointerSlot,
    pub time: TimeSlot,
    /// Classification the weak value at the selected pointer must have.
    pub expected_type: Option<WeakValueType>,
    /// Coupling strengths of the g-scaling study.
    pub g_values: Vec<f64>,
    /// The g at which the relative error of the shift law is checked.
    pub g_check: f64,
    /// Bohmian y starts relative to the pointer centre.
    pub y_start_offset: f64,
    pub starts_per_packet: usize,
    pub start_spacing: f64,
    /// Sampled trajectories of the one-dimensional ensemble.
    pub n_trajectories: usize,
    /// Whether the two-dimensional ensemble should show midpoint crossings.
    pub crossings: Expectation,
    /// Largest allowed distance from the uncoupled trajectories when no
    /// crossings are expected.
    pub similarity_limit: f64,
    /// Half-width of the matched momentum filter in filter widths.
    pub filter_sigmas: f64,
    /// Also write the final two-dimensional state as a binary dump.
    pub dump_state: bool,
}

impl Default for Study {
    fn default() -> Self {
        Self {
            preparation: Preparation::TwoPacket,
            pointer: PointerSlot::A,
            time: TimeSlot::T1,
            expected_type: None,
            g_values: vec![0.2, 0.1, 0.05, 0.02],
            g_check: 0.05,
            y_start_offset: 0.0,
            starts_per_packet: 11,
            start_spacing: 0.25,
            n_trajectories: 2000,
            crossings: Expectation::None,
            similarity_limit: 0.5,
            filter_sigmas: 3.0,
            dump_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Registry name; may instead be given on the command line.
    pub scenario: Option<String>,
    pub seed: u64,
    pub physics: Physics,
    pub post_selection: PostConfig,
    pub numerics: Numerics,
    pub study: Study,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

/// Prefixes a parameter error with the config section it came from.
fn within<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{section}.{field}"),
            reason,
        },
        other => other,
    })
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        for (f, v) in [
            ("physics.d", p.d),
            ("physics.m", p.m),
            ("physics.t_f", p.t_f),
            ("physics.pointer_mass", p.pointer_mass),
            ("physics.sigma_w", p.sigma_w),
            ("physics.sigma_y", p.sigma_y),
            ("physics.coupling_duration", p.coupling_duration),
        ] {
            positive(f, v)?;
        }
        for (f, v) in [
            ("physics.x0", p.x0),
            ("physics.p0", p.p0),
            ("physics.x_r", p.x_r),
            ("physics.w_a", p.w_a),
            ("physics.w_b", p.w_b),
            ("physics.w_c", p.w_c),
            ("physics.g", p.g),
        ] {
            finite(f, v)?;
        }
        for (f, t) in [("physics.t1", p.t1), ("physics.t2", p.t2), ("physics.t3", p.t3)] {
            if !(t > 0.0 && t < p.t_f) {
                return Err(Error::invalid(f, format!("must lie in (0, t_f = {}), got {t}", p.t_f)));
            }
        }
        within("post_selection", self.post_selection().map(|_| ()))?;
        let n = &self.numerics;
        within("numerics.weak.grid", Grid1D::new(n.weak.grid.x_min, n.weak.grid.x_max, n.weak.grid.n_points).map(|_| ()))?;
        if !(n.weak.eps_den > 0.0) {
            return Err(Error::invalid("numerics.weak.eps_den", "must be > 0"));
        }
        if n.scan.n < 2 || !(n.scan.w_max > n.scan.w_min) {
            return Err(Error::invalid("numerics.scan", "need n >= 2 and w_max > w_min"));
        }
        if !(n.scan.width >= 0.0) {
            return Err(Error::invalid("numerics.scan.width", "must be >= 0"));
        }
        within("numerics.basis", self.basis().map(|_| ()))?;
        if n.basis.sample_points < 2 {
            return Err(Error::invalid("numerics.basis.sample_points", "must be >= 2"));
        }
        positive("numerics.evolve.dt", n.evolve.dt)?;
        within("numerics.integrator", n.integrator.validate())?;
        if n.bundle.n_samples == 0 {
            return Err(Error::invalid("numerics.bundle.n_samples", "must be >= 1"));
        }
        let s = &self.study;
        if s.g_values.len() < 2 || s.g_values.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::invalid("study.g_values", "need at least two values, all > 0"));
        }
        positive("study.g_check", s.g_check)?;
        positive("study.start_spacing", s.start_spacing)?;
        positive("study.similarity_limit", s.similarity_limit)?;
        positive("study.filter_sigmas", s.filter_sigmas)?;
        finite("study.y_start_offset", s.y_start_offset)?;
        if s.starts_per_packet == 0 || s.n_trajectories == 0 {
            return Err(Error::invalid("study", "trajectory counts must be >= 1"));
        }
        Ok(())
    }

    pub fn left_packet(&self) -> Result<GaussianParams> {
        let p = &self.physics;
        within("physics", GaussianParams::new(-p.x0, p.p0, p.d, p.m))
    }

    pub fn post_selection(&self) -> Result<PostSelection> {
        let p = &self.physics;
        match self.post_selection {
            PostConfig::PositionDelta => PostSelection::position_delta(p.x_r, p.t_f, p.m),
            PostConfig::GaussianFilter { p_sel, sigma_sel } => {
                PostSelection::gaussian_filter(p.x_r, p_sel, sigma_sel, p.t_f, p.m)
            }
            PostConfig::EvolvedPacket => PostSelection::evolved(self.left_packet()?, p.t_f),
        }
    }

    pub fn pointer_position(&self) -> f64 {
        match self.study.pointer {
            PointerSlot::A => self.physics.w_a,
            PointerSlot::B => self.physics.w_b,
            PointerSlot::C => self.physics.w_c,
        }
    }

    pub fn coupling_time(&self) -> f64 {
        match self.study.time {
            TimeSlot::T1 => self.physics.t1,
            TimeSlot::T2 => self.physics.t2,
            TimeSlot::T3 => self.physics.t3,
        }
    }

    /// The pointer at the selected slot with integrated strength `g`, at
    /// rest and centred on its own position.
    pub fn pointer(&self, g: f64) -> PointerConfig {
        let p = &self.physics;
        let w = self.pointer_position();
        PointerConfig {
            mass: p.pointer_mass,
            y_init: w,
            sigma_y: p.sigma_y,
            coupling: CouplingWindow::from_integrated(g, self.coupling_time(), p.coupling_duration),
            window: ProjectorWindow::gaussian(w, p.sigma_w),
        }
    }

    pub fn basis(&self) -> Result<BoxBasis> {
        let b = &self.numerics.basis;
        let y = self.pointer_position();
        BoxBasis::new(
            SineAxis::new(b.x_min, b.x_max, b.n_x)?,
            SineAxis::new(y - b.y_half_width, y + b.y_half_width, b.n_y)?,
        )
    }
}

/// Recursively overlays `patch` onto `base`; objects merge key by key, any
/// other value replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Applies `key.path=value`. The value is read as JSON when it parses, and
/// as a plain string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("bad override key `{path}`")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = doc;
    for key in path.split('.') {
        if !node.is_object() {
            return Err(Error::Config(format!("override `{path}` descends into a non-object")));
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(key.to_string())
            .or_insert(Value::Object(Default::default()));
    }
    *node = value;
    Ok(())
}

/// Parses a user config file. Empty input means all defaults.
pub fn parse_config_text(text: &str) -> Result<Value> {
    if text.trim().is_empty() {
        return Ok(Value::Object(Default::default()));
    }
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if !v.is_object() {
        return Err(Error::Config("top level must be a JSON object".into()));
    }
    Ok(v)
}

/// Turns a merged document into a checked config.
pub fn resolve(doc: Value) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
