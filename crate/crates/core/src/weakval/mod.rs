//! Weak values of position projectors between a freely evolving pre-selected
//! state and a post-selection at `t_f`.
//!
//! For a pointer coupled at `t_w` to the window `f_w` around `w`,
//!
//! ```text
//! A^w = ∫ f_w(x) ⟨χ(t_f)|U(t_f,t_w)|x⟩ ψ(x,t_w) dx / ⟨χ(t_f)|ψ(t_f)⟩
//! ```
//!
//! The numerator is kept resolved by packet so a result can be classified by
//! which packet reaches the pointer (types 1–3) and re-expressed with the
//! single-packet denominators used when only one packet is post-selected.

mod coupling;
mod post;
mod scan;
mod value;

pub use coupling::CouplingWindow;
pub use post::{backward_amplitude, backward_amplitude_quadrature, PostSelection, PostSelectionKind};
pub use scan::{scan_integral, weak_value_scan, weak_value_scan_with, write_scan_csv, ScanPoint};
pub use value::{
    pointer_shift_prediction, weak_value, weak_value_finite_width, weak_value_projector, weak_value_time_averaged,
    DenominatorConvention, ProjectorWindow, WeakMeasurementEvent, WeakValueEngine, WeakValueOptions,
    WeakValueResult, WeakValueType, WeakValueUnits, WindowProfile, ZeroKind,
};
