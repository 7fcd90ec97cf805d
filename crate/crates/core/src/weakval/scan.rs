use std::io::Write;

use num_complex::Complex64;

use super::{pointer_shift_prediction, PostSelection, ProjectorWindow, WeakValueEngine, WeakValueOptions, WeakValueResult, ZeroKind};
use crate::qcore::{fmt_num, FreeState};
use crate::quad::trapezoid;
use crate::{Exec, Result};

#[derive(Debug)]
pub struct ScanPoint {
    pub w: f64,
    pub t_w: f64,
    pub result: Result<WeakValueResult>,
}

/// Weak values at each pointer position in `ws` at time `t_w`.
/// `window_width == 0` scans the point projector; otherwise a top-hat window.
pub fn weak_value_scan<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    t_w: f64,
    window_width: f64,
    ws: &[f64],
    opts: &WeakValueOptions,
) -> Result<Vec<ScanPoint>> {
    weak_value_scan_with(initial, post, t_w, window_width, ws, opts, Exec::default())
}

/// As [`weak_value_scan`] with an explicit execution policy. Fails only when
/// the denominator itself is unusable; per-point failures stay in the points.
pub fn weak_value_scan_with<S: FreeState + ?Sized>(
    initial: &S,
    post: &PostSelection,
    t_w: f64,
    window_width: f64,
    ws: &[f64],
    opts: &WeakValueOptions,
    exec: Exec,
) -> Result<Vec<ScanPoint>> {
    let engine = WeakValueEngine::new(initial, post, opts)?;
    let results = exec.map(ws, |&w| {
        if window_width == 0.0 {
            engine.point(w, t_w)
        } else {
            engine.window(&ProjectorWindow::top_hat(w, window_width), t_w)
        }
    });
    let mut points: Vec<ScanPoint> = ws
        .iter()
        .zip(results)
        .map(|(&w, result)| ScanPoint { w, t_w, result })
        .collect();
    annotate_zeros(&mut points, opts.zero_tolerance);
    Ok(points)
}

fn annotate_zeros(points: &mut [ScanPoint], tol: f64) {
    let ok = || points.iter().filter_map(|p| p.result.as_ref().ok());
    let max_of = |f: &dyn Fn(&WeakValueResult) -> f64| ok().map(f).fold(0.0_f64, f64::max);
    let value_max = max_of(&|r| r.value.norm());
    let comp_max = max_of(&|r| r.component_numerators.iter().map(|c| c.norm()).fold(0.0, f64::max));
    let local_max = max_of(&|r| r.local_amplitude.map_or(0.0, |a| a.norm()));
    let back_max = max_of(&|r| r.backward.map_or(0.0, |a| a.norm()));
    if value_max == 0.0 {
        return;
    }
    for p in points.iter_mut() {
        let Ok(r) = p.result.as_mut() else { continue };
        if r.value.norm() >= tol * value_max {
            continue;
        }
        let largest = r.component_numerators.iter().map(|c| c.norm()).fold(0.0, f64::max);
        r.zero = Some(match (r.local_amplitude, r.backward) {
            (Some(local), Some(back)) => {
                if local.norm() >= tol * local_max && back.norm() < tol * back_max {
                    ZeroKind::OrthogonalToPostSelection
                } else if largest >= tol * comp_max {
                    ZeroKind::DestructiveInterference
                } else {
                    ZeroKind::Absent
                }
            }
            _ if largest >= tol * comp_max => ZeroKind::DestructiveInterference,
            _ => ZeroKind::Absent,
        });
    }
}

/// ∫ A^w dw over the scan by the trapezoidal rule (uniform spacing assumed).
pub fn scan_integral(points: &[ScanPoint]) -> Result<Complex64> {
    if points.len() < 2 {
        return Err(crate::Error::EmptySupport("scan needs at least two points".into()));
    }
    let dw = points[1].w - points[0].w;
    let mut re = Vec::with_capacity(points.len());
    let mut im = Vec::with_capacity(points.len());
    for p in points {
        let v = p.result.as_ref().map_err(|e| crate::Error::Mismatch(format!("scan point w={} failed: {e}", p.w)))?;
        re.push(v.value.re);
        im.push(v.value.im);
    }
    Ok(Complex64::new(trapezoid(&re, dw), trapezoid(&im, dw)))
}

/// Writes `w,t_w,re_A,im_A,abs_A,type,shift_prediction` with `#` comment lines.
/// Failed points are written as comments.
pub fn write_scan_csv<W: Write>(points: &[ScanPoint], g: f64, comments: &[String], out: &mut W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "w,t_w,re_A,im_A,abs_A,type,shift_prediction")?;
    for p in points {
        match &p.result {
            Ok(r) => {
                let mut kind = r.wv_type.label().to_string();
                if let Some(z) = r.zero {
                    kind.push_str("|zero=");
                    kind.push_str(z.label());
                }
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_num(p.w),
                    fmt_num(p.t_w),
                    fmt_num(r.value.re),
                    fmt_num(r.value.im),
                    fmt_num(r.value.norm()),
                    kind,
                    fmt_num(pointer_shift_prediction(r, g))
                )?;
            }
            Err(e) => writeln!(out, "# w={} skipped: {e}", fmt_num(p.w))?,
        }
    }
    Ok(())
}
