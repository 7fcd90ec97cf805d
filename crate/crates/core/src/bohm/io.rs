use std::io::Write;

use super::{BohmTrajectory, EnsembleSummary};
use crate::qcore::fmt_num;
use crate::Result;

/// `traj_id,t,x[,y],crossed` rows; `crossed` is 1 from the first sample past
/// the midpoint on.
pub fn write_trajectory_csv<W: Write>(trajs: &[BohmTrajectory], comments: &[String], out: &mut W) -> Result<()> {
    let two_d = trajs.iter().any(|t| t.samples.iter().any(|p| p.y.is_some()));
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", if two_d { "traj_id,t,x,y,crossed" } else { "traj_id,t,x,crossed" })?;
    for (id, traj) in trajs.iter().enumerate() {
        let sign = traj.start().x.signum();
        let mut crossed = false;
        for p in &traj.samples {
            crossed |= p.x != 0.0 && sign != 0.0 && p.x.signum() != sign;
            let flag = u8::from(crossed);
            match (two_d, p.y) {
                (true, y) => writeln!(
                    out,
                    "{id},{},{},{},{flag}",
                    fmt_num(p.t),
                    fmt_num(p.x),
                    fmt_num(y.unwrap_or(f64::NAN))
                )?,
                (false, _) => writeln!(out, "{id},{},{},{flag}", fmt_num(p.t), fmt_num(p.x))?,
            }
        }
    }
    Ok(())
}

pub fn write_summary_json<W: Write>(summary: &EnsembleSummary, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, summary)?;
    writeln!(out)?;
    Ok(())
}
