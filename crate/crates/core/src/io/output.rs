use std::io::Write;

use super::sensor_log::{fmt6, fmt_opt};
use crate::error::Result;
use crate::fusion::FusionOutput;

pub const TRACE_HEADER: &str = "t,fused_m,keypoint_m,depth_m,gate_open,cov_trace";
pub const PLOT_HEADER: &str = "t,panel,series,value_m";

pub fn write_trace<W: Write>(mut w: W, outputs: &[FusionOutput]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for o in outputs {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt6(o.timestamp),
            fmt_opt(o.fused_cb),
            fmt_opt(o.monocular_cb),
            fmt_opt(o.depth_cb),
            u8::from(o.gate_open),
            fmt_opt(o.covariance_trace)
        )?;
    }
    Ok(())
}

/// Long-form series: a `distance` panel with truth and the three estimates,
/// and an `error` panel with each estimate minus truth.
pub fn write_plotdata<W: Write>(mut w: W, outputs: &[FusionOutput], truth: &[Option<f64>]) -> Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for (o, gt) in outputs.iter().zip(truth) {
        let t = fmt6(o.timestamp);
        let series = [("keypoint", o.monocular_cb), ("depth", o.depth_cb), ("fused", o.fused_cb)];
        if let Some(g) = gt {
            writeln!(w, "{t},distance,truth,{}", fmt6(*g))?;
        }
        for (name, v) in series {
            if let Some(v) = v {
                writeln!(w, "{t},distance,{name},{}", fmt6(v))?;
            }
        }
        if let Some(g) = gt {
            for (name, v) in series {
                if let Some(v) = v {
                    writeln!(w, "{t},error,{name},{}", fmt6(v - g))?;
                }
            }
        }
    }
    Ok(())
}
