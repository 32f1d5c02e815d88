use serde::{Deserialize, Serialize};

use super::TimeTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimeOptions {
    /// Width of the moving-maximum envelope (s); 0 fits the raw samples.
    pub envelope_width: f64,
    /// Baseline subtracted before the logarithm.
    pub floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    /// Decay time (s).
    pub tau: f64,
    /// Fitted envelope at `t_start`.
    pub amplitude: f64,
    /// RMS residual of ln(envelope).
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares fit of ln(envelope − floor) = ln a − (t − t_start)/τ over
/// `[t_start, t_stop]`.
pub fn fit_lifetime(trace: &TimeTrace, t_start: f64, t_stop: f64, opts: &LifetimeOptions) -> Result<LifetimeFit> {
    let v = match &trace.data {
        super::TraceData::Amplitude(v) => v,
        other => return Err(Error::WrongTraceKind { expected: "amplitude", found: other.kind_name() }),
    };
    if !(t_stop > t_start) {
        return Err(Error::InvalidParameter("fit window must have t_stop > t_start".into()));
    }
    let first = ((t_start - trace.t0) / trace.dt - 1e-9).ceil();
    let last = ((t_stop - trace.t0) / trace.dt + 1e-9).floor();
    if first < 0.0 || last >= v.len() as f64 {
        return Err(Error::InvalidParameter("fit window extends outside the trace".into()));
    }
    let (first, last) = (first as usize, last as usize);
    let half = (opts.envelope_width / trace.dt / 2.0).round() as usize;
    // only samples whose full envelope window lies inside the trace
    let lo = first.max(half);
    let hi = last.min(v.len().saturating_sub(half + 1));
    if hi < lo || hi - lo + 1 < 10 {
        return Err(Error::InvalidParameter("fit window holds fewer than 10 usable samples".into()));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let env = v[k - half..=k + half].iter().fold(f64::NEG_INFINITY, |m, x| m.max(x.abs())) - opts.floor;
        if !(env > 0.0) {
            return Err(Error::FitRejected(format!("non-positive envelope at t = {:e} s", trace.time(k))));
        }
        xs.push(trace.time(k) - t_start);
        ys.push(env.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let span = xs[xs.len() - 1] - xs[0];
    if !(slope < 0.0) || -slope * span < 1e-9 {
        return Err(Error::FitRejected("envelope does not decay over the window".into()));
    }
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LifetimeFit { tau: -1.0 / slope, amplitude: intercept.exp(), residual, samples: xs.len() })
}
