use auv_dynamics::KGF;
use serde::{Deserialize, Serialize};

use crate::SimLog;

/// Error band used for the reported settling times, m.
pub const SETTLING_BAND_M: f64 = 0.01;
/// Posterior level counted as identification.
pub const IDENTIFIED: f64 = 0.9;
/// Window after a fault event over which pulses and thrust peaks are taken, s.
pub const EVENT_WINDOW_S: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultEventMetrics {
    pub time_s: f64,
    /// 1-based model number of the fault that starts here, 0 if unmodelled.
    pub true_model: usize,
    /// Delay from the event until the true model's weight reaches 0.9.
    pub identification_delay_s: Option<f64>,
    /// Peak planar deviation from the tracking error held at the event.
    pub pulse_m: f64,
    /// Per-thruster peak change of applied force from its value at the event.
    pub peak_adjustment_kgf: [f64; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// North, east, down.
    pub rms_m: [f64; 3],
    /// RMS over the final tenth of the run.
    pub steady_state_rms_m: [f64; 3],
    /// Time after which each axis stays inside `SETTLING_BAND_M`.
    pub settling_time_s: [Option<f64>; 3],
    /// First time each model's weight reaches 0.9.
    pub convergence_time_s: Vec<Option<f64>>,
    pub fault_events: Vec<FaultEventMetrics>,
    /// Largest north error after the north axis has settled, mm.
    pub north_settled_max_mm: Option<f64>,
}

/// Earliest sample time after which `|e|` never leaves `band`.
pub fn settling_time(t: &[f64], e: &[f64], band: f64) -> Option<f64> {
    let mut first = None;
    for (i, v) in e.iter().enumerate().rev() {
        if v.abs() > band || !v.is_finite() {
            break;
        }
        first = Some(i);
    }
    first.map(|i| t[i])
}

/// Earliest sample time at which `p` reaches `level`.
pub fn crossing_time(t: &[f64], p: &[f64], level: f64) -> Option<f64> {
    p.iter().position(|v| *v >= level).map(|i| t[i])
}

/// Largest planar distance, over `[t_s, t_s + window]`, between the tracking
/// error and the error held at `t_s`.
pub fn pulse_deviation(log: &SimLog, t_s: f64, window: f64) -> f64 {
    let Some(i0) = log.records.iter().position(|r| r.t >= t_s - 1e-9) else {
        return 0.0;
    };
    let e0 = log.records[i0].error;
    log.records[i0..]
        .iter()
        .take_while(|r| r.t <= t_s + window + 1e-9)
        .map(|r| (r.error[0] - e0[0]).hypot(r.error[1] - e0[1]))
        .fold(0.0, f64::max)
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

pub fn compute_metrics(log: &SimLog) -> Metrics {
    let recs = &log.records;
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let axis = |a: usize| -> Vec<f64> { recs.iter().map(|r| r.error[a]).collect() };
    let errs = [axis(0), axis(1), axis(2)];
    let tail = recs.len() - recs.len() / 10;
    let tail = tail.min(recs.len().saturating_sub(1));
    let m = recs.first().map_or(0, |r| r.posterior.len());

    let settling_time_s = [0, 1, 2].map(|a| settling_time(&t, &errs[a], SETTLING_BAND_M));
    let north_settled_max_mm = settling_time_s[0].map(|ts| {
        recs.iter().filter(|r| r.t >= ts).map(|r| r.error[0].abs()).fold(0.0, f64::max) * 1e3
    });

    let fault_events = log
        .fault_times
        .iter()
        .map(|&ts| {
            let i0 = recs.iter().position(|r| r.t >= ts - 1e-9).unwrap_or(recs.len() - 1);
            // the record at the event time was produced by the previous fault;
            // the new truth shows up on the next one
            let true_model = recs.get(i0 + 1).map_or(recs[i0].true_model, |r| r.true_model);
            let identification_delay_s = (true_model >= 1).then_some(()).and_then(|_| {
                let p: Vec<f64> = recs[i0..].iter().map(|r| r.posterior[true_model - 1]).collect();
                crossing_time(&t[i0..], &p, IDENTIFIED).map(|tc| tc - recs[i0].t)
            });
            let base = recs[i0].applied;
            let mut peak = [0.0f64; 8];
            for r in recs[i0..].iter().take_while(|r| r.t <= ts + EVENT_WINDOW_S + 1e-9) {
                for c in 0..8 {
                    let d = (r.applied[c] - base[c]) / KGF;
                    if d.abs() > peak[c].abs() {
                        peak[c] = d;
                    }
                }
            }
            FaultEventMetrics {
                time_s: ts,
                true_model,
                identification_delay_s,
                pulse_m: pulse_deviation(log, ts, EVENT_WINDOW_S),
                peak_adjustment_kgf: peak,
            }
        })
        .collect();

    Metrics {
        rms_m: [0, 1, 2].map(|a| rms(errs[a].iter().copied())),
        steady_state_rms_m: [0, 1, 2].map(|a| rms(errs[a][tail..].iter().copied())),
        settling_time_s,
        convergence_time_s: (0..m)
            .map(|i| {
                let p: Vec<f64> = recs.iter().map(|r| r.posterior[i]).collect();
                crossing_time(&t, &p, IDENTIFIED)
            })
            .collect(),
        fault_events,
        north_settled_max_mm,
    }
}
