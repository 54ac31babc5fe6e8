//! Post-hoc statistics over trajectory logs.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::nav::TrajectoryLog;

/// Fraction of the series range used as the default prominence threshold.
pub const DEFAULT_PROMINENCE_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpikeEvent {
    pub index: usize,
    pub time: f64,
    pub lambda_peak: f64,
    pub prominence: f64,
}

fn check_series(series: &[(f64, f64)]) -> Result<()> {
    if series.is_empty() {
        return Err(invalid("series", "must be nonempty"));
    }
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("series", "times must be strictly increasing"));
    }
    if series.iter().any(|(_, l)| !l.is_finite()) {
        return Err(invalid("series", "values must be finite"));
    }
    Ok(())
}

/// `DEFAULT_PROMINENCE_FRACTION · (max - min)`.
pub fn default_prominence_threshold(series: &[(f64, f64)]) -> f64 {
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, l)| {
            (lo.min(l), hi.max(l))
        });
    DEFAULT_PROMINENCE_FRACTION * (hi - lo).max(0.0)
}

/// Interior local maxima whose prominence exceeds `prominence_threshold`.
///
/// A plateau counts as one maximum located at its middle sample. Prominence
/// is the peak height minus the larger of the two flanking minima, each
/// taken over the stretch between the peak and the nearest strictly higher
/// sample on that side (or the series end).
pub fn detect_spikes(series: &[(f64, f64)], prominence_threshold: f64) -> Result<Vec<SpikeEvent>> {
    check_series(series)?;
    let values: Vec<f64> = series.iter().map(|&(_, l)| l).collect();
    let n = values.len();
    let mut events = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = values[i];
                let mid = (i + j) / 2;
                let mut left_min = peak;
                for &v in values[..i].iter().rev() {
                    if v > peak {
                        break;
                    }
                    left_min = left_min.min(v);
                }
                let mut right_min = peak;
                for &v in &values[j + 1..] {
                    if v > peak {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                let prominence = peak - left_min.max(right_min);
                if prominence > prominence_threshold && prominence > 0.0 {
                    events.push(SpikeEvent {
                        index: mid,
                        time: series[mid].0,
                        lambda_peak: peak,
                        prominence,
                    });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(events)
}

/// Heading angle entering each step: `start_heading` followed by the heading
/// logged after every step.
pub fn heading_angles(log: &TrajectoryLog, start_heading: f64) -> Vec<f64> {
    std::iter::once(start_heading)
        .chain(log.records.iter().map(|r| r.heading.y.atan2(r.heading.x)))
        .collect()
}

fn wrap_angle(a: f64) -> f64 {
    let turn = std::f64::consts::TAU;
    a - turn * ((a + std::f64::consts::PI) / turn).floor()
}

/// Absolute heading change `(before, after)` over the `window` motion steps
/// on either side of step `index`, or `None` if either window leaves the log.
pub fn heading_change_around(
    log: &TrajectoryLog,
    start_heading: f64,
    index: usize,
    window: usize,
) -> Option<(f64, f64)> {
    let angles = heading_angles(log, start_heading);
    if index < window || index + window >= angles.len() {
        return None;
    }
    let before = wrap_angle(angles[index] - angles[index - window]).abs();
    let after = wrap_angle(angles[index + window] - angles[index]).abs();
    Some((before, after))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionStats {
    pub runs: usize,
    pub counts: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub none_count: usize,
    pub none_rate: f64,
}

/// Empirical distribution of the reached target over `logs`.
pub fn selection_stats(logs: &[TrajectoryLog], n_targets: usize) -> Result<SelectionStats> {
    selection_stats_from(logs.iter().map(|l| l.reached), n_targets)
}

/// [`selection_stats`] over bare outcomes.
pub fn selection_stats_from(
    outcomes: impl IntoIterator<Item = Option<usize>>,
    n_targets: usize,
) -> Result<SelectionStats> {
    let mut counts = vec![0usize; n_targets];
    let mut none_count = 0;
    let mut runs = 0;
    for outcome in outcomes {
        runs += 1;
        match outcome {
            Some(i) if i < n_targets => counts[i] += 1,
            Some(i) => {
                return Err(invalid(
                    "logs",
                    format!("reached index {i} out of range for {n_targets} targets"),
                ))
            }
            None => none_count += 1,
        }
    }
    if runs == 0 {
        return Err(invalid("logs", "must be nonempty"));
    }
    let total = runs as f64;
    Ok(SelectionStats {
        runs,
        frequencies: counts.iter().map(|&c| c as f64 / total).collect(),
        counts,
        none_count,
        none_rate: none_count as f64 / total,
    })
}
