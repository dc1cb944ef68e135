//! Workload trace ingestion and slot aggregation.
//!
//! The trace schema is a two-column CSV with header `submit_time,site_id`:
//! seconds since the epoch start and an opaque site identifier. Converting
//! from grid-archive-style records means projecting each job's submission
//! timestamp and execution-site field onto those two columns — no other
//! fields are consumed.
//!
//! Aggregation counts arrivals per `(slot, SBS)` with a fixed slot length;
//! contexts are then derived per slot and SBS as
//! `x₁ = (slot start mod 86400) / 86400` (time of day) and
//! `x₂ = previous day's demand total / running max daily total` (0 on the
//! first day, clamped to `[0, 1]`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::estimator::{CellIndex, Partition};

const SECONDS_PER_DAY: u64 = 86_400;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("trace {path} line {line}: {reason}")]
    Malformed {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("trace {0} contains no events")]
    Empty(String),

    #[error("invalid slot length {0}; must be > 0")]
    BadSlotLength(u64),

    #[error("trace mode requires context_dim = 2, got {0}")]
    BadContextDim(usize),
}

/// One task arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    /// Seconds since the epoch start; non-negative.
    pub submit_time: f64,
    pub site_id: String,
}

/// A loaded trace: events sorted by submission time plus the distinct sites.
#[derive(Debug, Clone)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub sites: BTreeSet<String>,
}

/// Load and sort a trace CSV. Malformed rows (bad column count, unparsable
/// or negative time) abort with the offending line number.
pub fn load_trace(path: &Path) -> Result<Trace, TraceError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => TraceError::Io {
                path: display.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => TraceError::Malformed {
                path: display.clone(),
                line: 1,
                reason: e.to_string(),
            },
        })?;

    let mut events = Vec::new();
    let mut sites = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| TraceError::Malformed {
            path: display.clone(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(TraceError::Malformed {
                path: display.clone(),
                line,
                reason: format!("expected 2 columns, got {}", record.len()),
            });
        }
        let submit_time: f64 = record[0].parse().map_err(|e| TraceError::Malformed {
            path: display.clone(),
            line,
            reason: format!("bad submit_time '{}': {e}", &record[0]),
        })?;
        if !submit_time.is_finite() || submit_time < 0.0 {
            return Err(TraceError::Malformed {
                path: display.clone(),
                line,
                reason: format!("submit_time {submit_time} must be finite and >= 0"),
            });
        }
        let site_id = record[1].to_string();
        sites.insert(site_id.clone());
        events.push(TraceEvent {
            submit_time,
            site_id,
        });
    }
    if events.is_empty() {
        return Err(TraceError::Empty(display));
    }
    events.sort_by(|a, b| a.submit_time.total_cmp(&b.submit_time));
    Ok(Trace { events, sites })
}

/// Per-slot demand counts and contexts.
#[derive(Debug, Clone)]
pub struct SlotSeries {
    pub n_sbs: usize,
    pub slot_seconds: u64,
    /// `demands[t][n]` = arrivals at SBS `n` during slot `t`.
    pub demands: Vec<Vec<f64>>,
    /// `contexts[t][n]` ∈ `[0,1]^D`; filled by [`build_contexts`].
    pub contexts: Vec<Vec<Vec<f64>>>,
}

impl SlotSeries {
    pub fn n_slots(&self) -> usize {
        self.demands.len()
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().flatten().sum()
    }
}

/// Site-ids that had arrivals but no SBS mapping, with their event counts.
#[derive(Debug, Clone, Default)]
pub struct AggregateReport {
    pub total_events: u64,
    pub mapped_events: u64,
    pub unmapped: BTreeMap<String, u64>,
}

/// Count arrivals per `(slot, SBS)`. Slots are contiguous from 0 through the
/// last event's slot; pairs without arrivals stay 0. Events whose site is
/// not in `site_map` are reported, not counted.
pub fn aggregate_slots(
    trace: &Trace,
    slot_seconds: u64,
    site_map: &BTreeMap<String, usize>,
    n_sbs: usize,
) -> Result<(SlotSeries, AggregateReport), TraceError> {
    if slot_seconds == 0 {
        return Err(TraceError::BadSlotLength(slot_seconds));
    }
    let mut report = AggregateReport::default();
    let last_slot = trace
        .events
        .iter()
        .map(|e| (e.submit_time / slot_seconds as f64).floor() as usize)
        .max()
        .unwrap_or(0);
    let mut demands = vec![vec![0.0; n_sbs]; last_slot + 1];
    for event in &trace.events {
        report.total_events += 1;
        let Some(&n) = site_map.get(&event.site_id) else {
            *report.unmapped.entry(event.site_id.clone()).or_insert(0) += 1;
            continue;
        };
        if n >= n_sbs {
            *report.unmapped.entry(event.site_id.clone()).or_insert(0) += 1;
            continue;
        }
        let slot = (event.submit_time / slot_seconds as f64).floor() as usize;
        demands[slot][n] += 1.0;
        report.mapped_events += 1;
    }
    Ok((
        SlotSeries {
            n_sbs,
            slot_seconds,
            demands,
            contexts: Vec::new(),
        },
        report,
    ))
}

/// Default site map: distinct sites in sorted order onto indices `0..`.
pub fn default_site_map(trace: &Trace) -> BTreeMap<String, usize> {
    trace
        .sites
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect()
}

/// Fill the two context features per (slot, SBS): time of day and the
/// previous calendar day's demand normalized by the running max daily total.
pub fn build_contexts(series: &mut SlotSeries, dim: usize) -> Result<(), TraceError> {
    if dim != 2 {
        return Err(TraceError::BadContextDim(dim));
    }
    let n_slots = series.n_slots();
    let n_sbs = series.n_sbs;
    let slot_seconds = series.slot_seconds;

    // Daily totals per SBS, indexed by calendar day.
    let n_days = if n_slots == 0 {
        0
    } else {
        ((n_slots as u64 - 1) * slot_seconds / SECONDS_PER_DAY + 1) as usize
    };
    let mut daily = vec![vec![0.0; n_sbs]; n_days];
    for (t, row) in series.demands.iter().enumerate() {
        let day = (t as u64 * slot_seconds / SECONDS_PER_DAY) as usize;
        for (n, &d) in row.iter().enumerate() {
            daily[day][n] += d;
        }
    }
    // running_max[day][n] = max daily total of SBS n over days 0..=day.
    let mut running_max = daily.clone();
    for day in 1..n_days {
        for n in 0..n_sbs {
            running_max[day][n] = running_max[day][n].max(running_max[day - 1][n]);
        }
    }

    series.contexts = (0..n_slots)
        .map(|t| {
            let start = t as u64 * slot_seconds;
            let time_of_day = (start % SECONDS_PER_DAY) as f64 / SECONDS_PER_DAY as f64;
            let day = (start / SECONDS_PER_DAY) as usize;
            (0..n_sbs)
                .map(|n| {
                    let prev_demand = if day == 0 {
                        0.0
                    } else {
                        let max = running_max[day - 1][n];
                        if max > 0.0 {
                            (daily[day - 1][n] / max).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    };
                    vec![time_of_day, prev_demand]
                })
                .collect()
        })
        .collect();
    Ok(())
}

/// Hindsight expected demand per (SBS, context cell): the empirical mean
/// over all slots whose context lands in the cell, computed in one
/// preliminary pass. This is the trace-mode stand-in for the true means the
/// oracle is entitled to.
pub fn cell_means(
    series: &SlotSeries,
    partition: &Partition,
) -> Vec<BTreeMap<CellIndex, f64>> {
    let mut sums: Vec<BTreeMap<CellIndex, (f64, u64)>> = vec![BTreeMap::new(); series.n_sbs];
    for (t, row) in series.demands.iter().enumerate() {
        for (n, &d) in row.iter().enumerate() {
            let cell = partition
                .locate(&series.contexts[t][n])
                .expect("trace contexts are normalized to [0,1]");
            let entry = sums[n].entry(cell).or_insert((0.0, 0));
            entry.0 += d;
            entry.1 += 1;
        }
    }
    sums.into_iter()
        .map(|m| {
            m.into_iter()
                .map(|(cell, (sum, count))| (cell, sum / count as f64))
                .collect()
        })
        .collect()
}
