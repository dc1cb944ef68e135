//! Delay and utility model of the edge rental system.
//!
//! Capacities are expressed in *rental units* (e.g. virtual machines); each
//! unit corresponds to [`SbsConfig::unit_hz`] cycles per second. Prices and
//! admission caps are non-decreasing maps over the unit value, so the default
//! tariff `w(f) = f` charges one budget unit per rented unit. Renting nothing
//! costs nothing and serves nothing: `w(0) = 0` and `cap(0) = 0` by
//! definition.
//!
//! Delays are clamped at [`TaskProfile::max_delay`] — devices fall back to
//! local processing once a task would take longer than that, so no service
//! path can exceed it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from model construction and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("no capacity rented: edge delay is undefined for f = 0")]
    NoCapacityRented,

    #[error("dimension mismatch: expected {expected} SBS entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("SBS index {0} out of range")]
    SbsOutOfRange(usize),
}

fn require(cond: bool, field: &'static str, reason: &str) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::Invalid {
            field,
            reason: reason.to_string(),
        })
    }
}

// ---------------------------------------------------------------------------
// Task profile and channel
// ---------------------------------------------------------------------------

/// Per-task workload description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskProfile {
    /// Input data size of one task, in bits.
    pub input_bits: f64,
    /// CPU cycles required to process one task.
    pub cpu_cycles: f64,
    /// Ceiling on any per-task service delay, in seconds.
    pub max_delay: f64,
}

impl TaskProfile {
    pub fn new(input_bits: f64, cpu_cycles: f64, max_delay: f64) -> Result<Self, ModelError> {
        require(input_bits > 0.0, "input_bits", "must be > 0")?;
        require(cpu_cycles > 0.0, "cpu_cycles", "must be > 0")?;
        require(max_delay > 0.0, "max_delay", "must be > 0")?;
        Ok(Self {
            input_bits,
            cpu_cycles,
            max_delay,
        })
    }
}

/// Wireless channel description for computing an expected uplink rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Allocated bandwidth, Hz.
    pub bandwidth: f64,
    /// Transmit power, W.
    pub tx_power: f64,
    /// Channel gain (dimensionless).
    pub channel_gain: f64,
    /// Inter-cell interference power, W.
    pub inter_cell: f64,
    /// Intra-cell interference power, W.
    pub intra_cell: f64,
    /// Noise power σ², W.
    pub noise: f64,
}

impl ChannelParams {
    pub fn new(
        bandwidth: f64,
        tx_power: f64,
        channel_gain: f64,
        inter_cell: f64,
        intra_cell: f64,
        noise: f64,
    ) -> Result<Self, ModelError> {
        require(bandwidth > 0.0, "bandwidth", "must be > 0")?;
        require(noise > 0.0, "noise", "must be > 0")?;
        require(tx_power >= 0.0, "tx_power", "must be >= 0")?;
        require(channel_gain >= 0.0, "channel_gain", "must be >= 0")?;
        require(inter_cell >= 0.0, "inter_cell", "must be >= 0")?;
        require(intra_cell >= 0.0, "intra_cell", "must be >= 0")?;
        Ok(Self {
            bandwidth,
            tx_power,
            channel_gain,
            inter_cell,
            intra_cell,
            noise,
        })
    }
}

/// Shannon-capacity uplink rate in bits/s.
pub fn uplink_rate(ch: &ChannelParams) -> f64 {
    let snr = ch.tx_power * ch.channel_gain / (ch.inter_cell + ch.intra_cell + ch.noise);
    ch.bandwidth * (1.0 + snr).log2()
}

// ---------------------------------------------------------------------------
// Capacity maps and SBS configuration
// ---------------------------------------------------------------------------

/// Non-decreasing map from a rented capacity to a price or admission cap.
///
/// Maps always send 0 to 0. Table maps must cover every nonzero capacity of
/// the rental set they are paired with; this is enforced by
/// [`SbsConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacityMap {
    /// `f ↦ coeff · f`.
    Linear { coeff: f64 },
    /// Explicit `(capacity, value)` rows.
    Table { entries: Vec<(f64, f64)> },
}

impl CapacityMap {
    /// Evaluate the map. 0 maps to 0 regardless of the entries.
    ///
    /// Panics if a table map is evaluated at a capacity it has no row for;
    /// validation at construction rules this out for rental-set members.
    pub fn eval(&self, capacity: f64) -> f64 {
        if capacity == 0.0 {
            return 0.0;
        }
        match self {
            CapacityMap::Linear { coeff } => coeff * capacity,
            CapacityMap::Table { entries } => entries
                .iter()
                .find(|(f, _)| *f == capacity)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("capacity {capacity} not present in table map")),
        }
    }

    fn covers(&self, capacity: f64) -> bool {
        match self {
            CapacityMap::Linear { .. } => true,
            CapacityMap::Table { entries } => entries.iter().any(|(f, _)| *f == capacity),
        }
    }
}

/// One small-cell base station with a co-located edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbsConfig {
    /// SBS index.
    pub id: usize,
    /// Allowed capacities in rental units, ascending, always containing 0.
    pub rental_set: Vec<f64>,
    /// Minimal nonzero rental contract, in units. Must be a rental-set member.
    pub f_min: f64,
    /// Largest capacity offered, in units.
    pub f_max: f64,
    /// Cycles per second delivered by one rental unit.
    pub unit_hz: f64,
    /// Price map `w(f)` over capacity units.
    pub price: CapacityMap,
    /// Admission cap `cap(f)`: tasks the SBS admits per slot at capacity `f`.
    pub admission: CapacityMap,
    /// Expected uplink rate of the SBS, bits/s.
    pub uplink_rate: f64,
}

impl SbsConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        require(
            self.rental_set.first() == Some(&0.0),
            "rental_set",
            "must start with 0",
        )?;
        require(
            self.rental_set.windows(2).all(|w| w[0] < w[1]),
            "rental_set",
            "must be strictly ascending",
        )?;
        require(self.uplink_rate > 0.0, "uplink_rate", "must be > 0")?;
        require(self.unit_hz > 0.0, "unit_hz", "must be > 0")?;
        require(self.f_min > 0.0, "f_min", "must be > 0")?;
        for &f in self.nonzero_capacities() {
            require(
                f >= self.f_min && f <= self.f_max,
                "rental_set",
                "nonzero capacities must lie in [f_min, f_max]",
            )?;
            require(
                self.price.covers(f) && self.admission.covers(f),
                "rental_set",
                "price/admission tables must cover every nonzero capacity",
            )?;
        }
        require(
            self.rental_set.contains(&self.f_min),
            "f_min",
            "must be a rental-set member",
        )?;
        let monotone = |map: &CapacityMap| {
            self.rental_set
                .windows(2)
                .all(|w| map.eval(w[0]) <= map.eval(w[1]))
        };
        require(monotone(&self.price), "price", "must be non-decreasing")?;
        require(
            monotone(&self.admission),
            "admission",
            "must be non-decreasing",
        )?;
        Ok(())
    }

    /// Homogeneous Table-style SBS: linear tariff and linear admission cap.
    pub fn linear(
        id: usize,
        rental_set: Vec<f64>,
        unit_hz: f64,
        price_per_unit: f64,
        tasks_per_unit: f64,
        uplink_rate: f64,
    ) -> Result<Self, ModelError> {
        let f_min = rental_set
            .iter()
            .copied()
            .find(|&f| f > 0.0)
            .ok_or(ModelError::Invalid {
                field: "rental_set",
                reason: "needs at least one nonzero capacity".to_string(),
            })?;
        let f_max = *rental_set.last().unwrap_or(&0.0);
        let sbs = Self {
            id,
            rental_set,
            f_min,
            f_max,
            unit_hz,
            price: CapacityMap::Linear {
                coeff: price_per_unit,
            },
            admission: CapacityMap::Linear {
                coeff: tasks_per_unit,
            },
            uplink_rate,
        };
        sbs.validate()?;
        Ok(sbs)
    }

    pub fn price_of(&self, capacity: f64) -> f64 {
        self.price.eval(capacity)
    }

    pub fn admission_cap(&self, capacity: f64) -> f64 {
        self.admission.eval(capacity)
    }

    pub fn capacity_hz(&self, capacity: f64) -> f64 {
        capacity * self.unit_hz
    }

    /// Cost of the minimal rental contract, `w(f_min)`.
    pub fn min_rental_cost(&self) -> f64 {
        self.price.eval(self.f_min)
    }

    pub fn contains(&self, capacity: f64) -> bool {
        self.rental_set.contains(&capacity)
    }

    pub fn nonzero_capacities(&self) -> impl Iterator<Item = &f64> {
        self.rental_set.iter().filter(|&&f| f > 0.0)
    }

    /// Copy of this SBS with the rental set replaced (prices/caps kept).
    pub fn with_rental_set(&self, rental_set: Vec<f64>) -> Result<Self, ModelError> {
        let f_min = rental_set
            .iter()
            .copied()
            .find(|&f| f > 0.0)
            .ok_or(ModelError::Invalid {
                field: "rental_set",
                reason: "needs at least one nonzero capacity".to_string(),
            })?;
        let f_max = *rental_set.last().unwrap_or(&0.0);
        let sbs = Self {
            rental_set,
            f_min,
            f_max,
            ..self.clone()
        };
        sbs.validate()?;
        Ok(sbs)
    }
}

/// Cloud fallback reachable through the macro base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudConfig {
    /// Per-task processor capacity at the cloud, Hz.
    pub cpu_hz: f64,
    /// Expected MBS uplink rate, bits/s.
    pub uplink_rate: f64,
    /// Expected backbone transmission rate, bits/s.
    pub backbone_rate: f64,
    /// Backbone round-trip time, seconds.
    pub round_trip: f64,
}

impl CloudConfig {
    pub fn new(
        cpu_hz: f64,
        uplink_rate: f64,
        backbone_rate: f64,
        round_trip: f64,
    ) -> Result<Self, ModelError> {
        require(cpu_hz > 0.0, "cpu_hz", "must be > 0")?;
        require(uplink_rate > 0.0, "uplink_rate", "must be > 0")?;
        require(backbone_rate > 0.0, "backbone_rate", "must be > 0")?;
        require(round_trip > 0.0, "round_trip", "must be > 0")?;
        Ok(Self {
            cpu_hz,
            uplink_rate,
            backbone_rate,
            round_trip,
        })
    }
}

// ---------------------------------------------------------------------------
// Decisions and budget
// ---------------------------------------------------------------------------

/// Per-SBS rented capacities for one slot, in rental units.
#[derive(Debug, Clone, PartialEq)]
pub struct RentalDecision(pub Vec<f64>);

impl RentalDecision {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&f| f == 0.0)
    }

    /// Indices of SBSs with a nonzero rental.
    pub fn rented(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0.0)
            .map(|(n, _)| n)
    }
}

impl std::fmt::Display for RentalDecision {
    /// `|`-joined capacities, e.g. `2|0|4`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                write!(f, "|")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl std::str::FromStr for RentalDecision {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split('|')
            .map(str::parse)
            .collect::<Result<Vec<f64>, _>>()
            .map(Self)
    }
}

/// Per-slot rental budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Budget(f64);

impl Budget {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        require(
            value >= 0.0 && value.is_finite(),
            "budget",
            "must be finite and >= 0",
        )?;
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Delay operations
// ---------------------------------------------------------------------------

/// Service delay for one task at an SBS with `capacity_hz` cycles/s rented:
/// uplink transmission plus processing, clamped at the local-processing
/// ceiling `max_delay`.
pub fn edge_delay(tp: &TaskProfile, sbs: &SbsConfig, capacity_hz: f64) -> Result<f64, ModelError> {
    if capacity_hz <= 0.0 {
        return Err(ModelError::NoCapacityRented);
    }
    let raw = tp.input_bits / sbs.uplink_rate + tp.cpu_cycles / capacity_hz;
    Ok(raw.min(tp.max_delay))
}

/// Service delay for one task processed at the cloud: MBS uplink, backbone
/// transfer, round trip, and cloud processing, clamped at `max_delay`.
pub fn cloud_delay(tp: &TaskProfile, cloud: &CloudConfig) -> f64 {
    let raw = tp.input_bits / cloud.uplink_rate
        + tp.input_bits / cloud.backbone_rate
        + tp.cpu_cycles / cloud.cpu_hz
        + cloud.round_trip;
    raw.min(tp.max_delay)
}

/// Delay reduction of serving a task at the edge instead of the cloud.
/// Zero when nothing is rented; may be negative when the edge is slower.
pub fn delay_reduction(capacity: f64, cloud_d: f64, edge_d: f64) -> f64 {
    if capacity > 0.0 {
        cloud_d - edge_d
    } else {
        0.0
    }
}

/// Utility contributed by one SBS: admitted demand times delay reduction.
pub fn sbs_utility(demand: f64, capacity: f64, reduction: f64, sbs: &SbsConfig) -> f64 {
    if capacity <= 0.0 {
        return 0.0;
    }
    demand.min(sbs.admission_cap(capacity)) * reduction
}

// ---------------------------------------------------------------------------
// EdgeModel — the whole system
// ---------------------------------------------------------------------------

/// Immutable description of the edge system an experiment runs against.
#[derive(Debug, Clone)]
pub struct EdgeModel {
    pub task: TaskProfile,
    pub cloud: CloudConfig,
    pub sbss: Vec<SbsConfig>,
    pub budget: Budget,
}

impl EdgeModel {
    pub fn new(
        task: TaskProfile,
        cloud: CloudConfig,
        sbss: Vec<SbsConfig>,
        budget: Budget,
    ) -> Result<Self, ModelError> {
        require(!sbss.is_empty(), "sbss", "need at least one SBS")?;
        for sbs in &sbss {
            sbs.validate()?;
        }
        Ok(Self {
            task,
            cloud,
            sbss,
            budget,
        })
    }

    pub fn n_sbs(&self) -> usize {
        self.sbss.len()
    }

    /// Delay reduction `Δ_n(f)` of SBS `n` at capacity `f` units.
    pub fn delay_reduction_for(&self, n: usize, capacity: f64) -> f64 {
        if capacity <= 0.0 {
            return 0.0;
        }
        let sbs = &self.sbss[n];
        let d0 = cloud_delay(&self.task, &self.cloud);
        let dn = edge_delay(&self.task, sbs, sbs.capacity_hz(capacity))
            .expect("capacity > 0 checked above");
        delay_reduction(capacity, d0, dn)
    }

    /// Utility of SBS `n` at capacity `f` units under realized or estimated
    /// demand.
    pub fn sbs_utility(&self, n: usize, capacity: f64, demand: f64) -> f64 {
        sbs_utility(
            demand,
            capacity,
            self.delay_reduction_for(n, capacity),
            &self.sbss[n],
        )
    }

    /// Total utility of a decision under a demand vector.
    pub fn total_utility(&self, dec: &RentalDecision, demand: &[f64]) -> Result<f64, ModelError> {
        if dec.len() != self.n_sbs() || demand.len() != self.n_sbs() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_sbs(),
                actual: dec.len().max(demand.len()),
            });
        }
        Ok(self
            .sbss
            .iter()
            .enumerate()
            .map(|(n, _)| self.sbs_utility(n, dec.get(n), demand[n]))
            .sum())
    }

    /// Total price of a decision.
    pub fn decision_cost(&self, dec: &RentalDecision) -> f64 {
        dec.0
            .iter()
            .zip(&self.sbss)
            .map(|(&f, sbs)| sbs.price_of(f))
            .sum()
    }

    /// True iff every entry is a rental-set member and the total price fits
    /// the budget.
    pub fn check_feasible(&self, dec: &RentalDecision) -> bool {
        dec.len() == self.n_sbs()
            && dec.0.iter().zip(&self.sbss).all(|(&f, sbs)| sbs.contains(f))
            && self.decision_cost(dec) <= self.budget.value()
    }

    /// Largest admission cap over all SBSs and capacities (the demand range
    /// bound used by tail bounds and demand clipping).
    pub fn max_admission_cap(&self) -> f64 {
        self.sbss
            .iter()
            .flat_map(|sbs| {
                sbs.nonzero_capacities()
                    .map(move |&f| sbs.admission_cap(f))
            })
            .fold(0.0, f64::max)
    }

    /// Smallest nonzero price over all SBSs and capacities.
    pub fn min_nonzero_price(&self) -> f64 {
        self.sbss
            .iter()
            .flat_map(|sbs| sbs.nonzero_capacities().map(move |&f| sbs.price_of(f)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy with a different budget (sweeps).
    pub fn with_budget(&self, budget: Budget) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    /// Copy with every SBS restricted to the given rental set (sweeps).
    pub fn with_rental_set(&self, rental_set: &[f64]) -> Result<Self, ModelError> {
        let sbss = self
            .sbss
            .iter()
            .map(|s| s.with_rental_set(rental_set.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.task, self.cloud, sbss, self.budget)
    }
}
