//! End-to-end composition, statistics, analytic/simulated comparison and
//! parameter sweeps.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::csma_analytics::{self, DelayBreakdown};
use crate::error::Error;
use crate::linksim::{simulate_path, PathSampleSet};
use crate::model::{
    parameter_kind, set_parameter, validate_scenario, ContentionConfig, MacKind, ParamValue,
    PathSpec, Profiles, Scenario, TrafficSpec,
};
use crate::rng::replication_seed;
use crate::Seconds;

/// Relative error above which a comparison row is flagged.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Contention epochs sampled when exact enumeration is out of reach.
pub const FALLBACK_EPOCHS: u32 = 200_000;

/// End-to-end delay of one packet, or of the analytic model. Links past
/// `hops` report zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathDelayReport {
    pub d1: Seconds,
    pub d2: Seconds,
    pub d3: Seconds,
    pub d_total: Seconds,
    pub hops: usize,
}

impl PathDelayReport {
    /// Build a report from up to three per-link delays. `d_total` is always
    /// computed as `d1 + d2 + d3`.
    pub fn from_hops(delays: &[Seconds]) -> Self {
        debug_assert!(delays.len() <= 3);
        let at = |i: usize| delays.get(i).copied().unwrap_or(0.0);
        let (d1, d2, d3) = (at(0), at(1), at(2));
        PathDelayReport {
            d1,
            d2,
            d3,
            d_total: d1 + d2 + d3,
            hops: delays.len().min(3),
        }
    }

    /// Per-link delays, `hops` of them.
    pub fn links(&self) -> Vec<Seconds> {
        [self.d1, self.d2, self.d3][..self.hops].to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentionMode {
    ExpectedBackoff,
    LiteralEq11,
}

impl ContentionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContentionMode::ExpectedBackoff => "expected_backoff",
            ContentionMode::LiteralEq11 => "literal_eq11",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "expected_backoff" => Some(ContentionMode::ExpectedBackoff),
            "literal_eq11" => Some(ContentionMode::LiteralEq11),
            _ => None,
        }
    }
}

/// Analytic per-link breakdowns of `path`.
///
/// Contention links with one device back off for the mean of the first
/// window. With more devices, `ExpectedBackoff` uses the exact contention
/// expectation (sampled when enumeration is intractable) and `LiteralEq11`
/// uses the literal expected-delay construction.
pub fn analytic_breakdowns(
    path: &PathSpec,
    profiles: &Profiles,
    traffic: &TrafficSpec,
    mode: ContentionMode,
) -> Result<Vec<DelayBreakdown>, Error> {
    path.links
        .iter()
        .map(|link| {
            let profile = profiles
                .get(&link.profile_id)
                .ok_or_else(|| Error::UnknownProfile(link.profile_id.clone()))?;
            match profile.mac_kind() {
                MacKind::Deterministic => {
                    csma_analytics::deterministic_link_delay(profile, traffic.payload)
                }
                MacKind::Contention => {
                    let params = profile.csma().expect("contention profile");
                    let contention = link
                        .contention
                        .unwrap_or(ContentionConfig { num_end_devices: 1 });
                    let slots = match mode {
                        ContentionMode::LiteralEq11 => csma_analytics::expected_time_delay_literal(
                            params.be_min,
                            contention.num_end_devices,
                        )?,
                        ContentionMode::ExpectedBackoff => {
                            csma_analytics::expected_time_delay_corrected_or_sample(
                                params,
                                contention,
                                FALLBACK_EPOCHS,
                                0,
                            ) / params.slot_duration
                        }
                    };
                    csma_analytics::link_delay(profile, traffic.payload, slots, params.ack_enabled)
                }
            }
        })
        .collect()
}

/// Analytic end-to-end delay: the sum of the per-link totals.
pub fn analytic_path_delay(
    path: &PathSpec,
    profiles: &Profiles,
    traffic: &TrafficSpec,
    mode: ContentionMode,
) -> Result<PathDelayReport, Error> {
    let totals: Vec<Seconds> = analytic_breakdowns(path, profiles, traffic, mode)?
        .iter()
        .map(|b| b.total)
        .collect();
    Ok(PathDelayReport::from_hops(&totals))
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayStats {
    pub count: u64,
    pub mean: Seconds,
    /// Sample variance (`n - 1` denominator); zero for a single sample.
    pub variance: f64,
    pub min: Seconds,
    pub max: Seconds,
    pub p50: Seconds,
    pub p90: Seconds,
    pub p99: Seconds,
    pub std_error: Seconds,
}

/// Value at 1-based rank `ceil(k/100 * n)` of a sorted sample.
fn nearest_rank(sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len();
    let rank = (k * n).div_ceil(100).max(1);
    sorted[rank - 1]
}

/// Summary statistics. The sample is sorted first and the Welford pass runs
/// over the sorted order, so the result does not depend on input order.
pub fn summarize(samples: &[Seconds]) -> Result<DelayStats, Error> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = sorted.len();
    let variance = if n > 1 { (m2 / (n - 1) as f64).max(0.0) } else { 0.0 };
    Ok(DelayStats {
        count: n as u64,
        mean,
        variance,
        min: sorted[0],
        max: sorted[n - 1],
        p50: nearest_rank(&sorted, 50),
        p90: nearest_rank(&sorted, 90),
        p99: nearest_rank(&sorted, 99),
        std_error: libm::sqrt(variance / n as f64),
    })
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub analytic: Seconds,
    pub simulated: DelayStats,
    /// `|analytic - mean| / analytic`, or the absolute difference when the
    /// analytic value is zero.
    pub relative_error: f64,
    pub absolute: bool,
    pub flagged: bool,
}

impl ComparisonRow {
    fn new(analytic: Seconds, simulated: DelayStats, threshold: f64) -> Self {
        let diff = (analytic - simulated.mean).abs();
        let absolute = analytic == 0.0;
        let relative_error = if absolute { diff } else { diff / analytic };
        ComparisonRow {
            analytic,
            simulated,
            relative_error,
            absolute,
            flagged: relative_error > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub per_link: Vec<ComparisonRow>,
    pub path: ComparisonRow,
    pub threshold: f64,
}

impl ComparisonReport {
    pub fn any_flagged(&self) -> bool {
        self.path.flagged || self.per_link.iter().any(|r| r.flagged)
    }
}

/// Compare the analytic report with the packets that crossed the whole path.
pub fn compare(
    analytic: &PathDelayReport,
    simulated: &[PathSampleSet],
    threshold: f64,
) -> Result<ComparisonReport, Error> {
    for set in simulated {
        if set.per_link.len() != analytic.hops {
            return Err(Error::ShapeMismatch {
                analytic: analytic.hops,
                simulated: set.per_link.len(),
            });
        }
    }
    let reports: Vec<PathDelayReport> = simulated
        .iter()
        .flat_map(|s| s.per_packet.iter().map(|p| p.report))
        .collect();
    let column = |f: fn(&PathDelayReport) -> Seconds| reports.iter().map(f).collect::<Vec<_>>();
    let per_link_values = [
        column(|r| r.d1),
        column(|r| r.d2),
        column(|r| r.d3),
    ];
    let analytic_links = [analytic.d1, analytic.d2, analytic.d3];
    let mut per_link = Vec::with_capacity(analytic.hops);
    for i in 0..analytic.hops {
        let stats = summarize(&per_link_values[i])?;
        per_link.push(ComparisonRow::new(analytic_links[i], stats, threshold));
    }
    let path = ComparisonRow::new(analytic.d_total, summarize(&column(|r| r.d_total))?, threshold);
    Ok(ComparisonReport {
        per_link,
        path,
        threshold,
    })
}

// ---------------------------------------------------------------------------
// Scenario runs and sweeps
// ---------------------------------------------------------------------------

/// Run replication `index` of `path` with the scenario's seed and traffic.
pub fn simulate_replication(
    scenario: &Scenario,
    profiles: &Profiles,
    path: &PathSpec,
    index: u32,
) -> Result<PathSampleSet, Error> {
    simulate_path(
        path,
        profiles,
        &scenario.traffic,
        replication_seed(scenario.seed, index),
    )
}

/// Every replication of `path`, in replication order.
pub fn simulate_replications(
    scenario: &Scenario,
    profiles: &Profiles,
    path: &PathSpec,
) -> Result<Vec<PathSampleSet>, Error> {
    (0..scenario.replications)
        .map(|r| simulate_replication(scenario, profiles, path, r))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPath {
    pub path: String,
    pub analytic: PathDelayReport,
    /// End-to-end statistics, present when the scenario mode simulates.
    pub simulated: Option<DelayStats>,
    pub simulated_links: Vec<DelayStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: ParamValue,
    pub paths: Vec<SweepPath>,
}

/// Evaluate `scenario` once per value of `param`, rows in input order.
pub fn sweep(
    scenario: &Scenario,
    base: &Profiles,
    param: &str,
    values: &[ParamValue],
    mode: ContentionMode,
) -> Result<Vec<SweepRow>, Error> {
    let kind = parameter_kind(param).ok_or_else(|| Error::UnknownParameter(param.into()))?;
    if !kind.is_numeric() {
        return Err(Error::TypeMismatch {
            param: param.into(),
            value: String::from("a numeric sweep"),
        });
    }
    values
        .iter()
        .map(|value| {
            let mut s = scenario.clone();
            set_parameter(&mut s, base, param, value)?;
            let violations = validate_scenario(&s, base);
            if !violations.is_empty() {
                return Err(Error::Invalid(violations));
            }
            let profiles = s.resolve_profiles(base);
            let paths = s
                .paths
                .iter()
                .map(|path| sweep_path(&s, &profiles, path, mode))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepRow {
                value: value.clone(),
                paths,
            })
        })
        .collect()
}

fn sweep_path(
    s: &Scenario,
    profiles: &Profiles,
    path: &PathSpec,
    mode: ContentionMode,
) -> Result<SweepPath, Error> {
    let analytic = analytic_path_delay(path, profiles, &s.traffic, mode)?;
    let (simulated, simulated_links) = if s.mode.simulates() {
        let cmp = compare(&analytic, &simulate_replications(s, profiles, path)?, DEFAULT_THRESHOLD)?;
        (
            Some(cmp.path.simulated),
            cmp.per_link.iter().map(|r| r.simulated).collect(),
        )
    } else {
        (None, Vec::new())
    };
    Ok(SweepPath {
        path: path.id.clone(),
        analytic,
        simulated,
        simulated_links,
    })
}
