//! Closed-form CSMA/CA delay components and contention models.
//!
//! A contention link's per-packet delay is the sum
//! `T_bo + T_data + T_ta + T_ack + T_ifs`. Frame airtimes are
//! `8 * bytes / data_rate`; backoff time is slots times the slot duration.
//!
//! Two contention models are provided. The *literal* functions reproduce the
//! printed probability and expectation constructions term by term, including
//! their quirks (values above 1, an extended summation range, a ratio that is
//! only defined for BE = 3). The *corrected* functions replace them with an
//! explicit round model that the simulator in [`crate::linksim`] realizes:
//!
//! All contending devices start a round together and each draws a slot
//! uniformly from `[0, 2^BE - 1]`. A device whose slot is strictly the
//! smallest seizes the channel and delivers. Every device with a larger slot
//! finds the channel busy at each of its CCAs: it re-draws with BE raised by
//! one (capped at `be_max`) until `max_backoffs` busy CCAs are spent, then
//! drops the frame. Devices tied at the minimum collide; while retries remain
//! they start a new round among themselves with BE raised by one (capped).
//! The reported quantity is the expected cumulative backoff time per offered
//! packet. The simulator matches this model whenever a frame's channel
//! occupancy outlasts a loser's whole backoff budget, which holds for the
//! default ZigBee frames.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ContentionConfig, CsmaParams, MacKind, TechnologyProfile};
use crate::rng::Stream;
use crate::Seconds;

/// Exact enumeration is refused beyond this many slot tuples per round.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// The five addends of a link's delay and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayBreakdown {
    pub t_bo: Seconds,
    pub t_data: Seconds,
    pub t_ta: Seconds,
    pub t_ack: Seconds,
    pub t_ifs: Seconds,
    pub total: Seconds,
}

impl DelayBreakdown {
    pub fn new(t_bo: Seconds, t_data: Seconds, t_ta: Seconds, t_ack: Seconds, t_ifs: Seconds) -> Self {
        DelayBreakdown {
            t_bo,
            t_data,
            t_ta,
            t_ack,
            t_ifs,
            total: t_bo + t_data + t_ta + t_ack + t_ifs,
        }
    }

    /// `(name, seconds)` for each component followed by the total.
    pub fn components(&self) -> [(&'static str, Seconds); 6] {
        [
            ("t_bo", self.t_bo),
            ("t_data", self.t_data),
            ("t_ta", self.t_ta),
            ("t_ack", self.t_ack),
            ("t_ifs", self.t_ifs),
            ("total", self.total),
        ]
    }
}

fn airtime(profile: &TechnologyProfile, bytes: u64) -> Seconds {
    (8 * bytes) as f64 / profile.data_rate
}

/// Data frame airtime: PHY header, MAC header, payload and MAC footer.
pub fn t_data(profile: &TechnologyProfile, payload: u32) -> Seconds {
    airtime(
        profile,
        u64::from(profile.phy_header)
            + u64::from(profile.mac_header)
            + u64::from(payload)
            + u64::from(profile.mac_footer),
    )
}

/// Acknowledgement airtime. By default the ACK carries the full data-frame
/// header and footer, so `t_ack(p) == t_data(p, 0)`; a profile with
/// `ack_frame_override` uses that MPDU size behind the PHY header instead.
pub fn t_ack(profile: &TechnologyProfile) -> Seconds {
    match profile.csma().and_then(|c| c.ack_frame_override) {
        Some(mpdu) => airtime(profile, u64::from(profile.phy_header) + u64::from(mpdu)),
        None => airtime(
            profile,
            u64::from(profile.phy_header) + u64::from(profile.mac_header) + u64::from(profile.mac_footer),
        ),
    }
}

pub fn t_bo(bo_slots: f64, params: &CsmaParams) -> Seconds {
    bo_slots * params.slot_duration
}

/// Mean of the uniform backoff window `[0, 2^be - 1]`.
pub fn expected_bo_slots(be: u8) -> f64 {
    ((1u64 << be) - 1) as f64 / 2.0
}

/// Short IFS for MPDUs up to the threshold, long IFS above it.
pub fn ifs(profile: &TechnologyProfile, params: &CsmaParams, payload: u32) -> Seconds {
    let mpdu = u64::from(profile.mac_header) + u64::from(payload) + u64::from(profile.mac_footer);
    if mpdu <= u64::from(params.sifs_frame_threshold) {
        params.sifs
    } else {
        params.lifs
    }
}

fn expect_kind(profile: &TechnologyProfile, expected: MacKind) -> Result<(), Error> {
    let actual = profile.mac_kind();
    if actual == expected {
        Ok(())
    } else {
        Err(Error::WrongKind {
            profile: profile.id.clone(),
            expected,
            actual,
        })
    }
}

/// Per-packet delay of a contention link with `bo_slots` backoff slots.
pub fn link_delay(
    profile: &TechnologyProfile,
    payload: u32,
    bo_slots: f64,
    ack_enabled: bool,
) -> Result<DelayBreakdown, Error> {
    expect_kind(profile, MacKind::Contention)?;
    let params = profile.csma().expect("contention profile carries CSMA parameters");
    let (ta, ack) = if ack_enabled {
        (params.turnaround, t_ack(profile))
    } else {
        (0.0, 0.0)
    };
    Ok(DelayBreakdown::new(
        t_bo(bo_slots, params),
        t_data(profile, payload),
        ta,
        ack,
        ifs(profile, params, payload),
    ))
}

/// Per-packet delay of a deterministic link without queueing. Processing
/// and propagation delay are reported in the `t_ifs` slot.
pub fn deterministic_link_delay(profile: &TechnologyProfile, payload: u32) -> Result<DelayBreakdown, Error> {
    expect_kind(profile, MacKind::Deterministic)?;
    let d = profile.deterministic().expect("deterministic profile carries link parameters");
    Ok(DelayBreakdown::new(
        0.0,
        t_data(profile, payload),
        0.0,
        0.0,
        d.processing_delay + d.propagation_delay,
    ))
}

// ---------------------------------------------------------------------------
// Literal probability constructions
// ---------------------------------------------------------------------------

/// Probability of any one slot of the backoff window, `1 / 2^be`.
pub fn p_backoff_period(be: u8) -> f64 {
    1.0 / (1u64 << be) as f64
}

/// `p (1 - p)^(be - 2)` with `p = 1 / num_devices`. The exponent is negative
/// for `be < 2`; values are returned as computed.
pub fn p_tss(num_devices: u32, be: u8) -> f64 {
    let p = 1.0 / f64::from(num_devices);
    p * libm::pow(1.0 - p, f64::from(i32::from(be) - 2))
}

/// `sum_{n=0}^{2^be-1} n / 2^be * p_tss`. May exceed 1.
pub fn p_tde_literal(be: u8, num_devices: u32) -> f64 {
    let weight = p_backoff_period(be);
    let tss = p_tss(num_devices, be);
    (0..(1u64 << be)).map(|n| n as f64 * weight * tss).sum()
}

/// Numerator of the literal expectation: two sums over `n = 0..=3` and
/// `n = 4..=11` of `n / 2^be * p`, with the bare `p = 1 / num_devices`.
pub fn literal_numerator(be: u8, num_devices: u32) -> f64 {
    let weight = p_backoff_period(be);
    let p = 1.0 / f64::from(num_devices);
    let head: f64 = (0..=3u32).map(|n| f64::from(n) * weight * p).sum();
    let tail: f64 = (4..=11u32).map(|n| f64::from(n) * weight * p).sum();
    head + tail
}

/// Literal expected time delay in backoff slots: [`literal_numerator`] over
/// [`p_tde_literal`]. Only BE = 3 is defined.
pub fn expected_time_delay_literal(be: u8, num_devices: u32) -> Result<f64, Error> {
    if be != 3 {
        return Err(Error::UnsupportedBe { be });
    }
    let denominator = p_tde_literal(be, num_devices);
    if denominator == 0.0 {
        return Err(Error::DegenerateLiteral { be, num_devices });
    }
    Ok(literal_numerator(be, num_devices) / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityMode {
    Literal,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentionProbabilities {
    pub mode: ProbabilityMode,
    pub p_backoff_period: f64,
    /// Literal: `p (1-p)^(BE-2)`. Corrected: probability that an offered
    /// packet is eventually delivered.
    pub p_tss: f64,
    /// Literal: the n-weighted sum. Corrected: probability that the first
    /// draw is not strictly the smallest, so contention delays the packet.
    pub p_tde: f64,
    /// Backoff slots; `None` where the literal construction is undefined.
    pub expected_delay_slots: Option<f64>,
    /// Literal numerator (`PE_A`).
    pub pe_a: Option<f64>,
    /// Literal denominator (`PE_B`).
    pub pe_b: Option<f64>,
    /// Set when a literal "probability" falls outside `[0, 1]`.
    pub out_of_range: bool,
}

pub fn literal_probabilities(be: u8, num_devices: u32) -> ContentionProbabilities {
    let p_backoff_period = p_backoff_period(be);
    let p_tss = p_tss(num_devices, be);
    let p_tde = p_tde_literal(be, num_devices);
    let supported = be == 3;
    let out_of_range = [p_backoff_period, p_tss, p_tde]
        .iter()
        .any(|p| !(0.0..=1.0).contains(p));
    ContentionProbabilities {
        mode: ProbabilityMode::Literal,
        p_backoff_period,
        p_tss,
        p_tde,
        expected_delay_slots: expected_time_delay_literal(be, num_devices).ok(),
        pe_a: supported.then(|| literal_numerator(be, num_devices)),
        pe_b: supported.then_some(p_tde),
        out_of_range,
    }
}

// ---------------------------------------------------------------------------
// Corrected contention model
// ---------------------------------------------------------------------------

/// Outcome of the corrected round model for one offered packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionOutcome {
    pub expected_backoff_slots: f64,
    pub delivery_probability: f64,
    pub first_round_win: f64,
}

/// Slot-tuple totals for one round of `k` devices drawing from a window,
/// seen from device 0.
#[derive(Debug, Clone, Default)]
struct RoundTally {
    tuples: f64,
    wins: f64,
    /// Device 0's slot summed over every tuple.
    slot_sum: f64,
    losses: f64,
    /// `ties[c]`: tuples where device 0 shares the minimum with `c - 1` others.
    ties: Vec<f64>,
}

fn tally_round(k: usize, window: u64) -> RoundTally {
    let mut tally = RoundTally {
        ties: vec![0.0; k + 1],
        ..RoundTally::default()
    };
    let mut slots = vec![0u64; k];
    loop {
        let min = *slots.iter().min().expect("k >= 1");
        let at_min = slots.iter().filter(|&&s| s == min).count();
        let mine = slots[0];
        tally.tuples += 1.0;
        tally.slot_sum += mine as f64;
        if mine > min {
            tally.losses += 1.0;
        } else if at_min == 1 {
            tally.wins += 1.0;
        } else {
            tally.ties[at_min] += 1.0;
        }
        // odometer
        let mut digit = 0;
        loop {
            if digit == k {
                return tally;
            }
            slots[digit] += 1;
            if slots[digit] < window {
                break;
            }
            slots[digit] = 0;
            digit += 1;
        }
    }
}

fn round_be(params: &CsmaParams, round: u32) -> u8 {
    let raised = u32::from(params.be_min).saturating_add(round);
    raised.min(u32::from(params.be_max)) as u8
}

/// Expected slots drawn by a loser after its first busy CCA: `max_backoffs`
/// more draws with BE climbing from `be + 1` to the cap.
fn loser_tail_slots(params: &CsmaParams, be: u8) -> f64 {
    let mut total = 0.0;
    let mut current = be;
    let mut remaining = params.max_backoffs;
    while remaining > 0 && current < params.be_max {
        current += 1;
        total += expected_bo_slots(current);
        remaining -= 1;
    }
    total + f64::from(remaining) * expected_bo_slots(params.be_max.max(current))
}

fn tuple_count(window: u64, devices: u32) -> u128 {
    let mut states: u128 = 1;
    for _ in 0..devices {
        states = states.saturating_mul(u128::from(window));
        if states > ENUMERATION_LIMIT {
            break;
        }
    }
    states
}

/// Exhaustive enumeration of the corrected round model.
pub fn enumerate_contention(params: &CsmaParams, contention: ContentionConfig) -> Result<ContentionOutcome, Error> {
    let n = contention.num_end_devices.max(1);
    let states = tuple_count(1u64 << params.be_max, n);
    if states > ENUMERATION_LIMIT {
        return Err(Error::IntractableEnumeration {
            states,
            limit: ENUMERATION_LIMIT,
        });
    }
    let n = n as usize;
    let mut tallies: BTreeMap<(usize, u8), RoundTally> = BTreeMap::new();
    let mut tally = |k: usize, be: u8| -> RoundTally {
        tallies
            .entry((k, be))
            .or_insert_with(|| tally_round(k, 1u64 << be))
            .clone()
    };

    // value[k] holds (expected slots, delivery probability) for a round of k
    // devices at the retry index currently being folded, from the last
    // permitted retry back to the first round.
    let mut next: Vec<(f64, f64)> = vec![(0.0, 0.0); n + 1];
    let mut first_round_win = 0.0;
    for round in (0..=params.max_retries).rev() {
        let be = round_be(params, round);
        let tail = loser_tail_slots(params, be);
        let last = round == params.max_retries;
        let mut current = vec![(0.0, 0.0); n + 1];
        // A tied group never grows, so only sizes up to n matter; at round 0
        // only k = n is needed but smaller sizes are cheap.
        let sizes: Vec<usize> = if round == 0 { vec![n] } else { (2..=n).collect() };
        for k in sizes {
            let t = tally(k, be);
            let mut slots = t.slot_sum + t.losses * tail;
            let mut delivered = t.wins;
            if !last {
                for (c, &count) in t.ties.iter().enumerate().skip(2) {
                    slots += count * next[c].0;
                    delivered += count * next[c].1;
                }
            }
            current[k] = (slots / t.tuples, delivered / t.tuples);
            if round == 0 {
                first_round_win = t.wins / t.tuples;
            }
        }
        next = current;
    }
    Ok(ContentionOutcome {
        expected_backoff_slots: next[n].0,
        delivery_probability: next[n].1,
        first_round_win,
    })
}

/// Expected cumulative backoff time per offered packet under the corrected
/// round model. One device reduces to the mean of the first window.
pub fn expected_time_delay_corrected(params: &CsmaParams, contention: ContentionConfig) -> Result<Seconds, Error> {
    if contention.num_end_devices <= 1 {
        return Ok(t_bo(expected_bo_slots(params.be_min), params));
    }
    let outcome = enumerate_contention(params, contention)?;
    Ok(t_bo(outcome.expected_backoff_slots, params))
}

/// Like [`expected_time_delay_corrected`], but estimates the expectation by
/// sampling `rounds` contention epochs when enumeration is intractable.
pub fn expected_time_delay_corrected_or_sample(
    params: &CsmaParams,
    contention: ContentionConfig,
    rounds: u32,
    seed: u64,
) -> Seconds {
    match expected_time_delay_corrected(params, contention) {
        Ok(v) => v,
        Err(_) => t_bo(sample_contention(params, contention, rounds, seed), params),
    }
}

/// Monte Carlo estimate of the corrected model's expected backoff slots per
/// offered packet over `epochs` contention epochs.
pub fn sample_contention(params: &CsmaParams, contention: ContentionConfig, epochs: u32, seed: u64) -> f64 {
    let n = contention.num_end_devices.max(1) as usize;
    let mut streams: Vec<Stream> = (0..n).map(|d| Stream::child(seed, d as u64)).collect();
    let mut slots = vec![0u64; n];
    let mut total = 0u64;
    for _ in 0..epochs.max(1) {
        let mut alive: Vec<usize> = (0..n).collect();
        let mut round = 0;
        loop {
            let be = round_be(params, round);
            for &d in &alive {
                slots[d] = streams[d].window(be);
                total += slots[d];
            }
            let min = alive.iter().map(|&d| slots[d]).min().expect("non-empty round");
            let tied: Vec<usize> = alive.iter().copied().filter(|&d| slots[d] == min).collect();
            for &d in &alive {
                if slots[d] > min {
                    let mut lbe = be;
                    for _ in 0..params.max_backoffs {
                        lbe = (lbe + 1).min(params.be_max);
                        total += streams[d].window(lbe);
                    }
                }
            }
            if tied.len() == 1 || round >= params.max_retries {
                break;
            }
            alive = tied;
            round += 1;
        }
    }
    total as f64 / (f64::from(epochs.max(1)) * n as f64)
}

/// Contention probabilities under the corrected round model; every value is
/// a genuine probability.
pub fn corrected_probabilities(
    params: &CsmaParams,
    contention: ContentionConfig,
) -> Result<ContentionProbabilities, Error> {
    let outcome = if contention.num_end_devices <= 1 {
        ContentionOutcome {
            expected_backoff_slots: expected_bo_slots(params.be_min),
            delivery_probability: 1.0,
            first_round_win: 1.0,
        }
    } else {
        enumerate_contention(params, contention)?
    };
    Ok(ContentionProbabilities {
        mode: ProbabilityMode::Corrected,
        p_backoff_period: p_backoff_period(params.be_min),
        p_tss: outcome.delivery_probability,
        p_tde: 1.0 - outcome.first_round_win,
        expected_delay_slots: Some(outcome.expected_backoff_slots),
        pe_a: None,
        pe_b: None,
        out_of_range: false,
    })
}
