//! Domain types, the built-in technology profiles, scenario validation and
//! dotted-key parameter access.
//!
//! All sizes are whole bytes on the wire unless a field says bits, all rates
//! are bits per second and all durations are seconds.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Seconds;

/// Largest backoff exponent any profile may use.
pub const MAX_BACKOFF_EXPONENT: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacKind {
    Contention,
    Deterministic,
}

impl MacKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MacKind::Contention => "contention",
            MacKind::Deterministic => "deterministic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "contention" => Some(MacKind::Contention),
            "deterministic" => Some(MacKind::Deterministic),
            _ => None,
        }
    }
}

/// What a link does with a frame larger than its buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OversizePolicy {
    Drop,
    Accept,
}

impl OversizePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OversizePolicy::Drop => "drop",
            OversizePolicy::Accept => "accept",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "drop" => Some(OversizePolicy::Drop),
            "accept" => Some(OversizePolicy::Accept),
            _ => None,
        }
    }
}

/// Unslotted CSMA/CA timing and retry limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsmaParams {
    pub be_min: u8,
    pub be_max: u8,
    /// Busy CCAs tolerated before the frame is dropped.
    pub max_backoffs: u32,
    pub slot_duration: Seconds,
    pub cca_duration: Seconds,
    pub turnaround: Seconds,
    pub sifs: Seconds,
    pub lifs: Seconds,
    /// Largest MPDU (bytes) that is followed by the short inter-frame space.
    pub sifs_frame_threshold: u32,
    pub ack_enabled: bool,
    pub max_retries: u32,
    /// ACK MPDU size in bytes. `None` reuses the data frame's MAC header and
    /// footer for the acknowledgement.
    pub ack_frame_override: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicLinkParams {
    pub processing_delay: Seconds,
    pub propagation_delay: Seconds,
    pub retry_limit: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mac_kind", rename_all = "snake_case")]
pub enum MacParams {
    Contention(CsmaParams),
    Deterministic(DeterministicLinkParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologyProfile {
    pub id: String,
    pub name: String,
    /// Bits per second.
    pub data_rate: f64,
    pub phy_header: u32,
    pub mac_header: u32,
    pub mac_footer: u32,
    pub mac: MacParams,
    /// Bits.
    pub buffer_capacity: Option<u64>,
    pub oversize_policy: OversizePolicy,
    /// Descriptive parameters that take part in no computation.
    pub metadata: Vec<(String, String)>,
}

impl TechnologyProfile {
    pub fn mac_kind(&self) -> MacKind {
        match self.mac {
            MacParams::Contention(_) => MacKind::Contention,
            MacParams::Deterministic(_) => MacKind::Deterministic,
        }
    }

    pub fn csma(&self) -> Option<&CsmaParams> {
        match &self.mac {
            MacParams::Contention(p) => Some(p),
            MacParams::Deterministic(_) => None,
        }
    }

    pub fn deterministic(&self) -> Option<&DeterministicLinkParams> {
        match &self.mac {
            MacParams::Deterministic(p) => Some(p),
            MacParams::Contention(_) => None,
        }
    }

    /// On-air size of a data frame carrying `payload` bytes, in bits.
    pub fn frame_bits(&self, payload: u32) -> u64 {
        8 * (u64::from(self.phy_header)
            + u64::from(self.mac_header)
            + u64::from(payload)
            + u64::from(self.mac_footer))
    }

    /// True when a frame with this payload exceeds the buffer and the policy
    /// says to drop it.
    pub fn drops_payload(&self, payload: u32) -> bool {
        match (self.buffer_capacity, self.oversize_policy) {
            (Some(cap), OversizePolicy::Drop) => self.frame_bits(payload) > cap,
            _ => false,
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn set_meta(&mut self, key: &str, value: String) {
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.to_owned(), value)),
        }
    }

    /// A profile of the given kind with every numeric field zeroed. Used as the
    /// starting point for profiles defined from scratch.
    pub fn blank(id: &str, kind: MacKind) -> Self {
        let mac = match kind {
            MacKind::Contention => MacParams::Contention(CsmaParams {
                be_min: 0,
                be_max: 0,
                max_backoffs: 0,
                slot_duration: 0.0,
                cca_duration: 0.0,
                turnaround: 0.0,
                sifs: 0.0,
                lifs: 0.0,
                sifs_frame_threshold: 0,
                ack_enabled: false,
                max_retries: 0,
                ack_frame_override: None,
            }),
            MacKind::Deterministic => MacParams::Deterministic(DeterministicLinkParams {
                processing_delay: 0.0,
                propagation_delay: 0.0,
                retry_limit: 0,
            }),
        };
        TechnologyProfile {
            id: id.to_owned(),
            name: id.to_owned(),
            data_rate: 0.0,
            phy_header: 0,
            mac_header: 0,
            mac_footer: 0,
            mac,
            buffer_capacity: None,
            oversize_policy: OversizePolicy::Accept,
            metadata: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub payload: u32,
    pub inter_arrival: Seconds,
    pub packet_count: u32,
}

impl Default for TrafficSpec {
    /// 1024-byte packets every 40 ms.
    fn default() -> Self {
        TrafficSpec {
            payload: 1024,
            inter_arrival: 0.04,
            packet_count: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentionConfig {
    /// Devices contending for the same channel, the measured one included.
    pub num_end_devices: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// 1-based position in the path.
    pub index: u8,
    pub profile_id: String,
    pub contention: Option<ContentionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub id: String,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Simulate,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(Mode::Analytic),
            "simulate" => Some(Mode::Simulate),
            "compare" => Some(Mode::Compare),
            _ => None,
        }
    }

    pub fn simulates(self) -> bool {
        !matches!(self, Mode::Analytic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Profiles declared or overridden by the scenario itself. They shadow
    /// profiles of the same id in the base registry.
    pub profiles: Vec<TechnologyProfile>,
    pub paths: Vec<PathSpec>,
    pub traffic: TrafficSpec,
    pub seed: u64,
    pub mode: Mode,
    pub replications: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            profiles: Vec::new(),
            paths: Vec::new(),
            traffic: TrafficSpec::default(),
            seed: 0,
            mode: Mode::Analytic,
            replications: 1,
        }
    }
}

pub type Profiles = BTreeMap<String, TechnologyProfile>;

impl Scenario {
    /// The registry this scenario runs against: `base` overlaid with the
    /// scenario's own profiles.
    pub fn resolve_profiles(&self, base: &Profiles) -> Profiles {
        let mut all = base.clone();
        for p in &self.profiles {
            all.insert(p.id.clone(), p.clone());
        }
        all
    }

    pub fn path(&self, id: &str) -> Option<&PathSpec> {
        self.paths.iter().find(|p| p.id == id)
    }
}

// ---------------------------------------------------------------------------
// Built-in profiles
// ---------------------------------------------------------------------------

fn meta(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| ((*k).to_owned(), (*v).to_owned()))
        .collect()
}

/// IEEE 802.15.4 at 2.4 GHz: 62.5 ksymbol/s, 20-symbol backoff slot, 8-symbol
/// CCA, 12-symbol turnaround. Backoff exponent 3 and two tolerated busy CCAs.
pub fn zigbee() -> TechnologyProfile {
    TechnologyProfile {
        id: "zigbee".into(),
        name: "ZigBee (IEEE 802.15.4, non-beacon)".into(),
        data_rate: 250_000.0,
        phy_header: 6,
        mac_header: 9,
        mac_footer: 2,
        mac: MacParams::Contention(CsmaParams {
            be_min: 3,
            be_max: 3,
            max_backoffs: 2,
            slot_duration: 0.00032,
            cca_duration: 0.000128,
            turnaround: 0.000192,
            sifs: 0.000192,
            lifs: 0.00064,
            sifs_frame_threshold: 18,
            ack_enabled: true,
            max_retries: 3,
            ack_frame_override: None,
        }),
        buffer_capacity: None,
        oversize_policy: OversizePolicy::Accept,
        metadata: meta(&[
            ("beacon_order", "6"),
            ("superframe_order", "0"),
            ("maximum_routers", "5"),
            ("maximum_depth", "5"),
            ("beacon_enabled_network", "disabled"),
            ("mesh_routing", "disabled"),
            ("route_discovery_timeout", "10 ms"),
        ]),
    }
}

/// ZigBee as the prose configures it: minimum BE 2, three tolerated busy
/// CCAs and a 0.1 s channel-sensing time.
pub fn zigbee_paper() -> TechnologyProfile {
    let mut p = zigbee();
    p.id = "zigbee-paper".into();
    p.name = "ZigBee (prose settings: BE 2, 3 backoffs, 0.1 s sensing)".into();
    if let MacParams::Contention(c) = &mut p.mac {
        c.be_min = 2;
        c.be_max = 3;
        c.max_backoffs = 3;
        c.cca_duration = 0.1;
    }
    p
}

/// IEEE 802.11b DCF over DSSS at 11 Mbit/s with a 25600-bit buffer that drops
/// oversized frames.
pub fn wlan() -> TechnologyProfile {
    TechnologyProfile {
        id: "wlan".into(),
        name: "WLAN (IEEE 802.11b DSSS, 11 Mbit/s)".into(),
        data_rate: 11_000_000.0,
        phy_header: 24,
        mac_header: 28,
        mac_footer: 4,
        mac: MacParams::Contention(CsmaParams {
            be_min: 5,
            be_max: 5,
            max_backoffs: 16,
            slot_duration: 20e-6,
            cca_duration: 15e-6,
            turnaround: 10e-6,
            sifs: 10e-6,
            lifs: 50e-6,
            sifs_frame_threshold: 0,
            ack_enabled: true,
            max_retries: 7,
            ack_frame_override: None,
        }),
        buffer_capacity: Some(25_600),
        oversize_policy: OversizePolicy::Drop,
        metadata: meta(&[
            ("bss_identifier", "auto assigned"),
            ("physical_technique", "direct sequence"),
            ("transmit_power_w", "0.005"),
            ("packet_reception_threshold_dbm", "-95"),
        ]),
    }
}

pub fn wlan_54g() -> TechnologyProfile {
    let mut p = wlan();
    p.id = "wlan-54g".into();
    p.name = "WLAN (54 Mbit/s variant)".into();
    p.data_rate = 54_000_000.0;
    p
}

pub fn wimax() -> TechnologyProfile {
    TechnologyProfile {
        id: "wimax".into(),
        name: "WiMAX (IEEE 802.16, OFDM 20 MHz)".into(),
        data_rate: 120_000_000.0,
        phy_header: 0,
        mac_header: 0,
        mac_footer: 0,
        mac: MacParams::Deterministic(DeterministicLinkParams {
            processing_delay: 0.0,
            propagation_delay: 0.0,
            retry_limit: 0,
        }),
        buffer_capacity: None,
        oversize_policy: OversizePolicy::Accept,
        metadata: meta(&[
            ("antenna_gain_dbi", "15"),
            ("number_of_transmitters", "SISO"),
            ("mac_address", "auto assigned"),
            ("maximum_transmission_power_w", "0.5"),
            ("physical_profile", "wireless OFDM 20 MHz"),
            ("maximum_ss_nodes", "100"),
            ("minimum_power_density_dbm", "-110"),
            ("maximum_power_density_dbm", "-60"),
            ("base_station_cdma_codes", "8"),
        ]),
    }
}

/// UMTS with its core-network signalling folded into one processing delay.
pub fn umts() -> TechnologyProfile {
    TechnologyProfile {
        id: "umts".into(),
        name: "UMTS (HSPA+, 42 Mbit/s)".into(),
        data_rate: 42_000_000.0,
        phy_header: 0,
        mac_header: 0,
        mac_footer: 0,
        mac: MacParams::Deterministic(DeterministicLinkParams {
            processing_delay: 0.002,
            propagation_delay: 0.0,
            retry_limit: 4,
        }),
        buffer_capacity: None,
        oversize_policy: OversizePolicy::Accept,
        metadata: meta(&[
            ("cell_path_loss_parameters", "default"),
            ("umts_cell_id", "default"),
            ("umts_sgsn_id", "0"),
            ("ip", "default"),
        ]),
    }
}

/// Access network to health-monitoring endpoint, aggregated into one hop.
pub fn ipcloud() -> TechnologyProfile {
    TechnologyProfile {
        id: "ipcloud".into(),
        name: "IP cloud to health-monitoring room".into(),
        data_rate: 100_000_000.0,
        phy_header: 0,
        mac_header: 0,
        mac_footer: 0,
        mac: MacParams::Deterministic(DeterministicLinkParams {
            processing_delay: 0.0,
            propagation_delay: 0.005,
            retry_limit: 0,
        }),
        buffer_capacity: None,
        oversize_policy: OversizePolicy::Accept,
        metadata: Vec::new(),
    }
}

pub fn builtin_profiles() -> Profiles {
    [zigbee(), zigbee_paper(), wlan(), wlan_54g(), wimax(), umts(), ipcloud()]
        .into_iter()
        .map(|p| (p.id.clone(), p))
        .collect()
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Stable, machine-readable code such as `traffic.inter_arrival.min`.
    pub code: &'static str,
    /// Dotted location of the offending field.
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: &'static str, field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn check_duration(out: &mut Vec<Violation>, code: &'static str, field: String, v: f64) {
    if !v.is_finite() || v < 0.0 {
        out.push(Violation::new(
            code,
            field.clone(),
            format!("{field} must be a finite duration >= 0 (got {v})"),
        ));
    }
}

pub fn validate_profile(p: &TechnologyProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    let at = |f: &str| format!("profile.{}.{}", p.id, f);
    if !is_identifier(&p.id) {
        out.push(Violation::new(
            "profile.id.format",
            format!("profile.{}", p.id),
            format!("profile id `{}` must be non-empty [A-Za-z0-9_-]", p.id),
        ));
    }
    if !(p.data_rate.is_finite() && p.data_rate > 0.0) {
        out.push(Violation::new(
            "profile.data_rate.min",
            at("data_rate"),
            format!("data_rate must be > 0 bit/s (got {})", p.data_rate),
        ));
    }
    if p.buffer_capacity == Some(0) {
        out.push(Violation::new(
            "profile.buffer_capacity.min",
            at("buffer_capacity"),
            "buffer_capacity must be > 0 bits when present",
        ));
    }
    match &p.mac {
        MacParams::Contention(c) => {
            if c.be_min > c.be_max || c.be_max > MAX_BACKOFF_EXPONENT {
                out.push(Violation::new(
                    "csma.be.range",
                    at("be_min"),
                    format!(
                        "need 0 <= be_min <= be_max <= {MAX_BACKOFF_EXPONENT} (got be_min {}, be_max {})",
                        c.be_min, c.be_max
                    ),
                ));
            }
            for (name, v) in [
                ("slot_duration", c.slot_duration),
                ("cca_duration", c.cca_duration),
                ("turnaround", c.turnaround),
                ("sifs", c.sifs),
                ("lifs", c.lifs),
            ] {
                check_duration(&mut out, "csma.duration.min", at(name), v);
            }
            if c.sifs > c.lifs {
                out.push(Violation::new(
                    "csma.ifs.order",
                    at("sifs"),
                    format!("sifs ({}) must not exceed lifs ({})", c.sifs, c.lifs),
                ));
            }
        }
        MacParams::Deterministic(d) => {
            check_duration(
                &mut out,
                "deterministic.duration.min",
                at("processing_delay"),
                d.processing_delay,
            );
            check_duration(
                &mut out,
                "deterministic.duration.min",
                at("propagation_delay"),
                d.propagation_delay,
            );
        }
    }
    out
}

/// Every invariant violation in `s`, resolved against `base`. Empty exactly
/// when the scenario is valid.
pub fn validate_scenario(s: &Scenario, base: &Profiles) -> Vec<Violation> {
    let mut out = Vec::new();
    for p in &s.profiles {
        out.extend(validate_profile(p));
    }
    let profiles = s.resolve_profiles(base);

    if s.paths.is_empty() {
        out.push(Violation::new(
            "scenario.paths.empty",
            "paths",
            "scenario declares no paths",
        ));
    }
    if s.replications < 1 {
        out.push(Violation::new(
            "scenario.replications.min",
            "replications",
            "replications must be >= 1",
        ));
    }
    let t = &s.traffic;
    if !(t.inter_arrival.is_finite() && t.inter_arrival > 0.0) {
        out.push(Violation::new(
            "traffic.inter_arrival.min",
            "traffic.inter_arrival",
            format!("traffic.inter_arrival must be > 0 s (got {})", t.inter_arrival),
        ));
    }
    if t.packet_count < 1 {
        out.push(Violation::new(
            "traffic.packet_count.min",
            "traffic.packet_count",
            "traffic.packet_count must be >= 1",
        ));
    }

    for (i, path) in s.paths.iter().enumerate() {
        let pf = format!("path.{}", path.id);
        if !is_identifier(&path.id) {
            out.push(Violation::new(
                "path.id.format",
                pf.clone(),
                format!("path id `{}` must be non-empty [A-Za-z0-9_-]", path.id),
            ));
        }
        if s.paths[..i].iter().any(|q| q.id == path.id) {
            out.push(Violation::new(
                "path.id.duplicate",
                pf.clone(),
                format!("path `{}` declared twice", path.id),
            ));
        }
        if path.links.is_empty() {
            out.push(Violation::new(
                "path.links.empty",
                format!("{pf}.links"),
                format!("path `{}` has no links", path.id),
            ));
        }
        if path.links.len() > 3 {
            out.push(Violation::new(
                "path.links.max",
                format!("{pf}.links"),
                format!("path `{}` has {} links; at most 3 are composed", path.id, path.links.len()),
            ));
        }
        for (pos, link) in path.links.iter().enumerate() {
            let lf = format!("{pf}.link.{}", link.index);
            if usize::from(link.index) != pos + 1 {
                out.push(Violation::new(
                    "link.index.sequence",
                    lf.clone(),
                    format!("link at position {} is numbered {}", pos + 1, link.index),
                ));
            }
            let Some(profile) = profiles.get(&link.profile_id) else {
                if link.profile_id.is_empty() {
                    out.push(Violation::new(
                        "link.profile.missing",
                        format!("{lf}.profile"),
                        "link names no profile",
                    ));
                } else {
                    out.push(Violation::new(
                        "link.profile.unknown",
                        format!("{lf}.profile"),
                        format!("unknown profile `{}`", link.profile_id),
                    ));
                }
                continue;
            };
            match (profile.mac_kind(), link.contention) {
                (MacKind::Deterministic, Some(_)) => out.push(Violation::new(
                    "link.contention.kind_mismatch",
                    format!("{lf}.num_end_devices"),
                    format!(
                        "contention settings on deterministic profile `{}`",
                        profile.id
                    ),
                )),
                (MacKind::Contention, None) => out.push(Violation::new(
                    "link.contention.missing",
                    format!("{lf}.num_end_devices"),
                    format!(
                        "contention profile `{}` needs num_end_devices",
                        profile.id
                    ),
                )),
                _ => {}
            }
            if let Some(c) = link.contention {
                if c.num_end_devices < 1 {
                    out.push(Violation::new(
                        "contention.num_end_devices.min",
                        format!("{lf}.num_end_devices"),
                        "num_end_devices must be >= 1",
                    ));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Dotted-key parameter access
// ---------------------------------------------------------------------------

/// How the text form of a parameter is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Seconds; text accepts `s`, `ms`, `us` suffixes.
    Time,
    /// Bits per second; text accepts `bps`, `kbps`, `mbps`.
    Rate,
    /// Whole bytes; text accepts `B` or `bits` (multiple of 8).
    Bytes,
    /// Bits; text accepts `bits` or `B`.
    Bits,
    /// Like `Bits` but also accepts `none`.
    OptionalBits,
    /// Like `Bytes` but also accepts `none`.
    OptionalBytes,
    Integer,
    Flag,
    Text,
}

impl ParamKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ParamKind::Flag | ParamKind::Text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Integer(u64),
    Real(f64),
    Flag(bool),
    Text(String),
    None,
}

impl core::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamValue::Integer(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Flag(v) => write!(f, "{v}"),
            ParamValue::Text(v) => write!(f, "{v}"),
            ParamValue::None => f.write_str("none"),
        }
    }
}

const PROFILE_KEYS: &[(&str, ParamKind)] = &[
    ("name", ParamKind::Text),
    ("mac_kind", ParamKind::Text),
    ("data_rate", ParamKind::Rate),
    ("phy_header", ParamKind::Bytes),
    ("mac_header", ParamKind::Bytes),
    ("mac_footer", ParamKind::Bytes),
    ("buffer_capacity", ParamKind::OptionalBits),
    ("oversize_policy", ParamKind::Text),
    ("be_min", ParamKind::Integer),
    ("be_max", ParamKind::Integer),
    ("max_backoffs", ParamKind::Integer),
    ("slot_duration", ParamKind::Time),
    ("cca_duration", ParamKind::Time),
    ("turnaround", ParamKind::Time),
    ("sifs", ParamKind::Time),
    ("lifs", ParamKind::Time),
    ("sifs_frame_threshold", ParamKind::Bytes),
    ("ack_enabled", ParamKind::Flag),
    ("max_retries", ParamKind::Integer),
    ("ack_frame_override", ParamKind::OptionalBytes),
    ("processing_delay", ParamKind::Time),
    ("propagation_delay", ParamKind::Time),
    ("retry_limit", ParamKind::Integer),
];

/// Keys of a contention profile that a from-scratch definition must give.
pub const CONTENTION_REQUIRED: &[&str] = &[
    "data_rate",
    "be_min",
    "be_max",
    "max_backoffs",
    "slot_duration",
    "cca_duration",
    "turnaround",
    "sifs",
    "lifs",
    "sifs_frame_threshold",
    "ack_enabled",
    "max_retries",
];

/// Keys of a deterministic profile that a from-scratch definition must give.
pub const DETERMINISTIC_REQUIRED: &[&str] = &[
    "data_rate",
    "processing_delay",
    "propagation_delay",
    "retry_limit",
];

pub fn profile_key_kind(key: &str) -> Option<ParamKind> {
    if key.strip_prefix("meta.").is_some_and(|k| !k.is_empty()) {
        return Some(ParamKind::Text);
    }
    PROFILE_KEYS.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

pub fn traffic_key_kind(key: &str) -> Option<ParamKind> {
    match key {
        "payload" => Some(ParamKind::Bytes),
        "inter_arrival" => Some(ParamKind::Time),
        "packet_count" => Some(ParamKind::Integer),
        _ => None,
    }
}

pub fn scenario_key_kind(key: &str) -> Option<ParamKind> {
    match key {
        "seed" | "replications" => Some(ParamKind::Integer),
        "mode" => Some(ParamKind::Text),
        _ => None,
    }
}

pub fn link_key_kind(key: &str) -> Option<ParamKind> {
    match key {
        "profile" => Some(ParamKind::Text),
        "num_end_devices" => Some(ParamKind::Integer),
        _ => None,
    }
}

/// A parsed dotted parameter name.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Key<'a> {
    Scenario(&'a str),
    Traffic(&'a str),
    /// `contention.num_end_devices`: the first link of every path.
    FirstLinkDevices,
    Link { path: &'a str, index: u8, key: &'a str },
    Profile { id: &'a str, key: &'a str },
}

fn parse_key(key: &str) -> Option<(Key<'_>, ParamKind)> {
    if let Some(k) = scenario_key_kind(key) {
        return Some((Key::Scenario(key), k));
    }
    if key == "contention.num_end_devices" {
        return Some((Key::FirstLinkDevices, ParamKind::Integer));
    }
    if let Some(rest) = key.strip_prefix("traffic.") {
        return traffic_key_kind(rest).map(|k| (Key::Traffic(rest), k));
    }
    if let Some(rest) = key.strip_prefix("profile.") {
        let (id, field) = rest.split_once('.')?;
        return profile_key_kind(field).map(|k| (Key::Profile { id, key: field }, k));
    }
    if let Some(rest) = key.strip_prefix("path.") {
        let (path, rest) = rest.split_once('.')?;
        let rest = rest.strip_prefix("link.")?;
        let (index, field) = rest.split_once('.')?;
        let index: u8 = index.parse().ok()?;
        return link_key_kind(field).map(|k| (Key::Link { path, index, key: field }, k));
    }
    None
}

/// The text kind of a dotted parameter, or `None` if the name is unknown.
pub fn parameter_kind(key: &str) -> Option<ParamKind> {
    parse_key(key).map(|(_, k)| k)
}

fn mismatch(param: &str, value: &ParamValue) -> Error {
    Error::TypeMismatch {
        param: param.to_owned(),
        value: value.to_string(),
    }
}

fn as_u64(param: &str, value: &ParamValue) -> Result<u64, Error> {
    match value {
        ParamValue::Integer(v) => Ok(*v),
        ParamValue::Real(v)
            if v.is_finite() && *v >= 0.0 && libm::trunc(*v) == *v && *v <= 9.007_199_254_740_992e15 =>
        {
            Ok(*v as u64)
        }
        _ => Err(mismatch(param, value)),
    }
}

fn as_u32(param: &str, value: &ParamValue) -> Result<u32, Error> {
    u32::try_from(as_u64(param, value)?).map_err(|_| mismatch(param, value))
}

fn as_u8(param: &str, value: &ParamValue) -> Result<u8, Error> {
    u8::try_from(as_u64(param, value)?).map_err(|_| mismatch(param, value))
}

fn as_f64(param: &str, value: &ParamValue) -> Result<f64, Error> {
    match value {
        ParamValue::Real(v) => Ok(*v),
        ParamValue::Integer(v) => Ok(*v as f64),
        _ => Err(mismatch(param, value)),
    }
}

fn as_text<'v>(param: &str, value: &'v ParamValue) -> Result<&'v str, Error> {
    match value {
        ParamValue::Text(v) => Ok(v),
        _ => Err(mismatch(param, value)),
    }
}

fn as_flag(param: &str, value: &ParamValue) -> Result<bool, Error> {
    match value {
        ParamValue::Flag(v) => Ok(*v),
        _ => Err(mismatch(param, value)),
    }
}

impl TechnologyProfile {
    /// Set one profile field by its key name (see [`profile_key_kind`]).
    pub fn set_field(&mut self, key: &str, value: &ParamValue) -> Result<(), Error> {
        let param = format!("profile.{}.{}", self.id, key);
        let param = param.as_str();
        if let Some(m) = key.strip_prefix("meta.") {
            let text = as_text(param, value)?.to_owned();
            self.set_meta(m, text);
            return Ok(());
        }
        match key {
            "name" => self.name = as_text(param, value)?.to_owned(),
            "mac_kind" => {
                let kind = MacKind::parse(as_text(param, value)?)
                    .ok_or_else(|| mismatch(param, value))?;
                if kind != self.mac_kind() {
                    return Err(mismatch(param, value));
                }
            }
            "data_rate" => self.data_rate = as_f64(param, value)?,
            "phy_header" => self.phy_header = as_u32(param, value)?,
            "mac_header" => self.mac_header = as_u32(param, value)?,
            "mac_footer" => self.mac_footer = as_u32(param, value)?,
            "buffer_capacity" => {
                self.buffer_capacity = match value {
                    ParamValue::None => None,
                    v => Some(as_u64(param, v)?),
                }
            }
            "oversize_policy" => {
                self.oversize_policy = OversizePolicy::parse(as_text(param, value)?)
                    .ok_or_else(|| mismatch(param, value))?
            }
            "processing_delay" | "propagation_delay" | "retry_limit" => {
                let MacParams::Deterministic(d) = &mut self.mac else {
                    return Err(mismatch(param, value));
                };
                match key {
                    "processing_delay" => d.processing_delay = as_f64(param, value)?,
                    "propagation_delay" => d.propagation_delay = as_f64(param, value)?,
                    _ => d.retry_limit = as_u32(param, value)?,
                }
            }
            _ => {
                let MacParams::Contention(c) = &mut self.mac else {
                    return Err(if profile_key_kind(key).is_some() {
                        mismatch(param, value)
                    } else {
                        Error::UnknownParameter(param.to_owned())
                    });
                };
                match key {
                    "be_min" => c.be_min = as_u8(param, value)?,
                    "be_max" => c.be_max = as_u8(param, value)?,
                    "max_backoffs" => c.max_backoffs = as_u32(param, value)?,
                    "slot_duration" => c.slot_duration = as_f64(param, value)?,
                    "cca_duration" => c.cca_duration = as_f64(param, value)?,
                    "turnaround" => c.turnaround = as_f64(param, value)?,
                    "sifs" => c.sifs = as_f64(param, value)?,
                    "lifs" => c.lifs = as_f64(param, value)?,
                    "sifs_frame_threshold" => c.sifs_frame_threshold = as_u32(param, value)?,
                    "ack_enabled" => c.ack_enabled = as_flag(param, value)?,
                    "max_retries" => c.max_retries = as_u32(param, value)?,
                    "ack_frame_override" => {
                        c.ack_frame_override = match value {
                            ParamValue::None => None,
                            v => Some(as_u32(param, v)?),
                        }
                    }
                    _ => return Err(Error::UnknownParameter(param.to_owned())),
                }
            }
        }
        Ok(())
    }
}

/// Set a scenario parameter by dotted name.
///
/// Names: `seed`, `mode`, `replications`, `traffic.<field>`,
/// `contention.num_end_devices` (first link of every path that has one),
/// `path.<id>.link.<n>.profile`, `path.<id>.link.<n>.num_end_devices` and
/// `profile.<id>.<field>`. Setting a field of a profile the scenario does not
/// declare copies it from `base` first.
pub fn set_parameter(
    s: &mut Scenario,
    base: &Profiles,
    key: &str,
    value: &ParamValue,
) -> Result<(), Error> {
    let (parsed, _) = parse_key(key).ok_or_else(|| Error::UnknownParameter(key.to_owned()))?;
    match parsed {
        Key::Scenario("seed") => s.seed = as_u64(key, value)?,
        Key::Scenario("replications") => s.replications = as_u32(key, value)?,
        Key::Scenario(_) => {
            s.mode = Mode::parse(as_text(key, value)?).ok_or_else(|| mismatch(key, value))?
        }
        Key::Traffic("payload") => s.traffic.payload = as_u32(key, value)?,
        Key::Traffic("inter_arrival") => s.traffic.inter_arrival = as_f64(key, value)?,
        Key::Traffic(_) => s.traffic.packet_count = as_u32(key, value)?,
        Key::FirstLinkDevices => {
            let n = as_u32(key, value)?;
            for path in &mut s.paths {
                if let Some(c) = path.links.first_mut().and_then(|l| l.contention.as_mut()) {
                    c.num_end_devices = n;
                }
            }
        }
        Key::Link { path, index, key: field } => {
            let p = s
                .paths
                .iter_mut()
                .find(|p| p.id == path)
                .ok_or_else(|| Error::UnknownParameter(key.to_owned()))?;
            let link = p
                .links
                .iter_mut()
                .find(|l| l.index == index)
                .ok_or_else(|| Error::UnknownParameter(key.to_owned()))?;
            if field == "profile" {
                link.profile_id = as_text(key, value)?.to_owned();
            } else {
                link.contention = Some(ContentionConfig {
                    num_end_devices: as_u32(key, value)?,
                });
            }
        }
        Key::Profile { id, key: field } => {
            let pos = match s.profiles.iter().position(|p| p.id == id) {
                Some(pos) => pos,
                None => {
                    let template = base
                        .get(id)
                        .ok_or_else(|| Error::UnknownProfile(id.to_owned()))?;
                    s.profiles.push(template.clone());
                    s.profiles.len() - 1
                }
            };
            s.profiles[pos].set_field(field, value)?;
        }
    }
    Ok(())
}
