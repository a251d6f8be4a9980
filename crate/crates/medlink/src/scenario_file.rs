//! Scenario text format.
//!
//! ```text
//! # comment
//! seed = 42
//! mode = analytic
//! replications = 1
//!
//! [traffic]
//! payload = 1024 B
//! inter_arrival = 40 ms
//! packet_count = 10000
//!
//! [path path1]
//! [link 1]
//! profile = zigbee
//! num_end_devices = 1
//! [link 2]
//! profile = wlan
//! num_end_devices = 1
//! [link 3]
//! profile = ipcloud
//!
//! [profile slow-zigbee]
//! base = zigbee
//! data_rate = 20 kbps
//! ```
//!
//! `[link n]` sections belong to the nearest `[path]` above them. A
//! `[profile id]` section either starts from `base = <id>`, overrides the
//! profile of the same id, or, when it sets `mac_kind` without a `base`,
//! defines a profile from scratch (every required key must then be given).
//! Unknown keys and duplicate keys are errors.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use medlink_core::model::{
    parameter_kind, profile_key_kind, scenario_key_kind, traffic_key_kind, validate_scenario,
    ContentionConfig, LinkSpec, MacKind, MacParams, Mode, ParamKind, ParamValue, PathSpec,
    Profiles, Scenario, TechnologyProfile, Violation, CONTENTION_REQUIRED, DETERMINISTIC_REQUIRED,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl LoadError {
    /// `code: message` lines for standard error.
    pub fn lines(&self) -> Vec<String> {
        match self {
            LoadError::Parse { .. } => vec![format!("scenario.parse: {self}")],
            LoadError::Validation(v) => v.iter().map(|v| v.to_string()).collect(),
            LoadError::UnknownProfile(id) => {
                vec![format!("link.profile.unknown: unknown profile `{id}`")]
            }
        }
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        line,
        column,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

fn split_unit(text: &str) -> (&str, &str) {
    let text = text.trim();
    let at = text
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(text.len());
    // "1e3" keeps its exponent, "5 bits" splits before the unit
    (text[..at].trim(), text[at..].trim())
}

fn number(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .parse()
        .map_err(|_| format!("`{text}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

fn whole(text: &str) -> Result<u64, String> {
    text.parse()
        .map_err(|_| format!("`{text}` is not a non-negative integer"))
}

/// Read the text form of a value of kind `kind`.
pub fn parse_value(kind: ParamKind, text: &str) -> Result<ParamValue, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("missing value".into());
    }
    match kind {
        ParamKind::Time => {
            let (num, unit) = split_unit(text);
            let v = number(num).map_err(|_| format!("`{text}` is not a number"))?;
            let v = match unit {
                "" | "s" => v,
                "ms" => v / 1e3,
                "us" => v / 1e6,
                _ => return Err(format!("unknown time unit `{unit}` (use s, ms or us)")),
            };
            Ok(ParamValue::Real(v))
        }
        ParamKind::Rate => {
            let (num, unit) = split_unit(text);
            let v = number(num).map_err(|_| format!("`{text}` is not a number"))?;
            let v = match unit.to_ascii_lowercase().as_str() {
                "" | "bps" => v,
                "kbps" => v * 1e3,
                "mbps" => v * 1e6,
                _ => return Err(format!("unknown rate unit `{unit}` (use bps, kbps or mbps)")),
            };
            Ok(ParamValue::Real(v))
        }
        ParamKind::Bytes | ParamKind::OptionalBytes | ParamKind::Bits | ParamKind::OptionalBits => {
            let optional = matches!(kind, ParamKind::OptionalBytes | ParamKind::OptionalBits);
            if optional && text == "none" {
                return Ok(ParamValue::None);
            }
            let in_bits = matches!(kind, ParamKind::Bits | ParamKind::OptionalBits);
            let (num, unit) = split_unit(text);
            let v = whole(num).map_err(|_| format!("`{text}` is not a non-negative integer"))?;
            let v = match (unit, in_bits) {
                ("B", false) | ("", false) | ("bits", true) | ("", true) => v,
                ("bits", false) if v % 8 == 0 => v / 8,
                ("bits", false) => return Err(format!("{v} bits is not a whole number of bytes")),
                ("B", true) => v
                    .checked_mul(8)
                    .ok_or_else(|| format!("{v} B is too large"))?,
                _ => return Err(format!("unknown size unit `{unit}` (use B or bits)")),
            };
            Ok(ParamValue::Integer(v))
        }
        ParamKind::Integer => whole(text).map(ParamValue::Integer),
        ParamKind::Flag => match text {
            "true" | "yes" | "on" => Ok(ParamValue::Flag(true)),
            "false" | "no" | "off" => Ok(ParamValue::Flag(false)),
            _ => Err(format!("`{text}` is not a flag (use true or false)")),
        },
        ParamKind::Text => Ok(ParamValue::Text(text.to_owned())),
    }
}

/// Read the value of a dotted scenario parameter such as `traffic.payload`.
pub fn parse_parameter(key: &str, text: &str) -> Result<ParamValue, medlink_core::Error> {
    let kind = parameter_kind(key)
        .ok_or_else(|| medlink_core::Error::UnknownParameter(key.to_owned()))?;
    parse_value(kind, text).map_err(|_| medlink_core::Error::TypeMismatch {
        param: key.to_owned(),
        value: text.to_owned(),
    })
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Entry {
    line: usize,
    column: usize,
    key: String,
    value: String,
}

enum Section {
    Top,
    Traffic,
    Path,
    Link { path: usize, index: u8 },
    Profile { at: usize },
}

struct ProfileDraft {
    id: String,
    line: usize,
    entries: Vec<Entry>,
}

struct LinkDraft {
    spec: LinkSpec,
    devices: Option<u32>,
}

struct PathDraft {
    id: String,
    links: Vec<LinkDraft>,
}

fn strip_comment(line: &str) -> &str {
    if line.trim_start().starts_with('#') {
        return "";
    }
    match line.find(" #").or_else(|| line.find("\t#")) {
        Some(at) => &line[..at],
        None => line,
    }
}

fn column_of(line: &str, part: &str) -> usize {
    // part is a subslice of line
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

/// Parse scenario text without validating it against any registry.
pub fn parse_scenario(text: &str) -> Result<(Scenario, Vec<ProfileSection>), LoadError> {
    let mut s = Scenario::default();
    let mut section = Section::Top;
    let mut paths: Vec<PathDraft> = Vec::new();
    let mut profiles: Vec<ProfileDraft> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut section_keys: BTreeSet<String> = BTreeSet::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = column_of(raw, trimmed);

        if let Some(inner) = trimmed.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line_no, col, "section header is missing `]`"))?;
            let mut words = inner.split_whitespace();
            let kind = words.next().unwrap_or("");
            let arg = words.next();
            if words.next().is_some() {
                return Err(parse_error(line_no, col, format!("malformed section `[{inner}]`")));
            }
            section_keys.clear();
            section = match (kind, arg) {
                ("traffic", None) => {
                    if !seen.insert("traffic".into()) {
                        return Err(parse_error(line_no, col, "duplicate `[traffic]` section"));
                    }
                    Section::Traffic
                }
                ("path", Some(id)) => {
                    paths.push(PathDraft {
                        id: id.to_owned(),
                        links: Vec::new(),
                    });
                    Section::Path
                }
                ("link", Some(index)) => {
                    let path = paths.len().checked_sub(1).ok_or_else(|| {
                        parse_error(line_no, col, "`[link]` section outside a `[path]`")
                    })?;
                    let index: u8 = index.parse().map_err(|_| {
                        parse_error(line_no, col, format!("link index `{index}` is not a number"))
                    })?;
                    if paths[path].links.iter().any(|l| l.spec.index == index) {
                        return Err(parse_error(line_no, col, format!("duplicate `[link {index}]`")));
                    }
                    paths[path].links.push(LinkDraft {
                        spec: LinkSpec {
                            index,
                            profile_id: String::new(),
                            contention: None,
                        },
                        devices: None,
                    });
                    Section::Link { path, index }
                }
                ("profile", Some(id)) => {
                    if profiles.iter().any(|p| p.id == id) {
                        return Err(parse_error(line_no, col, format!("duplicate `[profile {id}]`")));
                    }
                    profiles.push(ProfileDraft {
                        id: id.to_owned(),
                        line: line_no,
                        entries: Vec::new(),
                    });
                    Section::Profile {
                        at: profiles.len() - 1,
                    }
                }
                _ => return Err(parse_error(line_no, col, format!("unknown section `[{inner}]`"))),
            };
            continue;
        }

        let (key_part, value_part) = body
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, col, "expected `key = value`"))?;
        let key = key_part.trim();
        let value = value_part.trim();
        let key_col = column_of(raw, key);
        let value_col = if value.is_empty() {
            column_of(raw, value_part) + value_part.len()
        } else {
            column_of(raw, value)
        };
        if key.is_empty() {
            return Err(parse_error(line_no, key_col, "missing key"));
        }
        if !section_keys.insert(key.to_owned()) {
            return Err(parse_error(line_no, key_col, format!("duplicate key `{key}`")));
        }
        let bad_value = |e: String| parse_error(line_no, value_col, format!("`{key}`: {e}"));
        let unknown = || parse_error(line_no, key_col, format!("unknown key `{key}`"));

        match &section {
            Section::Top => {
                let kind = scenario_key_kind(key).ok_or_else(unknown)?;
                let v = parse_value(kind, value).map_err(bad_value)?;
                match (key, v) {
                    ("seed", ParamValue::Integer(v)) => s.seed = v,
                    ("replications", ParamValue::Integer(v)) => {
                        s.replications = u32::try_from(v)
                            .map_err(|_| bad_value("too large".into()))?
                    }
                    (_, ParamValue::Text(t)) => {
                        s.mode = Mode::parse(&t).ok_or_else(|| {
                            bad_value(format!("unknown mode `{t}` (analytic, simulate or compare)"))
                        })?
                    }
                    _ => unreachable!("kinds of top-level keys"),
                }
            }
            Section::Traffic => {
                let kind = traffic_key_kind(key).ok_or_else(unknown)?;
                let v = parse_value(kind, value).map_err(bad_value)?;
                match (key, v) {
                    ("inter_arrival", ParamValue::Real(v)) => s.traffic.inter_arrival = v,
                    (_, ParamValue::Integer(v)) => {
                        let v = u32::try_from(v).map_err(|_| bad_value("too large".into()))?;
                        if key == "payload" {
                            s.traffic.payload = v;
                        } else {
                            s.traffic.packet_count = v;
                        }
                    }
                    _ => unreachable!("kinds of traffic keys"),
                }
            }
            Section::Path => return Err(unknown()),
            Section::Link { path, index } => {
                let link = paths[*path]
                    .links
                    .iter_mut()
                    .find(|l| l.spec.index == *index)
                    .expect("link drafted with its section");
                match key {
                    "profile" => link.spec.profile_id = value.to_owned(),
                    "num_end_devices" => {
                        let v = whole(value).map_err(bad_value)?;
                        link.devices =
                            Some(u32::try_from(v).map_err(|_| bad_value("too large".into()))?);
                    }
                    _ => return Err(unknown()),
                }
            }
            Section::Profile { at } => {
                if key != "base" && profile_key_kind(key).is_none() {
                    return Err(unknown());
                }
                profiles[*at].entries.push(Entry {
                    line: line_no,
                    column: key_col,
                    key: key.to_owned(),
                    value: value.to_owned(),
                });
            }
        }
    }

    s.paths = paths
        .into_iter()
        .map(|p| PathSpec {
            id: p.id,
            links: p
                .links
                .into_iter()
                .map(|mut l| {
                    l.spec.contention = l.devices.map(|n| ContentionConfig { num_end_devices: n });
                    l.spec
                })
                .collect(),
        })
        .collect();

    let sections = profiles
        .into_iter()
        .map(|p| ProfileSection {
            id: p.id,
            line: p.line,
            entries: p
                .entries
                .into_iter()
                .map(|e| (e.line, e.column, e.key, e.value))
                .collect(),
        })
        .collect();
    Ok((s, sections))
}

/// One `[profile id]` section, kept as text until the registry it builds on
/// is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSection {
    pub id: String,
    pub line: usize,
    /// `(line, column, key, value)` in file order.
    pub entries: Vec<(usize, usize, String, String)>,
}

impl ProfileSection {
    /// Build the profile against `base`.
    pub fn build(&self, base: &Profiles) -> Result<TechnologyProfile, LoadError> {
        let find = |k: &str| self.entries.iter().find(|e| e.2 == k);
        let mut profile = if let Some((line, col, _, base_id)) = find("base") {
            let mut p = base
                .get(base_id)
                .cloned()
                .ok_or_else(|| parse_error(*line, *col, format!("unknown base profile `{base_id}`")))?;
            p.id = self.id.clone();
            p
        } else if let Some((line, col, _, kind)) = find("mac_kind") {
            let kind = MacKind::parse(kind).ok_or_else(|| {
                parse_error(*line, *col, format!("unknown mac_kind `{kind}` (contention or deterministic)"))
            })?;
            let required = match kind {
                MacKind::Contention => CONTENTION_REQUIRED,
                MacKind::Deterministic => DETERMINISTIC_REQUIRED,
            };
            let missing: Vec<Violation> = required
                .iter()
                .filter(|k| find(k).is_none())
                .map(|k| {
                    Violation::new(
                        "profile.field.missing",
                        format!("profile.{}.{k}", self.id),
                        format!("profile `{}` defines no `{k}`", self.id),
                    )
                })
                .collect();
            if !missing.is_empty() {
                return Err(LoadError::Validation(missing));
            }
            TechnologyProfile::blank(&self.id, kind)
        } else {
            base.get(&self.id).cloned().ok_or_else(|| {
                parse_error(
                    self.line,
                    1,
                    format!("profile `{}` is not built in; give `base` or `mac_kind`", self.id),
                )
            })?
        };

        for (line, col, key, value) in &self.entries {
            if key == "base" {
                continue;
            }
            let kind = profile_key_kind(key).expect("keys checked while parsing");
            let v = parse_value(kind, value)
                .map_err(|e| parse_error(*line, *col, format!("`{key}`: {e}")))?;
            profile
                .set_field(key, &v)
                .map_err(|e| parse_error(*line, *col, e.to_string()))?;
        }
        Ok(profile)
    }
}

/// Parse, resolve and validate scenario text against the `base` registry.
pub fn load_scenario(text: &str, base: &Profiles) -> Result<Scenario, LoadError> {
    let (mut s, sections) = parse_scenario(text)?;
    let mut known = base.clone();
    for section in &sections {
        let p = section.build(&known)?;
        known.insert(p.id.clone(), p.clone());
        s.profiles.push(p);
    }
    check(&s, base)?;
    Ok(s)
}

/// Reject unknown profile references, then any other invariant violation.
pub fn check(s: &Scenario, base: &Profiles) -> Result<(), LoadError> {
    let known = s.resolve_profiles(base);
    for path in &s.paths {
        for link in &path.links {
            if !link.profile_id.is_empty() && !known.contains_key(&link.profile_id) {
                return Err(LoadError::UnknownProfile(link.profile_id.clone()));
            }
        }
    }
    let violations = validate_scenario(s, base);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(LoadError::Validation(violations))
    }
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

/// Write a scenario in the text format. Inline profiles are written out in
/// full, so the text reparses to an equal scenario.
pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = write_scenario_to(&mut out, s);
    out
}

fn write_scenario_to(out: &mut String, s: &Scenario) -> fmt::Result {
    writeln!(out, "seed = {}", s.seed)?;
    writeln!(out, "mode = {}", s.mode.as_str())?;
    writeln!(out, "replications = {}", s.replications)?;
    writeln!(out)?;
    writeln!(out, "[traffic]")?;
    writeln!(out, "payload = {} B", s.traffic.payload)?;
    writeln!(out, "inter_arrival = {} s", s.traffic.inter_arrival)?;
    writeln!(out, "packet_count = {}", s.traffic.packet_count)?;
    for p in &s.profiles {
        writeln!(out)?;
        write_profile_to(out, p)?;
    }
    for path in &s.paths {
        writeln!(out)?;
        writeln!(out, "[path {}]", path.id)?;
        for link in &path.links {
            writeln!(out, "[link {}]", link.index)?;
            writeln!(out, "profile = {}", link.profile_id)?;
            if let Some(c) = link.contention {
                writeln!(out, "num_end_devices = {}", c.num_end_devices)?;
            }
        }
    }
    Ok(())
}

/// Write one profile as a from-scratch `[profile]` section.
pub fn write_profile(p: &TechnologyProfile) -> String {
    let mut out = String::new();
    let _ = write_profile_to(&mut out, p);
    out
}

fn write_profile_to(out: &mut String, p: &TechnologyProfile) -> fmt::Result {
    writeln!(out, "[profile {}]", p.id)?;
    writeln!(out, "mac_kind = {}", p.mac_kind().as_str())?;
    writeln!(out, "name = {}", p.name)?;
    writeln!(out, "data_rate = {} bps", p.data_rate)?;
    writeln!(out, "phy_header = {} B", p.phy_header)?;
    writeln!(out, "mac_header = {} B", p.mac_header)?;
    writeln!(out, "mac_footer = {} B", p.mac_footer)?;
    match p.buffer_capacity {
        Some(bits) => writeln!(out, "buffer_capacity = {bits} bits")?,
        None => writeln!(out, "buffer_capacity = none")?,
    }
    writeln!(out, "oversize_policy = {}", p.oversize_policy.as_str())?;
    match &p.mac {
        MacParams::Contention(c) => {
            writeln!(out, "be_min = {}", c.be_min)?;
            writeln!(out, "be_max = {}", c.be_max)?;
            writeln!(out, "max_backoffs = {}", c.max_backoffs)?;
            writeln!(out, "slot_duration = {} s", c.slot_duration)?;
            writeln!(out, "cca_duration = {} s", c.cca_duration)?;
            writeln!(out, "turnaround = {} s", c.turnaround)?;
            writeln!(out, "sifs = {} s", c.sifs)?;
            writeln!(out, "lifs = {} s", c.lifs)?;
            writeln!(out, "sifs_frame_threshold = {} B", c.sifs_frame_threshold)?;
            writeln!(out, "ack_enabled = {}", c.ack_enabled)?;
            writeln!(out, "max_retries = {}", c.max_retries)?;
            match c.ack_frame_override {
                Some(b) => writeln!(out, "ack_frame_override = {b} B")?,
                None => writeln!(out, "ack_frame_override = none")?,
            }
        }
        MacParams::Deterministic(d) => {
            writeln!(out, "processing_delay = {} s", d.processing_delay)?;
            writeln!(out, "propagation_delay = {} s", d.propagation_delay)?;
            writeln!(out, "retry_limit = {}", d.retry_limit)?;
        }
    }
    for (k, v) in &p.metadata {
        writeln!(out, "meta.{k} = {v}")?;
    }
    Ok(())
}
