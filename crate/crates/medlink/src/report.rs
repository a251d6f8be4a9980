//! Report data and its table, CSV and JSON renderings.
//!
//! CSV and JSON print every floating value in seconds as the shortest decimal
//! that reads back to the same `f64`. Tables show milliseconds.
//!
//! CSV schemas:
//!
//! | command  | header |
//! |----------|--------|
//! | profiles | `id,name,mac_kind,data_rate_bps,phy_header_b,mac_header_b,mac_footer_b,buffer_capacity_bits,oversize_policy` |
//! | analyze  | `path,link,component,seconds` |
//! | simulate | `path,replication,packet_id,d1_s,d2_s,d3_s,d_total_s` |
//! | compare  | `path,link,analytic_s,mean_s,std_error_s,count,relative_error,absolute,flagged` |
//! | sweep    | `value,path,d1_s,d2_s,d3_s,d_total_s,sim_count,sim_mean_s,sim_std_error_s` |
//!
//! In `analyze` output the link column is the link index, or `path` for the
//! `d_total` row. In `compare` output it is the link index, or `path` for the
//! end-to-end row.

use std::fmt::Write as _;

use medlink_core::csma_analytics::DelayBreakdown;
use medlink_core::model::{Profiles, TechnologyProfile};
use medlink_core::pathcomposer::{ComparisonReport, ComparisonRow, DelayStats, PathDelayReport, SweepRow};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeLink {
    pub index: u8,
    pub profile: String,
    pub breakdown: DelayBreakdown,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzePath {
    pub path: String,
    pub links: Vec<AnalyzeLink>,
    pub report: PathDelayReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutput {
    pub contention_mode: &'static str,
    pub paths: Vec<AnalyzePath>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkSummary {
    pub index: u8,
    pub profile: String,
    pub offered: u64,
    pub delivered: u64,
    pub dropped_oversize: u64,
    pub dropped_channel_access: u64,
    pub dropped_retry_limit: u64,
    pub collisions: u64,
    /// Link delay of the packets that crossed the whole path.
    pub delay: Option<DelayStats>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PacketRow {
    pub replication: u32,
    pub packet_id: u64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d_total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulatePath {
    pub path: String,
    pub links: Vec<LinkSummary>,
    pub total: Option<DelayStats>,
    pub packets: Vec<PacketRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutput {
    pub seed: u64,
    pub replications: u32,
    pub packet_count: u32,
    pub paths: Vec<SimulatePath>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparePath {
    pub path: String,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutput {
    pub contention_mode: &'static str,
    pub seed: u64,
    pub replications: u32,
    pub paths: Vec<ComparePath>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub parameter: String,
    pub contention_mode: &'static str,
    pub rows: Vec<SweepRow>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn ms(v: f64) -> String {
    format!("{:.6}", v * 1e3)
}

fn opt_ms(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), ms)
}

/// `left` leading columns left-aligned, the rest right-aligned.
fn table(header: &[&str], left: usize, rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, cell) in cells.iter().enumerate() {
            let sep = if i == 0 { "" } else { "  " };
            if i < left {
                let _ = write!(l, "{sep}{cell:<w$}", w = width[i]);
            } else {
                let _ = write!(l, "{sep}{cell:>w$}", w = width[i]);
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().take(cols).map(String::as_str).collect());
    }
    out
}

// ---------------------------------------------------------------------------

fn profile_rate(p: &TechnologyProfile) -> String {
    let r = p.data_rate;
    if r >= 1e6 {
        format!("{} Mbit/s", r / 1e6)
    } else {
        format!("{} kbit/s", r / 1e3)
    }
}

pub fn profiles(profiles: &Profiles, format: Format) -> String {
    match format {
        Format::Json => json(&profiles.values().collect::<Vec<_>>()),
        Format::Csv => {
            let mut out = String::from(
                "id,name,mac_kind,data_rate_bps,phy_header_b,mac_header_b,mac_footer_b,buffer_capacity_bits,oversize_policy\n",
            );
            for p in profiles.values() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    p.id,
                    csv_text(&p.name),
                    p.mac_kind().as_str(),
                    p.data_rate,
                    p.phy_header,
                    p.mac_header,
                    p.mac_footer,
                    p.buffer_capacity.map_or_else(String::new, |b| b.to_string()),
                    p.oversize_policy.as_str(),
                );
            }
            out
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = profiles
                .values()
                .map(|p| {
                    vec![
                        p.id.clone(),
                        p.name.clone(),
                        p.mac_kind().as_str().into(),
                        profile_rate(p),
                        format!("{}/{}/{} B", p.phy_header, p.mac_header, p.mac_footer),
                        p.buffer_capacity.map_or_else(|| "-".into(), |b| format!("{b} bits")),
                    ]
                })
                .collect();
            table(&["id", "name", "kind", "rate", "headers", "buffer"], 3, &rows)
        }
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn analyze(out: &AnalyzeOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut s = String::from("path,link,component,seconds\n");
            for p in &out.paths {
                for l in &p.links {
                    for (name, v) in l.breakdown.components() {
                        let _ = writeln!(s, "{},{},{},{}", p.path, l.index, name, v);
                    }
                }
                let _ = writeln!(s, "{},path,d_total,{}", p.path, p.report.d_total);
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            for (i, p) in out.paths.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                let _ = writeln!(s, "path {} (analytic, {}; milliseconds)", p.path, out.contention_mode);
                let mut rows: Vec<Vec<String>> = p
                    .links
                    .iter()
                    .map(|l| {
                        let b = &l.breakdown;
                        vec![
                            format!("D{} {}", l.index, l.profile),
                            ms(b.t_bo),
                            ms(b.t_data),
                            ms(b.t_ta),
                            ms(b.t_ack),
                            ms(b.t_ifs),
                            ms(b.total),
                        ]
                    })
                    .collect();
                let mut total = vec![String::new(); 7];
                total[0] = "D_total".into();
                total[6] = ms(p.report.d_total);
                rows.push(total);
                s.push_str(&table(&["link", "t_bo", "t_data", "t_ta", "t_ack", "t_ifs", "delay"], 1, &rows));
            }
            s
        }
    }
}

pub fn simulate(out: &SimulateOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut s = String::from("path,replication,packet_id,d1_s,d2_s,d3_s,d_total_s\n");
            for p in &out.paths {
                for r in &p.packets {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        p.path, r.replication, r.packet_id, r.d1, r.d2, r.d3, r.d_total
                    );
                }
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            for (i, p) in out.paths.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                let _ = writeln!(
                    s,
                    "path {} (seed {}, {} replication(s) of {} packets; milliseconds)",
                    p.path, out.seed, out.replications, out.packet_count
                );
                let stats_cells = |d: Option<&DelayStats>| -> Vec<String> {
                    vec![
                        opt_ms(d.map(|d| d.mean)),
                        opt_ms(d.map(|d| d.std_error)),
                        opt_ms(d.map(|d| d.p50)),
                        opt_ms(d.map(|d| d.p90)),
                        opt_ms(d.map(|d| d.p99)),
                        opt_ms(d.map(|d| d.max)),
                    ]
                };
                let mut rows: Vec<Vec<String>> = p
                    .links
                    .iter()
                    .map(|l| {
                        let dropped = l.dropped_oversize + l.dropped_channel_access + l.dropped_retry_limit;
                        let mut row = vec![
                            format!("D{} {}", l.index, l.profile),
                            l.offered.to_string(),
                            l.delivered.to_string(),
                            dropped.to_string(),
                            l.collisions.to_string(),
                        ];
                        row.extend(stats_cells(l.delay.as_ref()));
                        row
                    })
                    .collect();
                let mut total = vec!["D_total".to_string(), String::new(), p.packets.len().to_string(), String::new(), String::new()];
                total.extend(stats_cells(p.total.as_ref()));
                rows.push(total);
                s.push_str(&table(
                    &["link", "offered", "delivered", "dropped", "collisions", "mean", "std_err", "p50", "p90", "p99", "max"],
                    1,
                    &rows,
                ));
            }
            s
        }
    }
}

fn compare_cells(label: String, r: &ComparisonRow) -> Vec<String> {
    vec![
        label,
        ms(r.analytic),
        ms(r.simulated.mean),
        ms(r.simulated.std_error),
        r.simulated.count.to_string(),
        if r.absolute {
            format!("{} ms abs", ms(r.relative_error))
        } else {
            format!("{:.4}%", r.relative_error * 100.0)
        },
        if r.flagged { "FLAG".into() } else { String::new() },
    ]
}

pub fn compare(out: &CompareOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut s = String::from(
                "path,link,analytic_s,mean_s,std_error_s,count,relative_error,absolute,flagged\n",
            );
            for p in &out.paths {
                let rows = p
                    .report
                    .per_link
                    .iter()
                    .enumerate()
                    .map(|(i, r)| ((i + 1).to_string(), r))
                    .chain(std::iter::once(("path".to_string(), &p.report.path)));
                for (link, r) in rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        p.path,
                        link,
                        r.analytic,
                        r.simulated.mean,
                        r.simulated.std_error,
                        r.simulated.count,
                        r.relative_error,
                        r.absolute,
                        r.flagged
                    );
                }
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            for (i, p) in out.paths.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                let _ = writeln!(
                    s,
                    "path {} (analytic {} vs {} replication(s), seed {}; milliseconds, flag above {}%)",
                    p.path,
                    out.contention_mode,
                    out.replications,
                    out.seed,
                    p.report.threshold * 100.0
                );
                let mut rows: Vec<Vec<String>> = p
                    .report
                    .per_link
                    .iter()
                    .enumerate()
                    .map(|(i, r)| compare_cells(format!("D{}", i + 1), r))
                    .collect();
                rows.push(compare_cells("D_total".into(), &p.report.path));
                s.push_str(&table(
                    &["link", "analytic", "sim_mean", "std_err", "count", "rel_error", ""],
                    1,
                    &rows,
                ));
            }
            s
        }
    }
}

pub fn sweep(out: &SweepOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut s = String::from(
                "value,path,d1_s,d2_s,d3_s,d_total_s,sim_count,sim_mean_s,sim_std_error_s\n",
            );
            for row in &out.rows {
                for p in &row.paths {
                    let a = &p.analytic;
                    let (count, mean, se) = match &p.simulated {
                        Some(d) => (d.count.to_string(), d.mean.to_string(), d.std_error.to_string()),
                        None => Default::default(),
                    };
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        row.value, p.path, a.d1, a.d2, a.d3, a.d_total, count, mean, se
                    );
                }
            }
            s
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = out
                .rows
                .iter()
                .flat_map(|row| {
                    row.paths.iter().map(move |p| {
                        let a = &p.analytic;
                        vec![
                            row.value.to_string(),
                            p.path.clone(),
                            ms(a.d1),
                            ms(a.d2),
                            ms(a.d3),
                            ms(a.d_total),
                            opt_ms(p.simulated.as_ref().map(|d| d.mean)),
                            opt_ms(p.simulated.as_ref().map(|d| d.std_error)),
                        ]
                    })
                })
                .collect();
            let mut s = format!("sweep of {} ({}; milliseconds)\n", out.parameter, out.contention_mode);
            s.push_str(&table(
                &[out.parameter.as_str(), "path", "D1", "D2", "D3", "D_total", "sim_mean", "std_err"],
                2,
                &rows,
            ));
            s
        }
    }
}
