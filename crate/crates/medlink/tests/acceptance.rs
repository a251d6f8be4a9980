//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use medlink::sources::BUILTIN_SCENARIOS;
use medlink_core::csma_analytics::{
    expected_time_delay_corrected, expected_time_delay_literal, p_backoff_period, p_tde_literal,
    p_tss, t_ack, t_data,
};
use medlink_core::linksim::{simulate_csma_link, simulate_path, DropReason};
use medlink_core::model::{
    builtin_profiles, ContentionConfig, MacKind, MacParams, OversizePolicy, Scenario, TrafficSpec,
};
use medlink_core::pathcomposer::{analytic_path_delay, compare, ContentionMode, DEFAULT_THRESHOLD};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

fn builtin(name: &str) -> Scenario {
    let text = medlink::sources::builtin_scenario_text(name).expect("built-in scenario");
    medlink::scenario_file::load_scenario(text, &builtin_profiles()).expect("built-in scenario loads")
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn same_digits(a: f64, b: f64, digits: i32) -> bool {
    (a - b).abs() <= 10f64.powi(-digits) * b.abs()
}

fn ack_frame_identity() -> Outcome {
    let start = Instant::now();
    let profiles = builtin_profiles();
    for p in profiles.values() {
        ensure(
            t_data(p, 0) == t_ack(p),
            format!("{}: t_data(0) = {} but t_ack = {}", p.id, t_data(p, 0), t_ack(p)),
        )?;
    }
    within(start.elapsed(), 1)?;
    Ok(format!("{} profiles", profiles.len()))
}

fn backoff_period_probability() -> Outcome {
    ensure(p_backoff_period(3) == 0.125, format!("BE 3 -> {}", p_backoff_period(3)))?;
    ensure(p_backoff_period(2) == 0.25, format!("BE 2 -> {}", p_backoff_period(2)))?;
    Ok("0.125, 0.25".into())
}

fn transmission_success_probability() -> Outcome {
    ensure(p_tss(2, 3) == 0.25, format!("p_tss(2, 3) = {}", p_tss(2, 3)))?;
    ensure(p_tss(1, 2) == 1.0, format!("p_tss(1, 2) = {}", p_tss(1, 2)))?;
    Ok("0.25, 1.0".into())
}

fn path_additivity() -> Outcome {
    let mut checked = 0usize;
    for (name, _) in BUILTIN_SCENARIOS {
        let s = builtin(name);
        let profiles = s.resolve_profiles(&builtin_profiles());
        let traffic = TrafficSpec { packet_count: 10_000, ..s.traffic };
        for path in &s.paths {
            let set = simulate_path(path, &profiles, &traffic, s.seed).map_err(|e| e.to_string())?;
            ensure(!set.per_packet.is_empty(), format!("{name}: no packet delivered"))?;
            for p in &set.per_packet {
                let r = p.report;
                let residual = r.d_total - (r.d1 + r.d2 + r.d3);
                ensure(
                    residual.to_bits() == 0.0f64.to_bits(),
                    format!("{name} packet {}: residual {residual:e}", p.packet),
                )?;
            }
            checked += set.per_packet.len();
        }
    }
    Ok(format!("{checked} packets, residual 0"))
}

fn backoff_law() -> Outcome {
    let start = Instant::now();
    let mut profile = builtin_profiles()["zigbee"].clone();
    let MacParams::Contention(params) = &mut profile.mac else {
        return Err("zigbee is not a contention profile".into());
    };
    params.ack_enabled = false;
    let slot = params.slot_duration;
    let be = params.be_min;
    let traffic = TrafficSpec { payload: 1024, inter_arrival: 0.04, packet_count: 100_000 };
    let set = simulate_csma_link(&profile, &traffic, ContentionConfig { num_end_devices: 1 }, 2024)
        .map_err(|e| e.to_string())?;
    ensure(set.delivered() == 100_000, format!("{} delivered", set.delivered()))?;

    let window = 1usize << be;
    let mut counts = vec![0u64; window];
    for s in &set.samples {
        let k = (s.breakdown.t_bo / slot).round() as usize;
        ensure(k < window, format!("draw {k} outside window"))?;
        counts[k] += 1;
    }
    let n = set.samples.len() as f64;
    let mean = set.samples.iter().map(|s| s.breakdown.t_bo).sum::<f64>() / n;
    let target = 3.5 * slot;
    let rel = (mean - target).abs() / target;
    ensure(rel < 0.01, format!("mean {mean} vs {target}, {:.3}% off", rel * 100.0))?;

    let expected = n / window as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p_value = 1.0 - ChiSquared::new((window - 1) as f64).unwrap().cdf(chi2);
    ensure(p_value > 0.01, format!("chi-square {chi2:.3}, p = {p_value:.4}"))?;
    within(start.elapsed(), 10)?;
    Ok(format!(
        "mean {:.4} slots ({:.3}% off), chi-square {chi2:.2} on {} df, p = {p_value:.3}, {:.2} s",
        mean / slot,
        rel * 100.0,
        window - 1,
        start.elapsed().as_secs_f64()
    ))
}

fn analytic_agreement() -> Outcome {
    let start = Instant::now();
    let s = builtin("path1");
    let profiles = s.resolve_profiles(&builtin_profiles());
    let path = &s.paths[0];
    for l in &path.links {
        if let Some(c) = l.contention {
            ensure(c.num_end_devices == 1, format!("link {} has {} devices", l.index, c.num_end_devices))?;
        }
    }
    let traffic = TrafficSpec { packet_count: 100_000, ..s.traffic };
    let analytic = analytic_path_delay(path, &profiles, &traffic, ContentionMode::ExpectedBackoff)
        .map_err(|e| e.to_string())?;
    let set = simulate_path(path, &profiles, &traffic, 6).map_err(|e| e.to_string())?;
    let report = compare(&analytic, &[set], DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    let rel = report.path.relative_error;
    ensure(rel < 0.01, format!("relative error {:.4}%", rel * 100.0))?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "analytic {:.6} ms, simulated {:.6} ms, relative error {:.4}%, {:.2} s",
        analytic.d_total * 1e3,
        report.path.simulated.mean * 1e3,
        rel * 100.0,
        start.elapsed().as_secs_f64()
    ))
}

fn contention_oracle() -> Outcome {
    let profile = builtin_profiles()["zigbee"].clone();
    let params = profile.csma().ok_or("zigbee is not a contention profile")?;
    ensure(params.be_min == 3 && params.be_max == 3, "zigbee BE is not fixed at 3")?;
    // expected backoff slots per offered packet, from a separate brute-force
    // enumeration script
    let oracle = [(2u32, 7.4981689453125), (3, 8.664835542440414)];
    let traffic = TrafficSpec { payload: 1024, inter_arrival: 1.0, packet_count: 100_000 };
    let mut notes = Vec::new();
    for (n, slots) in oracle {
        let c = ContentionConfig { num_end_devices: n };
        let exact = expected_time_delay_corrected(params, c).map_err(|e| e.to_string())?;
        ensure(
            same_digits(exact, slots * params.slot_duration, 12),
            format!("N={n}: enumeration {exact} vs oracle {}", slots * params.slot_duration),
        )?;
        let set = simulate_csma_link(&profile, &traffic, c, 70 + u64::from(n)).map_err(|e| e.to_string())?;
        let backoffs: Vec<f64> = set
            .samples
            .iter()
            .map(|s| s.breakdown.t_bo)
            .chain(set.drops.iter().map(|d| d.backoff))
            .collect();
        let (mean, se) = mean_and_se(&backoffs);
        let z = (mean - exact) / se;
        ensure(z.abs() < 3.0, format!("N={n}: simulated {mean} vs exact {exact}, z = {z:.2}"))?;
        notes.push(format!("N={n} z={z:+.2}"));
    }
    Ok(notes.join(", "))
}

fn literal_reproduction() -> Outcome {
    // independent brute-force summation in exact rational arithmetic
    let oracle_p_tde = 0.875;
    let oracle_delay = 4.714285714285714;
    let p = p_tde_literal(3, 2);
    let e = expected_time_delay_literal(3, 2).map_err(|e| e.to_string())?;
    ensure(same_digits(p, oracle_p_tde, 12), format!("p_tde = {p}"))?;
    ensure(same_digits(e, oracle_delay, 12), format!("expected delay = {e}"))?;
    ensure((e - 4.714).abs() < 5e-4, format!("expected delay = {e}"))?;
    Ok(format!("p_tde {p}, expected delay {e} slots"))
}

fn table_fidelity() -> Outcome {
    let all = builtin_profiles();
    let zigbee = &all["zigbee"];
    let z = zigbee.csma().ok_or("zigbee is not contention-kind")?;
    ensure(zigbee.data_rate == 250_000.0, "zigbee rate")?;
    ensure(z.be_min == 3 && z.be_max == 3, format!("zigbee BE {}..{}", z.be_min, z.be_max))?;
    ensure(z.max_backoffs == 2, format!("zigbee max backoffs {}", z.max_backoffs))?;
    for (k, v) in [
        ("beacon_order", "6"),
        ("superframe_order", "0"),
        ("maximum_routers", "5"),
        ("maximum_depth", "5"),
        ("beacon_enabled_network", "disabled"),
        ("mesh_routing", "disabled"),
        ("route_discovery_timeout", "10 ms"),
    ] {
        ensure(zigbee.meta(k) == Some(v), format!("zigbee {k} = {:?}", zigbee.meta(k)))?;
    }

    let wlan = &all["wlan"];
    ensure(wlan.mac_kind() == MacKind::Contention, "wlan kind")?;
    ensure(wlan.data_rate == 11_000_000.0, format!("wlan rate {}", wlan.data_rate))?;
    ensure(wlan.buffer_capacity == Some(25_600), format!("wlan buffer {:?}", wlan.buffer_capacity))?;
    ensure(wlan.oversize_policy == OversizePolicy::Drop, "wlan oversize policy")?;
    ensure(wlan.meta("transmit_power_w") == Some("0.005"), "wlan transmit power")?;
    ensure(wlan.meta("packet_reception_threshold_dbm") == Some("-95"), "wlan reception threshold")?;
    ensure(all["wlan-54g"].data_rate == 54_000_000.0, "wlan-54g rate")?;

    let wimax = &all["wimax"];
    ensure(wimax.mac_kind() == MacKind::Deterministic, "wimax kind")?;
    ensure(wimax.data_rate == 120_000_000.0, format!("wimax rate {}", wimax.data_rate))?;
    ensure(wimax.meta("antenna_gain_dbi") == Some("15"), "wimax antenna gain")?;
    ensure(wimax.meta("maximum_transmission_power_w") == Some("0.5"), "wimax power")?;
    ensure(wimax.meta("base_station_cdma_codes") == Some("8"), "wimax CDMA codes")?;

    let umts = &all["umts"];
    let u = umts.deterministic().ok_or("umts is not deterministic-kind")?;
    ensure(umts.data_rate == 42_000_000.0, format!("umts rate {}", umts.data_rate))?;
    ensure(u.processing_delay == 0.002, format!("umts processing {}", u.processing_delay))?;
    ensure(u.retry_limit == 4, format!("umts retry limit {}", u.retry_limit))?;

    let ipcloud = &all["ipcloud"];
    ensure(ipcloud.data_rate == 100_000_000.0, "ipcloud rate")?;
    Ok("zigbee, wlan, wimax, umts, ipcloud".into())
}

fn cli_determinism() -> Outcome {
    let run = |name: &str, reps: u32| {
        Command::new(env!("CARGO_BIN_EXE_medlink"))
            .args(["simulate", "--scenario", &format!("builtin:{name}"), "--seed", "7", "--format", "csv"])
            .args(["--replications", &reps.to_string()])
            .env_remove("MEDLINK_PROFILE_DIR")
            .output()
            .map_err(|e| e.to_string())
    };
    let mut runs = 0;
    for (name, _) in BUILTIN_SCENARIOS {
        for reps in [1u32, 2, 4] {
            let a = run(name, reps)?;
            let b = run(name, reps)?;
            ensure(a.status.success(), format!("{name} x{reps}: exit {:?}", a.status.code()))?;
            ensure(a.stdout == b.stdout, format!("{name} x{reps}: output differs"))?;
            let lines = a.stdout.iter().filter(|&&c| c == b'\n').count();
            ensure(lines > 1, format!("{name} x{reps}: empty report"))?;
            runs += 2;
        }
    }
    Ok(format!("{runs} runs, byte-identical pairs"))
}

fn buffer_drop() -> Outcome {
    let wlan = builtin_profiles()["wlan"].clone();
    let overhead = u64::from(wlan.phy_header + wlan.mac_header + wlan.mac_footer);
    let payload = (30_000 / 8 - overhead) as u32;
    ensure(wlan.frame_bits(payload) == 30_000, format!("frame is {} bits", wlan.frame_bits(payload)))?;
    let traffic = TrafficSpec { payload, inter_arrival: 0.04, packet_count: 25 };
    let set = simulate_csma_link(&wlan, &traffic, ContentionConfig { num_end_devices: 1 }, 1)
        .map_err(|e| e.to_string())?;
    ensure(set.offered == 25, format!("offered {}", set.offered))?;
    ensure(set.dropped_for(DropReason::Oversize) == 25, format!("dropped {}", set.dropped()))?;
    ensure(set.delivered() == 0, format!("delivered {}", set.delivered()))?;

    let fits = TrafficSpec { payload: (25_600 / 8 - overhead) as u32, ..traffic };
    let kept = simulate_csma_link(&wlan, &fits, ContentionConfig { num_end_devices: 1 }, 1)
        .map_err(|e| e.to_string())?;
    ensure(kept.dropped() == 0, format!("a 25600-bit frame was dropped {} times", kept.dropped()))?;
    Ok("25 of 25 dropped as oversize; 25600-bit frames kept".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ACK airtime equals empty data frame airtime", ack_frame_identity),
        ("backoff period probability", backoff_period_probability),
        ("transmission success probability", transmission_success_probability),
        ("end-to-end additivity of simulated packets", path_additivity),
        ("single-device backoff law", backoff_law),
        ("analytic vs simulated path 1", analytic_agreement),
        ("contention expectation vs simulator", contention_oracle),
        ("literal expected-delay construction", literal_reproduction),
        ("built-in profile values", table_fidelity),
        ("CLI output determinism", cli_determinism),
        ("WLAN buffer drop", buffer_drop),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
