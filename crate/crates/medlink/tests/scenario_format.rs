use medlink::scenario_file::{load_scenario, parse_scenario, write_scenario, LoadError};
use medlink::sources::{builtin_scenario_text, BUILTIN_SCENARIOS};
use medlink_core::model::{
    builtin_profiles, validate_scenario, ContentionConfig, CsmaParams, DeterministicLinkParams,
    LinkSpec, MacParams, Mode, OversizePolicy, PathSpec, Profiles, Scenario, TechnologyProfile,
    TrafficSpec,
};
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_-]{0,8}"
}

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 ,.()/+-]{0,20}[A-Za-z0-9)]"
}

fn seconds() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 1e-7f64..10.0]
}

fn mac() -> impl Strategy<Value = MacParams> {
    let csma = (
        (0u8..9, 0u8..9, 0u32..20),
        (seconds(), seconds(), seconds(), seconds(), seconds()),
        (0u32..200, any::<bool>(), 0u32..10, prop::option::of(0u32..100)),
    )
        .prop_map(|((be_min, be_max, max_backoffs), (slot, cca, ta, sifs, lifs), (thr, ack, retries, ack_override))| {
            MacParams::Contention(CsmaParams {
                be_min,
                be_max,
                max_backoffs,
                slot_duration: slot,
                cca_duration: cca,
                turnaround: ta,
                sifs,
                lifs,
                sifs_frame_threshold: thr,
                ack_enabled: ack,
                max_retries: retries,
                ack_frame_override: ack_override,
            })
        });
    let det = (seconds(), seconds(), 0u32..10).prop_map(|(p, q, r)| {
        MacParams::Deterministic(DeterministicLinkParams {
            processing_delay: p,
            propagation_delay: q,
            retry_limit: r,
        })
    });
    prop_oneof![csma, det]
}

fn profile() -> impl Strategy<Value = TechnologyProfile> {
    (
        ident(),
        text(),
        1.0f64..1e9,
        (0u32..64, 0u32..64, 0u32..64),
        mac(),
        prop::option::of(0u64..100_000),
        any::<bool>(),
        prop::collection::vec((ident(), text()), 0..3),
    )
        .prop_map(|(id, name, rate, (phy, machdr, ftr), mac, buffer, drop, meta)| {
            let mut metadata: Vec<(String, String)> = Vec::new();
            for (k, v) in meta {
                if !metadata.iter().any(|(x, _)| *x == k) {
                    metadata.push((k, v));
                }
            }
            TechnologyProfile {
                id,
                name,
                data_rate: rate,
                phy_header: phy,
                mac_header: machdr,
                mac_footer: ftr,
                mac,
                buffer_capacity: buffer,
                oversize_policy: if drop { OversizePolicy::Drop } else { OversizePolicy::Accept },
                metadata,
            }
        })
}

fn path() -> impl Strategy<Value = PathSpec> {
    (
        ident(),
        prop::collection::vec((ident(), prop::option::of(0u32..10)), 0..4),
    )
        .prop_map(|(id, links)| PathSpec {
            id,
            links: links
                .into_iter()
                .enumerate()
                .map(|(i, (profile_id, n))| LinkSpec {
                    index: i as u8 + 1,
                    profile_id,
                    contention: n.map(|n| ContentionConfig { num_end_devices: n }),
                })
                .collect(),
        })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec(profile(), 0..3),
        prop::collection::vec(path(), 0..3),
        (0u32..5000, seconds(), 0u32..100_000),
        any::<u64>(),
        prop::sample::select(vec![Mode::Analytic, Mode::Simulate, Mode::Compare]),
        0u32..10,
    )
        .prop_map(|(mut profiles, paths, (payload, ia, count), seed, mode, replications)| {
            profiles.sort_by(|a, b| a.id.cmp(&b.id));
            profiles.dedup_by(|a, b| a.id == b.id);
            Scenario {
                profiles,
                paths,
                traffic: TrafficSpec {
                    payload,
                    inter_arrival: ia,
                    packet_count: count,
                },
                seed,
                mode,
                replications,
            }
        })
}

/// Parse text and build its profiles from scratch, without validation.
fn reparse(text: &str) -> Scenario {
    let (mut s, sections) = parse_scenario(text).unwrap();
    for section in sections {
        s.profiles.push(section.build(&Profiles::new()).unwrap());
    }
    s
}

proptest! {
    #[test]
    fn written_scenarios_reparse_equal(s in scenario()) {
        let text = write_scenario(&s);
        prop_assert_eq!(reparse(&text), s);
    }

    #[test]
    fn loading_agrees_with_validation(
        access in prop::sample::select(vec!["path1", "path2", "path3"]),
        edit in prop::sample::select(vec![
            ("inter_arrival = 0.04 s", "inter_arrival = 0"),
            ("inter_arrival = 0.04 s", "inter_arrival = 10 ms"),
            ("packet_count = 10000", "packet_count = 0"),
            ("num_end_devices = 1", "num_end_devices = 0"),
            ("num_end_devices = 1", "num_end_devices = 4"),
            ("replications = 1", "replications = 0"),
            ("profile = ipcloud", "profile = umts"),
            ("profile = ipcloud", "profile = zigbee"),
            ("profile = zigbee\n", "profile = wimax\n"),
            ("[path path", "[path 9"),
            ("[link 3]", "[link 4]"),
            ("payload = 1024 B", "payload = 0 B"),
            ("seed = 0", "seed = 18446744073709551615"),
        ]),
    ) {
        let base = builtin_profiles();
        let text = builtin_scenario_text(access).unwrap().replacen(edit.0, edit.1, 1);
        let (parsed, sections) = parse_scenario(&text).unwrap();
        prop_assert!(sections.is_empty());
        let violations = validate_scenario(&parsed, &base);
        let loaded = load_scenario(&text, &base);
        prop_assert_eq!(loaded.is_ok(), violations.is_empty(), "{:?} / {:?}", loaded, violations);
    }
}

#[test]
fn builtin_scenarios_validate_and_reparse() {
    let base = builtin_profiles();
    for (name, text) in BUILTIN_SCENARIOS {
        let s = load_scenario(text, &base).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(validate_scenario(&s, &base), vec![]);
        assert_eq!(load_scenario(&write_scenario(&s), &base).unwrap(), s);
    }
}

#[test]
fn path1_has_three_links() {
    let s = load_scenario(builtin_scenario_text("path1").unwrap(), &builtin_profiles()).unwrap();
    let ids: Vec<&str> = s.paths[0].links.iter().map(|l| l.profile_id.as_str()).collect();
    assert_eq!(ids, ["zigbee", "wlan", "ipcloud"]);
    assert_eq!(s.traffic.payload, 1024);
    assert_eq!(s.traffic.inter_arrival, 0.04);
}

#[test]
fn zero_inter_arrival_names_the_field() {
    let text = builtin_scenario_text("path2").unwrap().replace("0.04 s", "0 s");
    let Err(LoadError::Validation(v)) = load_scenario(&text, &builtin_profiles()) else {
        panic!("expected a validation error");
    };
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].field, "traffic.inter_arrival");
    assert!(v[0].to_string().contains("inter_arrival"));
}

#[test]
fn unknown_profile_is_reported() {
    let text = builtin_scenario_text("path3").unwrap().replace("profile = umts", "profile = lte");
    assert_eq!(
        load_scenario(&text, &builtin_profiles()),
        Err(LoadError::UnknownProfile("lte".into()))
    );
}
