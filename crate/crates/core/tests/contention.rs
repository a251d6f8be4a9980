//! Exact contention expectations against independently enumerated values and
//! against the event-driven simulator.

use medlink_core::csma_analytics::{
    enumerate_contention, expected_time_delay_corrected, expected_time_delay_literal,
    p_tde_literal,
};
use medlink_core::linksim::simulate_csma_link;
use medlink_core::model::{builtin_profiles, ContentionConfig, CsmaParams, MacParams, TrafficSpec};

fn zigbee_params() -> CsmaParams {
    builtin_profiles()["zigbee"].csma().unwrap().clone()
}

fn devices(n: u32) -> ContentionConfig {
    ContentionConfig { num_end_devices: n }
}

// Expected backoff slots per offered packet, enumerated over every slot
// tuple by a separate brute-force script.
const ORACLE_BE3: [f64; 4] = [
    7.4981689453125,
    8.664835542440414,
    9.248168841004372,
    9.598168806234996,
];
const ORACLE_BE2_3: [f64; 4] = [
    5.996337890625,
    7.163004279136658,
    7.746337473392487,
    8.096337334314995,
];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn enumeration_matches_oracle() {
    let mut p = zigbee_params();
    for (n, want) in (2..=5).zip(ORACLE_BE3) {
        let got = enumerate_contention(&p, devices(n)).unwrap().expected_backoff_slots;
        assert!(close(got, want), "N={n}: {got} vs {want}");
    }
    p.be_min = 2;
    for (n, want) in (2..=5).zip(ORACLE_BE2_3) {
        let got = enumerate_contention(&p, devices(n)).unwrap().expected_backoff_slots;
        assert!(close(got, want), "N={n}: {got} vs {want}");
    }
}

#[test]
fn expectation_grows_with_devices() {
    let p = zigbee_params();
    let values: Vec<f64> = (1..=5)
        .map(|n| expected_time_delay_corrected(&p, devices(n)).unwrap())
        .collect();
    assert_eq!(values[0], 3.5 * p.slot_duration);
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
}

#[test]
fn literal_matches_oracle() {
    let pairs = [
        (2, 0.875, 4.714285714285714),
        (3, 0.7777777777777778, 3.5357142857142856),
        (4, 0.65625, 3.142857142857143),
        (5, 0.56, 2.9464285714285716),
    ];
    for (d, p, e) in pairs {
        assert!(close(p_tde_literal(3, d), p), "p_tde({d})");
        assert!(close(expected_time_delay_literal(3, d).unwrap(), e), "E({d})");
    }
}

#[test]
fn simulator_agrees_with_enumeration() {
    let profile = builtin_profiles()["zigbee"].clone();
    let MacParams::Contention(params) = &profile.mac else { unreachable!() };
    let traffic = TrafficSpec {
        payload: 1024,
        inter_arrival: 1.0,
        packet_count: 20_000,
    };
    for n in [2u32, 3] {
        let exact = expected_time_delay_corrected(params, devices(n)).unwrap();
        let set = simulate_csma_link(&profile, &traffic, devices(n), 5).unwrap();
        let xs: Vec<f64> = set
            .samples
            .iter()
            .map(|s| s.breakdown.t_bo)
            .chain(set.drops.iter().map(|d| d.backoff))
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!((m - exact).abs() < 3.0 * se, "N={n}: sim {m} exact {exact} se {se}");
        assert_eq!(set.mean_offered_backoff().map(|v| (v - m).abs() < 1e-12), Some(true));
    }
}
