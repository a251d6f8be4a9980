use medlink_core::linksim::simulate_csma_link;
use medlink_core::model::{builtin_profiles, ContentionConfig, MacParams, TrafficSpec};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn single_device_backoff_is_uniform_over_window() {
    let mut profile = builtin_profiles()["zigbee"].clone();
    let MacParams::Contention(params) = &mut profile.mac else { unreachable!() };
    params.ack_enabled = false;
    let slot = params.slot_duration;
    let traffic = TrafficSpec {
        payload: 20,
        inter_arrival: 0.04,
        packet_count: 50_000,
    };
    let set = simulate_csma_link(&profile, &traffic, ContentionConfig { num_end_devices: 1 }, 77).unwrap();
    assert_eq!(set.delivered(), 50_000);

    let mut counts = [0u64; 8];
    for s in &set.samples {
        let k = (s.breakdown.t_bo / slot).round() as usize;
        counts[k] += 1;
    }
    let n = set.samples.len() as f64;
    let mean_slots = set.samples.iter().map(|s| s.breakdown.t_bo).sum::<f64>() / n / slot;
    assert!((mean_slots - 3.5).abs() / 3.5 < 0.01, "mean {mean_slots}");

    let expected = n / 8.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p_value = 1.0 - ChiSquared::new(7.0).unwrap().cdf(stat);
    assert!(p_value > 0.01, "chi2 {stat}, p {p_value}, counts {counts:?}");
}
