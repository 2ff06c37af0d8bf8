use netdecide::harness::scenarios::{arrival_report, run_fish};
use netdecide::harness::ScenarioConfig;

/// Median nearest-neighbor distance of the settled school lies within
/// `[0.5 d_s, 2 d_s]`.
#[test]
fn settled_school_keeps_its_spacing() {
    let cfg = ScenarioConfig {
        replicas: 3,
        ..ScenarioConfig::preset("fig14").unwrap()
    };
    let d_s = cfg.fish.motion.d_s;
    let traces = run_fish(&cfg).unwrap();
    let spacings: Vec<f64> = traces
        .replicas
        .iter()
        .map(|r| {
            let a = arrival_report(r, &cfg);
            assert!(a.agreement_time.is_some());
            a.final_median_spacing
        })
        .collect();
    for s in &spacings {
        assert!(
            (0.5 * d_s..=2.0 * d_s).contains(s),
            "median nearest-neighbor distances {spacings:?} outside [{}, {}]",
            0.5 * d_s,
            2.0 * d_s
        );
    }
}
