use vcluster::analytic::pfail;
use vcluster::estimators::*;
use vcluster::steane::Basis;
use vcluster::Error;

fn cfg(trials: u64) -> McConfig {
    McConfig::new(trials, 17).with_workers(1)
}

#[test]
fn noiseless_channel_is_clean() {
    let c = estimate_residual_channel(0.0, &cfg(200)).unwrap();
    assert_eq!(c.acceptance.point, 1.0);
    for r in c.per_wire.iter().chain([&c.pooled]) {
        assert_eq!([r.x.successes, r.y.successes, r.z.successes], [0, 0, 0]);
    }
    let corr = CorrelationReport::from_channel(&c).unwrap();
    assert!(corr.pairs.iter().all(|p| p.joint.successes == 0));
    assert_eq!(corr.pairs.len(), 21);
}

#[test]
fn pooled_rate_is_the_wire_mean() {
    let c = estimate_residual_channel(0.02, &cfg(20_000)).unwrap();
    let mean: f64 = c.per_wire.iter().map(|w| w.z.point).sum::<f64>() / 7.0;
    assert!((mean - c.pooled.z.point).abs() < 1e-15);
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(c.joint[i][j], c.joint[j][i]);
        }
    }
}

#[test]
fn noiseless_readout_and_connection() {
    let r = estimate_logical_measurement_error(0.0, 0.0, Basis::X, &cfg(100)).unwrap();
    assert_eq!(r.error.successes, 0);
    for source in [LeafSource::Star, LeafSource::Pair, LeafSource::Homogeneous] {
        let e = estimate_connection_stats(0.0, 5, source, &cfg(5)).unwrap();
        assert_eq!(e.fusion.p_s.point, 1.0);
        assert_eq!(e.roots.p_fail.successes, 0);
        assert_eq!(e.roots.attempts, e.roots.links);
    }
}

#[test]
fn out_of_range_requests_are_rejected() {
    assert!(matches!(
        estimate_residual_channel(0.9, &cfg(3)),
        Err(Error::ZeroAccepted(3))
    ));
    assert!(correlation_diagnostic(0.06, &cfg(10)).is_err());
    assert!(estimate_logical_measurement_error(0.01, 0.0, Basis::Z, &cfg(10)).is_err());
    assert!(estimate_residual_channel(0.01, &cfg(0)).is_err());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let a = estimate_residual_channel(0.01, &cfg(3000)).unwrap();
    let b = estimate_residual_channel(0.01, &cfg(3000).with_workers(3)).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let a = estimate_connection_stats(0.01, 5, LeafSource::Pair, &cfg(30)).unwrap();
    let b = estimate_connection_stats(0.01, 5, LeafSource::Pair, &cfg(30).with_workers(2)).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn wilson_intervals_shrink_with_trials() {
    let (a, b) = wilson_interval(10, 100, 0.95f64).unwrap();
    let (c, d) = wilson_interval(40, 400, 0.95f64).unwrap();
    assert!(d - c < b - a);
    let r = RateEstimate::<f32>::new(3, 10, 0.9).unwrap();
    assert!(r.ci_low <= r.point && r.point <= r.ci_high);
}

#[test]
fn mean_attempts_follow_the_geometric_law() {
    // With many leaves the retry budget never binds.
    let p = 0.02;
    let f = estimate_fusion_stats(p, 30, LeafSource::Homogeneous, &cfg(3000)).unwrap();
    let r = estimate_root_failure(p, 30, LeafSource::Homogeneous, &cfg(3000)).unwrap();
    let ps = f.p_s.point;
    let sd = ((1.0 - ps) / (ps * ps)).sqrt() / (r.links as f64).sqrt();
    assert!(
        (r.mean_attempts() - 1.0 / ps).abs() < 4.0 * sd,
        "{} vs {}",
        r.mean_attempts(),
        1.0 / ps
    );
    assert_eq!(r.p_fail.successes, 0);
}

#[test]
fn root_failure_follows_the_binomial_sum() {
    let (p, l) = (0.02, 9);
    let c = cfg(20_000).with_confidence(0.99);
    let f = estimate_fusion_stats(p, l, LeafSource::Homogeneous, &c).unwrap();
    let r = estimate_root_failure(p, l, LeafSource::Homogeneous, &c).unwrap();
    // Failure is monotone in p_s, so the success interval maps to a failure interval.
    let (lo, hi) = (
        pfail(l, f.p_s.ci_high).unwrap(),
        pfail(l, f.p_s.ci_low).unwrap(),
    );
    assert!(
        r.p_fail.ci_low <= hi && lo <= r.p_fail.ci_high,
        "{:?} vs [{lo}, {hi}]",
        r.p_fail
    );
}
