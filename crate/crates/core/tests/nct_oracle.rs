mod common;

use common::NctOracle;
use loftune::nct::{noncentral_t_cdf, NctParams};
use rand::Rng;

fn cdf(x: f64, df: f64, ncp: f64) -> f64 {
    noncentral_t_cdf(x, NctParams::new(df, ncp).unwrap()).unwrap()
}

#[test]
fn oracle_reproduces_closed_forms() {
    let oracle = NctOracle::default();
    // df = 2 central: 1/2 + t / (2 sqrt(t^2 + 2))
    for t in [-7.0, -0.4, 1.3, 20.0] {
        let exact = 0.5 + t / (2.0 * (t * t + 2.0f64).sqrt());
        assert!((oracle.cdf(t, 2.0, 0.0) - exact).abs() < 1e-12);
    }
    // x = 0: P(T < 0) = Phi(-ncp) for any df
    let phi = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    for (df, ncp) in [(3.0, 1.2), (50.0, -2.0), (10_000.0, 4.0)] {
        assert!((oracle.cdf(0.0, df, ncp) - phi(-ncp)).abs() < 1e-12);
    }
}

#[test]
fn frozen_reference_point() {
    // P(T < 2 | df = 10, ncp = 1.5): 30-digit quadrature of the defining integral
    let oracle = NctOracle::default();
    let reference = oracle.cdf(2.0, 10.0, 1.5);
    assert!((reference - 0.659_154_072_442_190_8).abs() < 1e-10, "{reference}");
    assert!((cdf(2.0, 10.0, 1.5) - reference).abs() < 1e-10);
}

#[test]
fn central_reduction_matches_oracle() {
    let oracle = NctOracle::default();
    for df in [2.0, 5.0, 30.0, 1000.0] {
        for x in [-30.0, -3.0, -0.5, 0.7, 2.5, 12.0] {
            let d = (cdf(x, df, 0.0) - oracle.cdf(x, df, 0.0)).abs();
            assert!(d < 1e-8, "df={df} x={x} diff={d}");
        }
    }
}

#[test]
fn monotone_in_x_on_random_ladders() {
    let mut rng = common::rng(11);
    for _ in 0..1000 {
        let df = [2.0, 10.0, 100.0, 1e4][rng.random_range(0..4)];
        let ncp = rng.random_range(-20.0..20.0);
        let a = rng.random_range(-50.0..50.0);
        let b = a + rng.random_range(0.0..5.0);
        let (fa, fb) = (cdf(a, df, ncp), cdf(b, df, ncp));
        // series truncation is bounded by 1e-12
        assert!(fa <= fb + 1e-12, "df={df} ncp={ncp} {a}->{fa} {b}->{fb}");
        assert!((0.0..=1.0).contains(&fa));
    }
}

#[test]
fn larger_ncp_lowers_cdf() {
    for df in [2.0, 10.0, 100.0] {
        for x in [-2.0, 0.0, 1.0, 4.0] {
            let mut prev = cdf(x, df, -6.0);
            for i in 1..=24 {
                let ncp = -6.0 + 0.5 * i as f64;
                let cur = cdf(x, df, ncp);
                let saturated = |v: f64| !(1e-10..=1.0 - 1e-10).contains(&v);
                if saturated(cur) && saturated(prev) {
                    assert!(cur <= prev + 1e-12);
                } else {
                    assert!(cur < prev, "df={df} x={x} ncp={ncp}");
                }
                prev = cur;
            }
        }
    }
}
