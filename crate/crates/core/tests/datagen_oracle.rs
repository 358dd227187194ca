mod common;

use common::{euclid, ks_statistic, ray_cast_inside, rows_of};
use loftune::datagen::{
    gen_balls, gen_hypercube_mixture, gen_hypersphere_mixture, gen_polygons, generate_named,
    polygon_pair, MixtureParams, PolygonParams,
};
use loftune::Error;

#[test]
fn polygon_labels_agree_with_ray_casting() {
    for seed in 0..5 {
        let set = gen_polygons(seed);
        let polys = polygon_pair(seed, &PolygonParams::default());
        let rows = rows_of(&set.validation.data);
        assert_eq!(rows.len(), 10_000);
        for i in (0..rows.len()).step_by(50) {
            let (x, y) = (rows[i][0], rows[i][1]);
            let inside = polys.iter().any(|p| ray_cast_inside(&p.vertices, x, y));
            assert_eq!(set.validation.labels[i], !inside, "seed {seed} row {i}");
        }
        for row in rows_of(&set.train) {
            assert!(polys.iter().any(|p| ray_cast_inside(&p.vertices, row[0], row[1])));
        }
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let mut twice = 0.0;
    for i in 0..v.len() {
        let j = (i + 1) % v.len();
        twice += v[i][0] * v[j][1] - v[j][0] * v[i][1];
    }
    0.5 * f64::abs(twice)
}

#[test]
fn first_polygon_is_sampled_three_times_as_densely() {
    let polys = polygon_pair(4, &PolygonParams::default());
    let rows = rows_of(&gen_polygons(4).train);
    let (a0, a1) = (shoelace(&polys[0].vertices), shoelace(&polys[1].vertices));
    let n0 = (1600.0 * 3.0 * a0 / (3.0 * a0 + a1)).round() as usize;
    // rows are emitted polygon by polygon
    for (i, r) in rows.iter().enumerate() {
        let which = if i < n0 { 0 } else { 1 };
        assert!(ray_cast_inside(&polys[which].vertices, r[0], r[1]));
    }
    let ratio = (n0 as f64 / a0) / ((1600 - n0) as f64 / a1);
    assert!((ratio - 3.0).abs() < 0.05, "{ratio}");
}

#[test]
fn ball_radii_follow_cube_law() {
    let set = gen_balls(3);
    let rows = rows_of(&set.train);
    assert_eq!(rows.len(), 1600);
    let small: Vec<f64> = rows[..800].iter().map(|r| euclid(r, &[0.0; 3]) / 2.0).collect();
    let large: Vec<f64> = rows[800..].iter().map(|r| euclid(r, &[5.0; 3]) / 3.0).collect();
    let critical = 1.628 / (800f64).sqrt();
    for sample in [small, large] {
        assert!(sample.iter().all(|r| *r <= 1.0 + 1e-12));
        let d = ks_statistic(sample, |r| r.powi(3));
        assert!(d < critical, "{d} >= {critical}");
    }
}

#[test]
fn ball_mesh_labels() {
    let set = gen_balls(0);
    let rows = rows_of(&set.validation.data);
    assert_eq!(rows.len(), 637);
    for (row, &label) in rows.iter().zip(&set.validation.labels) {
        let inside = euclid(row, &[0.0; 3]) <= 2.0 || euclid(row, &[5.0; 3]) <= 3.0;
        assert_eq!(label, !inside);
    }
    assert_eq!(set.validation.anomaly_count(), 98);
}

fn small_mixture() -> MixtureParams {
    MixtureParams {
        dim: 6,
        n_train: 3000,
        n_valid: 4000,
        // far-apart centers keep shells from overlapping other components
        center_range: 100.0,
        ..MixtureParams::default()
    }
}

#[test]
fn sphere_labels_and_purity() {
    let params = small_mixture();
    let mix = gen_hypersphere_mixture(11, &params).unwrap();
    let inside = |x: &[f64]| mix.spheres.iter().any(|s| euclid(x, &s.center) <= s.radius);
    for row in rows_of(&mix.generated.train) {
        assert!(inside(&row));
    }
    let rows = rows_of(&mix.generated.validation.data);
    for (row, &label) in rows.iter().zip(&mix.generated.validation.labels) {
        assert_eq!(label, !inside(row));
        let nearest_ratio = mix
            .spheres
            .iter()
            .map(|s| euclid(row, &s.center) / s.radius)
            .fold(f64::INFINITY, f64::min);
        assert!(nearest_ratio <= params.shell + 1e-9);
    }
    let frac = mix.generated.validation.anomaly_fraction();
    let sd = (0.05 * 0.95 / params.n_valid as f64).sqrt();
    assert!((frac - 0.05).abs() < 4.0 * sd, "{frac}");
}

#[test]
fn cube_labels_and_purity() {
    let params = small_mixture();
    let mix = gen_hypercube_mixture(12, &params).unwrap();
    let inside = |x: &[f64]| {
        mix.cubes.iter().any(|c| {
            x.iter()
                .zip(&c.center)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= c.half_width
        })
    };
    for row in rows_of(&mix.generated.train) {
        assert!(inside(&row));
    }
    let rows = rows_of(&mix.generated.validation.data);
    for (row, &label) in rows.iter().zip(&mix.generated.validation.labels) {
        assert_eq!(label, !inside(row));
    }
    let frac = mix.generated.validation.anomaly_fraction();
    let sd = (0.05 * 0.95 / params.n_valid as f64).sqrt();
    assert!((frac - 0.05).abs() < 4.0 * sd, "{frac}");
}

#[test]
fn same_seed_same_data() {
    for name in ["polygons", "balls"] {
        assert_eq!(generate_named(name, 5).unwrap(), generate_named(name, 5).unwrap());
        assert_ne!(generate_named(name, 5).unwrap().train, generate_named(name, 6).unwrap().train);
    }
    let params = small_mixture();
    assert_eq!(
        gen_hypersphere_mixture(1, &params).unwrap(),
        gen_hypersphere_mixture(1, &params).unwrap()
    );
}

#[test]
fn unknown_generator_and_bad_dims() {
    assert!(matches!(generate_named("torus", 0), Err(Error::UnknownGenerator { .. })));
    let params = MixtureParams {
        dim: 1,
        ..small_mixture()
    };
    assert!(matches!(
        gen_hypercube_mixture(0, &params),
        Err(Error::InvalidDims { .. })
    ));
}
