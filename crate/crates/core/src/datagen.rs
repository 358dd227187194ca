//! Synthetic benchmark sets with known normal regions.
//!
//! Every generator is a pure function of its seed (ChaCha8 stream). Training
//! points always lie inside the normal region; validation labels are the
//! geometric truth of membership in the union of the components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const GENERATOR_NAMES: [&str; 4] = ["polygons", "balls", "spheres", "cubes"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub data: Dataset,
    /// `true` marks an anomaly.
    pub labels: Vec<bool>,
}

impl LabeledSet {
    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    pub fn anomaly_fraction(&self) -> f64 {
        self.anomaly_count() as f64 / self.labels.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub train: Dataset,
    pub validation: LabeledSet,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn flat(rows: Vec<Vec<f64>>, p: usize) -> Dataset {
    let n = rows.len();
    Dataset::from_flat(rows.into_iter().flatten().collect(), n, p).expect("finite generated rows")
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// polygons

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let v = &self.vertices;
        (0..v.len()).all(|i| {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= 0.0
        })
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let twice: f64 = (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        0.5 * twice.abs()
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonParams {
    pub n_train: usize,
    /// Validation is a `mesh_side x mesh_side` grid.
    pub mesh_side: usize,
    /// Mesh spans `[-extent, extent]` on both axes.
    pub extent: f64,
    pub vertex_range: (usize, usize),
    pub radius_range: (f64, f64),
    pub center_range: f64,
    /// Sampling density of the first polygon relative to the second.
    pub density_ratio: f64,
}

impl Default for PolygonParams {
    fn default() -> Self {
        Self {
            n_train: 1600,
            mesh_side: 100,
            extent: 10.0,
            vertex_range: (5, 10),
            radius_range: (1.0, 4.0),
            center_range: 6.0,
            density_ratio: 3.0,
        }
    }
}

fn random_polygon(rng: &mut ChaCha8Rng, params: &PolygonParams) -> Polygon {
    let count = rng.random_range(params.vertex_range.0..=params.vertex_range.1);
    let radius = rng.random_range(params.radius_range.0..params.radius_range.1);
    let cx = rng.random_range(-params.center_range..params.center_range);
    let cy = rng.random_range(-params.center_range..params.center_range);
    let step = std::f64::consts::TAU / count as f64;
    let offset = rng.random_range(0.0..step);
    // vertices on a circle in angular order give a convex polygon
    let vertices = (0..count)
        .map(|i| {
            let jitter = rng.random_range(-0.3..0.3) * step;
            let a = offset + i as f64 * step + jitter;
            [cx + radius * a.cos(), cy + radius * a.sin()]
        })
        .collect();
    Polygon { vertices }
}

fn sample_in_polygon(rng: &mut ChaCha8Rng, poly: &Polygon) -> [f64; 2] {
    let (lo, hi) = poly.bounds();
    loop {
        let x = rng.random_range(lo[0]..hi[0]);
        let y = rng.random_range(lo[1]..hi[1]);
        if poly.contains(x, y) {
            return [x, y];
        }
    }
}

/// The two random polygons used for `seed`.
pub fn polygon_pair(seed: u64, params: &PolygonParams) -> [Polygon; 2] {
    let mut rng = rng(seed);
    [random_polygon(&mut rng, params), random_polygon(&mut rng, params)]
}

pub fn gen_polygons(seed: u64) -> Generated {
    gen_polygons_with(seed, &PolygonParams::default())
}

pub fn gen_polygons_with(seed: u64, params: &PolygonParams) -> Generated {
    let mut rng = rng(seed);
    let polys = [random_polygon(&mut rng, params), random_polygon(&mut rng, params)];
    let weight0 = params.density_ratio * polys[0].area();
    let weight1 = polys[1].area();
    let n0 = (params.n_train as f64 * weight0 / (weight0 + weight1)).round() as usize;
    let n0 = n0.min(params.n_train);
    let mut rows = Vec::with_capacity(params.n_train);
    for i in 0..params.n_train {
        let poly = if i < n0 { &polys[0] } else { &polys[1] };
        rows.push(sample_in_polygon(&mut rng, poly).to_vec());
    }
    let axis = linspace(-params.extent, params.extent, params.mesh_side);
    let mut mesh = Vec::with_capacity(axis.len() * axis.len());
    let mut labels = Vec::with_capacity(axis.len() * axis.len());
    for &x in &axis {
        for &y in &axis {
            mesh.push(vec![x, y]);
            labels.push(!polys.iter().any(|p| p.contains(x, y)));
        }
    }
    Generated {
        train: flat(rows, 2),
        validation: LabeledSet {
            data: flat(mesh, 2),
            labels,
        },
    }
}

// ---------------------------------------------------------------------------
// balls

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallsParams {
    pub n_train_per_ball: usize,
    pub small: Ball,
    pub large: Ball,
    /// Mesh points per axis and half-width (as a multiple of the radius)
    /// of the validation cube around the small ball.
    pub small_mesh: (usize, f64),
    /// Same for the large ball.
    pub large_mesh: (usize, f64),
}

impl Default for BallsParams {
    fn default() -> Self {
        Self {
            n_train_per_ball: 800,
            small: Ball {
                center: vec![0.0; 3],
                radius: 2.0,
            },
            large: Ball {
                center: vec![5.0; 3],
                radius: 3.0,
            },
            // 5^3 = 125 points, 98 outside the small ball
            small_mesh: (5, 1.1),
            // 8^3 = 512 points, all inside the large ball
            large_mesh: (8, 0.55),
        }
    }
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, ball: &Ball) -> Vec<f64> {
    let dim = ball.center.len();
    let dir = unit_direction(rng, dim);
    let rho = ball.radius * rng.random::<f64>().powf(1.0 / dim as f64);
    ball.center.iter().zip(dir).map(|(c, u)| c + rho * u).collect()
}

fn unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn cube_mesh(center: &[f64], half_width: f64, side: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = center
        .iter()
        .map(|c| linspace(c - half_width, c + half_width, side))
        .collect();
    let mut out = Vec::new();
    for &x in &axes[0] {
        for &y in &axes[1] {
            for &z in &axes[2] {
                out.push(vec![x, y, z]);
            }
        }
    }
    out
}

pub fn gen_balls(seed: u64) -> Generated {
    gen_balls_with(seed, &BallsParams::default())
}

pub fn gen_balls_with(seed: u64, params: &BallsParams) -> Generated {
    let mut rng = rng(seed);
    let balls = [&params.small, &params.large];
    let mut rows = Vec::with_capacity(2 * params.n_train_per_ball);
    for ball in balls {
        for _ in 0..params.n_train_per_ball {
            rows.push(uniform_in_ball(&mut rng, ball));
        }
    }
    let mut mesh = cube_mesh(
        &params.small.center,
        params.small_mesh.1 * params.small.radius,
        params.small_mesh.0,
    );
    mesh.extend(cube_mesh(
        &params.large.center,
        params.large_mesh.1 * params.large.radius,
        params.large_mesh.0,
    ));
    let labels = mesh
        .iter()
        .map(|x| !balls.iter().any(|b| b.contains(x)))
        .collect();
    Generated {
        train: flat(rows, 3),
        validation: LabeledSet {
            data: flat(mesh, 3),
            labels,
        },
    }
}

// ---------------------------------------------------------------------------
// high-dimensional mixtures

/// Axis-aligned cube `center +- half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl Cube {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() <= self.half_width)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pub dim: usize,
    pub n_train: usize,
    pub n_valid: usize,
    /// Probability that a validation point is drawn outside its component.
    pub p_out: f64,
    pub component_range: (usize, usize),
    /// Centers are uniform in `[-center_range, center_range]^dim`.
    pub center_range: f64,
    /// Radius (spheres) or half-width (cubes) range.
    pub size_range: (f64, f64),
    /// Outside points lie within this multiple of the component size.
    pub shell: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        Self {
            dim: 100,
            n_train: 100_000,
            n_valid: 10_000,
            p_out: 0.05,
            component_range: (2, 10),
            center_range: 10.0,
            size_range: (1.0, 3.0),
            shell: 1.2,
        }
    }
}

fn check_mixture(params: &MixtureParams) -> Result<()> {
    if params.dim < 2 {
        return Err(Error::InvalidDims {
            input_dim: params.dim,
            output_dim: params.dim,
        });
    }
    if !(0.0..=1.0).contains(&params.p_out) || params.shell <= 1.0 {
        return Err(Error::InvalidParams(
            "p_out must be in [0, 1] and shell above 1".into(),
        ));
    }
    let (lo, hi) = params.component_range;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParams("bad component range".into()));
    }
    Ok(())
}

fn random_center(rng: &mut ChaCha8Rng, params: &MixtureParams) -> Vec<f64> {
    (0..params.dim)
        .map(|_| rng.random_range(-params.center_range..params.center_range))
        .collect()
}

/// Sphere mixture with its components exposed for label checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMixture {
    pub spheres: Vec<Ball>,
    pub generated: Generated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeMixture {
    pub cubes: Vec<Cube>,
    pub generated: Generated,
}

pub fn gen_hypersphere_mixture(seed: u64, params: &MixtureParams) -> Result<SphereMixture> {
    check_mixture(params)?;
    let mut rng = rng(seed);
    let count = rng.random_range(params.component_range.0..=params.component_range.1);
    let spheres: Vec<Ball> = (0..count)
        .map(|_| Ball {
            center: random_center(&mut rng, params),
            radius: rng.random_range(params.size_range.0..params.size_range.1),
        })
        .collect();
    let train = (0..params.n_train)
        .map(|_| {
            let s = rng.random_range(0..count);
            uniform_in_ball(&mut rng, &spheres[s])
        })
        .collect();
    let d = params.dim as f64;
    let shell_volume = params.shell.powf(d) - 1.0;
    let valid: Vec<Vec<f64>> = (0..params.n_valid)
        .map(|_| {
            let s = &spheres[rng.random_range(0..count)];
            if rng.random::<f64>() < params.p_out {
                // volume-uniform radius in (r, shell r]
                let u: f64 = rng.random();
                let rho = s.radius * (1.0 + u * shell_volume).powf(1.0 / d);
                let rho = rho.max(s.radius * (1.0 + f64::EPSILON));
                let dir = unit_direction(&mut rng, params.dim);
                s.center.iter().zip(dir).map(|(c, v)| c + rho * v).collect()
            } else {
                uniform_in_ball(&mut rng, s)
            }
        })
        .collect();
    let labels = valid
        .iter()
        .map(|x| !spheres.iter().any(|s| s.contains(x)))
        .collect();
    Ok(SphereMixture {
        spheres,
        generated: Generated {
            train: flat(train, params.dim),
            validation: LabeledSet {
                data: flat(valid, params.dim),
                labels,
            },
        },
    })
}

pub fn gen_hypercube_mixture(seed: u64, params: &MixtureParams) -> Result<CubeMixture> {
    check_mixture(params)?;
    let mut rng = rng(seed);
    let count = rng.random_range(params.component_range.0..=params.component_range.1);
    let cubes: Vec<Cube> = (0..count)
        .map(|_| Cube {
            center: random_center(&mut rng, params),
            half_width: rng.random_range(params.size_range.0..params.size_range.1),
        })
        .collect();
    let inside = |rng: &mut ChaCha8Rng, cube: &Cube| -> Vec<f64> {
        cube.center
            .iter()
            .map(|c| c + rng.random_range(-cube.half_width..=cube.half_width))
            .collect()
    };
    let train = (0..params.n_train)
        .map(|_| {
            let c = rng.random_range(0..count);
            inside(&mut rng, &cubes[c])
        })
        .collect();
    let valid: Vec<Vec<f64>> = (0..params.n_valid)
        .map(|_| {
            let cube = &cubes[rng.random_range(0..count)];
            if rng.random::<f64>() < params.p_out {
                let outer = Cube {
                    center: cube.center.clone(),
                    half_width: cube.half_width * params.shell,
                };
                loop {
                    let x = inside(&mut rng, &outer);
                    if !cube.contains(&x) {
                        break x;
                    }
                }
            } else {
                inside(&mut rng, cube)
            }
        })
        .collect();
    let labels = valid
        .iter()
        .map(|x| !cubes.iter().any(|c| c.contains(x)))
        .collect();
    Ok(CubeMixture {
        cubes,
        generated: Generated {
            train: flat(train, params.dim),
            validation: LabeledSet {
                data: flat(valid, params.dim),
                labels,
            },
        },
    })
}

/// Generator by CLI name with default parameters.
pub fn generate_named(name: &str, seed: u64) -> Result<Generated> {
    match name {
        "polygons" => Ok(gen_polygons(seed)),
        "balls" => Ok(gen_balls(seed)),
        "spheres" => Ok(gen_hypersphere_mixture(seed, &MixtureParams::default())?.generated),
        "cubes" => Ok(gen_hypercube_mixture(seed, &MixtureParams::default())?.generated),
        _ => Err(Error::UnknownGenerator {
            name: name.to_string(),
            valid: GENERATOR_NAMES.join(", "),
        }),
    }
}
