//! Gaussian random projection.
//!
//! The `d x p` matrix is a pure function of `(p, d, seed)`, so persisted
//! models store only those three numbers. Entry `t = i * p + j` (row-major)
//! is generated as:
//!
//! 1. `z_t` = output `t` of SplitMix64 seeded with `seed`, i.e. the mix
//!    function applied to `seed + (t + 1) * 0x9E3779B97F4A7C15` (wrapping);
//! 2. `u_t = ((z_t >> 11) + 0.5) * 2^-53`, a uniform on the open interval (0, 1);
//! 3. entry = `Phi^-1(u_t) / sqrt(d)`, with `Phi^-1` evaluated by Wichura's
//!    AS 241 (PPND16).
//!
//! Entries are therefore i.i.d. `N(0, 1/d)` and `E |Mx|^2 = |x|^2`.

#![allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]

use crate::dataset::Dataset;
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    input_dim: usize,
    output_dim: usize,
    seed: u64,
    /// Row-major `output_dim x input_dim`.
    matrix: Vec<f64>,
    /// Set when the matrix was supplied directly rather than generated.
    custom: bool,
}

#[inline]
fn splitmix64_at(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal quantile, Wichura (1988) AS 241 PPND16.
pub fn normal_quantile(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r
                + 67265.770_927_008_7)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_4)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_6)
            / (((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r
                + 39307.895_800_092_71)
                * r
                + 21213.794_301_586_596)
                * r
                + 5394.196_021_424_751_1)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_185) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_6)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545_3)
            * r
            + 1.423_437_110_749_683_6)
            / (((((((r * 1.050_750_071_644_416_8e-9 + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_07)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_758_8)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_123)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103_8)
            / (((((((r * 2.044_263_103_389_939_8e-15 + 1.421_511_758_316_445_9e-7) * r
                + 1.846_318_317_510_054_7e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_887_9)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Generates the projection matrix for `(input_dim, output_dim, seed)`.
pub fn make_projection(input_dim: usize, output_dim: usize, seed: u64) -> Result<ProjectionSpec> {
    if output_dim == 0 || output_dim > input_dim {
        return Err(Error::InvalidDims {
            input_dim,
            output_dim,
        });
    }
    let scale = 1.0 / (output_dim as f64).sqrt();
    let matrix = (0..(input_dim * output_dim) as u64)
        .map(|t| normal_quantile(open_unit(splitmix64_at(seed, t))) * scale)
        .collect();
    Ok(ProjectionSpec {
        input_dim,
        output_dim,
        seed,
        matrix,
        custom: false,
    })
}

impl ProjectionSpec {
    /// Wraps an explicit `output_dim x input_dim` row-major matrix.
    ///
    /// Such a spec cannot be regenerated from a seed and is refused by the
    /// model writer.
    pub fn from_matrix(input_dim: usize, output_dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if output_dim == 0 || input_dim == 0 {
            return Err(Error::InvalidDims {
                input_dim,
                output_dim,
            });
        }
        if matrix.len() != input_dim * output_dim {
            return Err(Error::LengthMismatch {
                left: matrix.len(),
                right: input_dim * output_dim,
            });
        }
        Ok(Self {
            input_dim,
            output_dim,
            seed: 0,
            matrix,
            custom: true,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_custom(&self) -> bool {
        self.custom
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// `M x` for one input vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(self
            .matrix
            .chunks_exact(self.input_dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Projects every row of `data`.
pub fn project(data: &Dataset, spec: &ProjectionSpec) -> Result<Dataset> {
    if data.p() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.input_dim,
            found: data.p(),
        });
    }
    let mut out = Vec::with_capacity(data.n() * spec.output_dim);
    for row in data.rows() {
        out.extend(spec.apply(row)?);
    }
    Dataset::from_flat(out, data.n(), spec.output_dim)
}
