//! The tuned model and its on-disk form.
//!
//! Models are stored as JSON. Reals are written with shortest round-trip
//! formatting, so loading reproduces every field bit for bit. A projection is
//! stored as `(seed, input_dim, output_dim)` and regenerated on load.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lof::LofNovelty;
use crate::projection::{make_projection, project, ProjectionSpec};
use crate::tuner::{block_size, top_ranked, LofScoreTable};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct TunedModel {
    training: Dataset,
    k_opt: usize,
    c_opt: f64,
    threshold: f64,
    projection: Option<ProjectionSpec>,
    score_table: Option<LofScoreTable>,
    novelty: LofNovelty,
}

impl PartialEq for TunedModel {
    fn eq(&self, other: &Self) -> bool {
        self.training == other.training
            && self.k_opt == other.k_opt
            && self.c_opt.to_bits() == other.c_opt.to_bits()
            && self.threshold.to_bits() == other.threshold.to_bits()
            && self.projection == other.projection
            && self.score_table == other.score_table
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

impl TunedModel {
    /// Fits LOF at `k_opt` on `training` and sets the threshold to the score
    /// ranked `floor(c_opt n)`.
    pub fn fit(
        training: Dataset,
        k_opt: usize,
        c_opt: f64,
        projection: Option<ProjectionSpec>,
        score_table: Option<LofScoreTable>,
    ) -> Result<Self> {
        let novelty = LofNovelty::fit(&training, k_opt)?;
        let m = checked_block(c_opt, training.n())?;
        let scores = &novelty.fitted().scores;
        let threshold = scores[top_ranked(scores, m)[m - 1]];
        Self::assemble(training, k_opt, c_opt, threshold, projection, score_table, novelty)
    }

    /// Builds a model from stored fields, re-checking every invariant.
    pub fn from_parts(
        training: Dataset,
        k_opt: usize,
        c_opt: f64,
        threshold: f64,
        projection: Option<ProjectionSpec>,
        score_table: Option<LofScoreTable>,
    ) -> Result<Self> {
        if k_opt == 0 || k_opt >= training.n() {
            return Err(violation(format!(
                "k_opt {k_opt} not in 1..{} for n = {}",
                training.n(),
                training.n()
            )));
        }
        let m = checked_block(c_opt, training.n())?;
        let novelty = LofNovelty::fit(&training, k_opt)?;
        let scores = &novelty.fitted().scores;
        let expected = scores[top_ranked(scores, m)[m - 1]];
        if threshold.to_bits() != expected.to_bits() {
            return Err(violation(format!(
                "threshold {threshold} is not the rank-{m} training score {expected}"
            )));
        }
        Self::assemble(training, k_opt, c_opt, threshold, projection, score_table, novelty)
    }

    fn assemble(
        training: Dataset,
        k_opt: usize,
        c_opt: f64,
        threshold: f64,
        projection: Option<ProjectionSpec>,
        score_table: Option<LofScoreTable>,
        novelty: LofNovelty,
    ) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(violation(format!("threshold {threshold} must be positive")));
        }
        if let Some(spec) = &projection {
            if spec.output_dim() != training.p() {
                return Err(violation(format!(
                    "projection outputs {} dimensions but training points have {}",
                    spec.output_dim(),
                    training.p()
                )));
            }
        }
        if let Some(table) = &score_table {
            if table.n != training.n() {
                return Err(violation("score table was built for a different n"));
            }
            if !table.per_c.iter().any(|s| s.c == c_opt) {
                return Err(violation(format!("c_opt {c_opt} not on the tuning grid")));
            }
            if !table.cells.iter().any(|cell| cell.k == k_opt) {
                return Err(violation(format!("k_opt {k_opt} not on the tuning grid")));
            }
        }
        Ok(Self {
            training,
            k_opt,
            c_opt,
            threshold,
            projection,
            score_table,
            novelty,
        })
    }

    /// Training points, after projection when one is attached.
    pub fn training_points(&self) -> &Dataset {
        &self.training
    }

    pub fn k_opt(&self) -> usize {
        self.k_opt
    }

    pub fn c_opt(&self) -> f64 {
        self.c_opt
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn projection(&self) -> Option<&ProjectionSpec> {
        self.projection.as_ref()
    }

    pub fn score_table(&self) -> Option<&LofScoreTable> {
        self.score_table.as_ref()
    }

    /// Dimension expected of raw query rows.
    pub fn input_dim(&self) -> usize {
        self.projection
            .as_ref()
            .map_or(self.training.p(), |s| s.input_dim())
    }

    /// LOF of each training row at `k_opt`.
    pub fn training_scores(&self) -> &[f64] {
        &self.novelty.fitted().scores
    }

    /// Novelty LOF of each raw query row, projected first if needed.
    pub fn score(&self, queries: &Dataset) -> Result<Vec<f64>> {
        match &self.projection {
            Some(spec) => self.novelty.score_many(&project(queries, spec)?),
            None => self.novelty.score_many(queries),
        }
    }

    /// Flags each query row whose score reaches the threshold.
    pub fn predict(&self, queries: &Dataset) -> Result<Vec<bool>> {
        Ok(self
            .score(queries)?
            .into_iter()
            .map(|s| s >= self.threshold)
            .collect())
    }
}

fn checked_block(c: f64, n: usize) -> Result<usize> {
    let m = block_size(c, n);
    if !(c > 0.0 && c < 0.5) || m < 2 || 2 * m > n {
        return Err(violation(format!(
            "c_opt {c} gives block size {m}, infeasible for n = {n}"
        )));
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    k_opt: usize,
    c_opt: f64,
    threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<ProjectionFile>,
    training_points: PointsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score_table: Option<LofScoreTable>,
}

#[derive(Serialize, Deserialize)]
struct ProjectionFile {
    seed: u64,
    input_dim: usize,
    output_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PointsFile {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

/// Serializes `model` to `out`.
pub fn write_model<W: Write>(model: &TunedModel, mut out: W) -> Result<()> {
    let projection = match &model.projection {
        Some(spec) if spec.is_custom() => {
            return Err(Error::InvalidParams(
                "a projection given as an explicit matrix cannot be saved".into(),
            ))
        }
        Some(spec) => Some(ProjectionFile {
            seed: spec.seed(),
            input_dim: spec.input_dim(),
            output_dim: spec.output_dim(),
        }),
        None => None,
    };
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        k_opt: model.k_opt,
        c_opt: model.c_opt,
        threshold: model.threshold,
        projection,
        training_points: PointsFile {
            n: model.training.n(),
            p: model.training.p(),
            values: model.training.as_slice().to_vec(),
        },
        score_table: model.score_table.clone(),
    };
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| Error::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn save_model(model: &TunedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Parses and validates a model document.
pub fn read_model<R: Read>(mut source: R) -> Result<TunedModel> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::DeserializeFailure {
        offset: e.valid_up_to(),
        message: "model file is not valid UTF-8".into(),
    })?;
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::DeserializeFailure {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::DeserializeFailure {
            offset: 0,
            message: format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            ),
        });
    }
    let PointsFile { n, p, values } = file.training_points;
    let training = Dataset::from_flat(values, n, p)
        .map_err(|e| violation(format!("training points: {e}")))?;
    let projection = file
        .projection
        .map(|s| make_projection(s.input_dim, s.output_dim, s.seed))
        .transpose()
        .map_err(|e| violation(format!("projection: {e}")))?;
    TunedModel::from_parts(
        training,
        file.k_opt,
        file.c_opt,
        file.threshold,
        projection,
        file.score_table,
    )
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TunedModel> {
    read_model(fs::File::open(path)?)
}
