//! Serialization: state-space models and interpolants as JSON, frequency
//! samples as CSV.
//!
//! The JSON model format keeps matrices as row-major nested arrays next to
//! explicit dimensions so files are self-describing and diff-friendly:
//!
//! ```json
//! { "n": 2, "m": 1, "p": 1,
//!   "A": [[0.0, 1.0], [-1.0, -0.2]],
//!   "B": [[0.0], [1.0]],
//!   "C": [[1.0, 0.0]] }
//! ```
//!
//! `E` and `D` are optional on read (identity / zero) and written only when
//! they differ from those defaults. Sample CSV is one row per frequency with
//! interleaved real/imaginary columns, outputs outer, inputs inner:
//!
//! ```text
//! omega,re_1_1,im_1_1,re_1_2,im_1_2,...
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loewner::Interpolant;
use crate::lti::{FrequencySample, StateSpaceModel};

/// Errors from reading or writing model, interpolant and sample files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("io error on {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid model in {path}: {message}")]
    Model { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    n: usize,
    m: usize,
    p: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    e: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    d: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<InterpolantMeta>,
}

/// Provenance block attached to interpolants produced by the reduction
/// pipeline; absent on plain models.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InterpolantMeta {
    /// The interpolation frequencies the model was built from, ascending.
    pub interpolation_set: Vec<f64>,
    /// Singular values of the row-composed pencil [L, Ls].
    pub sv_row: Vec<f64>,
    /// Singular values of the column-composed pencil [L; Ls].
    pub sv_col: Vec<f64>,
    /// Relative threshold used for the rank decision.
    pub rank_tol: f64,
}

fn rows_to_matrix(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    name: &str,
    path: &str,
) -> Result<DMatrix<f64>, IoError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(IoError::Model {
            path: path.to_string(),
            message: format!("{name} must be {nrows}x{ncols}"),
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn parse_model_json(
    text: &str,
    path: &str,
) -> Result<(StateSpaceModel, Option<InterpolantMeta>), IoError> {
    let raw: ModelJson = serde_json::from_str(text).map_err(|e| IoError::Json {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    let a = rows_to_matrix(&raw.a, raw.n, raw.n, "A", path)?;
    let b = rows_to_matrix(&raw.b, raw.n, raw.p, "B", path)?;
    let c = rows_to_matrix(&raw.c, raw.m, raw.n, "C", path)?;
    let e = raw
        .e
        .as_deref()
        .map(|rows| rows_to_matrix(rows, raw.n, raw.n, "E", path))
        .transpose()?;
    let d = raw
        .d
        .as_deref()
        .map(|rows| rows_to_matrix(rows, raw.m, raw.p, "D", path))
        .transpose()?;
    let model = StateSpaceModel::new(e, a, b, c, d).map_err(|e| IoError::Model {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    Ok((model, raw.meta))
}

/// Reads a state-space model (plain or interpolant) from JSON, discarding
/// any provenance block.
pub fn read_model(path: &Path) -> Result<StateSpaceModel, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::File {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_model_json(&text, &path.display().to_string()).map(|(m, _)| m)
}

/// Reads a model along with its provenance block, when present.
pub fn read_model_with_meta(
    path: &Path,
) -> Result<(StateSpaceModel, Option<InterpolantMeta>), IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::File {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_model_json(&text, &path.display().to_string())
}

fn model_to_json(model: &StateSpaceModel, meta: Option<InterpolantMeta>) -> ModelJson {
    let n = model.order();
    let identity = DMatrix::identity(n, n);
    let zero_d = DMatrix::zeros(model.outputs(), model.inputs());
    ModelJson {
        n,
        m: model.outputs(),
        p: model.inputs(),
        a: matrix_to_rows(model.a()),
        b: matrix_to_rows(model.b()),
        c: matrix_to_rows(model.c()),
        e: (model.e() != &identity).then(|| matrix_to_rows(model.e())),
        d: (model.d() != &zero_d).then(|| matrix_to_rows(model.d())),
        meta,
    }
}

fn write_json(path: &Path, value: &ModelJson) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(|e| IoError::File {
        path: path.display().to_string(),
        source: e,
    })
}

/// Writes a plain state-space model as JSON.
pub fn write_model(path: &Path, model: &StateSpaceModel) -> Result<(), IoError> {
    write_json(path, &model_to_json(model, None))
}

/// Writes an interpolant as model JSON with a `meta` provenance block. The
/// interpolant must be in real form (guaranteed by the reduction pipeline).
pub fn write_interpolant(path: &Path, interp: &Interpolant) -> Result<(), IoError> {
    let model = interp.to_state_space().map_err(|e| IoError::Model {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let meta = InterpolantMeta {
        interpolation_set: interp.interpolation_set.clone(),
        sv_row: interp.sv_row.clone(),
        sv_col: interp.sv_col.clone(),
        rank_tol: interp.rank_tol,
    };
    write_json(path, &model_to_json(&model, Some(meta)))
}

/// Writes frequency samples as CSV. All samples must share output/input
/// dimensions; the header names columns `re_i_j`, `im_i_j` with 1-based
/// output index `i` and input index `j`.
pub fn write_samples(path: &Path, samples: &[FrequencySample]) -> Result<(), IoError> {
    let display = path.display().to_string();
    if samples.is_empty() {
        return Err(IoError::Csv {
            path: display,
            line: 0,
            message: "no samples to write".into(),
        });
    }
    let (m, p) = (samples[0].response.nrows(), samples[0].response.ncols());
    let mut out = String::from("omega");
    for i in 1..=m {
        for j in 1..=p {
            out.push_str(&format!(",re_{i}_{j},im_{i}_{j}"));
        }
    }
    out.push('\n');
    for s in samples {
        if s.response.nrows() != m || s.response.ncols() != p {
            return Err(IoError::Csv {
                path: display,
                line: 0,
                message: "samples have inconsistent dimensions".into(),
            });
        }
        out.push_str(&format!("{:.17e}", s.omega));
        for i in 0..m {
            for j in 0..p {
                let z = s.response[(i, j)];
                out.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| IoError::File {
        path: display,
        source: e,
    })
}

/// Reads frequency samples from CSV written by [`write_samples`] (or by any
/// other tool following the same layout). Extra trailing columns beyond the
/// response block — e.g. a `norm` column — are ignored; rows must be
/// numerically parseable and frequencies nonnegative. Row order is preserved.
pub fn read_samples(path: &Path) -> Result<Vec<FrequencySample>, IoError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| IoError::File {
        path: display.clone(),
        source: e,
    })?;
    let csv_err = |line: usize, message: String| IoError::Csv {
        path: display.clone(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| csv_err(0, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"omega") {
        return Err(csv_err(1, "header must start with 'omega'".into()));
    }
    // Infer (m, p) from the re_i_j/im_i_j column pairs; trailing
    // non-response columns are allowed and skipped.
    let mut m = 0usize;
    let mut p = 0usize;
    let mut response_cols = 1usize;
    while response_cols < cols.len() {
        let Some(rest) = cols[response_cols].strip_prefix("re_") else {
            break;
        };
        let Some((i, j)) = rest
            .split_once('_')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        else {
            break;
        };
        if cols.get(response_cols + 1) != Some(&format!("im_{i}_{j}").as_str()) {
            return Err(csv_err(
                1,
                format!("column re_{i}_{j} is not followed by im_{i}_{j}"),
            ));
        }
        m = m.max(i);
        p = p.max(j);
        response_cols += 2;
    }
    if m == 0 || p == 0 {
        return Err(csv_err(1, "no re_i_j/im_i_j column pairs found".into()));
    }
    if response_cols - 1 != 2 * m * p {
        return Err(csv_err(
            1,
            format!(
                "expected {} response columns for {m}x{p}, found {}",
                2 * m * p,
                response_cols - 1
            ),
        ));
    }

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < response_cols {
            return Err(csv_err(
                lineno,
                format!(
                    "expected at least {response_cols} fields, found {}",
                    fields.len()
                ),
            ));
        }
        let parse = |k: usize| -> Result<f64, IoError> {
            fields[k].parse::<f64>().map_err(|_| {
                csv_err(
                    lineno,
                    format!(
                        "field '{}' ({}) is not a number",
                        cols.get(k).copied().unwrap_or("?"),
                        fields[k]
                    ),
                )
            })
        };
        let omega = parse(0)?;
        if !omega.is_finite() || omega < 0.0 {
            return Err(csv_err(
                lineno,
                format!("omega must be finite and nonnegative, got {omega}"),
            ));
        }
        let mut response = DMatrix::zeros(m, p);
        // Header column order is authoritative: outputs outer, inputs inner.
        let mut k = 1;
        for i in 0..m {
            for j in 0..p {
                response[(i, j)] = Complex64::new(parse(k)?, parse(k + 1)?);
                k += 2;
            }
        }
        samples.push(FrequencySample { omega, response });
    }
    if samples.is_empty() {
        return Err(csv_err(1, "file has a header but no data rows".into()));
    }
    Ok(samples)
}
