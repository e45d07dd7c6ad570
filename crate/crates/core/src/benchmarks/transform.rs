use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Tolerance used when validating rotation matrices read from disk.
pub const LOAD_ORTHOGONALITY_TOL: f64 = 1e-8;

/// Shift, rotation and scale applied as `z = scale * R * (x - shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformData {
    shift: Vec<f64>,
    /// Row-major `dim x dim`.
    rotation: Vec<f64>,
    scale: f64,
}

impl TransformData {
    pub fn new(shift: Vec<f64>, rotation: Vec<Vec<f64>>, scale: f64) -> Result<Self> {
        let dim = shift.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("transform dimension must be >= 1".into()));
        }
        if rotation.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rotation.len(),
            });
        }
        if let Some(row) = rotation.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            shift,
            rotation: rotation.into_iter().flatten().collect(),
            scale,
        })
    }

    /// Zero shift, identity rotation, unit scale.
    pub fn identity(dim: usize) -> Self {
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        Self {
            shift: vec![0.0; dim],
            rotation,
            scale: 1.0,
        }
    }

    /// Shift drawn uniformly from the middle 80% of `[lower, upper)` and a rotation
    /// obtained by orthonormalizing a standard-normal matrix.
    pub fn generate(stream: &mut RandomStream, dim: usize, lower: f64, upper: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("transform dimension must be >= 1".into()));
        }
        if !(lower < upper) {
            return Err(Error::InvalidArgument(format!(
                "empty search box [{lower}, {upper}]"
            )));
        }
        let margin = 0.1 * (upper - lower);
        let shift = (0..dim)
            .map(|_| stream.uniform(lower + margin, upper - margin))
            .collect::<Result<Vec<_>>>()?;
        let rotation = random_rotation(stream, dim);
        Ok(Self {
            shift,
            rotation,
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation_row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.rotation[i * d..(i + 1) * d]
    }

    pub fn rotation_rows(&self) -> Vec<Vec<f64>> {
        self.rotation.chunks(self.dim()).map(<[f64]>::to_vec).collect()
    }

    /// `z = scale * R * (x - shift)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        debug_assert_eq!(out.len(), d);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.rotation[i * d..(i + 1) * d];
            let dot: f64 = row
                .iter()
                .zip(x.iter().zip(&self.shift))
                .map(|(r, (xv, s))| r * (xv - s))
                .sum();
            *o = self.scale * dot;
        }
    }

    /// Max-abs entry of `R R^T - I`.
    pub fn orthogonality_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = self
                    .rotation_row(i)
                    .iter()
                    .zip(self.rotation_row(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Reads the text layout written by [`TransformData::save`]:
    ///
    /// ```text
    /// D
    /// s_1 ... s_D
    /// r_11 ... r_1D
    /// ...
    /// r_D1 ... r_DD
    /// scale
    /// ```
    ///
    /// Values are whitespace separated. Blank lines are not allowed between
    /// sections; trailing blank lines are ignored.
    pub fn load(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, dim)
    }

    pub(crate) fn parse(text: &str, path: &Path, dim: usize) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next_line = |what: &str| {
            lines.next().ok_or_else(|| {
                parse_err(
                    text.lines().count() + 1,
                    format!("unexpected end of file, expected {what}"),
                )
            })
        };
        let parse_reals = |line_no: usize, line: &str, expected: usize, what: &str| {
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("bad number `{tok}` in {what}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != expected {
                return Err(parse_err(
                    line_no,
                    format!("{what}: expected {expected} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };

        let (line_no, header) = next_line("dimension")?;
        let file_dim: usize = header
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad dimension `{}`", header.trim())))?;
        if file_dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: file_dim,
            });
        }
        let (line_no, line) = next_line("shift vector")?;
        let shift = parse_reals(line_no, line, dim, "shift")?;
        let mut rotation = Vec::with_capacity(dim);
        for r in 0..dim {
            let (line_no, line) = next_line(&format!("rotation row {}", r + 1))?;
            rotation.push(parse_reals(line_no, line, dim, "rotation row")?);
        }
        let (line_no, line) = next_line("scale")?;
        let scale = parse_reals(line_no, line, 1, "scale")?[0];
        if !(scale > 0.0) {
            return Err(parse_err(line_no, format!("scale must be positive, got {scale}")));
        }
        let t = Self::new(shift, rotation, scale)?;
        let deviation = t.orthogonality_deviation();
        if deviation > LOAD_ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { deviation });
        }
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.dim());
        let _ = writeln!(out, "{}", join(&self.shift));
        for i in 0..self.dim() {
            let _ = writeln!(out, "{}", join(self.rotation_row(i)));
        }
        let _ = writeln!(out, "{:e}", self.scale);
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Orthonormalizes a standard-normal matrix by modified Gram-Schmidt with one
/// re-orthogonalization pass. Rows are the basis vectors.
fn random_rotation(stream: &mut RandomStream, dim: usize) -> Vec<f64> {
    loop {
        let mut m: Vec<f64> = (0..dim * dim).map(|_| stream.standard_normal()).collect();
        if gram_schmidt_rows(&mut m, dim) {
            return m;
        }
    }
}

fn gram_schmidt_rows(m: &mut [f64], dim: usize) -> bool {
    for i in 0..dim {
        for _pass in 0..2 {
            for j in 0..i {
                let dot: f64 = (0..dim).map(|c| m[i * dim + c] * m[j * dim + c]).sum();
                for c in 0..dim {
                    m[i * dim + c] -= dot * m[j * dim + c];
                }
            }
        }
        let norm = (0..dim).map(|c| m[i * dim + c].powi(2)).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return false;
        }
        for c in 0..dim {
            m[i * dim + c] /= norm;
        }
    }
    true
}
