use serde::{Deserialize, Serialize};

use super::functions::BaseFunction;
use super::transform::TransformData;
use crate::error::{Error, Result};

/// Errors at or below this value are reported as exactly this value.
pub const ERROR_FLOOR: f64 = 1e-8;

/// Slack allowed below `f_star` before an evaluation is treated as a bug.
pub const BELOW_OPTIMUM_SLACK: f64 = 1e-9;

/// `max(f_val - f_star, 1e-8)`.
pub fn error_value(f_val: f64, f_star: f64) -> Result<f64> {
    if f_val.is_nan() {
        return Err(Error::InvariantViolation("objective returned NaN".into()));
    }
    if f_val < f_star - BELOW_OPTIMUM_SLACK {
        return Err(Error::InvariantViolation(format!(
            "objective value {f_val:e} is below the known optimum {f_star:e}"
        )));
    }
    Ok((f_val - f_star).max(ERROR_FLOOR))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridGroup {
    pub function: BaseFunction,
    /// Share of the coordinates assigned to this group.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionComponent {
    pub function: BaseFunction,
    pub transform: TransformData,
    pub sigma: f64,
    pub lambda: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    Base {
        function: BaseFunction,
        transform: Option<TransformData>,
    },
    Hybrid {
        groups: Vec<HybridGroup>,
        transform: Option<TransformData>,
    },
    Composition {
        components: Vec<CompositionComponent>,
    },
}

/// A bound-constrained benchmark objective with a known optimum value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: String,
    pub dim: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub f_star: f64,
    pub kind: ObjectiveKind,
}

impl ObjectiveSpec {
    pub const DEFAULT_BOUND: f64 = 100.0;

    pub fn base(
        id: impl Into<String>,
        function: BaseFunction,
        dim: usize,
        transform: Option<TransformData>,
    ) -> Result<Self> {
        Self::build(
            id.into(),
            dim,
            ObjectiveKind::Base {
                function,
                transform,
            },
        )
    }

    pub fn hybrid(
        id: impl Into<String>,
        groups: Vec<HybridGroup>,
        dim: usize,
        transform: Option<TransformData>,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidArgument("hybrid needs at least one group".into()));
        }
        if groups.iter().any(|g| !(g.fraction > 0.0)) {
            return Err(Error::InvalidArgument("hybrid group fractions must be positive".into()));
        }
        let total: f64 = groups.iter().map(|g| g.fraction).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "hybrid group fractions sum to {total}, expected 1"
            )));
        }
        Self::build(id.into(), dim, ObjectiveKind::Hybrid { groups, transform })
    }

    pub fn composition(
        id: impl Into<String>,
        components: Vec<CompositionComponent>,
        dim: usize,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "composition needs at least one component".into(),
            ));
        }
        for c in &components {
            if c.transform.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.transform.dim(),
                });
            }
            if !(c.sigma > 0.0 && c.lambda > 0.0 && c.bias >= 0.0) {
                return Err(Error::InvalidArgument(
                    "composition components need sigma > 0, lambda > 0, bias >= 0".into(),
                ));
            }
        }
        Self::build(id.into(), dim, ObjectiveKind::Composition { components })
    }

    fn build(id: String, dim: usize, kind: ObjectiveKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let transform_dim = match &kind {
            ObjectiveKind::Base { transform, .. } | ObjectiveKind::Hybrid { transform, .. } => {
                transform.as_ref().map(TransformData::dim)
            }
            ObjectiveKind::Composition { .. } => None,
        };
        if let Some(found) = transform_dim.filter(|&d| d != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
        Ok(Self {
            id,
            dim,
            lower_bound: -Self::DEFAULT_BOUND,
            upper_bound: Self::DEFAULT_BOUND,
            f_star: 0.0,
            kind,
        })
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidArgument(format!(
                "lower bound {lower} must be below upper bound {upper}"
            )));
        }
        self.lower_bound = lower;
        self.upper_bound = upper;
        Ok(self)
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = f_star;
        self
    }

    pub fn width(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }

    /// The global minimizer, where the objective equals `f_star`.
    pub fn optimizer(&self) -> Vec<f64> {
        match &self.kind {
            ObjectiveKind::Base { transform, .. } | ObjectiveKind::Hybrid { transform, .. } => {
                let shift = transform.as_ref().map(|t| t.shift().to_vec());
                // Without a transform the base minimizer coordinate applies directly.
                shift.unwrap_or_else(|| self.untransformed_minimizer())
            }
            ObjectiveKind::Composition { components } => components[0].transform.shift().to_vec(),
        }
    }

    fn untransformed_minimizer(&self) -> Vec<f64> {
        match &self.kind {
            ObjectiveKind::Base { function, .. } => vec![function.minimizer_coordinate(); self.dim],
            ObjectiveKind::Hybrid { groups, .. } => {
                let mut x = vec![0.0; self.dim];
                for (g, range) in groups.iter().zip(hybrid_ranges(groups, self.dim)) {
                    x[range].fill(g.function.minimizer_coordinate());
                }
                x
            }
            ObjectiveKind::Composition { .. } => unreachable!(),
        }
    }

    /// Evaluates the objective at `x`. Pure.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(format!("{}: NaN in input", self.id)));
        }
        let value = match &self.kind {
            ObjectiveKind::Base {
                function,
                transform,
            } => {
                let z = match transform {
                    Some(t) => {
                        let offset = function.minimizer_coordinate();
                        let mut z = vec![0.0; self.dim];
                        t.apply_into(x, &mut z);
                        z.iter_mut().for_each(|v| *v += offset);
                        z
                    }
                    None => x.to_vec(),
                };
                function.eval_unchecked(&z)
            }
            ObjectiveKind::Hybrid { groups, transform } => {
                let z = transform.as_ref().map_or_else(|| x.to_vec(), |t| {
                    let mut z = vec![0.0; self.dim];
                    t.apply_into(x, &mut z);
                    z
                });
                let mut total = 0.0;
                for (g, range) in groups.iter().zip(hybrid_ranges(groups, self.dim)) {
                    if range.is_empty() {
                        continue;
                    }
                    // With an explicit transform the group minimizer sits at z = 0.
                    let offset = if transform.is_some() {
                        g.function.minimizer_coordinate()
                    } else {
                        0.0
                    };
                    let part: Vec<f64> = z[range].iter().map(|v| v + offset).collect();
                    total += g.function.eval_unchecked(&part);
                }
                total
            }
            ObjectiveKind::Composition { components } => composition_value(components, x),
        };
        Ok(value + self.f_star)
    }

    /// `error_value(eval(x), f_star)`.
    pub fn error_at(&self, x: &[f64]) -> Result<f64> {
        error_value(self.eval(x)?, self.f_star)
    }
}

/// Contiguous coordinate ranges for each hybrid group: the first groups get
/// `ceil(fraction * dim)` coordinates (clamped to what remains) and the last
/// group takes the rest. Groups can be empty when `dim` is small.
pub fn hybrid_ranges(groups: &[HybridGroup], dim: usize) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    let last = groups.len() - 1;
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let len = if i == last {
                dim - start
            } else {
                ((g.fraction * dim as f64).ceil() as usize).min(dim - start)
            };
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Unnormalized proximity weight `exp(-|x - o|^2 / (2 D sigma^2)) / |x - o|`.
/// Returns `None` when `x` sits exactly on the component's shift.
pub fn composition_weight(x: &[f64], shift: &[f64], sigma: f64) -> Option<f64> {
    let d2: f64 = x.iter().zip(shift).map(|(a, b)| (a - b).powi(2)).sum();
    if d2 == 0.0 {
        return None;
    }
    Some((-d2 / (2.0 * x.len() as f64 * sigma * sigma)).exp() / d2.sqrt())
}

fn composition_value(components: &[CompositionComponent], x: &[f64]) -> f64 {
    let mut z = vec![0.0; x.len()];
    let mut component_value = |c: &CompositionComponent| {
        c.transform.apply_into(x, &mut z);
        let offset = c.function.minimizer_coordinate();
        if offset != 0.0 {
            z.iter_mut().for_each(|v| *v += offset);
        }
        c.lambda * c.function.eval_unchecked(&z) + c.bias
    };

    let weights: Vec<Option<f64>> = components
        .iter()
        .map(|c| composition_weight(x, c.transform.shift(), c.sigma))
        .collect();
    // Sitting on a shift: that component's weight dominates in the limit.
    if let Some(hit) = weights.iter().position(Option::is_none) {
        return component_value(&components[hit]);
    }
    let weights: Vec<f64> = weights.into_iter().map(Option::unwrap).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        let n = components.len() as f64;
        return components.iter().map(&mut component_value).sum::<f64>() / n;
    }
    components
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, &w)| w / total * component_value(c))
        .sum()
}
