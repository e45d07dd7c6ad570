use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analytic base functions, in their textbook (unshifted, unrotated) forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    Zakharov,
    Rosenbrock,
    SchafferF7,
    Rastrigin,
    Levy,
    Sphere,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 6] = [
        BaseFunction::Zakharov,
        BaseFunction::Rosenbrock,
        BaseFunction::SchafferF7,
        BaseFunction::Rastrigin,
        BaseFunction::Levy,
        BaseFunction::Sphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Zakharov => "zakharov",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::SchafferF7 => "schaffer_f7",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Levy => "levy",
            BaseFunction::Sphere => "sphere",
        }
    }

    /// Coordinate value (repeated in every dimension) of the global minimizer.
    /// The minimum value is 0 for every function.
    pub fn minimizer_coordinate(self) -> f64 {
        match self {
            BaseFunction::Rosenbrock | BaseFunction::Levy => 1.0,
            _ => 0.0,
        }
    }

    /// Evaluates the function; rejects empty or non-finite input.
    pub fn eval(self, x: &[f64]) -> Result<f64> {
        if x.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{}: dimension must be at least 1",
                self.name()
            )));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(format!("{}: NaN in input", self.name())));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(self, x: &[f64]) -> f64 {
        match self {
            BaseFunction::Zakharov => zakharov(x),
            BaseFunction::Rosenbrock => rosenbrock(x),
            BaseFunction::SchafferF7 => schaffer_f7(x),
            BaseFunction::Rastrigin => rastrigin(x),
            BaseFunction::Levy => levy(x),
            BaseFunction::Sphere => sphere(x),
        }
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseFunction::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown base function `{s}`")))
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn zakharov(x: &[f64]) -> f64 {
    let (sq, lin) = x
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(sq, lin), (i, &v)| {
            (sq + v * v, lin + 0.5 * (i + 1) as f64 * v)
        });
    let lin2 = lin * lin;
    sq + lin2 + lin2 * lin2
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
        .sum()
}

/// Expanded Schaffer F7 over consecutive coordinate pairs. A single coordinate
/// is treated as one pair term with `s = |x|`.
fn schaffer_f7(x: &[f64]) -> f64 {
    let term = |s: f64| {
        let r = s.sqrt();
        let t = (50.0 * s.powf(0.2)).sin();
        r + r * t * t
    };
    if x.len() == 1 {
        let v = term(x[0].abs());
        return v * v;
    }
    let sum: f64 = x.windows(2).map(|w| term(w[0].hypot(w[1]))).sum();
    let mean = sum / (x.len() - 1) as f64;
    mean * mean
}

fn levy(x: &[f64]) -> f64 {
    let w = |v: f64| 1.0 + (v - 1.0) / 4.0;
    let d = x.len();
    let w0 = w(x[0]);
    let wd = w(x[d - 1]);
    let head = (PI * w0).sin().powi(2);
    let middle: f64 = x[..d - 1]
        .iter()
        .map(|&v| {
            let wi = w(v);
            (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2))
        })
        .sum();
    let tail = (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2));
    head + middle + tail
}
