//! Named objective constructors used by the CLI and the trial harness.
//!
//! `f1`..`f12` follow the layout of the CEC-2022 single-objective suite
//! (five basic functions, three hybrids, four compositions). Their shifts and
//! rotations are generated from a fixed suite seed, so a given `(id, dim)`
//! always denotes the same function instance.

use super::functions::BaseFunction::{self, *};
use super::objective::{CompositionComponent, HybridGroup, ObjectiveSpec};
use super::transform::TransformData;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RandomStream};

/// Root seed for all procedurally generated suite transforms.
pub const SUITE_SEED: u64 = 2022;

const ROSENBROCK_SCALE: f64 = 2.048 / 100.0;
const RASTRIGIN_SCALE: f64 = 5.12 / 100.0;

#[derive(Debug, Clone, Copy)]
enum Recipe {
    Plain(BaseFunction),
    Shifted(BaseFunction, f64),
    Hybrid(&'static [(BaseFunction, f64)]),
    /// (function, scale, sigma, lambda, bias); the first component holds the optimum.
    Composition(&'static [(BaseFunction, f64, f64, f64, f64)]),
}

struct Entry {
    id: &'static str,
    summary: &'static str,
    recipe: Recipe,
}

const ENTRIES: &[Entry] = &[
    Entry { id: "f1", summary: "shifted rotated Zakharov", recipe: Recipe::Shifted(Zakharov, 1.0) },
    Entry { id: "f2", summary: "shifted rotated Rosenbrock", recipe: Recipe::Shifted(Rosenbrock, ROSENBROCK_SCALE) },
    Entry { id: "f3", summary: "shifted rotated expanded Schaffer F7", recipe: Recipe::Shifted(SchafferF7, 1.0) },
    Entry { id: "f4", summary: "shifted rotated Rastrigin", recipe: Recipe::Shifted(Rastrigin, RASTRIGIN_SCALE) },
    Entry { id: "f5", summary: "shifted rotated Levy", recipe: Recipe::Shifted(Levy, 1.0) },
    Entry {
        id: "f6",
        summary: "hybrid: zakharov 40% / rastrigin 40% / sphere 20%",
        recipe: Recipe::Hybrid(&[(Zakharov, 0.4), (Rastrigin, 0.4), (Sphere, 0.2)]),
    },
    Entry {
        id: "f7",
        summary: "hybrid: rastrigin 20% / levy 30% / schaffer_f7 30% / sphere 20%",
        recipe: Recipe::Hybrid(&[(Rastrigin, 0.2), (Levy, 0.3), (SchafferF7, 0.3), (Sphere, 0.2)]),
    },
    Entry {
        id: "f8",
        summary: "hybrid: schaffer_f7 30% / zakharov 20% / rosenbrock 20% / rastrigin 10% / levy 20%",
        recipe: Recipe::Hybrid(&[
            (SchafferF7, 0.3),
            (Zakharov, 0.2),
            (Rosenbrock, 0.2),
            (Rastrigin, 0.1),
            (Levy, 0.2),
        ]),
    },
    Entry {
        id: "f9",
        summary: "composition of 5 (rosenbrock, sphere, zakharov, sphere, rastrigin)",
        recipe: Recipe::Composition(&[
            (Rosenbrock, ROSENBROCK_SCALE, 10.0, 1.0, 0.0),
            (Sphere, 1.0, 20.0, 1e-6, 200.0),
            (Zakharov, 1.0, 30.0, 1e-10, 300.0),
            (Sphere, 1.0, 40.0, 1e-6, 100.0),
            (Rastrigin, RASTRIGIN_SCALE, 50.0, 1e-6, 400.0),
        ]),
    },
    Entry {
        id: "f10",
        summary: "composition of 3 (rastrigin, levy, sphere)",
        recipe: Recipe::Composition(&[
            (Rastrigin, RASTRIGIN_SCALE, 20.0, 1.0, 0.0),
            (Levy, 1.0, 10.0, 1.0, 200.0),
            (Sphere, 1.0, 10.0, 1.0, 100.0),
        ]),
    },
    Entry {
        id: "f11",
        summary: "composition of 5 (schaffer_f7, levy, sphere, rosenbrock, rastrigin)",
        recipe: Recipe::Composition(&[
            (SchafferF7, 1.0, 20.0, 5e-4, 0.0),
            (Levy, 1.0, 20.0, 1.0, 200.0),
            (Sphere, 1.0, 30.0, 10.0, 300.0),
            (Rosenbrock, ROSENBROCK_SCALE, 30.0, 1.0, 400.0),
            (Rastrigin, RASTRIGIN_SCALE, 20.0, 10.0, 200.0),
        ]),
    },
    Entry {
        id: "f12",
        summary: "composition of 6 (sphere, rastrigin, levy, zakharov, sphere, schaffer_f7)",
        recipe: Recipe::Composition(&[
            (Sphere, 1.0, 10.0, 10.0, 0.0),
            (Rastrigin, RASTRIGIN_SCALE, 20.0, 10.0, 300.0),
            (Levy, 1.0, 30.0, 2.5, 500.0),
            (Zakharov, 1.0, 40.0, 1e-10, 100.0),
            (Sphere, 1.0, 50.0, 1e-6, 400.0),
            (SchafferF7, 1.0, 60.0, 5e-4, 200.0),
        ]),
    },
    Entry {
        id: "twobasin",
        summary: "composition of 2 widely separated sphere basins (narrow global, broad local)",
        recipe: Recipe::Composition(&[
            (Sphere, 1.0, 5.0, 1.0, 0.0),
            (Sphere, 1.0, 40.0, 1.0, 20.0),
        ]),
    },
    Entry { id: "sphere", summary: "plain sphere (optimum at the origin)", recipe: Recipe::Plain(Sphere) },
    Entry { id: "rastrigin", summary: "plain Rastrigin", recipe: Recipe::Plain(Rastrigin) },
    Entry { id: "rosenbrock", summary: "plain Rosenbrock", recipe: Recipe::Plain(Rosenbrock) },
    Entry { id: "zakharov", summary: "plain Zakharov", recipe: Recipe::Plain(Zakharov) },
    Entry { id: "levy", summary: "plain Levy", recipe: Recipe::Plain(Levy) },
    Entry { id: "schaffer_f7", summary: "plain expanded Schaffer F7", recipe: Recipe::Plain(SchafferF7) },
];

/// Every registered id, in listing order.
pub fn ids() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.id).collect()
}

/// `(id, one-line description)` pairs.
pub fn describe() -> Vec<(&'static str, &'static str)> {
    ENTRIES.iter().map(|e| (e.id, e.summary)).collect()
}

pub fn contains(id: &str) -> bool {
    ENTRIES.iter().any(|e| e.id == id)
}

fn entry(id: &str) -> Result<(usize, &'static Entry)> {
    ENTRIES
        .iter()
        .enumerate()
        .find(|(_, e)| e.id == id)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown function `{id}`; known ids: {}",
                ids().join(", ")
            ))
        })
}

fn suite_stream(index: usize, dim: usize, component: usize) -> RandomStream {
    let label = ((index as u64) << 40) | ((component as u64) << 20) | dim as u64;
    RandomStream::new(derive_seed(SUITE_SEED, label))
}

/// Builds the registered objective `id` in `dim` dimensions on the default ±100 box.
pub fn build(id: &str, dim: usize) -> Result<ObjectiveSpec> {
    build_inner(id, dim, None)
}

/// Like [`build`], but base and hybrid functions use `transform` instead of the
/// generated one. The transform keeps its own scale.
pub fn build_with_transform(id: &str, dim: usize, transform: TransformData) -> Result<ObjectiveSpec> {
    build_inner(id, dim, Some(transform))
}

fn build_inner(id: &str, dim: usize, external: Option<TransformData>) -> Result<ObjectiveSpec> {
    let (index, e) = entry(id)?;
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let lo = -ObjectiveSpec::DEFAULT_BOUND;
    let hi = ObjectiveSpec::DEFAULT_BOUND;
    let generated = |scale: f64| -> Result<TransformData> {
        match &external {
            Some(t) => Ok(t.clone()),
            None => Ok(TransformData::generate(&mut suite_stream(index, dim, 0), dim, lo, hi)?
                .with_scale(scale)),
        }
    };
    match e.recipe {
        Recipe::Plain(f) => {
            let transform = external.clone();
            ObjectiveSpec::base(e.id, f, dim, transform)
        }
        Recipe::Shifted(f, scale) => ObjectiveSpec::base(e.id, f, dim, Some(generated(scale)?)),
        Recipe::Hybrid(groups) => {
            let groups = groups
                .iter()
                .map(|&(function, fraction)| HybridGroup { function, fraction })
                .collect();
            ObjectiveSpec::hybrid(e.id, groups, dim, Some(generated(1.0)?))
        }
        Recipe::Composition(parts) => {
            if external.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "`{id}` is a composition; external transform files apply to base and hybrid functions only"
                )));
            }
            let components = parts
                .iter()
                .enumerate()
                .map(|(c, &(function, scale, sigma, lambda, bias))| {
                    let transform =
                        TransformData::generate(&mut suite_stream(index, dim, c), dim, lo, hi)?
                            .with_scale(scale);
                    Ok(CompositionComponent {
                        function,
                        transform,
                        sigma,
                        lambda,
                        bias,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ObjectiveSpec::composition(e.id, components, dim)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_builds_and_hits_f_star_at_optimizer() {
        for id in ids() {
            for dim in [2, 10, 20] {
                let spec = build(id, dim).unwrap();
                let x = spec.optimizer();
                let v = spec.eval(&x).unwrap();
                assert!((v - spec.f_star).abs() <= 1e-12, "{id} D={dim}: {v}");
            }
        }
    }

    #[test]
    fn builds_are_reproducible() {
        assert_eq!(build("f9", 10).unwrap(), build("f9", 10).unwrap());
        assert_ne!(build("f1", 10).unwrap(), build("f2", 10).unwrap());
    }

    #[test]
    fn unknown_id_lists_known_ids() {
        let err = build("nope", 10).unwrap_err().to_string();
        assert!(err.contains("f1") && err.contains("sphere"), "{err}");
    }

    #[test]
    fn external_transform_replaces_generated() {
        let t = TransformData::identity(3);
        let spec = build_with_transform("f1", 3, t).unwrap();
        assert_eq!(spec.optimizer(), vec![0.0; 3]);
        assert!(build_with_transform("f9", 3, TransformData::identity(3)).is_err());
    }
}
