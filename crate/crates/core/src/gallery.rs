//! Built-in systems, constructible by name.

use std::f64::consts::TAU;

use crate::analysis::ConvergenceReport;
use crate::error::{Error, Result};
use crate::ifs::deterministic_attractor;
use crate::maps::{embed_natural, Builtin, IfsSystem, MapSpec};
use crate::sets::PointCloud;
use crate::spaces::{SpaceModel, DEFAULT_SEQUENCE_DIM};

pub const NAMES: [&str; 6] = [
    "sierpinski",
    "circle-rotation",
    "two-arrows-maps",
    "successor-compactification",
    "hilbert-diagonal",
    "projective-bv",
];

/// Projective matrices of the two-map system on P^2.
pub const BV_F1: [[f64; 3]; 3] = [[41.0, -19.0, 19.0], [-19.0, 41.0, 19.0], [19.0, 19.0, 41.0]];
pub const BV_F2: [[f64; 3]; 3] = [[-10.0, -1.0, 19.0], [-10.0, 21.0, 1.0], [10.0, 10.0, 10.0]];

/// Rotation angle of the circle system: `2π` times the golden-ratio conjugate.
pub fn golden_rotation() -> f64 {
    (TAU * (5f64.sqrt() - 1.0) / 2.0).rem_euclid(TAU)
}

/// How a reference set for convergence checks is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceKind {
    /// Deterministic Hutchinson iteration from the default start point.
    Oracle,
    /// `n` equally spaced circle points (the attractor is the whole circle).
    UniformCircle(usize),
    /// A known finite limit set.
    Points(Vec<Vec<f64>>),
    /// No independent ground truth; compare two chaos-game runs.
    CrossSeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub x0: Vec<f64>,
    pub n_steps: usize,
    pub ladder: Vec<usize>,
    /// Decimation resolution for oracles and probes.
    pub eps: f64,
    /// Convergence tolerance for chaos-game diagnostics.
    pub tol: f64,
    /// Cauchy tolerance for the deterministic oracle.
    pub oracle_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub name: String,
    pub system: IfsSystem,
    pub defaults: Defaults,
    pub reference: ReferenceKind,
    pub note: String,
}

pub const DEFAULT_LADDER: [usize; 4] = [0, 100, 1000, 10_000];

pub fn build(name: &str) -> Result<GalleryEntry> {
    let entry = match name {
        "sierpinski" => {
            let h = 3f64.sqrt() / 2.0;
            let maps = [[0.0, 0.0], [1.0, 0.0], [0.5, h]]
                .iter()
                .map(|v| MapSpec::Affine {
                    matrix: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
                    offset: vec![v[0] / 2.0, v[1] / 2.0],
                })
                .collect();
            GalleryEntry {
                name: "sierpinski".to_string(),
                system: IfsSystem::new(name, SpaceModel::Euclidean { dim: 2 }, maps)?,
                defaults: Defaults {
                    x0: vec![0.0, 0.0],
                    n_steps: 100_000,
                    ladder: DEFAULT_LADDER.to_vec(),
                    eps: 2f64.powi(-9),
                    tol: 0.02,
                    oracle_tol: 2f64.powi(-8),
                    max_iter: 64,
                },
                reference: ReferenceKind::Oracle,
                note: "three half-contractions toward (0,0), (1,0), (1/2, √3/2); reference system with a known contractive attractor".to_string(),
            }
        }
        "circle-rotation" => GalleryEntry {
            name: "circle-rotation".to_string(),
            system: IfsSystem::new(
                name,
                SpaceModel::Circle,
                vec![MapSpec::Identity, MapSpec::Rotation { angle: golden_rotation() }],
            )?,
            defaults: Defaults {
                x0: vec![0.0],
                n_steps: 1_000_000,
                ladder: vec![0, 100, 1000, 10_000],
                eps: 1e-4,
                tol: 0.01,
                oracle_tol: 1e-3,
                max_iter: 20_000,
            },
            reference: ReferenceKind::UniformCircle(10_000),
            note: "identity plus an irrational rotation; noncontractive, and the whole circle is the strict attractor".to_string(),
        },
        "two-arrows-maps" => GalleryEntry {
            name: "two-arrows-maps".to_string(),
            system: IfsSystem::new(
                name,
                SpaceModel::Euclidean { dim: 2 },
                vec![
                    MapSpec::builtin(Builtin::TwoArrows1),
                    MapSpec::builtin(Builtin::TwoArrows2),
                    MapSpec::builtin(Builtin::TwoArrows3),
                ],
            )?,
            defaults: Defaults {
                x0: vec![0.3, 0.0],
                n_steps: 100_000,
                ladder: DEFAULT_LADDER.to_vec(),
                eps: 2f64.powi(-9),
                tol: 0.02,
                oracle_tol: 2f64.powi(-8),
                max_iter: 64,
            },
            reference: ReferenceKind::Oracle,
            note: "halving maps and the flip (x, j) -> (1-x, 1-j) on [0,1]x{0,1}, measured with the Euclidean metric".to_string(),
        },
        "successor-compactification" => GalleryEntry {
            name: "successor-compactification".to_string(),
            system: IfsSystem::new(
                name,
                SpaceModel::Circle,
                vec![MapSpec::builtin(Builtin::SuccessorCompactification)],
            )?,
            defaults: Defaults {
                x0: vec![embed_natural(1.0)],
                n_steps: 1000,
                ladder: vec![0, 10, 100],
                eps: 1e-9,
                tol: 0.05,
                oracle_tol: 1e-6,
                max_iter: 50,
            },
            reference: ReferenceKind::Points(vec![vec![0.0]]),
            note: "n -> n+1 with infinity fixed, integers placed on the circle at angle 2·atan(1/n) from the north pole; every point is pulled to the pole although {∞} is not a strict attractor".to_string(),
        },
        "hilbert-diagonal" => GalleryEntry {
            name: "hilbert-diagonal".to_string(),
            system: IfsSystem::new(
                name,
                SpaceModel::Sequence { dim: DEFAULT_SEQUENCE_DIM },
                vec![MapSpec::builtin(Builtin::HilbertDiagonal)],
            )?,
            defaults: Defaults {
                x0: {
                    let mut e1 = vec![0.0; DEFAULT_SEQUENCE_DIM];
                    e1[0] = 1.0;
                    e1
                },
                n_steps: 10_000,
                ladder: vec![0, 100, 1000],
                eps: 1e-9,
                tol: 1e-3,
                oracle_tol: 1e-9,
                max_iter: 10_000,
            },
            reference: ReferenceKind::Points(vec![vec![0.0; DEFAULT_SEQUENCE_DIM]]),
            note: "diagonal map with factors 1 - 1/(i+1) on truncated l^2; pulls every point to 0 but not every bounded set".to_string(),
        },
        "projective-bv" => GalleryEntry {
            name: "projective-bv".to_string(),
            system: IfsSystem::new(
                name,
                SpaceModel::Projective2,
                vec![
                    MapSpec::Projective { matrix: BV_F1 },
                    MapSpec::Projective { matrix: BV_F2 },
                ],
            )?,
            defaults: Defaults {
                x0: vec![1.0, 1.0, 1.0],
                n_steps: 100_000,
                ladder: DEFAULT_LADDER.to_vec(),
                eps: 1e-3,
                tol: 0.02,
                oracle_tol: 2e-3,
                max_iter: 64,
            },
            reference: ReferenceKind::CrossSeed,
            note: "two projective maps of the plane, neither with an attractor alone, whose union has one".to_string(),
        },
        other => {
            return Err(Error::input(format!(
                "unknown system {other:?}; valid names: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(entry)
}

/// `n` equally spaced points `2πj/n` on the circle.
pub fn uniform_circle_sample(n: usize) -> PointCloud {
    PointCloud::from_raw(
        SpaceModel::Circle,
        (0..n.max(1)).map(|j| [TAU * j as f64 / n.max(1) as f64]),
    )
    .expect("circle samples are valid")
}

impl GalleryEntry {
    pub fn start_cloud(&self) -> Result<PointCloud> {
        PointCloud::singleton(self.system.space, self.system.point(&self.defaults.x0)?)
    }

    /// Deterministic attractor from the default start point.
    pub fn oracle_with(
        &self,
        eps: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<(PointCloud, ConvergenceReport)> {
        deterministic_attractor(&self.system, &self.start_cloud()?, eps, tol, max_iter)
    }

    pub fn oracle(&self) -> Result<(PointCloud, ConvergenceReport)> {
        let d = &self.defaults;
        self.oracle_with(d.eps, d.oracle_tol, d.max_iter)
    }

    /// The reference set and its descriptor, for every kind except
    /// [`ReferenceKind::CrossSeed`] (which needs a second orbit).
    pub fn static_reference(&self) -> Result<Option<(PointCloud, String)>> {
        Ok(match &self.reference {
            ReferenceKind::Oracle => {
                let (cloud, report) = self.oracle()?;
                Some((
                    cloud,
                    format!(
                        "deterministic-oracle eps={} tol={} iterations={} converged={}",
                        self.defaults.eps,
                        self.defaults.oracle_tol,
                        report.ladder.len(),
                        report.converged
                    ),
                ))
            }
            ReferenceKind::UniformCircle(n) => {
                Some((uniform_circle_sample(*n), format!("uniform-circle-sample n={n}")))
            }
            ReferenceKind::Points(pts) => Some((
                PointCloud::from_raw(self.system.space, pts)?,
                "known-limit-set".to_string(),
            )),
            ReferenceKind::CrossSeed => None,
        })
    }
}
