//! Map descriptions, systems of maps and single-map evaluation.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::spaces::{canonicalize, reduce_angle, SpaceModel, SpacePoint};

/// Minimum `|det M|` for a projective matrix to count as invertible.
pub const PROJECTIVE_DET_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `n ↦ n + 1`, `∞ ↦ ∞` on the one-point compactified integers placed on
    /// the circle (see [`embed_natural`]).
    SuccessorCompactification,
    /// Diagonal map `λ_i ↦ (1 − 1/(i+1))·λ_i` on the truncated sequence space.
    HilbertDiagonal,
    /// `(x, j) ↦ (x/2, j)`
    TwoArrows1,
    /// `(x, j) ↦ ((x+1)/2, j)`
    TwoArrows2,
    /// `(x, j) ↦ (1−x, 1−j)`
    TwoArrows3,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::SuccessorCompactification,
        Builtin::HilbertDiagonal,
        Builtin::TwoArrows1,
        Builtin::TwoArrows2,
        Builtin::TwoArrows3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::SuccessorCompactification => "successor-compactification",
            Builtin::HilbertDiagonal => "hilbert-diagonal",
            Builtin::TwoArrows1 => "two-arrows-1",
            Builtin::TwoArrows2 => "two-arrows-2",
            Builtin::TwoArrows3 => "two-arrows-3",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::input(format!("unknown builtin map {s:?}")))
    }
}

/// One continuous self-map of a space, described declaratively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSpec {
    /// `x ↦ A·x + b`, `A` given row-major.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Rotation by `angle` radians (about the origin on R^2).
    Rotation { angle: f64 },
    Identity,
    /// The map induced on P^2 by an invertible 3×3 matrix.
    Projective { matrix: [[f64; 3]; 3] },
    Builtin { name: Builtin },
}

impl MapSpec {
    pub fn builtin(name: Builtin) -> Self {
        MapSpec::Builtin { name }
    }

    /// Checks that this map is well defined on `space`.
    pub fn check_compatible(&self, space: &SpaceModel) -> Result<()> {
        let ok = match (self, space) {
            (MapSpec::Affine { matrix, offset }, SpaceModel::Euclidean { dim })
            | (MapSpec::Affine { matrix, offset }, SpaceModel::Sequence { dim }) => {
                if matrix.len() != *dim
                    || matrix.iter().any(|row| row.len() != *dim)
                    || offset.len() != *dim
                {
                    return Err(Error::input(format!(
                        "affine map must be {dim}x{dim} with a length-{dim} offset"
                    )));
                }
                if matrix.iter().flatten().chain(offset).any(|c| !c.is_finite()) {
                    return Err(Error::input("affine map has non-finite entries"));
                }
                true
            }
            (MapSpec::Rotation { angle }, SpaceModel::Circle)
            | (MapSpec::Rotation { angle }, SpaceModel::Euclidean { dim: 2 }) => {
                angle.is_finite()
            }
            (MapSpec::Identity, _) => true,
            (MapSpec::Projective { matrix }, SpaceModel::Projective2) => {
                if matrix.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::input("projective matrix has non-finite entries"));
                }
                let det = det3(matrix);
                if det.abs() <= PROJECTIVE_DET_MIN {
                    return Err(Error::input(format!(
                        "projective matrix is singular (det = {det})"
                    )));
                }
                true
            }
            (MapSpec::Builtin { name }, _) => matches!(
                (name, space),
                (Builtin::SuccessorCompactification, SpaceModel::Circle)
                    | (Builtin::HilbertDiagonal, SpaceModel::Sequence { .. })
                    | (
                        Builtin::TwoArrows1 | Builtin::TwoArrows2 | Builtin::TwoArrows3,
                        SpaceModel::Euclidean { dim: 2 }
                    )
            ),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!(
                "map {} is not defined on space {space}",
                self.describe()
            )))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MapSpec::Affine { .. } => "affine".to_string(),
            MapSpec::Rotation { angle } => format!("rotation({angle})"),
            MapSpec::Identity => "identity".to_string(),
            MapSpec::Projective { .. } => "projective".to_string(),
            MapSpec::Builtin { name } => name.to_string(),
        }
    }
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// An iterated function system: a space plus a finite ordered list of maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSystem {
    pub name: String,
    pub space: SpaceModel,
    pub maps: Vec<MapSpec>,
}

impl IfsSystem {
    pub fn new(name: impl Into<String>, space: SpaceModel, maps: Vec<MapSpec>) -> Result<Self> {
        let sys = IfsSystem {
            name: name.into(),
            space,
            maps,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if self.maps.is_empty() {
            return Err(Error::input("a system needs at least one map"));
        }
        for (i, m) in self.maps.iter().enumerate() {
            m.check_compatible(&self.space)
                .map_err(|e| Error::input(format!("map {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn point(&self, raw: &[f64]) -> Result<SpacePoint> {
        canonicalize(&self.space, raw)
    }

    /// Applies map `index` to `p`.
    pub fn apply(&self, index: usize, p: &SpacePoint) -> Result<SpacePoint> {
        let m = self
            .maps
            .get(index)
            .ok_or_else(|| Error::input(format!("map index {index} out of range")))?;
        apply_map(&self.space, m, p)
    }
}

/// Places `n ∈ {1, 2, …}` on the circle at angle `2·atan(1/n)` from the north
/// pole; `∞` sits at angle 0.
pub fn embed_natural(n: f64) -> f64 {
    if n.is_infinite() {
        0.0
    } else {
        2.0 * (1.0 / n).atan()
    }
}

/// Evaluates `m` at `p`, returning the canonical image.
pub fn apply_map(space: &SpaceModel, m: &MapSpec, p: &SpacePoint) -> Result<SpacePoint> {
    if p.len() != space.coord_len() {
        return Err(Error::input(format!(
            "point has {} coordinates, space {space} needs {}",
            p.len(),
            space.coord_len()
        )));
    }
    let x = p.coords();
    let raw: SmallVec<[f64; 3]> = match (m, space) {
        (MapSpec::Identity, _) => return Ok(p.clone()),
        (MapSpec::Affine { matrix, offset }, SpaceModel::Euclidean { .. })
        | (MapSpec::Affine { matrix, offset }, SpaceModel::Sequence { .. }) => {
            check_affine_shape(matrix, offset, x.len())?;
            matrix
                .iter()
                .zip(offset)
                .map(|(row, b)| {
                    let dot = row.iter().zip(x).fold(0.0, |acc, (a, xi)| acc + a * xi);
                    dot + b
                })
                .collect()
        }
        (MapSpec::Rotation { angle }, SpaceModel::Circle) => {
            smallvec::smallvec![reduce_angle(x[0] + angle)]
        }
        (MapSpec::Rotation { angle }, SpaceModel::Euclidean { dim: 2 }) => {
            let (s, c) = angle.sin_cos();
            smallvec::smallvec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
        }
        (MapSpec::Projective { matrix }, SpaceModel::Projective2) => matrix
            .iter()
            .map(|row| row[0] * x[0] + row[1] * x[1] + row[2] * x[2])
            .collect(),
        (MapSpec::Builtin { name }, _) => apply_builtin(*name, space, x)?,
        _ => {
            return Err(Error::input(format!(
                "map {} is not defined on space {space}",
                m.describe()
            )))
        }
    };
    canonicalize(space, &raw)
}

fn check_affine_shape(matrix: &[Vec<f64>], offset: &[f64], dim: usize) -> Result<()> {
    if matrix.len() != dim || offset.len() != dim || matrix.iter().any(|r| r.len() != dim) {
        return Err(Error::input(format!("affine map is not {dim}x{dim}")));
    }
    Ok(())
}

fn apply_builtin(name: Builtin, space: &SpaceModel, x: &[f64]) -> Result<SmallVec<[f64; 3]>> {
    let out = match (name, space) {
        (Builtin::SuccessorCompactification, SpaceModel::Circle) => {
            smallvec::smallvec![successor_on_circle(x[0])]
        }
        (Builtin::HilbertDiagonal, SpaceModel::Sequence { .. }) => x
            .iter()
            .enumerate()
            .map(|(i, c)| hilbert_factor(i + 1) * c)
            .collect(),
        (Builtin::TwoArrows1, SpaceModel::Euclidean { dim: 2 }) => {
            smallvec::smallvec![x[0] / 2.0, x[1]]
        }
        (Builtin::TwoArrows2, SpaceModel::Euclidean { dim: 2 }) => {
            smallvec::smallvec![(x[0] + 1.0) / 2.0, x[1]]
        }
        (Builtin::TwoArrows3, SpaceModel::Euclidean { dim: 2 }) => {
            smallvec::smallvec![1.0 - x[0], 1.0 - x[1]]
        }
        _ => {
            return Err(Error::input(format!(
                "builtin {name} is not defined on space {space}"
            )))
        }
    };
    Ok(out)
}

/// Contraction factor of the diagonal sequence map on coordinate `i` (1-based).
pub fn hilbert_factor(i: usize) -> f64 {
    1.0 - 1.0 / (i as f64 + 1.0)
}

/// Translation `t ↦ t + 1` of the extended real line, carried to the circle
/// through `t = cot(a/2)`. On embedded naturals this is `n ↦ n + 1`; the
/// north pole (`t = ∞`) is fixed.
fn successor_on_circle(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let half = a / 2.0;
    let t = half.cos() / half.sin();
    let next = 2.0 * 1.0f64.atan2(t + 1.0);
    if next >= TAU {
        0.0
    } else {
        next
    }
}
