//! Space models, point representations and metrics.
//!
//! Four concrete metric spaces are supported:
//!
//! * `Euclidean(d)`: points in R^d with the Euclidean norm.
//! * `Circle`: one angle in `[0, 2π)` with the arc-length metric. Angle 0 is
//!   the "north pole" used by the compactified-integers demo.
//! * `Projective2`: the real projective plane, points stored as unit
//!   homogeneous triples whose first nonzero coordinate is positive, with the
//!   angle-between-lines metric.
//! * `Sequence(d)`: a finite truncation of l^2 with the Euclidean norm.
//!
//! Every point handed out by this module is in canonical form, so two points
//! denote the same element of the space iff their coordinates are
//! bit-identical.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default truncation for the sequence space.
pub const DEFAULT_SEQUENCE_DIM: usize = 256;

/// Default `|z|` threshold below which a projective point is treated as lying
/// on the line at infinity of the `z = 1` chart.
pub const DEFAULT_CHART_THRESHOLD: f64 = 1e-6;

/// Norms within this distance of 1 are accepted as already normalized.
const UNIT_NORM_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceModel {
    Euclidean { dim: usize },
    Circle,
    Projective2,
    Sequence { dim: usize },
}

impl SpaceModel {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("euclidean dimension must be at least 1"));
        }
        Ok(SpaceModel::Euclidean { dim })
    }

    pub fn sequence(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("sequence truncation must be at least 1"));
        }
        Ok(SpaceModel::Sequence { dim })
    }

    /// Number of stored coordinates per point.
    pub fn coord_len(&self) -> usize {
        match *self {
            SpaceModel::Euclidean { dim } | SpaceModel::Sequence { dim } => dim,
            SpaceModel::Circle => 1,
            SpaceModel::Projective2 => 3,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceModel::Euclidean { .. } => "euclidean",
            SpaceModel::Circle => "circle",
            SpaceModel::Projective2 => "projective2",
            SpaceModel::Sequence { .. } => "sequence",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpaceModel::Euclidean { dim: 0 } => {
                Err(Error::input("euclidean dimension must be at least 1"))
            }
            SpaceModel::Sequence { dim: 0 } => {
                Err(Error::input("sequence truncation must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind_name(), self.coord_len())
    }
}

impl FromStr for SpaceModel {
    type Err = Error;

    /// Parses the `"<kind> <coords>"` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| Error::input("empty space descriptor"))?;
        let dim: usize = match parts.next() {
            Some(d) => d
                .parse()
                .map_err(|_| Error::input(format!("bad space dimension {d:?}")))?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(Error::input(format!("trailing tokens in space {s:?}")));
        }
        let space = match kind {
            "euclidean" => SpaceModel::euclidean(dim)?,
            "sequence" => SpaceModel::sequence(dim)?,
            "circle" if dim <= 1 => SpaceModel::Circle,
            "projective2" if dim == 0 || dim == 3 => SpaceModel::Projective2,
            _ => return Err(Error::input(format!("unknown space {s:?}"))),
        };
        Ok(space)
    }
}

/// A point in canonical form for some [`SpaceModel`].
///
/// Ordering is lexicographic over coordinates using IEEE total order;
/// canonical points never hold NaN or negative zero, so this agrees with the
/// numeric order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacePoint(SmallVec<[f64; 3]>);

impl SpacePoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest absolute coordinate; used by the divergence guards.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl PartialEq for SpacePoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SpacePoint {}

impl PartialOrd for SpacePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpacePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

fn check_arity(space: &SpaceModel, got: usize) -> Result<()> {
    let want = space.coord_len();
    if got != want {
        return Err(Error::input(format!(
            "{} point needs {want} coordinates, got {got}",
            space.kind_name()
        )));
    }
    Ok(())
}

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid may round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r + 0.0
    }
}

/// Brings a raw coordinate vector into canonical form for `space`.
pub fn canonicalize(space: &SpaceModel, raw: &[f64]) -> Result<SpacePoint> {
    check_arity(space, raw.len())?;
    if let Some(bad) = raw.iter().find(|c| !c.is_finite()) {
        return Err(Error::input(format!("non-finite coordinate {bad}")));
    }
    let coords: SmallVec<[f64; 3]> = match space {
        // `+ 0.0` folds -0.0 into +0.0 so equal points compare bit-identical.
        SpaceModel::Euclidean { .. } | SpaceModel::Sequence { .. } => {
            raw.iter().map(|c| c + 0.0).collect()
        }
        SpaceModel::Circle => smallvec::smallvec![reduce_angle(raw[0])],
        SpaceModel::Projective2 => canonical_projective(raw)?,
    };
    Ok(SpacePoint(coords))
}

fn canonical_projective(raw: &[f64]) -> Result<SmallVec<[f64; 3]>> {
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::input("projective point cannot be the zero vector"));
    }
    let first = raw.iter().copied().find(|&c| c != 0.0).unwrap_or(0.0);
    if (norm - 1.0).abs() <= UNIT_NORM_SLACK && first > 0.0 {
        return Ok(raw.iter().map(|c| c + 0.0).collect());
    }
    // Scale by the largest-magnitude coordinate first so that inputs of very
    // different magnitude normalize through the same arithmetic.
    let pivot = raw.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    let scaled: SmallVec<[f64; 3]> = raw.iter().map(|c| sign * c / pivot).collect();
    let n = scaled.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(scaled.iter().map(|c| c / n + 0.0).collect())
}

/// Distance between two points of `space`.
pub fn distance(space: &SpaceModel, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
    check_arity(space, p.len())?;
    check_arity(space, q.len())?;
    Ok(distance_unchecked(space, p.coords(), q.coords()))
}

/// Metric without arity checks; callers guarantee both points belong to `space`.
#[inline]
pub(crate) fn distance_unchecked(space: &SpaceModel, p: &[f64], q: &[f64]) -> f64 {
    match space {
        SpaceModel::Euclidean { .. } | SpaceModel::Sequence { .. } => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        SpaceModel::Circle => {
            let diff = (p[0] - q[0]).abs();
            diff.min(TAU - diff)
        }
        SpaceModel::Projective2 => projective_angle(p, q),
    }
}

/// Angle between the lines spanned by unit vectors `u` and `v`, in `[0, π/2]`.
///
/// Equal to `acos(min(1, |<u, v>|))`, evaluated as `2·atan2(|u − sv|, |u + sv|)`
/// with `s = sign<u, v>`, which keeps full precision for nearby lines.
#[inline]
fn projective_angle(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let s = if dot < 0.0 { -1.0 } else { 1.0 };
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in u.iter().zip(v) {
        let d = a - s * b;
        let t = a + s * b;
        diff += d * d;
        sum += t * t;
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Result of projecting a projective point to the affine chart `z = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    Finite([f64; 2]),
    NearInfinity,
}

/// Projects a canonical projective point to the `z = 1` chart.
pub fn chart_project(p: &SpacePoint, threshold: f64) -> Result<ChartPoint> {
    check_arity(&SpaceModel::Projective2, p.len())?;
    let c = p.coords();
    if c[2].abs() > threshold {
        Ok(ChartPoint::Finite([c[0] / c[2], c[1] / c[2]]))
    } else {
        Ok(ChartPoint::NearInfinity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(space: &SpaceModel, raw: &[f64]) -> SpacePoint {
        canonicalize(space, raw).unwrap()
    }

    fn random_raw(space: &SpaceModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match space {
            SpaceModel::Circle => vec![rng.random_range(-20.0..20.0)],
            _ => (0..space.coord_len())
                .map(|_| rng.random_range(-5.0..5.0))
                .collect(),
        }
    }

    fn all_spaces() -> Vec<SpaceModel> {
        vec![
            SpaceModel::Euclidean { dim: 1 },
            SpaceModel::Euclidean { dim: 2 },
            SpaceModel::Circle,
            SpaceModel::Projective2,
            SpaceModel::Sequence { dim: 16 },
        ]
    }

    #[test]
    fn distance_examples() {
        let e1 = SpaceModel::Euclidean { dim: 1 };
        assert_eq!(distance(&e1, &pt(&e1, &[0.0]), &pt(&e1, &[3.0])).unwrap(), 3.0);

        let c = SpaceModel::Circle;
        let d = distance(&c, &pt(&c, &[0.1]), &pt(&c, &[TAU - 0.1])).unwrap();
        assert!((d - 0.2).abs() < 1e-12);

        let p = SpaceModel::Projective2;
        let d = distance(&p, &pt(&p, &[1.0, 0.0, 0.0]), &pt(&p, &[0.0, 1.0, 0.0])).unwrap();
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let d = distance(&p, &pt(&p, &[1.0, 1.0, 1.0]), &pt(&p, &[2.0, 2.0, 2.0])).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn canonicalize_examples() {
        let p = SpaceModel::Projective2;
        assert_eq!(pt(&p, &[-2.0, 0.0, 0.0]).coords(), &[1.0, 0.0, 0.0]);

        let c = SpaceModel::Circle;
        let a = pt(&c, &[7.0]).coords()[0];
        assert!((a - (7.0 - TAU)).abs() < 1e-15);
        assert!((a - 0.71681).abs() < 1e-5);

        let e2 = SpaceModel::Euclidean { dim: 2 };
        assert_eq!(pt(&e2, &[0.5, -1.0]).coords(), &[0.5, -1.0]);
    }

    #[test]
    fn canonicalize_rejects_bad_input() {
        let p = SpaceModel::Projective2;
        assert!(canonicalize(&p, &[0.0, 0.0, 0.0]).is_err());
        assert!(canonicalize(&p, &[1.0, f64::NAN, 0.0]).is_err());
        assert!(canonicalize(&p, &[1.0, 0.0]).is_err());
        let e = SpaceModel::Euclidean { dim: 2 };
        assert!(canonicalize(&e, &[f64::INFINITY, 0.0]).is_err());
        assert!(distance(&e, &pt(&e, &[0.0, 0.0]), &pt(&SpaceModel::Circle, &[0.0])).is_err());
    }

    #[test]
    fn projective_canonical_form_invariants() {
        let p = SpaceModel::Projective2;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let c = pt(&p, &random_raw(&p, &mut rng));
            let norm = c.coords().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
            let first = c.coords().iter().find(|x| **x != 0.0).unwrap();
            assert!(*first > 0.0);
        }
        assert_eq!(pt(&p, &[0.0, -3.0, 4.0]).coords(), &[0.0, 0.6, -0.8]);
    }

    #[test]
    fn chart_projection() {
        let p = SpaceModel::Projective2;
        match chart_project(&pt(&p, &[41.0, 41.0, 79.0]), DEFAULT_CHART_THRESHOLD).unwrap() {
            ChartPoint::Finite([x, y]) => {
                assert!((x - 41.0 / 79.0).abs() < 1e-12);
                assert!((y - 0.51899).abs() < 1e-5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            chart_project(&pt(&p, &[1.0, 0.0, 0.0]), DEFAULT_CHART_THRESHOLD).unwrap(),
            ChartPoint::NearInfinity
        );
        assert_eq!(
            chart_project(&pt(&p, &[0.0, 0.0, 1.0]), DEFAULT_CHART_THRESHOLD).unwrap(),
            ChartPoint::Finite([0.0, 0.0])
        );
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for space in all_spaces() {
            for _ in 0..1000 {
                let p = pt(&space, &random_raw(&space, &mut rng));
                let q = pt(&space, &random_raw(&space, &mut rng));
                let r = pt(&space, &random_raw(&space, &mut rng));
                let d = |a: &SpacePoint, b: &SpacePoint| distance(&space, a, b).unwrap();
                assert_eq!(d(&p, &p), 0.0, "{space}");
                assert_eq!(d(&p, &q), d(&q, &p), "{space}");
                assert!(d(&p, &q) >= 0.0);
                assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12, "{space}");
            }
        }
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for space in all_spaces() {
            for _ in 0..1000 {
                let once = pt(&space, &random_raw(&space, &mut rng));
                let twice = pt(&space, once.coords());
                assert_eq!(once.coords(), twice.coords(), "{space}");
            }
        }
    }

    #[test]
    fn projective_distance_is_scale_invariant() {
        let p = SpaceModel::Projective2;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let u = random_raw(&p, &mut rng);
            let v = random_raw(&p, &mut rng);
            let base = distance(&p, &pt(&p, &u), &pt(&p, &v)).unwrap();
            for lambda in [-3.0, 0.5, 10.0] {
                let scaled: Vec<f64> = u.iter().map(|c| c * lambda).collect();
                let d = distance(&p, &pt(&p, &scaled), &pt(&p, &v)).unwrap();
                assert!((d - base).abs() <= 1e-12);
                let scaled: Vec<f64> = v.iter().map(|c| c * lambda).collect();
                let d = distance(&p, &pt(&p, &u), &pt(&p, &scaled)).unwrap();
                assert!((d - base).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn space_descriptor_round_trip() {
        for space in all_spaces() {
            assert_eq!(space.to_string().parse::<SpaceModel>().unwrap(), space);
        }
        assert!("euclidean 0".parse::<SpaceModel>().is_err());
        assert!("torus 2".parse::<SpaceModel>().is_err());
    }
}
