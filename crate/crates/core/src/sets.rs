//! Finite point clouds as stand-ins for nonempty compact sets.
//!
//! A [`PointCloud`] is always sorted and deduplicated in canonical form, so
//! two clouds denote the same set iff they compare equal.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::spaces::{canonicalize, distance_unchecked, SpaceModel, SpacePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    space: SpaceModel,
    points: Vec<SpacePoint>,
    /// Grid resolution of the last decimation, `None` for exact clouds.
    resolution: Option<f64>,
}

impl PointCloud {
    /// Builds a cloud from canonical points, sorting and deduplicating them.
    pub fn new(
        space: SpaceModel,
        mut points: Vec<SpacePoint>,
        resolution: Option<f64>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("point cloud must be nonempty"));
        }
        let want = space.coord_len();
        if let Some(p) = points.iter().find(|p| p.len() != want) {
            return Err(Error::input(format!(
                "point with {} coordinates in a {space} cloud",
                p.len()
            )));
        }
        points.par_sort_unstable();
        points.dedup();
        Ok(PointCloud {
            space,
            points,
            resolution,
        })
    }

    /// Canonicalizes raw coordinate vectors and builds an exact cloud.
    pub fn from_raw<I, V>(space: SpaceModel, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[f64]>,
    {
        let points = raw
            .into_iter()
            .map(|r| canonicalize(&space, r.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        PointCloud::new(space, points, None)
    }

    pub fn singleton(space: SpaceModel, p: SpacePoint) -> Result<Self> {
        PointCloud::new(space, vec![p], None)
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    pub fn resolution(&self) -> Option<f64> {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &SpacePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn is_subset_of(&self, other: &PointCloud) -> bool {
        self.space == other.space && self.points.iter().all(|p| other.contains(p))
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.max_abs()))
    }

    pub fn into_points(self) -> Vec<SpacePoint> {
        self.points
    }

    /// Text interchange form: a header line
    /// `cloud <kind> <coords> <resolution|exact> <count>` followed by one
    /// point per line. Floats use the shortest representation that parses
    /// back to the same bits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 24 + 64);
        let res = match self.resolution {
            Some(r) => r.to_string(),
            None => "exact".to_string(),
        };
        let _ = writeln!(out, "cloud {} {} {}", self.space, res, self.points.len());
        for p in &self.points {
            push_coords(&mut out, p.coords());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| perr(1, "empty cloud file".to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "cloud" {
            return Err(perr(
                hline + 1,
                "expected header `cloud <kind> <coords> <resolution|exact> <count>`".to_string(),
            ));
        }
        let space: SpaceModel = format!("{} {}", fields[1], fields[2])
            .parse()
            .map_err(|e: Error| perr(hline + 1, e.to_string()))?;
        let resolution = match fields[3] {
            "exact" => None,
            r => Some(
                r.parse::<f64>()
                    .map_err(|_| perr(hline + 1, format!("bad resolution {r:?}")))?,
            ),
        };
        let count: usize = fields[4]
            .parse()
            .map_err(|_| perr(hline + 1, format!("bad count {:?}", fields[4])))?;
        let mut points = Vec::with_capacity(count);
        for (i, line) in lines {
            let coords = parse_coords(line).map_err(|m| perr(i + 1, m))?;
            let p = canonicalize(&space, &coords).map_err(|e| perr(i + 1, e.to_string()))?;
            points.push(p);
        }
        if points.len() != count {
            return Err(perr(
                hline + 1,
                format!("header declares {count} points, found {}", points.len()),
            ));
        }
        PointCloud::new(space, points, resolution).map_err(|e| perr(hline + 1, e.to_string()))
    }
}

pub(crate) fn push_coords(out: &mut String, coords: &[f64]) {
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{c}");
    }
}

pub(crate) fn parse_coords(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number {t:?}")))
        .collect()
}

fn check_same_space(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.space != b.space {
        return Err(Error::input(format!(
            "clouds live in different spaces ({} vs {})",
            a.space, b.space
        )));
    }
    Ok(())
}

/// Sorted, deduplicated union of two clouds in the same space.
pub fn union(a: &PointCloud, b: &PointCloud) -> Result<PointCloud> {
    check_same_space(a, b)?;
    let mut points = Vec::with_capacity(a.len() + b.len());
    points.extend_from_slice(&a.points);
    points.extend_from_slice(&b.points);
    let resolution = if a.resolution == b.resolution {
        a.resolution
    } else {
        None
    };
    PointCloud::new(a.space, points, resolution)
}

/// Snaps every point to the `eps` grid of its representation and deduplicates.
///
/// Coordinates round half away from zero. Circle angles snap on `[0, 2π)`
/// (a snap landing on `2π` wraps to 0), projective points snap their unit
/// triple and are then re-canonicalized.
pub fn decimate(s: &PointCloud, eps: f64) -> Result<PointCloud> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("decimation resolution must be > 0, got {eps}")));
    }
    let space = s.space;
    let points = s
        .points
        .par_iter()
        .map(|p| snap_point(&space, p, eps))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(space, points, Some(eps))
}

#[inline]
fn snap(c: f64, eps: f64) -> f64 {
    (c / eps).round() * eps
}

fn snap_point(space: &SpaceModel, p: &SpacePoint, eps: f64) -> Result<SpacePoint> {
    let c = p.coords();
    let raw: SmallVec<[f64; 3]> = match space {
        SpaceModel::Euclidean { .. } | SpaceModel::Sequence { .. } => {
            c.iter().map(|x| snap(*x, eps)).collect()
        }
        SpaceModel::Circle => {
            let a = snap(c[0], eps);
            smallvec::smallvec![if a >= TAU { 0.0 } else { a }]
        }
        SpaceModel::Projective2 => {
            let g: SmallVec<[f64; 3]> = c.iter().map(|x| snap(*x, eps)).collect();
            if g.iter().all(|x| *x == 0.0) {
                // Only reachable for eps above ~1.15; keep the point itself.
                return Ok(p.clone());
            }
            g
        }
    };
    canonicalize(space, &raw)
}

/// Hausdorff distance by exhaustive search over all pairs.
pub fn hausdorff_brute(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_same_space(a, b)?;
    let space = a.space;
    let directed = |from: &PointCloud, to: &PointCloud| {
        from.points
            .iter()
            .map(|p| {
                to.points
                    .iter()
                    .map(|q| distance_unchecked(&space, p.coords(), q.coords()))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Hausdorff distance using grid buckets.
///
/// Returns exactly the value of [`hausdorff_brute`]: the index only prunes
/// candidates whose distance provably cannot beat the current best, and the
/// survivors are measured with the same metric.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_same_space(a, b)?;
    let ia = CloudIndex::new(a);
    let ib = CloudIndex::new(b);
    Ok(ib.directed_from(a).max(ia.directed_from(b)))
}

/// Largest distance from a point of `from` to the cloud `to`.
pub fn directed_hausdorff(from: &PointCloud, to: &PointCloud) -> Result<f64> {
    check_same_space(from, to)?;
    Ok(CloudIndex::new(to).directed_from(from))
}

/// Distance from a single point to a cloud.
pub fn point_to_cloud(p: &SpacePoint, cloud: &PointCloud) -> Result<f64> {
    if p.len() != cloud.space.coord_len() {
        return Err(Error::input("point and cloud live in different spaces"));
    }
    Ok(CloudIndex::new(cloud).nearest(p))
}

type Cell = [i64; 3];

/// Nearest-neighbour index over one cloud.
///
/// Each point is embedded into R^m (m ≤ 3) by a map whose Euclidean distances
/// never exceed the space metric: identity on low-dimensional Euclidean and
/// sequence spaces, `a ↦ (cos a, sin a)` on the circle (chord ≤ arc) and
/// `u ↦ {u, −u}` on P^2 (chord ≤ angle). A ring search over grid cells can
/// then stop as soon as the ring radius exceeds the best distance found.
pub struct CloudIndex<'a> {
    cloud: &'a PointCloud,
    grid: Option<Grid>,
}

struct Grid {
    dims: usize,
    h: f64,
    origin: [f64; 3],
    lo: Cell,
    hi: Cell,
    cells: HashMap<Cell, Vec<u32>>,
}

fn embed(space: &SpaceModel, c: &[f64]) -> Option<SmallVec<[[f64; 3]; 2]>> {
    match space {
        SpaceModel::Euclidean { dim } | SpaceModel::Sequence { dim } if *dim <= 3 => {
            let mut v = [0.0; 3];
            v[..*dim].copy_from_slice(c);
            Some(smallvec::smallvec![v])
        }
        SpaceModel::Circle => {
            let (s, co) = c[0].sin_cos();
            Some(smallvec::smallvec![[co, s, 0.0]])
        }
        SpaceModel::Projective2 => Some(smallvec::smallvec![
            [c[0], c[1], c[2]],
            [-c[0], -c[1], -c[2]]
        ]),
        _ => None,
    }
}

fn embed_dims(space: &SpaceModel) -> usize {
    match space {
        SpaceModel::Euclidean { dim } | SpaceModel::Sequence { dim } => *dim,
        SpaceModel::Circle => 2,
        SpaceModel::Projective2 => 3,
    }
}

/// Clouds this small are searched exhaustively.
const GRID_MIN_POINTS: usize = 32;

impl<'a> CloudIndex<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        let grid = if cloud.len() >= GRID_MIN_POINTS {
            Grid::build(cloud)
        } else {
            None
        };
        CloudIndex { cloud, grid }
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// Distance from `p` to the nearest point of the indexed cloud.
    pub fn nearest(&self, p: &SpacePoint) -> f64 {
        match &self.grid {
            Some(g) => g.nearest(self.cloud, p),
            None => self.brute_nearest(p.coords()),
        }
    }

    fn brute_nearest(&self, p: &[f64]) -> f64 {
        let space = &self.cloud.space;
        self.cloud
            .points
            .iter()
            .map(|q| distance_unchecked(space, p, q.coords()))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_{a ∈ from} d(a, indexed cloud)`.
    pub fn directed_from(&self, from: &PointCloud) -> f64 {
        from.points
            .par_iter()
            .map(|p| self.nearest(p))
            .reduce(|| 0.0, f64::max)
    }
}

impl Grid {
    fn build(cloud: &PointCloud) -> Option<Grid> {
        let space = cloud.space;
        let dims = embed_dims(&space);
        if dims > 3 {
            return None;
        }
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        let mut reps: Vec<([f64; 3], u32)> = Vec::with_capacity(cloud.len() * 2);
        for (i, p) in cloud.points.iter().enumerate() {
            for r in embed(&space, p.coords())? {
                for k in 0..dims {
                    min[k] = min[k].min(r[k]);
                    max[k] = max[k].max(r[k]);
                }
                reps.push((r, i as u32));
            }
        }
        let extent = (0..dims).map(|k| max[k] - min[k]).fold(0.0, f64::max);
        // Circle and projective embeddings lie on a curve / surface, so size
        // cells by the dimension of that manifold.
        let manifold = match space {
            SpaceModel::Circle | SpaceModel::Projective2 => dims - 1,
            _ => dims,
        };
        let per_axis = (reps.len() as f64).powf(1.0 / manifold as f64).ceil().max(1.0);
        let h = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let mut origin = [0.0; 3];
        origin[..dims].copy_from_slice(&min[..dims]);
        let mut grid = Grid {
            dims,
            h,
            origin,
            lo: [0; 3],
            hi: [0; 3],
            cells: HashMap::new(),
        };
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for (r, i) in reps {
            let cell = grid.cell_of(&r);
            for k in 0..3 {
                lo[k] = lo[k].min(cell[k]);
                hi[k] = hi[k].max(cell[k]);
            }
            grid.cells.entry(cell).or_default().push(i);
        }
        grid.lo = lo;
        grid.hi = hi;
        Some(grid)
    }

    fn cell_of(&self, r: &[f64; 3]) -> Cell {
        let mut c = [0i64; 3];
        for k in 0..self.dims {
            c[k] = ((r[k] - self.origin[k]) / self.h).floor() as i64;
        }
        c
    }

    /// A lower bound on the metric distance to any point in a cell at
    /// Chebyshev ring `k` or beyond, with slack for rounding in the
    /// embedding and the cell assignment.
    fn ring_bound(&self, k: i64) -> f64 {
        if k <= 0 {
            0.0
        } else {
            ((k - 1) as f64 * self.h) * (1.0 - 1e-9)
        }
    }

    fn nearest(&self, cloud: &PointCloud, p: &SpacePoint) -> f64 {
        let space = &cloud.space;
        let q = p.coords();
        let reps = embed(space, q).expect("grid exists only for embeddable spaces");
        let qc = self.cell_of(&reps[0]);

        let mut best = f64::INFINITY;
        let visit = |ids: &Vec<u32>, best: &mut f64| {
            for &i in ids {
                let d = distance_unchecked(space, q, cloud.points[i as usize].coords());
                if d < *best {
                    *best = d;
                }
            }
        };

        // Chebyshev distance from the query cell to the occupied box.
        let mut k_start = 0i64;
        let mut k_end = 0i64;
        for k in 0..self.dims {
            let gap = (self.lo[k] - qc[k]).max(qc[k] - self.hi[k]).max(0);
            k_start = k_start.max(gap);
            k_end = k_end.max((qc[k] - self.lo[k]).abs().max((self.hi[k] - qc[k]).abs()));
        }

        let mut k = k_start;
        while k <= k_end {
            if best <= self.ring_bound(k) {
                break;
            }
            if self.ring_cell_count(&qc, k) > self.cells.len() {
                // The ring is wider than the occupied set; scan the remaining
                // cells directly.
                for (cell, ids) in &self.cells {
                    if self.chebyshev(cell, &qc) >= k {
                        visit(ids, &mut best);
                    }
                }
                break;
            }
            self.for_each_ring_cell(&qc, k, |cell| {
                if let Some(ids) = self.cells.get(cell) {
                    visit(ids, &mut best);
                }
            });
            k += 1;
        }
        best
    }

    fn chebyshev(&self, a: &Cell, b: &Cell) -> i64 {
        (0..self.dims).map(|k| (a[k] - b[k]).abs()).max().unwrap_or(0)
    }

    fn axis_range(&self, qc: &Cell, k: i64, axis: usize) -> (i64, i64) {
        ((qc[axis] - k).max(self.lo[axis]), (qc[axis] + k).min(self.hi[axis]))
    }

    fn ring_cell_count(&self, qc: &Cell, k: i64) -> usize {
        let mut total = 1usize;
        for axis in 0..self.dims {
            let (a, b) = self.axis_range(qc, k, axis);
            if b < a {
                return 0;
            }
            total = total.saturating_mul((b - a + 1) as usize);
        }
        total
    }

    /// Visits the cells at Chebyshev distance exactly `k` from `qc`, clipped
    /// to the occupied box.
    fn for_each_ring_cell(&self, qc: &Cell, k: i64, mut f: impl FnMut(&Cell)) {
        let mut ranges = [(0i64, 0i64); 3];
        for (axis, r) in ranges.iter_mut().enumerate().take(self.dims) {
            *r = self.axis_range(qc, k, axis);
            if r.1 < r.0 {
                return;
            }
        }
        let ends = |axis: usize| {
            let (lo, hi) = ranges[axis];
            let a = qc[axis] - k;
            let b = qc[axis] + k;
            let first = (a >= lo && a <= hi).then_some(a);
            let second = (k > 0 && b >= lo && b <= hi).then_some(b);
            first.into_iter().chain(second)
        };
        match self.dims {
            1 => ends(0).for_each(|x| f(&[x, 0, 0])),
            2 => {
                for x in ranges[0].0..=ranges[0].1 {
                    if (x - qc[0]).abs() == k {
                        (ranges[1].0..=ranges[1].1).for_each(|y| f(&[x, y, 0]));
                    } else {
                        ends(1).for_each(|y| f(&[x, y, 0]));
                    }
                }
            }
            _ => {
                for x in ranges[0].0..=ranges[0].1 {
                    for y in ranges[1].0..=ranges[1].1 {
                        if (x - qc[0]).abs() == k || (y - qc[1]).abs() == k {
                            (ranges[2].0..=ranges[2].1).for_each(|z| f(&[x, y, z]));
                        } else {
                            ends(2).for_each(|z| f(&[x, y, z]));
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_raw(SpaceModel::Euclidean { dim: 1 }, xs.iter().map(|x| [*x])).unwrap()
    }

    fn random_cloud(space: SpaceModel, n: usize, rng: &mut ChaCha8Rng) -> PointCloud {
        let raw: Vec<Vec<f64>> = (0..n)
            .map(|_| match space {
                SpaceModel::Circle => vec![rng.random_range(0.0..TAU)],
                _ => (0..space.coord_len())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            })
            .collect();
        PointCloud::from_raw(space, raw).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let s = line(&[0.0, 0.3, 2.0]);
        assert_eq!(hausdorff(&s, &s).unwrap(), 0.0);
        assert_eq!(hausdorff(&line(&[0.0]), &line(&[3.0, 4.0])).unwrap(), 4.0);
        assert_eq!(hausdorff(&line(&[0.0, 1.0]), &line(&[0.0, 0.5, 1.0])).unwrap(), 0.5);
        assert_eq!(hausdorff_brute(&line(&[0.0, 1.0]), &line(&[0.0, 0.5, 1.0])).unwrap(), 0.5);
    }

    #[test]
    fn hausdorff_space_mismatch() {
        let c = PointCloud::from_raw(SpaceModel::Circle, [[0.0]]).unwrap();
        assert!(hausdorff(&line(&[0.0]), &c).is_err());
        assert!(union(&line(&[0.0]), &c).is_err());
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert!(PointCloud::new(SpaceModel::Circle, vec![], None).is_err());
    }

    #[test]
    fn decimate_examples() {
        let d = decimate(&line(&[0.49, 0.51]), 1.0).unwrap();
        assert_eq!(d, line(&[0.0, 1.0]).with_resolution(Some(1.0)));
        let d = decimate(&line(&[-0.5, 0.5, 2.5]), 1.0).unwrap();
        assert_eq!(d.points().len(), 3);
        assert_eq!(d.points()[0].coords(), &[-1.0]);
        assert_eq!(d.points()[2].coords(), &[3.0]);
        assert!(decimate(&line(&[0.0]), 0.0).is_err());
        assert!(decimate(&line(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn decimate_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for space in [
            SpaceModel::Euclidean { dim: 2 },
            SpaceModel::Circle,
            SpaceModel::Sequence { dim: 5 },
        ] {
            for eps in [1e-3, 0.01, 0.3, 2f64.powi(-6)] {
                let s = random_cloud(space, 500, &mut rng);
                let once = decimate(&s, eps).unwrap();
                assert_eq!(decimate(&once, eps).unwrap(), once, "{space} eps={eps}");
            }
        }
    }

    #[test]
    fn circle_decimation_wraps_at_tau() {
        let s = PointCloud::from_raw(SpaceModel::Circle, [[TAU - 0.01]]).unwrap();
        let d = decimate(&s, 0.3).unwrap();
        assert_eq!(d.points()[0].coords(), &[0.0]);
        assert!(hausdorff(&d, &s).unwrap() <= 0.15);
    }

    #[test]
    fn decimation_error_bound_unit_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let raw: Vec<[f64; 2]> = (0..10_000)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let s = PointCloud::from_raw(SpaceModel::Euclidean { dim: 2 }, raw).unwrap();
        let eps = 2f64.powi(-6);
        let d = decimate(&s, eps).unwrap();
        assert!(hausdorff_brute(&d, &s).unwrap() <= eps * 2f64.sqrt() / 2.0);
    }

    #[test]
    fn decimation_error_bound_every_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for space in [
            SpaceModel::Euclidean { dim: 1 },
            SpaceModel::Euclidean { dim: 3 },
            SpaceModel::Circle,
            SpaceModel::Projective2,
            SpaceModel::Sequence { dim: 8 },
        ] {
            let d = space.coord_len() as f64;
            for eps in [1e-3, 0.05] {
                let s = random_cloud(space, 400, &mut rng);
                let dec = decimate(&s, eps).unwrap();
                let err = hausdorff_brute(&dec, &s).unwrap();
                // The projective snap moves the unit triple by at most
                // eps·√3/2 in chord length; the induced angle is asin of that.
                let bound = match space {
                    SpaceModel::Projective2 => (eps * d.sqrt() / 2.0).asin(),
                    _ => eps * d.sqrt() / 2.0,
                };
                assert!(err <= bound * (1.0 + 1e-12), "{space} eps={eps}: {err} > {bound}");
            }
        }
    }

    #[test]
    fn union_examples() {
        let s = line(&[0.0, 2.0]);
        assert_eq!(union(&s, &s).unwrap(), s);
        assert_eq!(union(&line(&[0.0]), &line(&[1.0])).unwrap(), line(&[0.0, 1.0]));
        let a = line(&[0.0, 1.0, 2.0]);
        let b = line(&[2.0, 3.0]);
        assert!(union(&a, &b).unwrap().len() <= a.len() + b.len());
    }

    #[test]
    fn accelerated_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let spaces = [
            SpaceModel::Euclidean { dim: 1 },
            SpaceModel::Euclidean { dim: 2 },
            SpaceModel::Euclidean { dim: 3 },
            SpaceModel::Circle,
            SpaceModel::Projective2,
            SpaceModel::Sequence { dim: 6 },
        ];
        for i in 0..200 {
            let space = spaces[i % spaces.len()];
            let na = rng.random_range(1..=2000);
            let nb = rng.random_range(1..=2000);
            let a = random_cloud(space, na, &mut rng);
            let mut b = random_cloud(space, nb, &mut rng);
            if i % 7 == 0 {
                // Far-apart clouds exercise the box-gap skip.
                let shifted: Vec<Vec<f64>> = b
                    .points()
                    .iter()
                    .map(|p| p.coords().iter().map(|c| c + 50.0).collect())
                    .collect();
                b = PointCloud::from_raw(space, shifted).unwrap();
            }
            let fast = hausdorff(&a, &b).unwrap();
            let slow = hausdorff_brute(&a, &b).unwrap();
            assert_eq!(fast.to_bits(), slow.to_bits(), "{space}: {fast} vs {slow}");
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for space in [SpaceModel::Projective2, SpaceModel::Circle, SpaceModel::Euclidean { dim: 2 }]
        {
            let s = random_cloud(space, 50, &mut rng);
            let back = PointCloud::from_text(&s.to_text(), "mem").unwrap();
            assert_eq!(back, s);
            let d = decimate(&s, 0.01).unwrap();
            assert_eq!(PointCloud::from_text(&d.to_text(), "mem").unwrap(), d);
        }
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let err = PointCloud::from_text("cloud euclidean 1 exact 2\n0.5\nabc\n", "f.cloud")
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("f.cloud:3:"), "{err}");
        let err = PointCloud::from_text("cloud euclidean 1 exact 3\n0.5\n", "f.cloud")
            .unwrap_err()
            .to_string();
        assert!(err.contains("declares 3"), "{err}");
    }
}

#[cfg(test)]
impl PointCloud {
    fn with_resolution(mut self, r: Option<f64>) -> Self {
        self.resolution = r;
        self
    }
}
