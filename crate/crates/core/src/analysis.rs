//! Convergence diagnostics: tail-closure ladders, full-orbit checks for
//! orbits started on the attractor, pointwise basin probes and the l^2
//! diagonal-map norms.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::chaos::{run_chaos_game, tail_cloud, OrbitRecord, SelectionModel, DIVERGENCE_GUARD};
use crate::error::{Error, Result};
use crate::ifs::hutchinson;
use crate::maps::{apply_map, Builtin, IfsSystem, MapSpec};
use crate::sets::{decimate, point_to_cloud, CloudIndex, PointCloud};
use crate::spaces::{canonicalize, SpaceModel, SpacePoint};

/// Consecutive within-tolerance checks required for an ATTRACTED verdict.
pub const ATTRACTION_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderEntry {
    pub k: usize,
    pub d_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<LadderEntry>,
    pub reference_descriptor: String,
    pub converged: bool,
    pub tol: f64,
}

impl ConvergenceReport {
    pub fn final_distance(&self) -> Option<f64> {
        self.ladder.last().map(|e| e.d_h)
    }

    /// Flat `key = value` block, one ladder entry per line.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reference = {}", self.reference_descriptor);
        let _ = writeln!(out, "tol = {}", self.tol);
        let _ = writeln!(out, "converged = {}", self.converged);
        if let Some(d) = self.final_distance() {
            let _ = writeln!(out, "final_d_h = {d}");
        }
        for e in &self.ladder {
            let _ = writeln!(out, "ladder.{} = {}", e.k, e.d_h);
        }
        out
    }

    /// Single-line JSON record.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::input(format!("tolerance must be > 0, got {tol}")));
    }
    Ok(())
}

/// `d_H(tail_cloud(orbit, K), reference)` for every `K` in `ladder`.
/// `converged` reflects the largest `K`.
pub fn tail_convergence(
    orbit: &OrbitRecord,
    reference: &PointCloud,
    ladder: &[usize],
    tol: f64,
    reference_descriptor: &str,
) -> Result<ConvergenceReport> {
    check_tol(tol)?;
    if ladder.is_empty() {
        return Err(Error::input("burn-in ladder is empty"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("burn-in ladder must be strictly increasing"));
    }
    if reference.space() != &orbit.system.space {
        return Err(Error::input("reference lives in a different space than the orbit"));
    }
    let last = *ladder.last().unwrap();
    if last >= orbit.len() {
        return Err(Error::input(format!(
            "burn-in {last} is beyond the orbit length {}",
            orbit.len()
        )));
    }
    let ref_index = CloudIndex::new(reference);
    let mut entries = Vec::with_capacity(ladder.len());
    for &k in ladder {
        let tail = tail_cloud(orbit, k)?;
        let d = ref_index
            .directed_from(&tail)
            .max(CloudIndex::new(&tail).directed_from(reference));
        entries.push(LadderEntry { k, d_h: d });
    }
    let converged = entries.last().unwrap().d_h <= tol;
    Ok(ConvergenceReport {
        ladder: entries,
        reference_descriptor: reference_descriptor.to_string(),
        converged,
        tol,
    })
}

/// Full-orbit check for an orbit started on the attractor (no burn-in).
///
/// Fails if `x0` is farther than `tol` from `reference`.
#[allow(clippy::too_many_arguments)]
pub fn semiattractor_orbit_check(
    sys: &IfsSystem,
    x0: &SpacePoint,
    n_steps: usize,
    model: &SelectionModel,
    seed: u64,
    reference: &PointCloud,
    tol: f64,
    reference_descriptor: &str,
) -> Result<ConvergenceReport> {
    check_tol(tol)?;
    let gap = point_to_cloud(x0, reference)?;
    if gap > tol {
        return Err(Error::input(format!(
            "starting point is {gap} from the reference attractor (tolerance {tol})"
        )));
    }
    let orbit = run_chaos_game(sys, x0, n_steps, model, seed)?;
    tail_convergence(&orbit, reference, &[0], tol, reference_descriptor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Attracted,
    NotAttractedWithinBudget,
    Diverged,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Attracted => "ATTRACTED",
            Verdict::NotAttractedWithinBudget => "NOT_ATTRACTED_WITHIN_BUDGET",
            Verdict::Diverged => "DIVERGED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinVerdict {
    pub point: Vec<f64>,
    pub verdict: Verdict,
    pub k_reached: usize,
    pub final_d_h: f64,
}

impl BasinVerdict {
    pub fn to_kv(&self) -> String {
        let coords: Vec<String> = self.point.iter().map(|c| c.to_string()).collect();
        format!(
            "point = {}\nverdict = {}\nk_reached = {}\nfinal_d_h = {}\n",
            coords.join(" "),
            self.verdict,
            self.k_reached,
            self.final_d_h
        )
    }

    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

/// Budget for a pointwise basin probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBudget {
    pub k_max: usize,
    pub eps: f64,
    pub tol: f64,
}

impl ProbeBudget {
    /// Default tolerance `4·eps·√d`, the snap-error scale.
    pub fn with_default_tol(space: &SpaceModel, k_max: usize, eps: f64) -> Self {
        ProbeBudget {
            k_max,
            eps,
            tol: 4.0 * eps * (space.coord_len() as f64).sqrt(),
        }
    }
}

/// Iterates `W^k({x})` (decimated at `eps`) and measures the distance to
/// `reference` after every step, including `k = 0`.
///
/// ATTRACTED once the distance stays within `tol` for
/// [`ATTRACTION_WINDOW`] consecutive checks; DIVERGED when a coordinate
/// exceeds the overflow guard.
pub fn basin_probe(
    sys: &IfsSystem,
    x: &SpacePoint,
    reference: &PointCloud,
    budget: ProbeBudget,
) -> Result<BasinVerdict> {
    let ref_index = CloudIndex::new(reference);
    basin_probe_indexed(sys, x, &ref_index, budget)
}

fn basin_probe_indexed(
    sys: &IfsSystem,
    x: &SpacePoint,
    ref_index: &CloudIndex<'_>,
    budget: ProbeBudget,
) -> Result<BasinVerdict> {
    check_tol(budget.tol)?;
    let reference = ref_index.cloud();
    if reference.space() != &sys.space {
        return Err(Error::input("reference lives in a different space than the system"));
    }
    let x = canonicalize(&sys.space, x.coords())?;
    let mut s = decimate(&PointCloud::singleton(sys.space, x.clone())?, budget.eps)?;
    let mut streak = 0;
    let mut last = f64::INFINITY;
    for k in 0..=budget.k_max {
        if k > 0 {
            s = decimate(&hutchinson(sys, &s)?, budget.eps)?;
        }
        if s.max_abs() > DIVERGENCE_GUARD {
            return Ok(BasinVerdict {
                point: x.coords().to_vec(),
                verdict: Verdict::Diverged,
                k_reached: k,
                final_d_h: f64::INFINITY,
            });
        }
        last = ref_index
            .directed_from(&s)
            .max(CloudIndex::new(&s).directed_from(reference));
        streak = if last <= budget.tol { streak + 1 } else { 0 };
        if streak >= ATTRACTION_WINDOW {
            return Ok(BasinVerdict {
                point: x.coords().to_vec(),
                verdict: Verdict::Attracted,
                k_reached: k,
                final_d_h: last,
            });
        }
    }
    Ok(BasinVerdict {
        point: x.coords().to_vec(),
        verdict: Verdict::NotAttractedWithinBudget,
        k_reached: budget.k_max,
        final_d_h: last,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceViolation {
    pub probe: usize,
    pub map: usize,
    pub image: BasinVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceSummary {
    pub probes: usize,
    pub attracted: usize,
    pub images_checked: usize,
    pub violations: Vec<InvarianceViolation>,
}

impl InvarianceSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every ATTRACTED probe, checks that each image `wᵢ(x)` is ATTRACTED as
/// well.
pub fn basin_invariance_check(
    sys: &IfsSystem,
    probes: &[SpacePoint],
    reference: &PointCloud,
    budget: ProbeBudget,
) -> Result<InvarianceSummary> {
    if probes.is_empty() {
        return Err(Error::input("no probes given"));
    }
    let ref_index = CloudIndex::new(reference);
    let mut summary = InvarianceSummary {
        probes: probes.len(),
        attracted: 0,
        images_checked: 0,
        violations: Vec::new(),
    };
    for (pi, x) in probes.iter().enumerate() {
        let v = basin_probe_indexed(sys, x, &ref_index, budget)?;
        if v.verdict != Verdict::Attracted {
            continue;
        }
        summary.attracted += 1;
        for (mi, m) in sys.maps.iter().enumerate() {
            let y = apply_map(&sys.space, m, x)?;
            let image = basin_probe_indexed(sys, &y, &ref_index, budget)?;
            summary.images_checked += 1;
            if image.verdict != Verdict::Attracted {
                summary.violations.push(InvarianceViolation {
                    probe: pi,
                    map: mi,
                    image,
                });
            }
        }
    }
    Ok(summary)
}

/// `d_H(W^k(s0), reference)` for `k = 1..=k_max`, iterating with decimation
/// at `eps`. Used where the limit set is known but not a strict attractor
/// (or not known to be one).
pub fn reference_trajectory(
    sys: &IfsSystem,
    s0: &PointCloud,
    reference: &PointCloud,
    k_max: usize,
    eps: f64,
    tol: f64,
    reference_descriptor: &str,
) -> Result<ConvergenceReport> {
    check_tol(tol)?;
    let ref_index = CloudIndex::new(reference);
    let mut s = decimate(s0, eps)?;
    let mut ladder = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        s = decimate(&hutchinson(sys, &s)?, eps)?;
        let d = ref_index
            .directed_from(&s)
            .max(CloudIndex::new(&s).directed_from(reference));
        ladder.push(LadderEntry { k, d_h: d });
    }
    let converged = ladder.last().is_some_and(|e| e.d_h <= tol);
    Ok(ConvergenceReport {
        ladder,
        reference_descriptor: reference_descriptor.to_string(),
        converged,
        tol,
    })
}

/// `‖w^k(x)‖` for the diagonal sequence map, by iteration and in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HilbertNorms {
    pub iterated: f64,
    pub closed_form: f64,
}

/// `(1 − 1/(i+1))^k`, evaluated as `exp(k·ln(1 − 1/(i+1)))`.
pub fn hilbert_closed_factor(i: usize, k: usize) -> f64 {
    (k as f64 * (-1.0 / (i as f64 + 1.0)).ln_1p()).exp()
}

/// Norm of `w^k(x)` on the sequence space of truncation `d`.
pub fn hilbert_tail_norms(d: usize, x: &SpacePoint, k: usize) -> Result<HilbertNorms> {
    let space = SpaceModel::sequence(d)?;
    let mut y = canonicalize(&space, x.coords())?;
    let w = MapSpec::builtin(Builtin::HilbertDiagonal);
    for _ in 0..k {
        y = apply_map(&space, &w, &y)?;
    }
    let iterated = norm(y.coords());
    let closed: Vec<f64> = x
        .coords()
        .iter()
        .enumerate()
        .map(|(i, c)| hilbert_closed_factor(i + 1, k) * c)
        .collect();
    Ok(HilbertNorms {
        iterated,
        closed_form: norm(&closed),
    })
}

/// `‖w^k(r·e_k)‖`, which equals `(1 − 1/(k+1))^k·r` and tends to `r/e`.
pub fn hilbert_moving_basis(d: usize, k: usize, r: f64) -> Result<HilbertNorms> {
    if k == 0 || k > d {
        return Err(Error::input(format!(
            "moving-basis check needs 1 <= k <= d, got k={k}, d={d}"
        )));
    }
    let mut coords = vec![0.0; d];
    coords[k - 1] = r;
    let x = canonicalize(&SpaceModel::sequence(d)?, &coords)?;
    hilbert_tail_norms(d, &x, k)
}

/// The smallest `k ≤ k_max` with `‖w^k(x)‖ ≤ threshold`, iterating the map.
pub fn hilbert_decay_step(x: &SpacePoint, threshold: f64, k_max: usize) -> Result<Option<usize>> {
    let space = SpaceModel::sequence(x.len())?;
    let w = MapSpec::builtin(Builtin::HilbertDiagonal);
    let mut y = canonicalize(&space, x.coords())?;
    for k in 0..=k_max {
        if norm(y.coords()) <= threshold {
            return Ok(Some(k));
        }
        y = apply_map(&space, &w, &y)?;
    }
    Ok(None)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}
