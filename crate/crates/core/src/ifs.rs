//! The Hutchinson operator on finite clouds and the deterministic attractor
//! oracle built from it.

use rayon::prelude::*;

use crate::analysis::{ConvergenceReport, LadderEntry};
use crate::error::{Error, Result};
use crate::maps::IfsSystem;
use crate::sets::{decimate, hausdorff, PointCloud};

/// Number of consecutive sub-tolerance steps that count as convergence.
pub const CAUCHY_WINDOW: usize = 3;

/// `W(S) = ∪ᵢ wᵢ(S)`, deduplicated at exact canonical equality.
pub fn hutchinson(sys: &IfsSystem, s: &PointCloud) -> Result<PointCloud> {
    if s.space() != &sys.space {
        return Err(Error::input(format!(
            "cloud lives in {} but the system acts on {}",
            s.space(),
            sys.space
        )));
    }
    let images = s
        .points()
        .par_iter()
        .flat_map_iter(|p| (0..sys.len()).map(move |i| sys.apply(i, p)))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(sys.space, images, None)
}

/// Alternates `hutchinson` and `decimate` `k` times, starting from
/// `decimate(s0, eps)`.
///
/// Each snap moves points by at most `eps·√d/2`, so the result is within
/// `k·eps·√d/2` of the exact `W^k(s0)` for nonexpansive maps.
pub fn iterate_hutchinson(
    sys: &IfsSystem,
    s0: &PointCloud,
    k: usize,
    eps: f64,
) -> Result<PointCloud> {
    let mut s = decimate(s0, eps)?;
    for _ in 0..k {
        s = decimate(&hutchinson(sys, &s)?, eps)?;
    }
    Ok(s)
}

/// Iterates the Hutchinson operator until successive iterates agree to
/// within `tol` for [`CAUCHY_WINDOW`] consecutive steps, or `max_iter` runs
/// out.
///
/// The report's ladder holds `(k, d_H(W^k, W^(k-1)))` for every step taken.
/// Running out of iterations yields `converged = false`, not an error.
pub fn deterministic_attractor(
    sys: &IfsSystem,
    s0: &PointCloud,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(PointCloud, ConvergenceReport)> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::input("max_iter must be at least 1"));
    }
    let mut prev = decimate(s0, eps)?;
    let mut ladder = Vec::new();
    let mut streak = 0;
    let mut converged = false;
    for k in 1..=max_iter {
        let next = decimate(&hutchinson(sys, &prev)?, eps)?;
        let d = hausdorff(&next, &prev)?;
        ladder.push(LadderEntry { k, d_h: d });
        prev = next;
        streak = if d <= tol { streak + 1 } else { 0 };
        if streak >= CAUCHY_WINDOW {
            converged = true;
            break;
        }
    }
    let report = ConvergenceReport {
        ladder,
        reference_descriptor: format!(
            "successive-iterates system={} eps={eps} window={CAUCHY_WINDOW}",
            sys.name
        ),
        converged,
        tol,
    };
    Ok((prev, report))
}
