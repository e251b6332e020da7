//! Random orbits ("chaos game") under pluggable map-selection models.
//!
//! Every model guarantees a minorization floor `p`: at each step and
//! whatever happened before, each map is drawn with probability at least
//! `p`. The `decaying` model is the exception; it lets the floor shrink
//! logarithmically and is marked experimental in its output.

use std::f64::consts::E;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::maps::IfsSystem;
use crate::sets::{parse_coords, push_coords, PointCloud};
use crate::spaces::{canonicalize, SpaceModel, SpacePoint};

/// Identifier of the generator and the float conversion used by
/// [`ChaosRng`]. Recorded in every trace.
pub const RNG_ALGORITHM: &str = "chacha12-seed_from_u64-u53";

/// Orbits whose coordinates exceed this magnitude are reported as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Tolerance for probability vectors summing to one.
const SUM_TOL: f64 = 1e-12;

pub const DECAYING_WARNING: &str =
    "decaying selection: minorization floor shrinks over time; convergence is reported, not guaranteed";

/// Seeded generator: ChaCha12 keyed by `seed_from_u64`, uniform floats built
/// from the top 53 bits of each `u64` draw.
#[derive(Debug, Clone)]
pub struct ChaosRng(ChaCha12Rng);

impl ChaosRng {
    pub fn new(seed: u64) -> Self {
        ChaosRng(ChaCha12Rng::seed_from_u64(seed))
    }

    /// Uniform draw from `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionKind {
    Iid { weights: Vec<f64> },
    /// Weight vectors applied round-robin by step index.
    Cyclic { schedules: Vec<Vec<f64>> },
    /// Row-stochastic transition matrix over map indices; step 1 is uniform.
    Markov { transition: Vec<Vec<f64>> },
    /// Base weights mixed with the uniform vector so that the step-`n`
    /// minimum weight is at least `max(floor, 1/(N·ln(n + e)))`.
    Decaying { base: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionModel {
    pub kind: SelectionKind,
    /// Minorization constant `p`.
    pub floor: f64,
}

fn check_distribution(w: &[f64], floor: f64, what: &str) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::input(format!("{what} has negative or non-finite weights")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::input(format!("{what} sums to {sum}, not 1")));
    }
    if let Some(low) = w.iter().find(|x| **x < floor) {
        return Err(Error::input(format!(
            "{what} has weight {low} below the floor {floor}"
        )));
    }
    Ok(())
}

impl SelectionModel {
    pub fn new(kind: SelectionKind, floor: f64) -> Result<Self> {
        let m = SelectionModel { kind, floor };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("selection over zero maps"));
        }
        let w = 1.0 / n as f64;
        SelectionModel::new(SelectionKind::Iid { weights: vec![w; n] }, w)
    }

    /// Number of maps the model selects among.
    pub fn arity(&self) -> usize {
        match &self.kind {
            SelectionKind::Iid { weights } => weights.len(),
            SelectionKind::Cyclic { schedules } => schedules.first().map_or(0, Vec::len),
            SelectionKind::Markov { transition } => transition.len(),
            SelectionKind::Decaying { base } => base.len(),
        }
    }

    pub fn is_experimental(&self) -> bool {
        matches!(self.kind, SelectionKind::Decaying { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.arity();
        if n == 0 {
            return Err(Error::input("selection model needs at least one map"));
        }
        let floor = self.floor;
        match &self.kind {
            SelectionKind::Iid { weights } => {
                if !(floor > 0.0) {
                    return Err(Error::input("minorization floor must be > 0"));
                }
                check_distribution(weights, floor, "iid weights")
            }
            SelectionKind::Cyclic { schedules } => {
                if !(floor > 0.0) {
                    return Err(Error::input("minorization floor must be > 0"));
                }
                for (i, w) in schedules.iter().enumerate() {
                    if w.len() != n {
                        return Err(Error::input("cyclic schedules differ in length"));
                    }
                    check_distribution(w, floor, &format!("cyclic schedule {i}"))?;
                }
                Ok(())
            }
            SelectionKind::Markov { transition } => {
                if !(floor > 0.0) {
                    return Err(Error::input("minorization floor must be > 0"));
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::input("markov matrix must be square"));
                    }
                    check_distribution(row, floor, &format!("markov row {i}"))?;
                }
                Ok(())
            }
            SelectionKind::Decaying { base } => {
                if !(floor >= 0.0) || floor > 1.0 / n as f64 {
                    return Err(Error::input("decaying floor must lie in [0, 1/N]"));
                }
                check_distribution(base, 0.0, "decaying base weights")
            }
        }
    }

    /// The distribution of `σ_step` given the previous index.
    pub fn step_weights(&self, step: usize, prev: Option<usize>) -> Vec<f64> {
        let n = self.arity();
        match &self.kind {
            SelectionKind::Iid { weights } => weights.clone(),
            SelectionKind::Cyclic { schedules } => {
                schedules[(step.max(1) - 1) % schedules.len()].clone()
            }
            SelectionKind::Markov { transition } => match prev {
                Some(i) => transition[i].clone(),
                None => vec![1.0 / n as f64; n],
            },
            SelectionKind::Decaying { base } => {
                let uniform = 1.0 / n as f64;
                let target = self.floor.max(uniform / (step as f64 + E).ln());
                let low = base.iter().copied().fold(f64::INFINITY, f64::min);
                if low >= target || low >= uniform {
                    return base.clone();
                }
                let mix = ((target - low) / (uniform - low)).clamp(0.0, 1.0);
                base.iter().map(|w| (1.0 - mix) * w + mix * uniform).collect()
            }
        }
    }
}

/// Inverse-CDF draw over `weights`, accumulating in ascending index order.
fn sample(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the final partial sum
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

/// Draws `σ_step` (steps are 1-based). Consumes exactly one float from `rng`.
pub fn draw_index(
    model: &SelectionModel,
    step: usize,
    prev: Option<usize>,
    rng: &mut ChaosRng,
) -> usize {
    let u = rng.next_f64();
    sample(&model.step_weights(step, prev), u)
}

fn fmt_vec(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn fmt_rows(f: &mut fmt::Formatter<'_>, rows: &[Vec<f64>]) -> fmt::Result {
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            f.write_str("/")?;
        }
        fmt_vec(f, r)?;
    }
    Ok(())
}

/// Descriptor form `<kind>:<rows>@<floor>`, rows separated by `/`, weights
/// by `,`. Example: `cyclic:0.8,0.1,0.1/0.1,0.8,0.1/0.1,0.1,0.8@0.1`.
impl fmt::Display for SelectionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SelectionKind::Iid { weights } => {
                f.write_str("iid:")?;
                fmt_vec(f, weights)?;
            }
            SelectionKind::Cyclic { schedules } => {
                f.write_str("cyclic:")?;
                fmt_rows(f, schedules)?;
            }
            SelectionKind::Markov { transition } => {
                f.write_str("markov:")?;
                fmt_rows(f, transition)?;
            }
            SelectionKind::Decaying { base } => {
                f.write_str("decaying:")?;
                fmt_vec(f, base)?;
            }
        }
        write!(f, "@{}", self.floor)
    }
}

impl FromStr for SelectionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("model {s:?} lacks `<kind>:`")))?;
        let (body, floor) = match rest.rsplit_once('@') {
            Some((b, p)) => (
                b,
                Some(
                    p.parse::<f64>()
                        .map_err(|_| Error::input(format!("bad floor {p:?}")))?,
                ),
            ),
            None => (rest, None),
        };
        let rows: Vec<Vec<f64>> = body
            .split('/')
            .map(|r| {
                r.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::input(format!("bad weight {x:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let min_weight = rows.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let single = |rows: Vec<Vec<f64>>| -> Result<Vec<f64>> {
            let mut it = rows.into_iter();
            match (it.next(), it.next()) {
                (Some(r), None) => Ok(r),
                _ => Err(Error::input(format!("{kind} takes one weight vector"))),
            }
        };
        let (kind, floor) = match kind {
            "iid" => (
                SelectionKind::Iid { weights: single(rows)? },
                floor.unwrap_or(min_weight),
            ),
            "cyclic" => (
                SelectionKind::Cyclic { schedules: rows },
                floor.unwrap_or(min_weight),
            ),
            "markov" => (
                SelectionKind::Markov { transition: rows },
                floor.unwrap_or(min_weight),
            ),
            "decaying" => (
                SelectionKind::Decaying { base: single(rows)? },
                floor.unwrap_or(0.0),
            ),
            other => return Err(Error::input(format!("unknown selection model {other:?}"))),
        };
        SelectionModel::new(kind, floor)
    }
}

/// A complete chaos-game run: enough to replay it bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub system: IfsSystem,
    pub x0: SpacePoint,
    pub model: SelectionModel,
    pub rng_seed: u64,
    /// `σ_1 … σ_n`, 0-based map indices.
    pub indices: Vec<usize>,
    /// `x_0 … x_n`.
    pub points: Vec<SpacePoint>,
}

/// Runs `n_steps` of the chaos game from `x0`.
///
/// Fails with [`Error::Diverged`] if a coordinate exceeds
/// [`DIVERGENCE_GUARD`] or becomes non-finite.
pub fn run_chaos_game(
    sys: &IfsSystem,
    x0: &SpacePoint,
    n_steps: usize,
    model: &SelectionModel,
    rng_seed: u64,
) -> Result<OrbitRecord> {
    sys.validate()?;
    model.validate()?;
    if model.arity() != sys.len() {
        return Err(Error::input(format!(
            "selection model covers {} maps, system has {}",
            model.arity(),
            sys.len()
        )));
    }
    let x0 = canonicalize(&sys.space, x0.coords())?;
    let mut rng = ChaosRng::new(rng_seed);
    let mut indices = Vec::with_capacity(n_steps);
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(x0.clone());
    let mut prev = None;
    let mut x = x0.clone();
    for step in 1..=n_steps {
        let i = draw_index(model, step, prev, &mut rng);
        x = sys.apply(i, &x).map_err(|e| Error::Diverged {
            step,
            message: e.to_string(),
        })?;
        if x.max_abs() > DIVERGENCE_GUARD {
            return Err(Error::Diverged {
                step,
                message: format!("|x| exceeded {DIVERGENCE_GUARD:e}"),
            });
        }
        indices.push(i);
        points.push(x.clone());
        prev = Some(i);
    }
    Ok(OrbitRecord {
        system: sys.clone(),
        x0,
        model: model.clone(),
        rng_seed,
        indices,
        points,
    })
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Recomputes the orbit from `x0` and the recorded indices.
    pub fn replay(&self) -> Result<Vec<SpacePoint>> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut x = self.x0.clone();
        out.push(x.clone());
        for &i in &self.indices {
            x = self.system.apply(i, &x)?;
            out.push(x.clone());
        }
        Ok(out)
    }

    /// Line-oriented trace: `key value` header lines, then one line per step
    /// `k σ_k coord…` (step 0 carries `-` for σ).
    pub fn to_trace(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 32 + 256);
        let _ = writeln!(out, "# chaoscope orbit trace");
        let _ = writeln!(out, "system {}", self.system.name);
        let _ = writeln!(out, "space {}", self.system.space);
        let _ = writeln!(out, "maps {}", self.system.len());
        let _ = writeln!(out, "seed {}", self.rng_seed);
        let _ = writeln!(out, "rng {RNG_ALGORITHM}");
        let _ = writeln!(out, "model {}", self.model);
        if self.model.is_experimental() {
            let _ = writeln!(out, "warning {DECAYING_WARNING}");
        }
        let _ = writeln!(out, "steps {}", self.indices.len());
        for (k, p) in self.points.iter().enumerate() {
            if k == 0 {
                out.push_str("0 - ");
            } else {
                let _ = write!(out, "{k} {} ", self.indices[k - 1]);
            }
            push_coords(&mut out, p.coords());
            out.push('\n');
        }
        out
    }
}

/// A parsed trace. The system itself is identified only by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub system_name: String,
    pub space: SpaceModel,
    pub n_maps: usize,
    pub seed: u64,
    pub rng: String,
    pub model: SelectionModel,
    pub indices: Vec<usize>,
    pub points: Vec<SpacePoint>,
}

impl Trace {
    pub fn parse(text: &str, source_name: &str) -> Result<Trace> {
        let perr = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut system_name = None;
        let mut space = None;
        let mut n_maps = None;
        let mut seed = None;
        let mut rng = None;
        let mut model = None;
        let mut steps: Option<usize> = None;
        let mut indices = Vec::new();
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            let parse_num = |v: &str| v.trim().parse::<u64>().map_err(|_| perr(ln, format!("bad number {v:?}")));
            match head {
                "system" => system_name = Some(rest.trim().to_string()),
                "space" => space = Some(rest.parse::<SpaceModel>().map_err(|e| perr(ln, e.to_string()))?),
                "maps" => n_maps = Some(parse_num(rest)? as usize),
                "seed" => seed = Some(parse_num(rest)?),
                "rng" => rng = Some(rest.trim().to_string()),
                "model" => {
                    model = Some(rest.parse::<SelectionModel>().map_err(|e| perr(ln, e.to_string()))?)
                }
                "warning" => {}
                "steps" => steps = Some(parse_num(rest)? as usize),
                _ => {
                    let space = space.ok_or_else(|| perr(ln, "step line before `space` header".into()))?;
                    let mut toks = line.split_whitespace();
                    let k: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| perr(ln, "bad step number".into()))?;
                    if k != points.len() {
                        return Err(perr(ln, format!("expected step {}, found {k}", points.len())));
                    }
                    let sigma = toks.next().ok_or_else(|| perr(ln, "missing map index".into()))?;
                    if k == 0 {
                        if sigma != "-" {
                            return Err(perr(ln, "step 0 must carry `-` as its map index".into()));
                        }
                    } else {
                        indices.push(sigma.parse().map_err(|_| perr(ln, format!("bad map index {sigma:?}")))?);
                    }
                    let rest: Vec<&str> = toks.collect();
                    let coords = parse_coords(&rest.join(" ")).map_err(|m| perr(ln, m))?;
                    points.push(canonicalize(&space, &coords).map_err(|e| perr(ln, e.to_string()))?);
                }
            }
        }
        let missing = |what: &str| perr(1, format!("trace lacks the `{what}` header"));
        let trace = Trace {
            system_name: system_name.ok_or_else(|| missing("system"))?,
            space: space.ok_or_else(|| missing("space"))?,
            n_maps: n_maps.ok_or_else(|| missing("maps"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            rng: rng.ok_or_else(|| missing("rng"))?,
            model: model.ok_or_else(|| missing("model"))?,
            indices,
            points,
        };
        let steps = steps.ok_or_else(|| missing("steps"))?;
        if trace.points.len() != steps + 1 {
            return Err(perr(1, format!("header declares {steps} steps, found {}", trace.points.len().saturating_sub(1))));
        }
        if let Some(bad) = trace.indices.iter().find(|i| **i >= trace.n_maps) {
            return Err(perr(1, format!("map index {bad} out of range for {} maps", trace.n_maps)));
        }
        Ok(trace)
    }

    pub fn tail_cloud(&self, burn_in: usize) -> Result<PointCloud> {
        tail_of(self.space, &self.points, burn_in)
    }
}

fn tail_of(space: SpaceModel, points: &[SpacePoint], burn_in: usize) -> Result<PointCloud> {
    if burn_in >= points.len() {
        return Err(Error::input(format!(
            "burn-in {burn_in} leaves nothing of an orbit with {} points",
            points.len()
        )));
    }
    PointCloud::new(space, points[burn_in..].to_vec(), None)
}

/// The deduplicated cloud `{x_K, …, x_n}`.
pub fn tail_cloud(orbit: &OrbitRecord, burn_in: usize) -> Result<PointCloud> {
    tail_of(orbit.system.space, &orbit.points, burn_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::hutchinson;
    use crate::maps::MapSpec;

    fn sierpinski() -> IfsSystem {
        crate::gallery::build("sierpinski").unwrap().system
    }

    fn halving() -> IfsSystem {
        IfsSystem::new(
            "half",
            SpaceModel::Euclidean { dim: 1 },
            vec![MapSpec::Affine { matrix: vec![vec![0.5]], offset: vec![0.0] }],
        )
        .unwrap()
    }

    fn freq(model: &SelectionModel, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaosRng::new(seed);
        let mut counts = vec![0usize; model.arity()];
        let mut prev = None;
        for step in 1..=n {
            let i = draw_index(model, step, prev, &mut rng);
            counts[i] += 1;
            prev = Some(i);
        }
        counts.iter().map(|c| *c as f64 / n as f64).collect()
    }

    #[test]
    fn iid_uniform_frequency_at_seed_42() {
        let f = freq(&SelectionModel::uniform(2).unwrap(), 100_000, 42);
        assert!((0.497..=0.503).contains(&f[1]), "{f:?}");
    }

    #[test]
    fn cyclic_alternates_schedules() {
        let m: SelectionModel = "cyclic:0.9,0.1/0.1,0.9@0.1".parse().unwrap();
        assert_eq!(m.step_weights(1, None), vec![0.9, 0.1]);
        assert_eq!(m.step_weights(2, Some(0)), vec![0.1, 0.9]);
        assert_eq!(m.step_weights(3, Some(1)), vec![0.9, 0.1]);
        let mut rng = ChaosRng::new(3);
        let mut odd = [0usize; 2];
        let mut even = [0usize; 2];
        for step in 1..=20_000 {
            let i = draw_index(&m, step, None, &mut rng);
            if step % 2 == 1 { odd[i] += 1 } else { even[i] += 1 }
        }
        assert!(odd[0] > 8 * odd[1] / 2 && even[1] > 8 * even[0] / 2);
    }

    #[test]
    fn uniform_markov_matches_iid_uniform() {
        let m: SelectionModel = "markov:0.5,0.5/0.5,0.5@0.5".parse().unwrap();
        let iid = SelectionModel::uniform(2).unwrap();
        let mut a = ChaosRng::new(9);
        let mut b = ChaosRng::new(9);
        let mut prev = None;
        for step in 1..1000 {
            let i = draw_index(&m, step, prev, &mut a);
            assert_eq!(i, draw_index(&iid, step, None, &mut b));
            prev = Some(i);
        }
    }

    #[test]
    fn minorization_floor_observed() {
        let n = 100_000;
        let models = [
            "iid:0.8,0.1,0.1@0.1",
            "cyclic:0.8,0.1,0.1/0.1,0.8,0.1/0.1,0.1,0.8@0.1",
            "markov:0.8,0.1,0.1/0.1,0.8,0.1/0.1,0.1,0.8@0.1",
            "iid:0.5,0.5@0.5",
        ];
        for desc in models {
            let m: SelectionModel = desc.parse().unwrap();
            let p = m.floor;
            let slack = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
            for (i, f) in freq(&m, n, 17).iter().enumerate() {
                assert!(*f >= p - slack, "{desc}: index {i} freq {f}");
            }
        }
    }

    #[test]
    fn model_validation() {
        assert!("iid:0.7,0.2@0.25".parse::<SelectionModel>().is_err());
        assert!("iid:0.7,0.2".parse::<SelectionModel>().is_err());
        assert!("markov:0.5,0.5/1.0,0.0@0.1".parse::<SelectionModel>().is_err());
        assert!("cyclic:0.5,0.5/0.2,0.3,0.5@0.1".parse::<SelectionModel>().is_err());
        assert!("iid:0.5,0.5@0".parse::<SelectionModel>().is_err());
        assert!("spiral:1".parse::<SelectionModel>().is_err());
        assert!("decaying:1,0@0.01".parse::<SelectionModel>().is_ok());
        assert!("decaying:1,0@0.9".parse::<SelectionModel>().is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for desc in [
            "iid:0.3333333333333333,0.3333333333333333,0.3333333333333334@0.1",
            "cyclic:0.8,0.1,0.1/0.1,0.8,0.1/0.1,0.1,0.8@0.1",
            "markov:0.9,0.1/0.2,0.8@0.1",
            "decaying:1,0@0.01",
        ] {
            let m: SelectionModel = desc.parse().unwrap();
            assert_eq!(m.to_string(), desc);
            assert_eq!(m.to_string().parse::<SelectionModel>().unwrap(), m);
        }
    }

    #[test]
    fn decaying_floor_shrinks_but_respects_minimum() {
        let m: SelectionModel = "decaying:1,0@0.01".parse().unwrap();
        let w1 = m.step_weights(1, None);
        let w_late = m.step_weights(1_000_000, None);
        assert!(w1[1] > w_late[1]);
        assert!(w_late[1] >= 0.01 - 1e-15);
        assert!((w_late.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.is_experimental());
    }

    #[test]
    fn halving_orbit_is_deterministic() {
        let sys = halving();
        let x0 = sys.point(&[1.0]).unwrap();
        let orbit = run_chaos_game(&sys, &x0, 10, &SelectionModel::uniform(1).unwrap(), 0).unwrap();
        let want: Vec<f64> = (0..=10).map(|k| 2f64.powi(-k)).collect();
        let got: Vec<f64> = orbit.points.iter().map(|p| p.coords()[0]).collect();
        assert_eq!(got, want);
        assert_eq!(orbit.points.len(), orbit.indices.len() + 1);
    }

    #[test]
    fn sierpinski_orbit_stays_in_triangle() {
        let sys = sierpinski();
        let x0 = sys.point(&[0.0, 0.0]).unwrap();
        let orbit =
            run_chaos_game(&sys, &x0, 100_000, &SelectionModel::uniform(3).unwrap(), 42).unwrap();
        let s3 = 3f64.sqrt();
        for p in &orbit.points {
            let (x, y) = (p.coords()[0], p.coords()[1]);
            assert!(y >= -1e-12);
            assert!(y <= s3 * x + 1e-12);
            assert!(y <= s3 * (1.0 - x) + 1e-12);
        }
    }

    #[test]
    fn same_seed_same_orbit_and_replay() {
        let sys = sierpinski();
        let x0 = sys.point(&[0.3, 0.2]).unwrap();
        let m: SelectionModel = "markov:0.8,0.1,0.1/0.1,0.8,0.1/0.1,0.1,0.8@0.1".parse().unwrap();
        let a = run_chaos_game(&sys, &x0, 5000, &m, 7).unwrap();
        let b = run_chaos_game(&sys, &x0, 5000, &m, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_trace(), b.to_trace());
        assert_eq!(a.replay().unwrap(), a.points);
        let c = run_chaos_game(&sys, &x0, 5000, &m, 8).unwrap();
        assert_ne!(a.indices, c.indices);
    }

    /// Orbit containment `x_n ∈ W^n({x_0})`, by exact enumeration without
    /// decimation.
    #[test]
    fn orbit_points_lie_in_exact_hutchinson_iterates() {
        let sys = sierpinski();
        let x0 = sys.point(&[0.1, 0.7]).unwrap();
        let orbit = run_chaos_game(&sys, &x0, 8, &SelectionModel::uniform(3).unwrap(), 5).unwrap();
        let mut level = PointCloud::singleton(sys.space, x0).unwrap();
        for n in 1..=8 {
            level = hutchinson(&sys, &level).unwrap();
            assert!(level.contains(&orbit.points[n]), "step {n}");
        }
    }

    #[test]
    fn tail_cloud_examples() {
        let sys = sierpinski();
        let x0 = sys.point(&[0.0, 0.0]).unwrap();
        let orbit = run_chaos_game(&sys, &x0, 50, &SelectionModel::uniform(3).unwrap(), 1).unwrap();
        let whole = tail_cloud(&orbit, 0).unwrap();
        assert_eq!(whole, PointCloud::new(sys.space, orbit.points.clone(), None).unwrap());
        assert!(tail_cloud(&orbit, 51).is_err());

        let c = IfsSystem::new(
            "const",
            SpaceModel::Euclidean { dim: 1 },
            vec![MapSpec::Affine { matrix: vec![vec![0.0]], offset: vec![2.5] }],
        )
        .unwrap();
        let orbit = run_chaos_game(&c, &c.point(&[9.0]).unwrap(), 20, &SelectionModel::uniform(1).unwrap(), 0)
            .unwrap();
        let tail = tail_cloud(&orbit, 1).unwrap();
        assert_eq!(tail.len(), 1);
        assert_eq!(tail.points()[0].coords(), &[2.5]);
    }

    #[test]
    fn expanding_orbit_trips_guard() {
        let sys = IfsSystem::new(
            "double",
            SpaceModel::Euclidean { dim: 1 },
            vec![MapSpec::Affine { matrix: vec![vec![2.0]], offset: vec![0.0] }],
        )
        .unwrap();
        let err = run_chaos_game(&sys, &sys.point(&[1.0]).unwrap(), 100, &SelectionModel::uniform(1).unwrap(), 0)
            .unwrap_err();
        assert!(matches!(err, Error::Diverged { step: 40, .. }), "{err}");
    }

    #[test]
    fn trace_round_trip() {
        let sys = crate::gallery::build("projective-bv").unwrap().system;
        let x0 = sys.point(&[1.0, 1.0, 1.0]).unwrap();
        let orbit = run_chaos_game(&sys, &x0, 300, &SelectionModel::uniform(2).unwrap(), 7).unwrap();
        let text = orbit.to_trace();
        let trace = Trace::parse(&text, "mem").unwrap();
        assert_eq!(trace.points, orbit.points);
        assert_eq!(trace.indices, orbit.indices);
        assert_eq!(trace.model, orbit.model);
        assert_eq!(trace.seed, 7);
        assert_eq!(trace.rng, RNG_ALGORITHM);
        assert_eq!(trace.system_name, "projective-bv");
        assert_eq!(trace.tail_cloud(10).unwrap(), tail_cloud(&orbit, 10).unwrap());

        let broken = text.replacen("\n2 ", "\n3 ", 1);
        let err = Trace::parse(&broken, "t.trace").unwrap_err().to_string();
        assert!(err.starts_with("t.trace:"), "{err}");
    }
}
