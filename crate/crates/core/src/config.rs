//! TOML configuration: custom systems and run settings.
//!
//! A system file:
//!
//! ```toml
//! name = "doubling"
//!
//! [space]
//! kind = "euclidean"
//! dim = 1
//!
//! [[maps]]
//! kind = "affine"
//! matrix = [[2.0]]     # row-major
//! offset = [0.0]
//!
//! [defaults]           # optional, as is every key in it
//! x0 = [1.0]
//! reference = [[0.0]]  # known limit points; the deterministic oracle otherwise
//! ```
//!
//! A run file names a system (gallery name or system-file path) plus the
//! run parameters; see [`RunConfig`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chaos::SelectionModel;
use crate::error::{Error, Result};
use crate::gallery::{self, Defaults, GalleryEntry, ReferenceKind, DEFAULT_LADDER};
use crate::maps::{IfsSystem, MapSpec};
use crate::spaces::SpaceModel;

/// Line numbers of keys and table headers, keyed by dotted path
/// (`eps`, `defaults.x0`, `maps.2`, `maps.2.matrix`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyLines {
    pub source_name: String,
    lines: BTreeMap<String, usize>,
    overridden: BTreeSet<String>,
}

impl KeyLines {
    pub fn scan(text: &str, source_name: &str) -> Self {
        let mut lines = BTreeMap::new();
        let mut section = String::new();
        let mut array_counts: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if let Some(name) = line.strip_prefix("[[").and_then(|l| l.split("]]").next()) {
                let name = name.trim().to_string();
                let n = array_counts.entry(name.clone()).or_insert(0);
                section = format!("{name}.{n}");
                *n += 1;
                lines.insert(section.clone(), ln);
            } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
                section = name.trim().to_string();
                lines.insert(section.clone(), ln);
            } else if let Some((key, _)) = line.split_once('=') {
                let key = key.trim().trim_matches('"');
                if !key.is_empty() && !key.starts_with('#') {
                    let path = if section.is_empty() {
                        key.to_string()
                    } else {
                        format!("{section}.{key}")
                    };
                    lines.entry(path).or_insert(ln);
                }
            }
        }
        KeyLines {
            source_name: source_name.to_string(),
            lines,
            overridden: BTreeSet::new(),
        }
    }

    /// Marks a top-level key as supplied on the command line, so errors about
    /// it no longer point into the file.
    pub fn override_key(&mut self, key: &str) {
        self.overridden.insert(key.to_string());
    }

    /// Line of `path`, or of its nearest enclosing table.
    pub fn line_of(&self, path: &str) -> Option<usize> {
        let top = path.split('.').next().unwrap_or(path);
        if self.overridden.contains(top) {
            return None;
        }
        let mut p = path;
        loop {
            if let Some(l) = self.lines.get(p) {
                return Some(*l);
            }
            p = p.rsplit_once('.')?.0;
        }
    }

    pub fn error(&self, path: &str, message: impl std::fmt::Display) -> Error {
        match self.line_of(path) {
            Some(line) => Error::Parse {
                source_name: self.source_name.clone(),
                line,
                message: format!("{path}: {message}"),
            },
            None => Error::Input(format!("{path}: {message}")),
        }
    }
}

fn toml_error(text: &str, source_name: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(1);
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: e.message().trim().to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<Vec<f64>>>,
}

/// A custom system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub space: SpaceModel,
    pub maps: Vec<MapSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub defaults: SystemDefaults,
}

fn is_default(d: &SystemDefaults) -> bool {
    d == &SystemDefaults::default()
}

fn default_x0(space: &SpaceModel) -> Vec<f64> {
    match space {
        SpaceModel::Projective2 => vec![0.0, 0.0, 1.0],
        s => vec![0.0; s.coord_len()],
    }
}

impl SystemConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let cfg: SystemConfig =
            toml::from_str(text).map_err(|e| toml_error(text, source_name, e))?;
        cfg.check(&KeyLines::scan(text, source_name))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("system config serializes")
    }

    fn check(&self, kl: &KeyLines) -> Result<()> {
        self.space.validate().map_err(|e| kl.error("space", e))?;
        if self.maps.is_empty() {
            return Err(kl.error("maps", "a system needs at least one map"));
        }
        for (i, m) in self.maps.iter().enumerate() {
            m.check_compatible(&self.space)
                .map_err(|e| kl.error(&format!("maps.{i}"), e))?;
        }
        let d = &self.defaults;
        if let Some(x0) = &d.x0 {
            crate::spaces::canonicalize(&self.space, x0).map_err(|e| kl.error("defaults.x0", e))?;
        }
        for (i, p) in d.reference.iter().flatten().enumerate() {
            crate::spaces::canonicalize(&self.space, p)
                .map_err(|e| kl.error("defaults.reference", format!("point {i}: {e}")))?;
        }
        if let Some(l) = &d.ladder {
            check_ladder(l).map_err(|e| kl.error("defaults.ladder", e))?;
        }
        for (key, v) in [("eps", d.eps), ("tol", d.tol), ("oracle_tol", d.oracle_tol)] {
            if let Some(v) = v {
                check_positive(v).map_err(|e| kl.error(&format!("defaults.{key}"), e))?;
            }
        }
        Ok(())
    }

    /// A gallery-style entry with every default filled in.
    pub fn into_entry(self) -> Result<GalleryEntry> {
        let d = self.defaults;
        let eps = d.eps.unwrap_or(1e-3);
        let reference = match d.reference {
            Some(points) => ReferenceKind::Points(points),
            None => ReferenceKind::Oracle,
        };
        Ok(GalleryEntry {
            defaults: Defaults {
                x0: d.x0.unwrap_or_else(|| default_x0(&self.space)),
                n_steps: d.steps.unwrap_or(100_000),
                ladder: d.ladder.unwrap_or_else(|| DEFAULT_LADDER.to_vec()),
                eps,
                tol: d.tol.unwrap_or(0.02),
                oracle_tol: d.oracle_tol.unwrap_or(2.0 * eps),
                max_iter: d.max_iter.unwrap_or(64),
            },
            system: IfsSystem::new(self.name.clone(), self.space, self.maps)?,
            name: self.name,
            reference,
            note: "custom system".to_string(),
        })
    }
}

/// A gallery name, or else a path to a system file.
pub fn resolve_system(name_or_path: &str) -> Result<GalleryEntry> {
    if gallery::NAMES.contains(&name_or_path) {
        return gallery::build(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::input(format!(
            "{name_or_path:?} is neither a gallery system ({}) nor an existing file",
            gallery::NAMES.join(", ")
        )));
    }
    SystemConfig::load(path)?.into_entry()
}

fn check_positive(v: f64) -> std::result::Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("must be a finite positive number, got {v}"))
    }
}

fn check_ladder(l: &[usize]) -> std::result::Result<(), String> {
    if l.is_empty() {
        return Err("ladder is empty".into());
    }
    if l.windows(2).any(|w| w[0] >= w[1]) {
        return Err("ladder must be strictly increasing".into());
    }
    Ok(())
}

/// Where a run's convergence reference comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReferenceChoice {
    None,
    /// The system's own reference (oracle, known limit set, dense sample).
    Oracle,
    /// A second orbit under another seed.
    CrossSeed,
    File(PathBuf),
}

impl std::str::FromStr for ReferenceChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => ReferenceChoice::None,
            "oracle" => ReferenceChoice::Oracle,
            "cross-seed" => ReferenceChoice::CrossSeed,
            "" => return Err(Error::input("empty reference")),
            path => ReferenceChoice::File(PathBuf::from(path)),
        })
    }
}

/// Settings for `run`. Unset fields fall back to the system's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Selection-model descriptor, e.g. `iid:0.5,0.5`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `none`, `oracle`, `cross-seed` or a cloud file path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
}

/// A run with every parameter decided and checked against the system.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub entry: GalleryEntry,
    pub x0: crate::spaces::SpacePoint,
    pub steps: usize,
    pub model: SelectionModel,
    pub seed: u64,
    pub ladder: Vec<usize>,
    pub eps: f64,
    pub tol: f64,
    pub reference: ReferenceChoice,
    pub cross_seed: u64,
    pub trace_out: PathBuf,
    pub report_out: PathBuf,
}

impl RunConfig {
    /// Parses a run file, returning key line numbers for later diagnostics.
    pub fn parse(text: &str, source_name: &str) -> Result<(Self, KeyLines)> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, source_name, e))?;
        Ok((cfg, KeyLines::scan(text, source_name)))
    }

    pub fn load(path: &Path) -> Result<(Self, KeyLines)> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Fills fields unset here from `base`.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            system: if self.system.is_empty() { base.system } else { self.system },
            x0: self.x0.or(base.x0),
            steps: self.steps.or(base.steps),
            model: self.model.or(base.model),
            seed: self.seed.or(base.seed),
            ladder: self.ladder.or(base.ladder),
            eps: self.eps.or(base.eps),
            tol: self.tol.or(base.tol),
            reference: self.reference.or(base.reference),
            cross_seed: self.cross_seed.or(base.cross_seed),
            trace_out: self.trace_out.or(base.trace_out),
            report_out: self.report_out.or(base.report_out),
        }
    }

    /// Validates every field against the referenced system. Errors point at
    /// the offending key's line when `lines` comes from a file.
    pub fn resolve(&self, lines: &KeyLines) -> Result<ResolvedRun> {
        if self.system.is_empty() {
            return Err(lines.error("system", "no system given"));
        }
        let entry = resolve_system(&self.system).map_err(|e| match e {
            Error::Input(m) => lines.error("system", m),
            other => other,
        })?;
        let d = &entry.defaults;
        let x0_raw = self.x0.clone().unwrap_or_else(|| d.x0.clone());
        let x0 = entry.system.point(&x0_raw).map_err(|e| lines.error("x0", e))?;
        let steps = self.steps.unwrap_or(d.n_steps);
        if steps == 0 {
            return Err(lines.error("steps", "must be at least 1"));
        }
        let model = match &self.model {
            Some(desc) => desc.parse::<SelectionModel>().map_err(|e| lines.error("model", e))?,
            None => SelectionModel::uniform(entry.system.len())?,
        };
        if model.arity() != entry.system.len() {
            return Err(lines.error(
                "model",
                format!("covers {} maps, system has {}", model.arity(), entry.system.len()),
            ));
        }
        let ladder = match &self.ladder {
            Some(l) => l.clone(),
            None => d.ladder.iter().copied().filter(|k| *k <= steps).collect(),
        };
        check_ladder(&ladder).map_err(|e| lines.error("ladder", e))?;
        if let Some(&last) = ladder.last() {
            if last > steps {
                return Err(lines.error(
                    "ladder",
                    format!("burn-in {last} exceeds the step count {steps}"),
                ));
            }
        }
        let eps = self.eps.unwrap_or(d.eps);
        check_positive(eps).map_err(|e| lines.error("eps", e))?;
        let tol = self.tol.unwrap_or(d.tol);
        check_positive(tol).map_err(|e| lines.error("tol", e))?;
        let reference = match &self.reference {
            Some(r) => r.parse::<ReferenceChoice>().map_err(|e| lines.error("reference", e))?,
            None => ReferenceChoice::None,
        };
        if let ReferenceChoice::File(p) = &reference {
            if !p.exists() {
                return Err(lines.error("reference", format!("no such file {}", p.display())));
            }
        }
        let seed = self.seed.unwrap_or(0);
        let stem = format!("{}-seed{seed}", entry.name.replace(['/', '\\'], "_"));
        Ok(ResolvedRun {
            x0,
            steps,
            model,
            seed,
            ladder,
            eps,
            tol,
            reference,
            cross_seed: self.cross_seed.unwrap_or(seed.wrapping_add(1)),
            trace_out: self.trace_out.clone().unwrap_or_else(|| format!("{stem}.trace").into()),
            report_out: self.report_out.clone().unwrap_or_else(|| format!("{stem}.report").into()),
            entry,
        })
    }
}
