//! Iterated function systems on metric spaces: deterministic Hutchinson
//! iteration, the chaos game, Hausdorff-distance diagnostics, basin probes
//! and grayscale rendering.

pub mod analysis;
pub mod chaos;
pub mod cli;
pub mod config;
pub mod error;
pub mod gallery;
pub mod ifs;
pub mod maps;
pub mod render;
pub mod sets;
pub mod spaces;

pub use analysis::{
    basin_invariance_check, basin_probe, semiattractor_orbit_check, tail_convergence,
    BasinVerdict, ConvergenceReport, LadderEntry, ProbeBudget, Verdict,
};
pub use chaos::{run_chaos_game, tail_cloud, OrbitRecord, SelectionKind, SelectionModel, Trace};
pub use error::{Error, Result};
pub use gallery::GalleryEntry;
pub use ifs::{deterministic_attractor, hutchinson, iterate_hutchinson};
pub use maps::{IfsSystem, MapSpec};
pub use render::{encode_pgm, rasterize, write_pgm, ImageGrid, Viewport};
pub use sets::{decimate, hausdorff, union, PointCloud};
pub use spaces::{canonicalize, distance, SpaceModel, SpacePoint};
