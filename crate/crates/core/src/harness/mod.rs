//! Noise, error metrics, previews, manifests and experiment orchestration.

mod experiment;
mod manifest;
mod metrics;
mod noise;
mod preview;

pub use self::experiment::{
    evaluate, parse_angle, run_experiment, Evaluation, ExperimentConfig, LevelResult, Method, EXPLICIT_GRID,
    NOISE_CONVENTION, PDE_GRID,
};
pub use self::manifest::{error_key, noise_label, RunManifest, MANIFEST_FILE};
pub use self::metrics::{relative_error_spectral, spectral_norm};
pub use self::noise::{add_noise, add_noise_tagged};
pub use self::preview::{render_pgm, write_pgm};
