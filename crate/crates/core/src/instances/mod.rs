//! Experiment instances, their formulations, metrics and file formats.

pub mod denoising;
pub mod export;
pub mod formulations;
pub mod metrics;
pub mod portfolio;

pub use denoising::{generate_denoising, DenoisingInstance, DenoisingOverrides};
pub use export::{export, export_json, export_lp, export_mps, import_json, ExportFormat};
pub use formulations::{build_basic, build_rankone, build_ranktwo, denoising_least_squares, DenoisingFormulation};
pub use metrics::{compute_metrics, MetricInputs, MetricsReport};
pub use portfolio::{build_portfolio_natural, build_portfolio_strengthened, PortfolioInstance};
