//! Discrete noise-adding mechanisms on the lattice `Z_Δ`: construction,
//! differential-privacy certification, and utility-optimal noise synthesis
//! through a linear program.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod lp;
pub mod mechanisms;
pub mod optimizer;
pub mod privacy;

pub use error::{Error, Result};
pub use grid::{
    cdf, convolve, discretize_density, empirical_pmf, lattice_steps, sample, wasserstein_w0, DiscreteCdf, DiscretePmf,
    Grid, PmfSampler, DEFAULT_TAU,
};
pub use mechanisms::{
    calibrate, exponential_noise, gaussian_noise, input_distribution, laplacian_noise, staircase_noise, uniform_noise,
    CalibrationFamily, Family, InputKind, MechanismSpec,
};
pub use privacy::{
    audit, closed_form_privacy, epsilon_from_cb, ratio_sup, split_epsilon_delta, AdjacencySpec, AuditOptions,
    AuditSubject, Exterior, PrivacyReport, RatioSup, Verdict,
};
