//! Monte Carlo estimators and hypothesis tests built on the samplers.

pub mod atoms;
pub mod bessel;
pub mod calibrate;
pub mod ks;
pub mod maxima;
pub mod moments;
pub mod pd;
pub mod rooted;
pub mod spectrum;
pub mod spine;
pub mod star;
pub mod stats;

pub use atoms::{atom_scan, AtomCurve, AtomPoint};
pub use bessel::{bessel3_cdf, bessel3_density};
pub use calibrate::{calibrate_lambda, laplace_estimate, CalibrationResult};
pub use ks::{anderson_darling_two_sample, kolmogorov_sf, ks_two_sample, weighted_ks, DistTestReport, TestKind};
pub use maxima::{max_statistic, max_statistics, recentering, MaxRow};
pub use moments::{moment_scan, MomentRow, MomentTable};
pub use pd::{pd_reference_overlap, poisson_dirichlet_stats, PdReport};
pub use rooted::{rooted_derivative_mean, RootedMeanReport};
pub use spectrum::{estimate_spectrum, lognormal_spectrum, SpectrumEstimate};
pub use spine::{spine_bessel_test, SpineMode, SpineReport};
pub use star::{null_uniformity, star_equation_test, NullUniformity, RhsForm, StarKind, StarReport, StarSetup};
pub use stats::{mean_se, median, quantile, MeanEstimate};
