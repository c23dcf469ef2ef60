//! Verification engine: Monte Carlo estimators, exact oracles and the
//! acceptance suites built from them.

pub mod dynamics;
pub mod exact;
pub mod inclusion;
pub mod report;
pub mod stats;
pub mod suites;

pub use dynamics::{batch_sizes, size_dynamics, BatchLaw, DynamicsConfig, SizeTrace};
pub use exact::{downsample_oracle, enumerate_downsample, parse_rational, ratio_f64, ExactAppearance, Rational};
pub use inclusion::{check_ratio, estimate_inclusion, InclusionEstimate, PairCheck, RatioReport, SamplerFactory};
pub use report::{to_jsonl, CheckReport};
pub use stats::{chi_square_gof, chi_square_homogeneity, expected_shortfall, ks_uniform, ChiSquare};
pub use suites::{run_suite, Artifact, SuiteOutput, SUITES};
