pub mod config;
pub mod error;
pub mod filtering;
pub mod generate;
pub mod instance;
pub mod kcenter;
pub mod knapcenter;
pub mod lp;
pub mod matcenter;
pub mod matroid;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod sampler;

pub use error::{Error, Result};
pub use instance::{Constraint, Instance, Radius, ValidationReport};
pub use matroid::{FaceDescription, Mask, Matroid, MatroidSpec};
pub use rational::Rational;
pub use generate::{generate_instance, GenParams, MetricKind};
pub use kcenter::{solve_frkcenter, solve_rkcenter, CenterSolution};
pub use knapcenter::{
    sample_basic_frknapcenter, sample_frknapcenter_eps_budget, sample_frknapcenter_exact_budget, solve_rknapcenter,
};
pub use matcenter::{pseudo_round, sample_frmatcenter_exact, solve_rmatcenter};
pub use oracle::{exact_lottery_lp, exact_optimal_radius, monte_carlo_certify, peel_us, LotteryCertificate};
pub use report::Report;
pub use sampler::{CenterSampler, DrawOutcome, Guarantee};
