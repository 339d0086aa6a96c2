//! Proper scoring rules for probabilistic forecasts.
//!
//! The crate evaluates scores across forecast representations (categorical, ensemble,
//! parametric and density oracles), fits parametric models by minimum-score
//! estimation, decomposes mean scores, and checks the defining properties of the
//! rules numerically.
//!
//! ```
//! use propscore::{score, Forecast, Observation, ScoringRuleSpec};
//!
//! let rule: ScoringRuleSpec = "crps:fair".parse().unwrap();
//! let f = Forecast::ensemble(&[0.0, 1.0]).unwrap();
//! let s = score(&rule, &f, &Observation::Scalar(2.0)).unwrap();
//! assert_eq!(s.get(), 1.0);
//! ```

// `!(x > 0.0)` guards reject NaN on purpose; index loops read better in matrix code
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod forecast;
pub mod kernel;
pub mod lab;
pub mod linalg;
pub mod local;
pub mod multivariate;
pub mod quadrature;
pub mod rule;
pub mod univariate;
pub mod value;

pub use error::{Error, Result};
pub use forecast::{
    Categorical, DensityOracle, Ensemble, Forecast, MvNormal, Observation, Parametric,
};
pub use rule::{score, ScoringRuleSpec};
pub use univariate::EnsembleVariant;
pub use value::{ExtReal, Method, ScoreFlag, ScoreValue};

/// Guide chapters compiled as doc-tests so their snippets track the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scoring-rules.md")]
    mod scoring_rules {}
    #[doc = include_str!("../../../book/src/ensembles-crps.md")]
    mod ensembles_crps {}
    #[doc = include_str!("../../../book/src/kernel-scores.md")]
    mod kernel_scores {}
    #[doc = include_str!("../../../book/src/local-scores.md")]
    mod local_scores {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
