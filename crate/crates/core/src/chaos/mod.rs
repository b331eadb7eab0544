//! Multi-indices, Hermite polynomials and the Wick algebra on truncated chaos
//! spaces.

pub mod expansion;
pub mod hermite;
pub mod hvalued;
pub mod multi_index;
pub mod truncation;

pub use expansion::{
    monomial, triple_expectation, wick_coefficient, wick_exp_first_chaos, xi_alpha_eval,
    ChaosExpansion, WickProduct,
};
pub use hermite::{gauss_hermite, hermite, hermite_all, normalized_hermite_all};
pub use hvalued::{malliavin_derivative, HValuedChaos};
pub use multi_index::{ln_factorial, MultiIndex};
pub use truncation::{binomial, IndexTable, Truncation};
