//! Rank-based model comparison and the special functions behind it.

mod compare;
mod quadrature;
mod range;
mod special;

pub use compare::{
    compare, friedman, friedman_from_mean_ranks, nemenyi, rank_rows, ComparisonResult,
    FriedmanResult, NemenyiResult, ScoreMatrix,
};
pub use quadrature::integrate;
pub use range::{studentized_range_quantile, studentized_range_upper_tail};
pub use special::{chi2_upper_tail, erfc, gamma_p, gamma_q, ln_gamma, normal_cdf, normal_pdf};
