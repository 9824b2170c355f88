//! Univariate load forecasting with LSTM and bidirectional LSTM networks.
//!
//! The crate covers the whole experimental loop: reading and resampling
//! metered load series ([`series_io`]), scaling and windowing
//! ([`preprocess`]), recurrent models trained by backpropagation through
//! time ([`rnn`]), forecast metrics and autocorrelation ([`metrics`]),
//! expanding-window cross-validation ([`tscv`]), and rank-based comparison of
//! models across datasets ([`stats`]).

pub mod error;
pub mod metrics;
pub mod preprocess;
pub mod rnn;
pub mod series_io;
pub mod stats;
pub mod tscv;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/windows.md")]
    mod windows {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/tscv.md")]
    mod tscv {}
    #[doc = include_str!("../../../book/src/compare.md")]
    mod compare {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
