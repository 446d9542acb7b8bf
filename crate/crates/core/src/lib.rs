//! Exact q-multiple zeta values of level N.
//!
//! The crate computes the twisted multiple divisor sums
//! U_{k⃗;c⃗;N}(q) = Σ σ_{k⃗,c⃗}(n) qⁿ with coefficients in Q(ζ_N), the
//! quasi-shuffle algebra they satisfy, symmetric traceforms, and a harness
//! that checks explicit q-series identities coefficient by coefficient.
//! No floating point is used anywhere.
//!
//! ```
//! use qmzv::{u_series, MDIndex, CycNum};
//!
//! let idx: MDIndex = "1;0;1".parse().unwrap();
//! let s = u_series(&idx, 6);
//! assert_eq!(s.coeff(4), CycNum::from_int(1, 7));
//! ```

pub mod classical;
pub mod cyclotomic;
pub mod divisor_sums;
pub mod error;
pub mod harness;
mod kernel;
pub mod qseries;
pub mod quasi_shuffle;
pub mod rat;

pub use cyclotomic::{zeta_power, CycNum};
pub use divisor_sums::{sigma_twisted, u_series, MDIndex};
pub use error::{Error, Result};
pub use harness::{verify, verify_all, IdentityReport, Status};
pub use qseries::{DMode, QSeries};
pub use quasi_shuffle::{bracket, qshuffle, Letter, LinComb, Word};
pub use rat::Rat;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/arithmetic.md")]
    pub mod arithmetic {}
    #[doc = include_str!("../../../book/src/divisor-sums.md")]
    pub mod divisor_sums {}
    #[doc = include_str!("../../../book/src/quasi-shuffle.md")]
    pub mod quasi_shuffle {}
    #[doc = include_str!("../../../book/src/identities.md")]
    pub mod identities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
