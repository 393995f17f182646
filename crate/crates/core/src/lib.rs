//! Interval translation maps on three intervals, their Gauss-map induction,
//! symbolic coding, dimension bounds and unique-ergodicity diagnostics.

pub mod dimension;
pub mod ergodicity;
pub mod error;
pub mod gauss;
pub mod interval_set;
pub mod itm;
pub mod kseq;
pub mod matrix;
pub mod numeric;
pub mod render;
pub mod subshift;
pub mod survey;

pub use error::{ItmError, Result};
pub use numeric::{BigFloat, Mode, Scalar};
