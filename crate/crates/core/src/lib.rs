// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filmstats;
pub mod io;
pub mod crystal;
pub mod lsq;
pub mod mcia;
pub mod par;
pub mod profiles;
pub mod spectra;
pub mod vacancysim;
pub mod voigt;
pub mod xrdfit;

pub use error::{Error, Result};
