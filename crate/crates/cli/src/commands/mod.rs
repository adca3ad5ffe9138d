//! One module per subcommand; each is a pure function of the config that
//! writes its artifacts and returns the written paths.

mod blowup;
mod bound;
mod cycles;
mod dulac;
mod isoclines;
mod portrait;

pub use blowup::run as blowup;
pub use bound::run as bound;
pub use cycles::run as cycles;
pub use dulac::run as dulac;
pub use isoclines::run as isoclines;
pub use portrait::run as portrait;

use slowfast_core::{Cpx, Eps};

use crate::output::{CliError, CliResult};

pub(crate) fn eps(e: f64) -> CliResult<Eps> {
    Eps::new(e).map_err(CliError::Numeric)
}

pub(crate) fn xy(p: Cpx) -> (f64, f64) {
    (p.re, p.im)
}

pub(crate) const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
