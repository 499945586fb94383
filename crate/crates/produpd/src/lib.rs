//! File formats and command-line front end for `produpd-core`.

pub mod cli;
pub mod formats;
