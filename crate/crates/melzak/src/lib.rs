//! File formats and the command-line tool on top of `melzak-core`.

pub mod cli;
pub mod off;
pub mod par;
pub mod report;
pub mod sig;
