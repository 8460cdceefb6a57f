//! File formats, the acceptance suite and the `qcrb` command line, on top
//! of the numerics in `qcrb-core`.

pub mod cli;
pub mod format;
pub mod verify;
