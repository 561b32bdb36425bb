//! Bench scripts: parsing, execution and output files.

pub mod output;
pub mod run;
pub mod script;

pub use output::{encode_pgm, encode_trajectory_csv, write_image, write_pgm, write_trajectory_csv};
pub use run::{execute, run, RunError, RunOptions, RunOutcome, RunReport};
pub use script::{parse, print, BenchScript, ParseError, ParseErrorKind};
