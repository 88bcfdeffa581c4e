//! Analysis front end: exponent calculator, lemma verifiers, dichotomy and
//! lifespan scans, and deterministic report generation. The `hheat` binary
//! wires these to subcommands; everything here is also usable as a library
//! (the acceptance suite drives it directly).

pub mod config;
pub mod cutoff;
pub mod exponents;
pub mod report;
pub mod scan;
pub mod verify;
