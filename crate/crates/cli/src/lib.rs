//! Command-line tooling around `degli-core`: WAV and amplitude-file I/O,
//! corpus preparation, configuration, a synthetic speech generator and the
//! subcommands of the `degli` binary.

pub mod ampl;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod synth;
pub mod wav;
