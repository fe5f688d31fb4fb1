//! File formats, configuration, the pipeline driver and the benchmark
//! harness around [`dpdof_core`].
//!
//! The `dpdof` binary exposes these as the `render`, `calibrate`, `synth`,
//! `noise-bank` and `bench` subcommands.

pub mod bench;
pub mod calibrate;
pub mod config;
mod error;
pub mod formats;
pub mod io;
pub mod pipeline;
pub mod scene;

pub use config::Config;
pub use error::{Error, Result};
pub use pipeline::{render, run, Frame, Mode, PipelineConfig, Rendered, RunReport, Stages};
