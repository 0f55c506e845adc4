pub mod evaluate;
pub mod fuse;
pub mod grid;
pub mod map;
pub mod split;
pub mod stats;

use std::fmt::Display;

use clap::ValueEnum;
use roadfuse_core::FusionMode;

/// Fusion mode as a CLI flag value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nms,
    Average,
}

impl ModeArg {
    pub fn to_core(self) -> FusionMode {
        match self {
            ModeArg::Nms => FusionMode::Nms,
            ModeArg::Average => FusionMode::Average,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeArg::Nms => "nms",
            ModeArg::Average => "average",
        }
    }
}

/// Runs `work` on a dedicated rayon pool of `jobs` threads, or on the
/// default global pool when `jobs` is 0.
pub fn with_jobs<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool")
            .install(work)
    }
}

/// Accumulates the fully resolved argument vector recorded in a run config.
pub struct ResolvedArgs(Vec<String>);

impl ResolvedArgs {
    pub fn new(command: &str) -> Self {
        Self(vec![command.to_string()])
    }

    pub fn flag(mut self, name: &str, value: impl Display) -> Self {
        self.0.push(name.to_string());
        self.0.push(value.to_string());
        self
    }

    pub fn switch(mut self, name: &str, on: bool) -> Self {
        if on {
            self.0.push(name.to_string());
        }
        self
    }

    pub fn finish(self) -> Vec<String> {
        self.0
    }
}

/// Comma-joined axis values for a single repeatable flag.
pub fn join_axis(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
