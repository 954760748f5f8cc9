use acoustoelastic::Error;
use std::fmt;

/// A failed run and the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad config, schema violation or missing input (exit 2).
    Config(String),
    /// Solver or extraction failure (exit 3).
    Solver(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_)
            | Error::Contract(_)
            | Error::Coverage(_)
            | Error::Lookup(_)
            | Error::Schema(_)
            | Error::Io(_)
            | Error::Csv(_) => Failure::Config(msg),
            Error::NoConvergence { .. }
            | Error::Instability { .. }
            | Error::Eigen(_)
            | Error::Root(_)
            | Error::Extraction(_) => Failure::Solver(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}
