use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] pmsm_core::Error),
}

impl CliError {
    /// 2 for bad input, 4 for parareal non-convergence, 3 for anything
    /// that went wrong while computing.
    pub fn exit_code(&self) -> ExitCode {
        use pmsm_core::Error as E;
        let code = match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::Config(_)
                | E::InvalidSystem(_)
                | E::Parse { .. }
                | E::Unsupported { .. }
                | E::Schedule(_)
                | E::Placement { .. } => 2,
                E::NonConvergence { .. } => 4,
                _ => 3,
            },
        };
        ExitCode::from(code)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
