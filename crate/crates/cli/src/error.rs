use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] globalgate::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the config, 3 for numerical
    /// failures, 1 otherwise (I/O and internal errors).
    pub fn exit_code(&self) -> u8 {
        use globalgate::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Numerical(_)) => 3,
            CliError::Core(E::Argument(_) | E::Validation(_) | E::Size(_) | E::Unsupported(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
