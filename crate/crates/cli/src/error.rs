use std::path::PathBuf;

use pentamol::hamiltonian::HamiltonianError;
use pentamol::spectra::SpectraError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{stage}: {source}")]
    Hamiltonian { stage: String, source: HamiltonianError },
    #[error("{stage}: {source}")]
    Spectra { stage: String, source: SpectraError },
}

impl CliError {
    pub fn hamiltonian(stage: impl Into<String>) -> impl FnOnce(HamiltonianError) -> Self {
        let stage = stage.into();
        move |source| CliError::Hamiltonian { stage, source }
    }

    pub fn spectra(stage: impl Into<String>) -> impl FnOnce(SpectraError) -> Self {
        let stage = stage.into();
        move |source| CliError::Spectra { stage, source }
    }

    /// 2 configuration, 3 solver failure, 4 dipole-dipole validity.
    pub fn exit_code(&self) -> i32 {
        fn from_h(e: &HamiltonianError) -> i32 {
            match e {
                HamiltonianError::Validity { .. } => 4,
                HamiltonianError::Config(_) | HamiltonianError::Rotor(_) => 2,
                _ => 3,
            }
        }
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } => 3,
            CliError::Hamiltonian { source, .. } => from_h(source),
            CliError::Spectra { source, .. } => match source {
                SpectraError::Plan(_) => 2,
                SpectraError::AtRadius { source, .. } | SpectraError::Hamiltonian(source) => from_h(source),
                _ => 3,
            },
        }
    }
}
