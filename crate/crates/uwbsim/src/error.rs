use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Scenario, mask or argument problem; the message names the key.
    #[error("{0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: uwb_core::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimError::Config(msg.into()))
}

/// Tags a core error with the pipeline stage it came from.
pub(crate) trait AtStage<T> {
    fn at(self, stage: &'static str) -> Result<T>;
}

impl<T> AtStage<T> for uwb_core::Result<T> {
    fn at(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| SimError::Stage { stage, source })
    }
}
