use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("junction error: {0}")]
    Junction(String),
    #[error("source expression error: {0}")]
    Expression(String),
    #[error("all physical sources vanish")]
    ZeroSources,
    #[error("solver failure ({method}): relative residual {residual:e}")]
    Solver { method: String, residual: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("stage `{stage}` failed at eps = {eps}: {source}")]
    Stage {
        stage: String,
        eps: f64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at_stage(self, stage: &str, eps: f64) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            eps,
            source: Box::new(self),
        }
    }
}
