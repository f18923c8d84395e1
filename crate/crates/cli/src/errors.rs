//! Error classification for process exit codes: 1 for usage/configuration
//! problems, 2 for data problems, 3 for internal invariant violations.

use pulie_core::pipeline::PipelineError;
use pulie_core::trainer::TrainError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

pub fn usage<S: Into<String>>(message: S) -> CliError {
    CliError::Usage(message.into())
}

pub fn data<S: Into<String>>(message: S) -> CliError {
    CliError::Data(message.into())
}

pub fn internal<S: Into<String>>(message: S) -> CliError {
    CliError::Internal(message.into())
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::Corpus(_)
            | PipelineError::Lexicon(_)
            | PipelineError::Embed(_)
            | PipelineError::Tfidf(_)
            | PipelineError::Feature(_) => CliError::Data(e.to_string()),
            PipelineError::Train(t) => classify_train(t, e.to_string()),
            PipelineError::Model(_) | PipelineError::Eval(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let message = e.to_string();
        classify_train(&e, message)
    }
}

fn classify_train(e: &TrainError, message: String) -> CliError {
    match e {
        TrainError::Config(_) => CliError::Usage(message),
        TrainError::NoPositivesInTrain
        | TrainError::NoUnlabeledInTrain
        | TrainError::MissingFeatures { .. }
        | TrainError::MissingEmbedding { .. } => CliError::Data(message),
        TrainError::Pu(_) | TrainError::Model(_) => CliError::Internal(message),
    }
}

impl From<pulie_core::corpus::CorpusError> for CliError {
    fn from(e: pulie_core::corpus::CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<pulie_core::embeddings::EmbedError> for CliError {
    fn from(e: pulie_core::embeddings::EmbedError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<pulie_core::lexicon::LexiconError> for CliError {
    fn from(e: pulie_core::lexicon::LexiconError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<pulie_core::tfidf::TfidfError> for CliError {
    fn from(e: pulie_core::tfidf::TfidfError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<pulie_core::model::ModelError> for CliError {
    fn from(e: pulie_core::model::ModelError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<pulie_core::eval::EvalError> for CliError {
    fn from(e: pulie_core::eval::EvalError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json error: {e}"))
    }
}
