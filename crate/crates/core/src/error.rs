use thiserror::Error;

/// Errors produced by corpus construction, ingestion, and the correction
/// pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("score {0} outside [0,10]")]
    ScoreOutOfRange(f64),

    #[error("invalid CVE id {0:?}")]
    InvalidCveId(String),

    #[error("feed document is not valid NVD JSON: {0}")]
    FeedFormat(String),

    #[error("no feeds found in {0}")]
    NoFeeds(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("url not parseable: {0:?}")]
    BadUrl(String),

    #[error("record {0} has no disclosure estimate")]
    MissingEstimate(String),

    #[error("unknown vendor {0:?}")]
    UnknownVendor(String),

    #[error("{0} flagged pairs have no decision; first: {1}")]
    UndecidedPairs(usize, String),

    #[error("record {0} has no v2 assessment to encode")]
    MissingV2(String),

    #[error("severity scheme {scheme} unavailable: run {missing_step} first")]
    SchemeUnavailable { scheme: String, missing_step: String },

    #[error("empty test set")]
    EmptyTestSet,

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("normal matrix singular; increase ridge")]
    SingularSystem,

    #[error("data has rank < {0}; cannot extract {0} components")]
    DegenerateData(usize),

    #[error("corpora do not share record ids; first mismatch: {0}")]
    CorpusIdMismatch(String),

    #[error("malformed {what} at line {line}: {detail}")]
    MalformedTable {
        what: String,
        line: usize,
        detail: String,
    },

    #[error("ground-truth score of 0 present and aer policy is 'error'")]
    ZeroTargetScore,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
