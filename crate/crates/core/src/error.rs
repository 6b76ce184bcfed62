use std::path::PathBuf;

/// A diagnostic tied to a line of a resource file. Resource parsers collect
/// as many of these as they can instead of stopping at the first problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: Option<PathBuf>,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            file: None,
            line,
            message: message.into(),
        }
    }

    pub fn in_file(mut self, file: impl Into<PathBuf>) -> Self {
        self.file = Some(file.into());
        self
    }
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.file {
            Some(p) => write!(f, "{}:{}: {}", p.display(), self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}", format_parse_errors(.0))]
    Parse(Vec<ParseError>),

    #[error("graph {graph}: {message}")]
    Graph { graph: String, message: String },

    #[error("RTN {graph}: state-level cycle through state {state}; intra-graph cycles are not enumerable")]
    CyclicGraph { graph: String, state: u32 },

    #[error("allomorph graph {0} is cyclic; unbounded allomorph sets are rejected")]
    CyclicEditGraph(String),

    #[error("call to unknown graph {callee} from {caller}")]
    UnknownGraph { caller: String, callee: String },

    #[error("compile input not sorted: {0:?} follows a later entry")]
    UnsortedInput(String),

    #[error("duplicate compile entry: {0:?}")]
    DuplicateEntry(String),

    #[error("stem compatibility symbol {0} has no ending automaton")]
    MissingEndingAutomaton(String),

    #[error("bad magic bytes; not a compiled lexicon file")]
    BadMagic,

    #[error("unsupported lexicon format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("truncated or corrupt lexicon file at byte {0}")]
    Truncated(u64),

    #[error("input is not valid {encoding} at byte offset {offset}")]
    Decode { encoding: &'static str, offset: usize },

    #[error("unmapped fine tag {0:?} in downgrade map")]
    UnmappedTag(String),

    #[error("system/reference word mismatch at position {position}: system {system:?}, reference {reference:?}")]
    Misaligned {
        position: usize,
        system: String,
        reference: String,
    },

    #[error("{0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a file path to every parse error carried by this error.
    pub fn in_file(self, file: impl AsRef<std::path::Path>) -> Error {
        match self {
            Error::Parse(errors) => Error::Parse(
                errors
                    .into_iter()
                    .map(|e| e.in_file(file.as_ref()))
                    .collect(),
            ),
            other => other,
        }
    }
}

fn format_parse_errors(errors: &[ParseError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
