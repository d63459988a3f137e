use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed array: {0}")]
    MalformedArray(String),

    #[error("invalid PDA: {0}")]
    InvalidPda(String),

    #[error("column labels do not match the network: {0}")]
    LabelMismatch(String),

    #[error("labels of the columns containing symbol {symbol} have empty intersection")]
    EmptyIntersection { symbol: u32 },

    #[error(
        "symbol {symbol} is designated to relay {relay}, which is not shared by all of its columns"
    )]
    RelayMismatch { symbol: u32, relay: usize },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("({h},{r}) network is not resolvable: {r} does not divide {h}")]
    NotResolvable { h: usize, r: usize },

    #[error("invalid parallel-class partition: {0}")]
    InvalidPartition(String),

    #[error("relay {element} is not a member of {label}")]
    NotMember { element: usize, label: String },

    #[error("base PDA has {found} columns, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),

    #[error("divisibility: {0}")]
    Divisibility(String),

    #[error("user {user} found no packet for symbol {symbol} at its relays")]
    MissingPacket { user: String, symbol: u32 },

    #[error("user {user} lacks cached subpacket W[{file},{subpacket}]")]
    CacheMiss {
        user: String,
        file: usize,
        subpacket: usize,
    },

    #[error("memory point off grid: {0}")]
    OffGrid(String),

    #[error("memory point outside the region: {0}")]
    OffRegion(String),

    #[error("internal defect: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI's structured errors.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedArray(_) => "malformed_array",
            Error::InvalidPda(_) => "invalid_pda",
            Error::LabelMismatch(_) => "label_mismatch",
            Error::EmptyIntersection { .. } => "empty_intersection",
            Error::RelayMismatch { .. } => "relay_mismatch",
            Error::ParamOutOfRange(_) => "param_out_of_range",
            Error::NotResolvable { .. } => "not_resolvable",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::NotMember { .. } => "not_member",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::DegenerateParams(_) => "degenerate_params",
            Error::Divisibility(_) => "divisibility",
            Error::MissingPacket { .. } => "missing_packet",
            Error::CacheMiss { .. } => "cache_miss",
            Error::OffGrid(_) => "off_grid",
            Error::OffRegion(_) => "off_region",
            Error::Internal(_) => "internal",
            Error::Json(_) => "json",
        }
    }
}
