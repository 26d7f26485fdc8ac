use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Side of a two-sided window that has to grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSide {
    Left,
    Right,
    Both,
}

impl fmt::Display for WindowSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowSide::Left => "left",
            WindowSide::Right => "right",
            WindowSide::Both => "both sides",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("size {size} exceeds the enumeration guard {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error(
        "window too small on the {side}: found {found} of {needed} required records \
         (grow the window, e.g. double --window)"
    )]
    InsufficientWindow {
        side: WindowSide,
        needed: usize,
        found: usize,
    },

    #[error("stream extension cap of {cap} draws exceeded while {context}")]
    StreamCap { cap: usize, context: &'static str },

    #[error("all mass merged into a single bin; the test has no degrees of freedom")]
    Degenerate,

    #[error("empirical distribution is empty")]
    EmptyDistribution,

    #[error("address {0:?} is not a vertex of the tree")]
    AddressNotInTree(String),

    #[error("cannot parse tree at character {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
