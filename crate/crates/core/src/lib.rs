//! Deciding unique normal forms with respect to conversion (UN=) for shallow
//! term rewriting systems, and reductions from PCP showing where the problem
//! stops being decidable.
//!
//! The pipeline is [`syntax::parse_trs`], then [`decider::flatten`], then
//! [`closure::saturate`] and the congruence engine in [`equiv`], driven by
//! [`decider::decide_un`]. [`pcp`] builds the undecidability reductions.

pub mod closure;
pub mod corpus;
pub mod decider;
pub mod equiv;
pub mod par;
pub mod pcp;
pub mod syntax;
pub mod term;
pub mod trace;
pub mod trs;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] syntax::ParseError),
    #[error(transparent)]
    Trs(#[from] trs::TrsError),
    #[error(transparent)]
    Closure(#[from] closure::ClosureError),
    #[error(transparent)]
    Decider(#[from] decider::DeciderError),
    #[error(transparent)]
    Pcp(#[from] pcp::PcpError),
    #[error(transparent)]
    Trace(#[from] trace::TraceFormatError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Stable machine-readable error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(e) => e.code(),
            Error::Trs(e) => match e {
                trs::TrsError::VariableLhs(_) => "variable-as-lhs",
                trs::TrsError::ArityConflict { .. } => "arity-conflict",
                trs::TrsError::NotFlat(_) => "not-flat",
                trs::TrsError::CapExceeded { .. } => "cap-exceeded",
            },
            Error::Closure(e) => match e {
                closure::ClosureError::NotFlat(_) => "not-flat",
                closure::ClosureError::CapExceeded(_) => "cap-exceeded",
                closure::ClosureError::UnknownEquation(_) => "internal",
            },
            Error::Decider(e) => match e {
                decider::DeciderError::NotShallow(_) => "not-shallow",
                decider::DeciderError::Closure(c) => Error::Closure(c.clone()).code(),
                decider::DeciderError::Enumeration(t) => Error::Trs(t.clone()).code(),
                decider::DeciderError::InvalidCertificate(_) => "internal",
            },
            Error::Pcp(e) => e.code(),
            Error::Trace(e) => match e {
                trace::TraceFormatError::Term(p) => p.code(),
                trace::TraceFormatError::Shape(_) => "bad-trace",
            },
            Error::Io { .. } => "io-error",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
