use alloc::string::String;

use crate::matrices::ModelKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate user id `{0}`")]
    DuplicateUser(String),
    #[error("unknown user id `{0}`")]
    UnknownUser(String),
    #[error("user `{id}` has attribute columns {found:?}, expected {expected:?}")]
    AttributeMismatch {
        id: String,
        expected: alloc::vec::Vec<String>,
        found: alloc::vec::Vec<String>,
    },
    #[error("user `{0}` contacted themselves")]
    SelfContact(String),
    #[error("contact between `{sender}` and `{receiver}` joins users of the same gender")]
    SameGender { sender: String, receiver: String },
    #[error("user index {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("similarity built for {similarity} but contact data is {contacts}")]
    ModelMismatch {
        similarity: ModelKind,
        contacts: ModelKind,
    },
    #[error("penalty must lie strictly between 0 and 1, got {0}")]
    InvalidPenalty(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("no service users sent at least {threshold} messages in both periods")]
    NoServiceUsers { threshold: u32 },
    #[error("reply-bias calibration failed: {0}")]
    Calibration(&'static str),
}
