//! Collaborative filtering for reciprocal, bipartite social networks.
//!
//! The crate models a two-sided contact network (for example a heterosexual
//! dating site) where a link only counts as successful if both sides take
//! part. Three recommenders are provided:
//!
//! * **baseline**: classic user-based CF over the binary "who initiated
//!   contact with whom" matrix, using cosine similarity;
//! * **reciprocity-only**: the same machinery, but a cell is set only when the
//!   contact was reciprocated;
//! * **hybrid**: every cell records both directions (`sent`, `received`),
//!   similarity counts agreement of taste and attractiveness normalised by
//!   degree, and scoring discounts one-sided cells by a penalty factor.
//!
//! Around the recommenders sit the pieces needed to run a full offline
//! experiment: contact-log aggregation and temporal splitting
//! ([`contact_log`]), IC/RC precision and recall with city- and
//! individual-level aggregation plus cohort statistics ([`evaluation`]), and a
//! seeded generator of calibrated synthetic contact logs ([`synthgen`]).
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! spread per-user work over a rayon pool; results are bit-identical to the
//! sequential path.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contact_log;
pub mod dense;
mod error;
pub mod evaluation;
pub mod experiment;
pub mod matrices;
mod par;
pub mod recommender;
pub mod similarity;
pub mod stats;
pub mod synthgen;

pub use contact_log::{
    aggregate_dyads, select_service_users, split_by_day, ContactEvent, DyadRecord, Gender,
    ServiceUserSet, UserIdx, UserRecord, UserTable,
};
pub use error::Error;
pub use evaluation::{GroundTruth, RcDefinition};
pub use matrices::{
    BinaryContactMatrix, ContactData, DegreeMap, DyadCell, DyadContactMatrix, ModelKind,
};
pub use recommender::{RecommendationList, RecommenderConfig};
pub use similarity::SimilarityMatrix;
pub use synthgen::{DatasetStats, SynthConfig};

pub type Result<T, E = Error> = core::result::Result<T, E>;
