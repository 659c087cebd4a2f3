//! Numerical laboratory for renormalization of even unimodal maps of
//! bounded combinatorial type.

pub mod conjugacy;
pub mod distortion;
pub mod error;
pub mod interval;
pub mod map;
pub mod partition;
pub mod renorm;
pub mod report;
pub mod roots;
pub mod tolerances;
pub mod tune;

pub use error::{Error, Result};
pub use interval::Interval;
pub use map::{ClassKParams, Factor, Jet, MapDescriptor, Unimodal, UnimodalMap};
pub use tolerances::Tolerances;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/renormalization.md")]
    mod renormalization {}
    #[doc = include_str!("../../../book/src/partition.md")]
    mod partition {}
    #[doc = include_str!("../../../book/src/distortion.md")]
    mod distortion {}
    #[doc = include_str!("../../../book/src/conjugacy.md")]
    mod conjugacy {}
}
