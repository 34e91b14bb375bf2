pub mod bessel;
pub mod bs;
pub mod channel;
pub mod counting;
pub mod error;
pub mod field;
pub mod halfline;
pub mod hardy;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
pub use field::{FieldKind, FieldProfile, FluxClass};
pub use potential::{LogPoint, PotentialProfile, RadialKind, Weight};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/scans.md")]
    mod scans {}
    #[doc = include_str!("../../../book/src/birman-schwinger.md")]
    mod birman_schwinger {}
    #[doc = include_str!("../../../book/src/hardy.md")]
    mod hardy {}
}
