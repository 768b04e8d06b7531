pub mod bisect;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fd;
pub mod killing;
pub mod ode;
pub mod reaction;
pub mod roots;
pub mod sterile;
pub mod wave;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/reaction.md")]
    mod reaction {}
    #[doc = include_str!("../../../book/src/killing.md")]
    mod killing {}
    #[doc = include_str!("../../../book/src/waves.md")]
    mod waves {}
    #[doc = include_str!("../../../book/src/sterile.md")]
    mod sterile {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
