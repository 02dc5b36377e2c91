pub mod audio_io;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod lowband;
pub mod lpc;
pub mod measure;

pub use error::{Error, Result};
pub mod features;
pub mod highband;
pub mod predictors;
pub mod pipeline;
pub mod pitch;
pub mod spectrum;
pub mod synth;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/signals.md")]
    pub mod signals {}
    #[doc = include_str!("../../../book/src/filters.md")]
    pub mod filters {}
    #[doc = include_str!("../../../book/src/lpc.md")]
    pub mod lpc {}
    #[doc = include_str!("../../../book/src/envelopes.md")]
    pub mod envelopes {}
    #[doc = include_str!("../../../book/src/pitch.md")]
    pub mod pitch {}
    #[doc = include_str!("../../../book/src/predictors.md")]
    pub mod predictors {}
    #[doc = include_str!("../../../book/src/highband.md")]
    pub mod highband {}
    #[doc = include_str!("../../../book/src/lowband.md")]
    pub mod lowband {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    pub mod pipeline {}
}
