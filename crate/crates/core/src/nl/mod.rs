//! English text for requests and back.
//!
//! [`render_nl`] writes a request using a fixed template grammar with several
//! paraphrases per clause; [`parse_nl`] inverts any text the grammar can
//! produce. [`translate`] runs either the parser or an external model endpoint
//! whose output is checked against the request schema.

mod grammar;
mod parse;
mod render;
mod translate;

pub use parse::{parse_nl, ParseError};
pub use render::{render_nl, render_nl_variant};
pub use translate::{
    translate, translator_for, EndpointConfig, ExternalTranslator, HttpClient, TemplateTranslator,
    TranslateError, Translation, Translator, TranslatorBackend, TranslatorClient, WireRequest,
    DEFAULT_SYSTEM_PROMPT,
};

/// Number of distinct fixed-variant renderings.
pub const NUM_VARIANTS: usize = 4;
