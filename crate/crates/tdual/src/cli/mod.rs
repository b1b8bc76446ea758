//! Text front end: grammar, printer, JSON schemas, example registry and
//! subcommand dispatch.

pub mod app;
pub mod json;
pub mod parse;
pub mod print;
pub mod registry;
