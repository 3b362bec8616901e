//! Command-line tools and the HTTP play service.

pub mod cli;
pub mod server;
pub mod session;
