pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod optimality;
pub mod optimizer;
pub mod oracle;

pub use error::{Error, Result};
