pub mod bnb;
pub mod cli;
pub mod dual;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod power;
pub mod reformulate;
mod serde_inf;
pub mod simplex;
pub mod sparse;
pub mod toys;

pub use error::{Error, Result};
