//! Smart-converter dispatch on a DC network with storage.

mod build;
mod case;
mod replica;
mod timeseries;

pub use build::*;
pub use case::*;
pub use replica::*;
pub use timeseries::*;
