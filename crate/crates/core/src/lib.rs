pub mod dist;
pub mod error;
pub mod inference;
pub mod mixtures;
pub mod oracle;
pub mod series;
pub mod special;

pub use dist::{Params, Seed, SubModel};
pub use error::{Error, Result};
