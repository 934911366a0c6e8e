pub mod constructions;
pub mod error;
pub mod flows;
pub mod foliated;
pub mod forms;
pub mod linalg;
pub mod models;
pub mod tolerance;

pub use error::{Error, Result};
