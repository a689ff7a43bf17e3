pub mod cli;
pub mod error;
pub mod ext;
pub mod field;
pub mod kochubei;
pub mod poly;
pub mod series;
pub mod tate;
pub mod text;
pub mod wp;

pub use error::{Error, Result};
pub use field::{FFElem, FieldTower};
