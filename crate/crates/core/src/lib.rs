pub mod algebra;
pub mod cli;
pub mod database;
pub mod error;
pub mod formula;
pub mod kernel;
pub mod limits;
pub mod name;
pub mod schema;
pub mod speclogic;
pub mod structure;
pub mod syntax;
pub mod system;
pub mod workspace;

pub use error::{Error, Result};
pub use name::{EdgeId, Index, Key, NodeId, RelName, Sort, Symbol, Token};
