//! Opaque identifiers.
//!
//! Every identifier in the engine (sorts, indices, tokens, keys, relation
//! types, operator symbols, system nodes) is a cheap-to-clone interned string
//! wrapped in its own newtype so that, say, a token can never be passed where
//! a sort is expected.

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(s: impl AsRef<str>) -> Self {
                $name(Arc::from(s.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(Arc::from(s))
            }
        }

        impl From<&String> for $name {
            fn from(s: &String) -> Self {
                $name::new(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// An entity type (sort), an element of the type set `X`.
    Sort
);
name_type!(
    /// An index of a type list (a relational argument position).
    Index
);
name_type!(
    /// An entity instance, an element of the token set `Y`.
    Token
);
name_type!(
    /// A key (row identifier) of a structure's relation classification.
    Key
);
name_type!(
    /// A relation type.
    RelName
);
name_type!(
    /// An operator (function) symbol.
    Symbol
);
name_type!(
    /// A node of an information-system shape graph.
    NodeId
);
name_type!(
    /// An edge of an information-system shape graph.
    EdgeId
);
