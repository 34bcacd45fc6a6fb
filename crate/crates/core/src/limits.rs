//! Enumeration caps.
//!
//! All sets are materialized eagerly, so every enumeration that can grow
//! multiplicatively is guarded by a cap. The process-wide defaults can be
//! overridden with the `FOLE_CAP` environment variable, which sets every cap
//! to the given value.

use std::sync::OnceLock;

pub const DEFAULT_MAX_TUPLES: usize = 1_000_000;
pub const DEFAULT_MAX_FAMILIES: usize = 100_000;
pub const DEFAULT_MAX_UNIVERSE: usize = 250_000;
pub const DEFAULT_MAX_TERM_DEPTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Tuples produced by a single `tup` enumeration.
    pub max_tuples: usize,
    /// Token or key families in a computed system sum.
    pub max_families: usize,
    /// Formulas in a bounded formula universe.
    pub max_universe: usize,
    /// Nesting depth of terms.
    pub max_term_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: DEFAULT_MAX_TUPLES,
            max_families: DEFAULT_MAX_FAMILIES,
            max_universe: DEFAULT_MAX_UNIVERSE,
            max_term_depth: DEFAULT_MAX_TERM_DEPTH,
        }
    }
}

impl Limits {
    /// Defaults, with every enumeration cap replaced by `FOLE_CAP` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var("FOLE_CAP")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_tuples = cap;
            limits.max_families = cap;
            limits.max_universe = cap;
        }
        limits
    }

    /// The process-wide limits, read once from the environment.
    pub fn global() -> &'static Limits {
        static GLOBAL: OnceLock<Limits> = OnceLock::new();
        GLOBAL.get_or_init(Limits::from_env)
    }
}
