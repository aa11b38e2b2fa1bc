//! Exact machinery for two-batch Rényi–Ulam liar games over bounded lie
//! channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: lie strings, channels, suffix-channel families, statistics.
//! * [`word`]: words over `T^Q`, balance, lie application, shadows, G/H bounds.
//! * [`numeric`]: rational interval enclosures for `ln`, `sqrt`, `exp`.
//! * [`game`]: state vectors, round application, adaptive and two-batch solvers.
//! * [`pack_cover`]: exact packing/covering search and verification.
//! * [`code`]: Varshamov-style linear codes over small finite fields.
//! * [`synth`]: constructive two-batch strategies for Paul.
//! * [`adversary`]: response sets and Carole's breaking responses.
//! * [`bounds`]: sphere bound, Varshamov bounds and asymptotic thresholds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod adversary;
pub mod bounds;
pub mod channel;
pub mod code;
pub mod error;
pub mod game;
pub mod numeric;
pub mod pack_cover;
pub mod synth;
pub mod word;

pub use channel::{Channel, ChannelStats, ClassId, Lie, LieString, SuffixFamily};
pub use error::{Error, Result};
pub use word::{BalanceSpec, Word};

/// Which liar game is played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Paul wins iff at most one element survives.
    Original,
    /// Paul wins iff at least one element survives.
    Pathological,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Original => "original",
            Variant::Pathological => "pathological",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "pathological" => Ok(Variant::Pathological),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    Paul,
    Carole,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Paul => "Paul",
            Winner::Carole => "Carole",
        })
    }
}

impl Winner {
    pub fn from_paul(paul_wins: bool) -> Self {
        if paul_wins {
            Winner::Paul
        } else {
            Winner::Carole
        }
    }
}

/// Enumeration and search caps shared by the solvers.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Largest `t^Q` that may be enumerated.
    pub max_space: u128,
    /// Largest number of memoised states / search nodes.
    pub max_nodes: u128,
    /// Strategy trees larger than this are not materialised.
    pub tree_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_space: 1 << 20,
            max_nodes: 50_000_000,
            tree_budget: 10_000,
        }
    }
}
