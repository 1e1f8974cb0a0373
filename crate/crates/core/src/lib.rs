//! A grammar-compressed self-index.
//!
//! The text is compressed into a locally consistent run-length grammar. The
//! index answers `locate`, `count` and `extract` queries directly on the
//! grammar: pattern occurrences that cross a phrase boundary are found in a
//! two-dimensional grid of reversed phrase expansions against the rule
//! suffixes that follow them, and every other occurrence is derived from
//! those by walking the grammar tree.
//!
//! ```
//! use rlindex::Index;
//!
//! let idx = Index::build(b"abracadabra", 7).unwrap();
//! assert_eq!(idx.locate(b"abra"), vec![1, 8]);
//! assert_eq!(idx.count(b"a"), 5);
//! assert_eq!(idx.extract_text(4, 4).unwrap(), b"acad");
//! ```

pub mod corpus;
pub mod count;
pub mod delta;
pub mod expand;
pub mod fingerprint;
pub mod format;
pub mod grammar;
pub mod grid;
pub mod index;
pub mod lcparse;
pub mod locate;
pub mod members;
pub mod par;
pub mod patparse;
pub mod sigs;
pub mod suffix;
pub mod tree;
pub mod wavelet;

/// Symbol id. Bytes are `0..=255`, the sentinels follow, nonterminals after.
pub type Sym = u32;
/// Left sentinel `#`.
pub const HASH: Sym = 256;
/// Right sentinel `$`.
pub const DOLLAR: Sym = 257;
pub const FIRST_NONTERMINAL: Sym = 258;

pub use grammar::{build_grammar, BuildConfig, Rlcfg};
pub use index::{Index, IndexError};
pub use par::Exec;
