pub mod antichain;
pub mod cli;
pub mod coding_tree;
pub mod diary;
pub mod enumeration;
pub mod error;
pub mod hl;
pub mod pseudotree;
pub mod scheduler;
pub mod subtree;
pub mod word;

pub use error::{Error, Result};
pub use pseudotree::{ExtensionKind, ExtensionSpec, FinitePseudotree, PointKind};
pub use word::TernaryWord;
