//! Episode suppliers: lower-bound constructions and generic partially
//! adversarial environments.

pub mod bb;
pub mod blocks;
pub mod partial;

pub use bb::TwoStateCopies;
pub use blocks::{Block, BlockInstance, BlockKind};
pub use partial::{AdversaryKind, PartialAdversarial};
