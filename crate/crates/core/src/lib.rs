pub mod density;
#[doc(hidden)]
pub mod entry;
pub mod error;
pub mod group;
pub mod intsets;
pub mod lemmas;
pub mod oracle;
pub mod parse;
pub mod rational;
pub mod replay;
pub mod run;
pub mod setops;
pub mod theorems;
pub mod verdict;
pub mod verify;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupModel, Window};
pub use rational::Rational;
pub use verdict::Verdict;
