//! Core of an argumentation-driven interview assistant.
//!
//! A [`kb::KnowledgeBase`] holds status arguments (facts about the user) and
//! reply arguments (outcomes), linked by attack and endorsement relations.
//! The [`engine`] classifies replies against the set of facts accepted so far
//! and picks the next question; [`nlu`] maps free text onto facts; [`dialogue`]
//! runs the interview loop; [`harness`] simulates interviews against an
//! independent brute-force oracle.

pub mod dialogue;
pub mod engine;
pub mod harness;
pub mod kb;
pub mod nlu;

pub use kb::{ArgumentId, ArgumentKind, KnowledgeBase};
