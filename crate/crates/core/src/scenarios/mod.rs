//! Generators for the standard examples, as ordinary interpreted systems.

pub mod alice_bob;
pub mod attack;
pub mod muddy;
pub mod transcript;

pub use alice_bob::{gen_alice_bob, AliceBobConfig};
pub use attack::{
    analyze_attack, builtin_protocol, gen_attack, Action, AttackProtocol, AttackReport, Channel,
};
pub use muddy::{gen_muddy, MuddyConfig, MuddyVariant};
pub use transcript::{transcript, Transcript, TranscriptEntry};
