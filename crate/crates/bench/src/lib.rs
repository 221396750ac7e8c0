//! Fixed benchmark inputs shared by the criterion targets.

use ckmc_core::scenarios::{gen_alice_bob, gen_muddy, AliceBobConfig, MuddyConfig};
use ckmc_core::InterpretedSystem;

pub fn muddy_coarse(n: usize) -> InterpretedSystem {
    gen_muddy(&MuddyConfig::coarse(n)).expect("valid config")
}

pub fn muddy_fine_two() -> InterpretedSystem {
    gen_muddy(&MuddyConfig::fine(2, 1, 2)).expect("valid config")
}

pub fn alice_bob(eps: u32, max_send: u32) -> InterpretedSystem {
    gen_alice_bob(&AliceBobConfig::new(eps, max_send, false)).expect("valid config")
}
