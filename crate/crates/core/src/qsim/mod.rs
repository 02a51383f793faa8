//! Dense state-vector simulation of the registers used by the fitting
//! algorithms: clock, system (parameter sector then data sector) and flag
//! qubits.

mod phase;
mod state;
mod swap;

pub use phase::{
    apply_hermitian_via_pe, auto_evolution_time, clock_window, conditional_evolution, controlled_rotation,
    decode_eigenvalue, default_rotation_constant, inverse_conditional_evolution, postselect_flag, prepare_clock,
    prepare_sine_clock, project_clock_zero, qft_clock, rotation_weight, uncompute_clock, ClockWindow, PeOutcome,
    PhaseEstimationConfig, PhaseMode, QftDirection, SpectralOperator, DEFAULT_CLOCK_SIZE,
};
pub use state::{measure_computational, prepare_data_state, QuantumState, RegisterLayout, MAX_AMPLITUDES};
pub use swap::{swap_test, swap_test_from_overlap, SwapTestPlan, SwapTestResult};

use rand_chacha::ChaCha8Rng;

use crate::seed::{derive_seed, rng_from_seed};

/// Shots drawn per independently seeded shard.
pub const SHARD_SHOTS: u64 = 4096;

/// Draws `shots` samples in fixed-size shards, shard `i` seeded with
/// `derive_seed(seed, i)`, accumulating into one tally.
pub(crate) fn sharded_sampling<A>(shots: u64, seed: u64, mut tally: A, mut draw: impl FnMut(u64, &mut ChaCha8Rng, &mut A)) -> A {
    let mut remaining = shots;
    let mut shard = 0u64;
    while remaining > 0 {
        let n = remaining.min(SHARD_SHOTS);
        let mut rng = rng_from_seed(derive_seed(seed, shard));
        draw(n, &mut rng, &mut tally);
        remaining -= n;
        shard += 1;
    }
    tally
}
