//! Seeded random sampling shared by probes and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-sample generator derived from a base seed, so probes give identical
/// results regardless of evaluation order.
pub fn sample_rng(seed: u64, sample: u64) -> SeededRng {
    seeded(seed ^ sample.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491))
}

pub fn uniform_vec(rng: &mut SeededRng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-amp..=amp)).collect()
}

/// Random sine series `sum a_mn sin(m pi x / lx) sin(n pi y / ly)` with
/// `m, n <= modes` and coefficients decaying like `1 / (m n)`.
pub fn low_mode_field(rng: &mut SeededRng, grid: &crate::fields::Grid2, modes: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let coef: Vec<f64> = (0..modes * modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    (0..grid.len())
        .map(|k| {
            let (x, y) = grid.coords(k);
            let mut s = 0.0;
            for m in 1..=modes {
                let sx = (m as f64 * pi * x / grid.lx).sin();
                for n in 1..=modes {
                    let sy = (n as f64 * pi * y / grid.ly).sin();
                    s += coef[(m - 1) * modes + n - 1] * sx * sy / (m * n) as f64;
                }
            }
            s
        })
        .collect()
}
