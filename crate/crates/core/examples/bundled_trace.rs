//! Regenerates `data/six_user_trace.csv`, the synthetic stand-in for a
//! production CPU-demand trace: six tenants with daily cycles, background
//! noise and occasional bursts.
//!
//! Usage: `cargo run -p tenantshare-core --example bundled_trace [OUT]`

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tenantshare_core::workloads::{sample_gamma, write_trace_csv, GammaParams};
use tenantshare_core::LoadMatrix;

const STEPS: usize = 14_628;
const DAY: f64 = 1440.0;
const SEED: u64 = 0x7e4a_5e1d;

/// Per-tenant base demand, daily swing, phase offset and burst rate.
const TENANTS: [(f64, f64, f64, f64); 6] = [
    (0.22, 0.5, 0.0, 0.002),
    (0.18, 0.7, 0.25, 0.001),
    (0.16, 0.3, 0.5, 0.004),
    (0.12, 0.8, 0.1, 0.0),
    (0.10, 0.4, 0.75, 0.003),
    (0.08, 0.9, 0.6, 0.001),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/six_user_trace.csv"));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut data = Vec::with_capacity(STEPS * TENANTS.len());
    let mut burst_left = [0usize; 6];
    for t in 0..STEPS {
        for (i, &(base, swing, phase, burst)) in TENANTS.iter().enumerate() {
            let cycle = 1.0 + swing * (TAU * (t as f64 / DAY + phase)).sin();
            let mut mean = base * cycle.max(0.05);
            if burst_left[i] == 0 && rng.random_bool(burst) {
                burst_left[i] = rng.random_range(20..200);
            }
            if burst_left[i] > 0 {
                burst_left[i] -= 1;
                mean += 0.4;
            }
            let idle = rng.random_bool(0.15);
            let v = if idle {
                0.0
            } else {
                sample_gamma(&GammaParams::with_mean(4.0, mean)?, &mut rng)
            };
            // three decimals, like a sampled utilization counter
            data.push((v * 1000.0).round() / 1000.0);
        }
    }
    let loads = LoadMatrix::from_flat(TENANTS.len(), data)?;
    write_trace_csv(&out, &loads)?;
    eprintln!(
        "wrote {} steps, total demand {:.1}, to {}",
        loads.steps(),
        loads.total(),
        out.display()
    );
    Ok(())
}
