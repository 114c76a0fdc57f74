#![no_main]

use libfuzzer_sys::fuzz_target;
use tenantshare_core::projection::project_truncated_simplex;

fuzz_target!(|data: &[u8]| {
    if data.len() < 8 {
        return;
    }
    let eps = f64::from(data[0]) / 256.0;
    let y: Vec<f64> = data[1..]
        .chunks_exact(8)
        .take(16)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Ok(p) = project_truncated_simplex(&y, eps) else {
        return;
    };
    let x = p.into_vec();
    let floor = eps / x.len() as f64;
    let sum: f64 = x.iter().sum();
    assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    assert!(x.iter().all(|&v| v >= floor * (1.0 - 1e-12)));
});
