#![no_main]

use libfuzzer_sys::fuzz_target;
use tenantshare_core::workloads::{parse_trace_csv, write_trace_csv_to};

fuzz_target!(|data: &[u8]| {
    let Ok(loads) = parse_trace_csv(data) else {
        return;
    };
    assert!(loads.as_flat().iter().all(|x| x.is_finite() && *x >= 0.0));
    // accepted input must survive a round trip bit for bit
    let mut out = Vec::new();
    write_trace_csv_to(&mut out, &loads).unwrap();
    assert_eq!(parse_trace_csv(out.as_slice()).unwrap(), loads);
});
