#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use tenantshare_cli::{parse_config, validate};

/// Larger workloads are valid but make each iteration slow.
const MAX_FUZZ_CELLS: u128 = 100_000;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = parse_config(text) else {
        return;
    };
    let sla_len = config.sla.as_ref().map(Vec::len);
    if config.workload.declared_cells(sla_len).map_or(false, |c| c > MAX_FUZZ_CELLS) {
        return;
    }
    // Trace paths resolve under a directory that does not exist, so the
    // target never reads the filesystem.
    if let Ok(v) = validate(&config, Path::new("/nonexistent/fuzz")) {
        let errors = v.errors().count();
        assert_eq!(v.into_plan().is_ok(), errors == 0);
    }
});
