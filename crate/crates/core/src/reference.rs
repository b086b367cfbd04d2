//! Published values of `aw([n], k)` for `3 <= n <= 25`, `3 <= k <= (n+3)/2`.
//!
//! Reference data for diffing solver output only; nothing in the library
//! computes with it.

use std::collections::BTreeMap;
use std::sync::OnceLock;

const RAW: &str = include_str!("../fixtures/interval_reference.txt");

/// Largest `n` covered by the reference table.
pub const REFERENCE_MAX_N: usize = 25;

/// Largest k shown for `n`: `(n + 3) / 2`.
pub fn max_k(n: usize) -> usize {
    (n + 3) / 2
}

/// `(n, k) -> aw([n], k)` for every tabulated cell.
pub fn interval_reference() -> &'static BTreeMap<(usize, usize), usize> {
    static TABLE: OnceLock<BTreeMap<(usize, usize), usize>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = BTreeMap::new();
        for line in RAW.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (n, values) = line.split_once(':').expect("fixture row without ':'");
            let n: usize = n.trim().parse().expect("fixture row label");
            for (i, v) in values.split_whitespace().enumerate() {
                table.insert((n, 3 + i), v.parse().expect("fixture value"));
            }
        }
        table
    })
}

pub fn reference_value(n: usize, k: usize) -> Option<usize> {
    interval_reference().get(&(n, k)).copied()
}
