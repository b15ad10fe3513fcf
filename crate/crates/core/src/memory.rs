//! Guard against allocating dense `D x D` matrices that cannot fit.

use crate::error::{Error, Result};

/// Fraction of available memory a dense covariance may take.
pub const BUDGET_FRACTION: f64 = 0.75;

/// Bytes of memory currently available, if the platform reports it.
pub fn available_bytes() -> Option<u64> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    info.lines().find_map(|line| {
        let rest = line.strip_prefix("MemAvailable:")?;
        let kib: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
        Some(kib * 1024)
    })
}

pub fn dense_bytes(dim: usize, elem_size: usize) -> u64 {
    (dim as u64)
        .saturating_mul(dim as u64)
        .saturating_mul(elem_size as u64)
}

/// Fails with [`Error::MemoryGuard`] if a `dim x dim` matrix of `elem_size`
/// byte entries would exceed the budget. Passes when availability is unknown.
pub fn check_dense_budget(dim: usize, elem_size: usize) -> Result<()> {
    let required = dense_bytes(dim, elem_size);
    match available_bytes() {
        Some(avail) => {
            let budget = (avail as f64 * BUDGET_FRACTION) as u64;
            if required > budget {
                Err(Error::MemoryGuard {
                    dim,
                    required,
                    budget,
                })
            } else {
                Ok(())
            }
        }
        None => Ok(()),
    }
}
