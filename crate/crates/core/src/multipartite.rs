//! Sufficient condition for `N`-partite symmetric ternary states.
//!
//! Party `n` is treated as Alice against the tensor product of all later
//! parties, whose overlap is the product of theirs. If every such bipartite
//! cut admits a globally optimal one-way measurement, so does the chain.
//! For `N ≥ 3` a negative answer does not rule out optimality.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{tol, C64};
use crate::optimality::check_global_optimality;
use crate::states::{psk_value, Overlap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultipartiteReport {
    pub sufficient: bool,
    /// First cut whose bipartite verdict is false.
    pub failing_level: Option<usize>,
}

fn clamp_modulus(k: C64) -> C64 {
    let limit = tol::MAX_OVERLAP - 1e-12;
    if k.norm() >= limit {
        C64::from_polar(limit, k.arg())
    } else {
        k
    }
}

fn evaluate(levels: impl Iterator<Item = (C64, C64)>) -> Result<MultipartiteReport> {
    for (n, (ka, kb)) in levels.enumerate() {
        let r = check_global_optimality(Overlap::new(ka)?, Overlap::new(kb)?)?;
        if !r.verdict {
            return Ok(MultipartiteReport {
                sufficient: false,
                failing_level: Some(n),
            });
        }
    }
    Ok(MultipartiteReport {
        sufficient: true,
        failing_level: None,
    })
}

pub fn check_multipartite(parties: &[Overlap]) -> Result<MultipartiteReport> {
    let n = parties.len();
    if n < 2 {
        return Err(Error::DomainError(format!("need at least two parties, got {n}")));
    }
    let mut suffix = vec![C64::new(1.0, 0.0); n];
    for m in (0..n - 1).rev() {
        suffix[m] = clamp_modulus(suffix[m + 1] * parties[m + 1].value());
    }
    evaluate((0..n - 1).map(|m| (parties[m].value(), suffix[m])))
}

/// `N` copies of the PSK triple with total mean photon number `s_total`.
pub fn check_copies_psk(s_total: f64, n: usize) -> Result<MultipartiteReport> {
    if !(s_total > 0.0) || !s_total.is_finite() {
        return Err(Error::DomainError(format!(
            "total photon number {s_total} must be positive"
        )));
    }
    if n < 2 {
        return Err(Error::DomainError(format!("need at least two copies, got {n}")));
    }
    let per = s_total / n as f64;
    let ka = psk_value(per);
    evaluate((0..n - 1).map(|m| (ka, psk_value((n - m - 1) as f64 * per))))
}
