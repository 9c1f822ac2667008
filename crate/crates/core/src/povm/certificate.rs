use serde::Serialize;

use super::{SequentialMeasurement, ALICE_LABELS};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen, inner, norm, tol, CVec, Operator3};
use crate::optimality::{global_optimum, Branch};
use crate::states::{state_vectors, CanonicalPair};

const KERNEL_TOL: f64 = 1e-8;
const UNAMBIGUITY_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct LabelCertificate {
    pub label: String,
    /// Smallest eigenvalue of the projected `G(ω)`.
    pub psd_margin: f64,
    /// `max |P G P A(ω)|`.
    pub kernel_residual: f64,
    /// `max_{r ∉ T_ω} ⟨a_r|A(ω)|a_r⟩`.
    pub unambiguity_residual: f64,
    /// Dimension of the kernel of `G(ω)` on the range of `P_ω`; only
    /// evaluated for the rank-one construction.
    pub kernel_dim: Option<usize>,
    /// Bob's conclusive probabilities `p_r` after this label.
    pub conclusive: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub labels: Vec<LabelCertificate>,
    pub success_probability: f64,
    /// `Tr X`, the dual objective.
    pub dual_value: f64,
    pub completeness_residual: f64,
    pub max_unambiguity_residual: f64,
}

/// Labels whose states survive Alice's outcome.
fn targets(w: usize) -> Vec<usize> {
    match w {
        0..=2 => vec![w],
        3..=5 => vec![(w - 3 + 1) % 3, (w - 3 + 2) % 3],
        _ => vec![0, 1, 2],
    }
}

/// Projector onto the orthocomplement of `span{vs}`.
fn complement_projector(vs: &[CVec<3>]) -> Operator3 {
    let mut basis: Vec<CVec<3>> = Vec::new();
    for v in vs {
        let mut w = *v;
        for e in &basis {
            let c = inner(e, &w);
            for i in 0..3 {
                w[i] -= e[i] * c;
            }
        }
        let n = norm(&w);
        if n > 1e-12 {
            basis.push(w.map(|c| c / n));
        }
    }
    basis
        .iter()
        .fold(Operator3::identity(), |p, e| p - Operator3::projector(e))
}

fn violation(label: &str, check: &str, margin: f64) -> Error {
    Error::CertificateViolation {
        label: label.into(),
        check: check.into(),
        margin,
    }
}

/// Checks that `seq` is optimal for `pair` using the explicit dual feasible
/// point `X = 3 Σ_n x_n² y_{υ_n}² |n⟩⟨n|`.
pub fn dual_certificate(pair: &CanonicalPair, seq: &SequentialMeasurement) -> Result<CertificateReport> {
    let sv = state_vectors(pair);
    let x2 = pair.x.map(|v| v * v);
    let y2 = pair.y.map(|v| v * v);
    let dual = Operator3::from_real_diag(std::array::from_fn(|n| 3.0 * x2[n] * y2[pair.upsilon[n]]));
    let dual_value = dual.trace().re;
    let rank_one = seq.branch == Branch::Inequality || (seq.branch == Branch::PositiveRealA && seq.kappa[1] > 0.0);

    let alice_total: Operator3 = seq.alice.iter().copied().sum();
    let completeness_residual = (alice_total - Operator3::identity()).max_abs();
    if completeness_residual > COMPLETENESS_TOL {
        return Err(violation("alice", "completeness", completeness_residual));
    }

    let mut labels = Vec::with_capacity(7);
    let mut success = 0.0;
    for (w, label) in ALICE_LABELS.iter().enumerate() {
        let a = &seq.alice[w];
        let t = targets(w);
        let conclusive: [f64; 3] = std::array::from_fn(|r| seq.bob[w].outcomes[r].expectation(&sv.b[r]));
        let others: Vec<CVec<3>> = (0..3).filter(|r| !t.contains(r)).map(|r| sv.a[r]).collect();
        let p = complement_projector(&others);

        let mut g = dual;
        for &r in &t {
            g = g - Operator3::projector(&sv.a[r]).scale(conclusive[r] / 3.0);
        }
        let gp = (p * g * p).hermitian_part();
        let eig = hermitian_eigen(&gp)?;
        let psd_margin = eig.min();
        if psd_margin < -tol::PSD {
            return Err(violation(label, "psd", psd_margin));
        }

        let kernel_residual = (gp * *a).max_abs();
        if kernel_residual > KERNEL_TOL {
            return Err(violation(label, "kernel", kernel_residual));
        }

        let unambiguity_residual = (0..3)
            .filter(|r| !t.contains(r))
            .map(|r| a.expectation(&sv.a[r]).abs())
            .fold(0.0, f64::max);
        if unambiguity_residual > UNAMBIGUITY_TOL {
            return Err(violation(label, "unambiguity", unambiguity_residual));
        }

        let kernel_dim = if rank_one && a.max_abs() > 0.0 {
            let scale = gp.max_abs().max(1.0);
            let zeros = eig.values.iter().filter(|v| v.abs() <= KERNEL_TOL * scale).count();
            let dim = zeros - others.len();
            if dim != 1 {
                return Err(violation(label, "kernel dimension", dim as f64));
            }
            Some(dim)
        } else {
            None
        };

        for r in 0..3 {
            success += a.expectation(&sv.a[r]) * conclusive[r] / 3.0;
        }
        labels.push(LabelCertificate {
            label: label.to_string(),
            psd_margin,
            kernel_residual,
            unambiguity_residual,
            kernel_dim,
            conclusive,
        });
    }

    let gap = (success - dual_value).abs();
    if gap > GAP_TOL {
        return Err(violation("all", "duality gap", gap));
    }
    let optimum_gap = (dual_value - global_optimum(pair)).abs();
    if optimum_gap > GAP_TOL {
        return Err(violation("all", "dual value", optimum_gap));
    }
    let max_unambiguity_residual = labels.iter().map(|l| l.unambiguity_residual).fold(0.0, f64::max);
    Ok(CertificateReport {
        labels,
        success_probability: success,
        dual_value,
        completeness_residual,
        max_unambiguity_residual,
    })
}
