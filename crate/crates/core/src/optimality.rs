//! Global-optimality decision for bipartite symmetric ternary states.
//!
//! With `η = (1 - |K_B|) / 3` and `z_k = y_k² - η`, a one-way local
//! measurement reaches the joint optimum iff `y_1 = y_2`, or
//!
//! ```text
//! x_2 z_0 - x_1 z_1 >= 0
//! Σ_k x_k² (z_{1⊖k}^{-2} - z_{3⊖k}^{-2}) >= 0
//! ```
//!
//! The joint optimum itself is `3 min_n t̃x_n²`, reached by the
//! equal-probability measurement on the joint states.

use serde::Serialize;

use crate::error::Result;
use crate::numerics::tol;
use crate::states::{canonicalize, joint_squares, CanonicalPair, Overlap};

/// `1 ⊖ k` for `k = 0, 1, 2`.
const ONE_MINUS: [usize; 3] = [1, 0, 2];
/// `3 ⊖ k` for `k = 0, 1, 2`.
const THREE_MINUS: [usize; 3] = [0, 2, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// One party's states are orthogonal; perfect discrimination.
    Orthogonal,
    /// `K_B` positive real (`y_1 = y_2`).
    PositiveRealB,
    /// `K_A` positive real (`x_1 = x_2`).
    PositiveRealA,
    /// Both inequalities hold.
    Inequality,
    Fails,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Orthogonal => "Orthogonal",
            Branch::PositiveRealB => "PositiveRealB",
            Branch::PositiveRealA => "PositiveRealA",
            Branch::Inequality => "Inequality",
            Branch::Fails => "Fails",
        }
    }

    pub fn parse(s: &str) -> Option<Branch> {
        [
            Branch::Orthogonal,
            Branch::PositiveRealB,
            Branch::PositiveRealA,
            Branch::Inequality,
            Branch::Fails,
        ]
        .into_iter()
        .find(|b| b.as_str() == s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityReport {
    pub ka: [f64; 2],
    pub kb: [f64; 2],
    pub eta: f64,
    /// Canonical amplitudes; absent when one party is orthogonal.
    pub x: Option<[f64; 3]>,
    pub y: Option<[f64; 3]>,
    pub z: Option<[f64; 3]>,
    pub tx: [f64; 3],
    pub upsilon: [usize; 3],
    pub p_global: f64,
    pub verdict: bool,
    pub branch: Branch,
    /// `(c1, c2)`, the left-hand sides of the two inequalities.
    pub condition_values: Option<[f64; 2]>,
}

/// `η = (1 - |K_B|) / 3`.
pub fn eta_of(kb: Overlap) -> f64 {
    (1.0 - kb.modulus()) / 3.0
}

/// Joint amplitudes `t̃x_n` and the ordering `υ`.
pub fn joint_amplitudes(pair: &CanonicalPair) -> ([f64; 3], [usize; 3]) {
    let tx = joint_squares(&pair.x, &pair.y).map(f64::sqrt);
    (tx, pair.upsilon)
}

/// Optimal joint unambiguous success probability `3 t̃x_{υ_0}²`.
pub fn global_optimum(pair: &CanonicalPair) -> f64 {
    3.0 * joint_squares(&pair.x, &pair.y)[pair.upsilon[0]]
}

pub fn pair_eta(pair: &CanonicalPair) -> f64 {
    (1.0 - pair.kb_canon.norm()) / 3.0
}

/// `z_k = y_k² - η`.
pub fn z_values(pair: &CanonicalPair) -> [f64; 3] {
    let eta = pair_eta(pair);
    pair.y.map(|y| y * y - eta)
}

/// `(x_2 z_0 - x_1 z_1, Σ_k x_k² (z_{1⊖k}^{-2} - z_{3⊖k}^{-2}))`.
pub fn condition_values(pair: &CanonicalPair) -> [f64; 2] {
    let x = &pair.x;
    let z = z_values(pair);
    let c1 = x[2] * z[0] - x[1] * z[1];
    let c2 = (0..3)
        .map(|k| x[k] * x[k] * (z[ONE_MINUS[k]].powi(-2) - z[THREE_MINUS[k]].powi(-2)))
        .sum();
    [c1, c2]
}

/// Branch and verdict for a pair already in canonical form.
pub fn classify(pair: &CanonicalPair) -> Branch {
    if pair.y[1] - pair.y[2] <= tol::TIE {
        return Branch::PositiveRealB;
    }
    if pair.x[1] - pair.x[2] <= tol::TIE {
        return Branch::PositiveRealA;
    }
    let [c1, c2] = condition_values(pair);
    if c1 >= -tol::COND && c2 >= -tol::COND {
        Branch::Inequality
    } else {
        Branch::Fails
    }
}

pub fn check_global_optimality(ka: Overlap, kb: Overlap) -> Result<OptimalityReport> {
    let eta = eta_of(kb);
    if ka.is_orthogonal() || kb.is_orthogonal() {
        return Ok(OptimalityReport {
            ka: ka.to_pair(),
            kb: kb.to_pair(),
            eta,
            x: None,
            y: None,
            z: None,
            tx: [1.0 / 3f64.sqrt(); 3],
            upsilon: [2, 1, 0],
            p_global: 1.0,
            verdict: true,
            branch: Branch::Orthogonal,
            condition_values: None,
        });
    }
    let pair = canonicalize(ka, kb)?;
    Ok(report_for_pair(ka, kb, &pair))
}

pub fn report_for_pair(ka: Overlap, kb: Overlap, pair: &CanonicalPair) -> OptimalityReport {
    let branch = classify(pair);
    let (tx, upsilon) = joint_amplitudes(pair);
    OptimalityReport {
        ka: ka.to_pair(),
        kb: kb.to_pair(),
        eta: pair_eta(pair),
        x: Some(pair.x),
        y: Some(pair.y),
        z: Some(z_values(pair)),
        tx,
        upsilon,
        p_global: global_optimum(pair),
        verdict: branch != Branch::Fails,
        branch,
        condition_values: Some(condition_values(pair)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;
    use crate::states::{lifted_trine_overlap, psk_overlap};
    use std::f64::consts::PI;

    fn ov(re: f64, im: f64) -> Overlap {
        Overlap::from_parts(re, im).unwrap()
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_of(ov(0.0, 0.0)), 1.0 / 3.0);
        assert!((eta_of(ov(0.2, 0.0)) - 0.266_666_666_666_666_7).abs() < 1e-15);
        assert!((eta_of(ov(0.0, -0.5)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn joint_amplitude_examples() {
        let k = ov(0.25, 0.0);
        let pair = canonicalize(k, k).unwrap();
        let (tx, ups) = joint_amplitudes(&pair);
        let tx2 = tx.map(|t| t * t);
        for (a, b) in tx2.iter().zip([0.375, 0.3125, 0.3125]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(ups, [2, 1, 0]);
        assert!((global_optimum(&pair) - 0.9375).abs() < 1e-15);
        let x2 = pair.x[2].powi(2);
        let y2 = pair.y[2].powi(2);
        assert!((global_optimum(&pair) - 3.0 * (x2 + y2 - 3.0 * x2 * y2)).abs() < 1e-15);

        let uniform = [1.0 / 3f64.sqrt(); 3];
        let tx2 = joint_squares(&uniform, &[0.8f64.sqrt(), 0.1f64.sqrt(), 0.1f64.sqrt()]);
        for t in tx2 {
            assert!((t - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_party_is_perfect() {
        let r = check_global_optimality(ov(0.0, 0.0), ov(0.3, 0.0)).unwrap();
        assert!(r.verdict);
        assert_eq!(r.branch, Branch::Orthogonal);
        assert_eq!(r.p_global, 1.0);
    }

    #[test]
    fn lifted_trine_positive() {
        let k = lifted_trine_overlap(0.5).unwrap();
        let r = check_global_optimality(k, k).unwrap();
        assert!(r.verdict);
        assert_eq!(r.branch, Branch::PositiveRealB);
    }

    #[test]
    fn negative_real_fails_through_first_inequality() {
        let k = ov(-0.2, 0.0);
        let r = check_global_optimality(k, k).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.branch, Branch::Fails);
        let z = r.z.unwrap();
        for (a, b) in z.iter().zip([0.4 - 0.8 / 3.0, 0.4 - 0.8 / 3.0, 0.2 - 0.8 / 3.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let x = r.x.unwrap();
        let [c1, _] = r.condition_values.unwrap();
        assert!((c1 - z[0] * (x[2] - x[1])).abs() < 1e-15);
        assert!(c1 < 0.0);
    }

    #[test]
    fn tilted_overlap_configuration_is_optimal() {
        let k = Overlap::new(C64::from_polar(0.2, PI / 10.0)).unwrap();
        let r = check_global_optimality(k, k).unwrap();
        assert!(r.verdict);
        assert_eq!(r.branch, Branch::Inequality);
    }

    #[test]
    fn psk_interval_spot_checks() {
        let unit = PI / (3.0 * 3f64.sqrt());
        for (s, want) in [
            (0.3, true),
            (0.7, false),
            (1.7, false),
            (1.9, true),
            (2.9, true),
            (3.1, false),
        ] {
            let k = psk_overlap(s).unwrap();
            assert_eq!(
                check_global_optimality(k, k).unwrap().verdict,
                want,
                "S = {s} (unit {unit})"
            );
        }
    }

    #[test]
    fn report_invariants_on_generic_pairs() {
        let mut n = 0;
        for i in 0..40 {
            for j in 0..40 {
                let ka = C64::from_polar(0.05 + 0.02 * i as f64, 0.37 * i as f64 + 0.11 * j as f64);
                let kb = C64::from_polar(0.05 + 0.02 * j as f64, 1.3 * j as f64 - 0.2 * i as f64);
                let (Ok(ka), Ok(kb)) = (Overlap::new(ka), Overlap::new(kb)) else {
                    continue;
                };
                let Ok(pair) = canonicalize(ka, kb) else { continue };
                if pair.y[1] - pair.y[2] <= tol::TIE {
                    continue;
                }
                n += 1;
                let eta = pair_eta(&pair);
                let y2 = pair.y.map(|y| y * y);
                assert!(y2[2] < eta && eta < y2[1]);
                let z = z_values(&pair);
                assert!(z[0] > 0.0 && z[1] > 0.0 && z[2] < 0.0);
                let s: f64 = z.iter().map(|v| 1.0 / v).sum();
                let scale: f64 = z.iter().map(|v| (1.0 / v).abs()).sum();
                assert!(s.abs() <= 1e-8 * scale);
                let (tx, ups) = joint_amplitudes(&pair);
                assert!(tx[1] >= tx[2] - 1e-12);
                let min = tx.iter().cloned().fold(f64::INFINITY, f64::min);
                assert_eq!(tx[ups[0]], min);
            }
        }
        assert!(n > 500);
    }
}
