//! Measurement constructions and their verification.
//!
//! The optimal sequential measurement has Alice report one of seven labels:
//! `w1_j` (the state is `j`), `w2_j` (the state is not `j`) and `w3` (no
//! information). Bob then measures with the POVM attached to the label: the
//! trivial "always `j`" measurement, the optimal binary unambiguous
//! measurement for the two surviving states, or the optimal ternary one.

mod certificate;
pub mod json;
mod sampling;

pub use certificate::{dual_certificate, CertificateReport, LabelCertificate};
pub use sampling::sample_outcomes;

use crate::error::{Error, Result};
use crate::numerics::{inner, kron3, normalized, tau_pow, tol, CMat, CVec, Operator3, C64};
use crate::optimality::{classify, pair_eta, z_values, Branch};
use crate::states::{state_vectors, CanonicalPair};

/// An ordered list of detection operators; the last one is inconclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<const N: usize> {
    pub outcomes: Vec<CMat<N>>,
    pub labels: Vec<String>,
}

impl<const N: usize> Povm<N> {
    /// Outcomes labeled `0, 1, .., R-1, inconclusive`.
    pub fn new(outcomes: Vec<CMat<N>>) -> Self {
        let r = outcomes.len().saturating_sub(1);
        let labels = (0..outcomes.len())
            .map(|i| {
                if i == r {
                    "inconclusive".to_string()
                } else {
                    i.to_string()
                }
            })
            .collect();
        Povm { outcomes, labels }
    }

    pub fn total(&self) -> CMat<N> {
        self.outcomes.iter().copied().sum()
    }

    pub fn probabilities(&self, state: &CVec<N>) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.expectation(state)).collect()
    }
}

/// Optimal unambiguous measurement for `{|u⟩, |v⟩}` with equal priors.
///
/// Outcomes are `[detect u, detect v, inconclusive]`; each state is
/// identified with probability `1 - |⟨u|v⟩|`.
pub fn binary_unambiguous(u: &CVec<3>, v: &CVec<3>) -> Result<Povm<3>> {
    let c = inner(u, v);
    if c.norm() >= tol::MAX_OVERLAP {
        return Err(Error::DegenerateStates);
    }
    // u - v ⟨v|u⟩ is orthogonal to v and has ⟨u|·⟩ = 1 - |c|² > 0.
    let v_perp: CVec<3> = normalized(&std::array::from_fn(|i| u[i] - v[i] * c.conj()));
    let u_perp: CVec<3> = normalized(&std::array::from_fn(|i| v[i] - u[i] * c));
    let w = 1.0 / (1.0 + c.norm());
    let detect_u = Operator3::projector(&v_perp).scale(w);
    let detect_v = Operator3::projector(&u_perp).scale(w);
    let rest = Operator3::identity() - detect_u - detect_v;
    Ok(Povm {
        outcomes: vec![detect_u, detect_v, rest],
        labels: vec!["u".into(), "v".into(), "inconclusive".into()],
    })
}

/// Equal-probability measurement for `|s_r⟩ = Σ_n w_n τ^{rn} |n⟩`.
///
/// Outcome `r` projects onto `(w_min/√3) Σ_n w_n^{-1} τ^{rn} |n⟩`; the
/// average success probability is `3 w_min²`.
pub fn ternary_unambiguous(w: &[f64; 3]) -> Result<Povm<3>> {
    if w.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DomainError(format!("amplitudes {w:?} must be positive")));
    }
    let w_min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut outcomes: Vec<Operator3> = (0..3)
        .map(|r| {
            let pi: CVec<3> = std::array::from_fn(|n| tau_pow((r * n) as i64) * (w_min / (3f64.sqrt() * w[n])));
            Operator3::projector(&pi)
        })
        .collect();
    let conclusive: Operator3 = outcomes.iter().copied().sum();
    outcomes.push(Operator3::identity() - conclusive);
    Ok(Povm::new(outcomes))
}

/// Alice's seven outcome labels, in storage order.
pub const ALICE_LABELS: [&str; 7] = ["w1_0", "w1_1", "w1_2", "w2_0", "w2_1", "w2_2", "w3"];

pub fn label_index(label: &str) -> Option<usize> {
    ALICE_LABELS.iter().position(|l| *l == label)
}

/// Alice's POVM over the seven labels plus Bob's measurement for each.
#[derive(Clone, Debug)]
pub struct SequentialMeasurement {
    pub alice: [Operator3; 7],
    pub bob: [Povm<3>; 7],
    /// `(u_1, u_2, u_3)` weights of the three label families.
    pub kappa: [f64; 3],
    pub branch: Branch,
}

/// `Σ_n x_n^{-1} τ^{jn} |n⟩`.
pub fn announce_vector(pair: &CanonicalPair, j: usize) -> CVec<3> {
    std::array::from_fn(|n| tau_pow((j * n) as i64) / pair.x[n])
}

/// `Σ_n x_n^{-1} z_{υ_n}^{-1} τ^{jn} |n⟩`.
pub fn filter_vector(pair: &CanonicalPair, j: usize) -> CVec<3> {
    let z = z_values(pair);
    std::array::from_fn(|n| tau_pow((j * n) as i64) / (pair.x[n] * z[pair.upsilon[n]]))
}

/// The basis vector `|υ_2⟩`.
pub fn no_info_vector(pair: &CanonicalPair) -> CVec<3> {
    std::array::from_fn(|n| C64::new(if n == pair.upsilon[2] { 1.0 } else { 0.0 }, 0.0))
}

fn bob_measurements(pair: &CanonicalPair) -> Result<[Povm<3>; 7]> {
    let b = state_vectors(pair).b;
    let zero = Operator3::zero();
    let mut bob: Vec<Povm<3>> = Vec::with_capacity(7);
    for j in 0..3 {
        let outcomes = (0..4)
            .map(|r| if r == j { Operator3::identity() } else { zero })
            .collect();
        bob.push(Povm::new(outcomes));
    }
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        let bin = binary_unambiguous(&b[j1], &b[j2])?;
        let mut outcomes = vec![zero; 4];
        outcomes[j1] = bin.outcomes[0];
        outcomes[j2] = bin.outcomes[1];
        outcomes[3] = bin.outcomes[2];
        bob.push(Povm::new(outcomes));
    }
    bob.push(ternary_unambiguous(&pair.y)?);
    Ok(bob.try_into().expect("seven Bob measurements"))
}

/// Weights `(u_1, u_2, u_3)` solving the completeness system
///
/// ```text
/// u_1 x_{υ_k}^{-2} + u_2 x_{υ_k}^{-2} z_k^{-2} + u_3 δ_{k,2} = 1,  k = 0, 1, 2.
/// ```
///
/// Columns are equilibrated before solving; the returned `scaled` values are
/// the weights in those units, which is where the nonnegativity test is
/// meaningful.
#[derive(Clone, Copy, Debug)]
pub struct CompletenessWeights {
    pub u: [f64; 3],
    pub scaled: [f64; 3],
}

pub fn completeness_weights(pair: &CanonicalPair) -> Result<CompletenessWeights> {
    let z = z_values(pair);
    let ups = pair.upsilon;
    let mut m = [[0.0; 3]; 3];
    for k in 0..3 {
        let xi = pair.x[ups[k]].powi(-2);
        m[k] = [xi, xi * z[k].powi(-2), if k == 2 { 1.0 } else { 0.0 }];
    }
    let col_scale: [f64; 3] = std::array::from_fn(|j| (0..3).map(|k| m[k][j].abs()).fold(0.0, f64::max));
    for row in m.iter_mut() {
        for j in 0..3 {
            row[j] /= col_scale[j];
        }
    }
    let scaled = crate::numerics::solve3(&m, &[1.0; 3])?;
    let u = std::array::from_fn(|j| scaled[j] / col_scale[j]);
    Ok(CompletenessWeights { u, scaled })
}

/// Builds the optimal sequential measurement for a pair whose verdict is
/// true.
pub fn build_sequential(pair: &CanonicalPair) -> Result<SequentialMeasurement> {
    match classify(pair) {
        Branch::Fails => Err(Error::NotGloballyOptimal(
            "global-optimality conditions fail for this pair".into(),
        )),
        Branch::PositiveRealB | Branch::Orthogonal => product_construction(pair),
        Branch::Inequality => generic_construction(pair),
        Branch::PositiveRealA => match generic_construction(pair) {
            Ok(seq) => Ok(seq),
            Err(Error::SingularSystem { .. }) | Err(Error::NotGloballyOptimal(_)) => {
                let mut seq = product_construction(pair)?;
                seq.branch = Branch::PositiveRealA;
                Ok(seq)
            }
            Err(e) => Err(e),
        },
    }
}

/// Rank-one construction from the completeness weights.
pub fn generic_construction(pair: &CanonicalPair) -> Result<SequentialMeasurement> {
    let weights = completeness_weights(pair)?;
    let mut u = weights.u;
    for i in 0..3 {
        if weights.scaled[i] < -tol::WEIGHT {
            return Err(Error::NotGloballyOptimal(format!(
                "completeness weight u_{} = {:e} is negative",
                i + 1,
                weights.scaled[i]
            )));
        }
        if u[i] < 0.0 {
            u[i] = 0.0;
        }
    }
    let mut alice = [Operator3::zero(); 7];
    for j in 0..3 {
        alice[j] = Operator3::projector(&announce_vector(pair, j)).scale(u[0] / 3.0);
        alice[3 + j] = Operator3::projector(&filter_vector(pair, j)).scale(u[1] / 3.0);
    }
    alice[6] = Operator3::projector(&no_info_vector(pair)).scale(u[2]);
    Ok(SequentialMeasurement {
        alice,
        bob: bob_measurements(pair)?,
        kappa: u,
        branch: classify(pair),
    })
}

/// Both parties run their own equal-probability measurement; the first
/// conclusive result wins. Optimal whenever one overlap is positive real.
pub fn product_construction(pair: &CanonicalPair) -> Result<SequentialMeasurement> {
    let a = ternary_unambiguous(&pair.x)?;
    let mut alice = [Operator3::zero(); 7];
    alice[..3].copy_from_slice(&a.outcomes[..3]);
    alice[6] = a.outcomes[3];
    let x_min = pair.x.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SequentialMeasurement {
        alice,
        bob: bob_measurements(pair)?,
        kappa: [x_min * x_min, 0.0, a.outcomes[3].trace().re],
        branch: Branch::PositiveRealB,
    })
}

/// `Π_r = Σ_ω A(ω) ⊗ B^(ω)_r` on the joint space.
pub fn flatten(seq: &SequentialMeasurement) -> Povm<9> {
    let outcomes = (0..4)
        .map(|r| (0..7).map(|w| kron3(&seq.alice[w], &seq.bob[w].outcomes[r])).sum())
        .collect();
    Povm::new(outcomes)
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct PovmResiduals {
    /// Smallest eigenvalue over all outcomes.
    pub psd_margin: f64,
    /// `max |Σ_r Π_r - I|`.
    pub completeness: f64,
    pub hermiticity: f64,
}

impl PovmResiduals {
    pub fn passes(&self, psd_tol: f64, completeness_tol: f64) -> bool {
        self.hermiticity <= tol::HERM && self.psd_margin >= -psd_tol && self.completeness <= completeness_tol
    }
}

pub fn verify_povm<const N: usize>(p: &Povm<N>) -> PovmResiduals {
    let hermiticity = p.outcomes.iter().map(|o| o.hermiticity_residual()).fold(0.0, f64::max);
    let psd_margin = p
        .outcomes
        .iter()
        .map(crate::numerics::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let completeness = (p.total() - CMat::<N>::identity()).max_abs();
    PovmResiduals {
        psd_margin,
        completeness,
        hermiticity,
    }
}

/// Average success probability and largest error probability of `p` on
/// `states` with the given priors.
pub fn verify_unambiguous<const N: usize>(p: &Povm<N>, states: &[CVec<N>], priors: &[f64]) -> (f64, f64) {
    let mut success = 0.0;
    let mut error: f64 = 0.0;
    for (r, (state, prior)) in states.iter().zip(priors).enumerate() {
        for (k, o) in p.outcomes.iter().take(states.len()).enumerate() {
            let prob = o.expectation(state);
            if k == r {
                success += prior * prob;
            } else {
                error = error.max(prob.abs());
            }
        }
    }
    (success, error)
}

/// Joint states `|Ψ_r⟩` for the pair.
pub fn joint_states(pair: &CanonicalPair) -> [CVec<9>; 3] {
    state_vectors(pair).joint()
}

pub const EQUAL_PRIORS: [f64; 3] = [1.0 / 3.0; 3];

/// `η` for the pair, re-exported for the binary-filter checks.
pub fn bob_binary_success(pair: &CanonicalPair) -> f64 {
    3.0 * pair_eta(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{psd_check, C64};
    use crate::optimality::global_optimum;
    use crate::states::{canonicalize, Overlap};
    use std::f64::consts::PI;

    fn pair(ka: C64, kb: C64) -> CanonicalPair {
        canonicalize(Overlap::new(ka).unwrap(), Overlap::new(kb).unwrap()).unwrap()
    }

    fn tilted() -> CanonicalPair {
        let k = C64::from_polar(0.2, PI / 10.0);
        pair(k, k)
    }

    fn basis(i: usize) -> CVec<3> {
        std::array::from_fn(|n| C64::new(if n == i { 1.0 } else { 0.0 }, 0.0))
    }

    #[test]
    fn binary_orthogonal_states() {
        let p = binary_unambiguous(&basis(0), &basis(1)).unwrap();
        assert!((p.outcomes[0].expectation(&basis(0)) - 1.0).abs() < 1e-15);
        assert!((p.outcomes[1].expectation(&basis(1)) - 1.0).abs() < 1e-15);
        let e = crate::numerics::hermitian_eigen(&p.outcomes[2]).unwrap();
        assert!(e.values[0].abs() < 1e-15 && e.values[1].abs() < 1e-15);
        assert!((e.values[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn binary_half_overlap() {
        let u = basis(0);
        let v: CVec<3> = [C64::new(0.5, 0.0), C64::new(0.0, 0.75f64.sqrt()), C64::new(0.0, 0.0)];
        let p = binary_unambiguous(&u, &v).unwrap();
        assert!((p.outcomes[0].expectation(&u) - 0.5).abs() < 1e-12);
        assert!((p.outcomes[1].expectation(&v) - 0.5).abs() < 1e-12);
        assert!(p.outcomes[0].expectation(&v).abs() < 1e-12);
        assert!(p.outcomes[1].expectation(&u).abs() < 1e-12);
        assert!(psd_check(&p.outcomes[2], 1e-12));
        assert!(matches!(binary_unambiguous(&u, &u), Err(Error::DegenerateStates)));
    }

    #[test]
    fn binary_on_bob_states_matches_eta() {
        let p = tilted();
        let b = state_vectors(&p).b;
        let m = binary_unambiguous(&b[1], &b[2]).unwrap();
        assert!((m.outcomes[0].expectation(&b[1]) - bob_binary_success(&p)).abs() < 1e-10);
        assert!((m.outcomes[1].expectation(&b[2]) - bob_binary_success(&p)).abs() < 1e-10);
    }

    #[test]
    fn ternary_examples() {
        let uniform = [1.0 / 3f64.sqrt(); 3];
        let m = ternary_unambiguous(&uniform).unwrap();
        assert!(m.outcomes[3].max_abs() < 1e-15);
        let w = [0.5f64.sqrt(), 0.5, 0.5];
        let m = ternary_unambiguous(&w).unwrap();
        let states = crate::states::symmetric_triple(&w);
        let (success, err) = verify_unambiguous(&m, &states, &EQUAL_PRIORS);
        assert!((success - 0.75).abs() < 1e-12);
        assert!(err < 1e-12);
        assert!(psd_check(&m.outcomes[3], 1e-12));
        assert!(matches!(
            ternary_unambiguous(&[1.0, 0.0, 0.0]),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn positive_real_b_construction() {
        let k = C64::new(0.25, 0.0);
        let p = pair(k, k);
        let seq = build_sequential(&p).unwrap();
        assert_eq!(seq.branch, Branch::PositiveRealB);
        let flat = flatten(&seq);
        let res = verify_povm(&flat);
        assert!(res.passes(1e-12, 1e-10), "{res:?}");
        let (success, err) = verify_unambiguous(&flat, &joint_states(&p), &EQUAL_PRIORS);
        assert!((success - 0.9375).abs() < 1e-10);
        assert!(err < 1e-10);
    }

    #[test]
    fn tilted_overlap_generic_construction() {
        let p = tilted();
        let w = completeness_weights(&p).unwrap();
        assert!(w.u.iter().all(|u| *u >= 0.0), "{:?}", w.u);
        let seq = build_sequential(&p).unwrap();
        assert_eq!(seq.branch, Branch::Inequality);
        let alice_total: Operator3 = seq.alice.iter().copied().sum();
        assert!((alice_total - Operator3::identity()).max_abs() < 1e-10);
        for a in &seq.alice {
            assert!(psd_check(a, 1e-12));
            let e = crate::numerics::hermitian_eigen(a).unwrap();
            assert!(e.values[1].abs() < 1e-12, "rank > 1: {:?}", e.values);
        }
        let a = state_vectors(&p).a;
        for j in 0..3 {
            for r in 0..3 {
                if r != j {
                    assert!(seq.alice[j].expectation(&a[r]).abs() < 1e-12);
                }
            }
            assert!(seq.alice[3 + j].expectation(&a[j]).abs() < 1e-10);
            assert!(seq.bob[3 + j].outcomes[j].max_abs() == 0.0);
        }
        let flat = flatten(&seq);
        let res = verify_povm(&flat);
        assert!(res.passes(1e-12, 1e-10), "{res:?}");
        let (success, err) = verify_unambiguous(&flat, &joint_states(&p), &EQUAL_PRIORS);
        assert!((success - global_optimum(&p)).abs() < 1e-10);
        assert!(err < 1e-10);
    }

    #[test]
    fn flatten_no_information_alice() {
        let p = tilted();
        let mut seq = build_sequential(&p).unwrap();
        seq.alice = [Operator3::zero(); 7];
        seq.alice[6] = Operator3::identity();
        let flat = flatten(&seq);
        for r in 0..4 {
            let want = kron3(&Operator3::identity(), &seq.bob[6].outcomes[r]);
            assert!((flat.outcomes[r] - want).max_abs() < 1e-15);
        }
    }

    #[test]
    fn failing_pair_is_rejected() {
        let k = C64::new(-0.2, 0.0);
        assert!(matches!(
            build_sequential(&pair(k, k)),
            Err(Error::NotGloballyOptimal(_))
        ));
    }

    #[test]
    fn verify_povm_examples() {
        let quarter = Operator3::identity().scale(0.25);
        let p = Povm::new(vec![quarter; 4]);
        let r = verify_povm(&p);
        assert_eq!(r.completeness, 0.0);
        assert!(r.psd_margin >= 0.0);
        let mut bad = p.clone();
        bad.outcomes[1].0[2][2] += C64::new(1e-6, 0.0);
        let r = verify_povm(&bad);
        assert!((r.completeness - 1e-6).abs() < 1e-12);
        assert!(!r.passes(1e-12, 1e-10));
    }

    #[test]
    fn orthogonal_projective_measurement() {
        let p = Povm::new(vec![
            Operator3::projector(&basis(0)),
            Operator3::projector(&basis(1)),
            Operator3::projector(&basis(2)),
            Operator3::zero(),
        ]);
        let (s, e) = verify_unambiguous(&p, &[basis(0), basis(1), basis(2)], &EQUAL_PRIORS);
        assert!((s - 1.0).abs() < 1e-15 && e == 0.0);
    }
}
