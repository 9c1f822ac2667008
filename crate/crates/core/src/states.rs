//! Overlap models for the physical examples and the canonical amplitude form.
//!
//! A symmetric triple `|a_r⟩ = V^r |a_0⟩` is described, up to the choice of
//! global phases and the labeling of states 1 and 2, by its overlap
//! `K = ⟨a_0|a_1⟩`. In the eigenbasis of `V = diag(1, τ, τ²)` the states are
//! `|a_r⟩ = Σ_n x_n τ^{rn} |n⟩` with positive amplitudes `x_n`.
//!
//! The canonical form used throughout the crate requires
//!
//! ```text
//! x_0 > x_2,  x_1 >= x_2,  y_0 >= y_1 >= y_2,  y_0 != y_2
//! ```
//!
//! which is reached by multiplying each overlap by a power of τ (a change of
//! per-state global phases on one party) and by conjugating both overlaps
//! together (swapping the labels of states 1 and 2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kron_vec3, tau_pow, tol, CVec, C64};

/// Inner product `⟨a_0|a_1⟩` of one party's triple, `|K| < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap(C64);

impl Overlap {
    pub fn new(k: C64) -> Result<Self> {
        let m = k.norm();
        if !m.is_finite() || m > 1.0 + 1e-12 {
            return Err(Error::DomainError(format!("|K| = {m} exceeds 1")));
        }
        if m >= tol::MAX_OVERLAP {
            return Err(Error::DegenerateStates);
        }
        Ok(Overlap(k))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(C64::new(re, im))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    /// The triple is (numerically) mutually orthogonal.
    pub fn is_orthogonal(&self) -> bool {
        self.modulus() < tol::TIE
    }

    pub fn to_pair(&self) -> [f64; 2] {
        [self.0.re, self.0.im]
    }
}

/// Coherent-state inner product `⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + α* β)`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + alpha.conj() * beta).exp()
}

/// Ternary PSK coherent states with mean photon number `s`:
/// `K = exp(-3s/2) exp(i √3 s / 2)`.
pub fn psk_overlap(s: f64) -> Result<Overlap> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::DomainError(format!("photon number {s} must be >= 0")));
    }
    Overlap::new(psk_value(s))
}

pub(crate) fn psk_value(s: f64) -> C64 {
    C64::from_polar((-1.5 * s).exp(), 0.5 * 3f64.sqrt() * s)
}

/// Lifted trine states with lift parameter `g`: `K = (3g - 1) / 2`.
pub fn lifted_trine_overlap(g: f64) -> Result<Overlap> {
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::DomainError(format!("lift parameter {g} outside (0, 1)")));
    }
    Overlap::new(C64::new(0.5 * (3.0 * g - 1.0), 0.0))
}

/// Ternary PPM coherent states built from `|α⟩` and `|β⟩`:
/// `K = |⟨α|β⟩|² ⟨β|β⟩`, always nonnegative real.
pub fn ppm_overlap(alpha: C64, beta: C64) -> Result<Overlap> {
    if alpha == beta {
        return Err(Error::DegenerateStates);
    }
    Overlap::new(C64::new(coherent_overlap(alpha, beta).norm_sqr(), 0.0))
}

/// Amplitudes `x_n = sqrt((1 + τ^{2n} K + τ^n K*) / 3)`.
pub fn amplitudes_from_overlap(k: C64) -> Result<[f64; 3]> {
    if !(k.norm() < 1.0) {
        return Err(Error::DegenerateStates);
    }
    let mut x = [0.0; 3];
    for (n, xn) in x.iter_mut().enumerate() {
        let radicand = (1.0 + 2.0 * (tau_pow(2 * n as i64) * k).re) / 3.0;
        if !(radicand > tol::TIE * tol::TIE) {
            return Err(Error::RankDeficient { radicand });
        }
        *xn = radicand.sqrt();
    }
    Ok(x)
}

/// `Σ_n x_n² τ^n`, the overlap reconstructed from amplitudes.
pub fn overlap_from_amplitudes(x: &[f64; 3]) -> C64 {
    (0..3).map(|n| tau_pow(n as i64) * (x[n] * x[n])).sum()
}

/// Which of the 18 relabelings produced the canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonRecord {
    pub shift_a: u8,
    pub shift_b: u8,
    pub conjugated: bool,
}

impl CanonRecord {
    pub const IDENTITY: CanonRecord = CanonRecord {
        shift_a: 0,
        shift_b: 0,
        conjugated: false,
    };
}

/// A bipartite triple in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPair {
    pub x: [f64; 3],
    pub y: [f64; 3],
    /// Ordering of the joint amplitudes; `tx[upsilon[0]]` is the smallest.
    pub upsilon: [usize; 3],
    pub record: CanonRecord,
    pub ka_canon: C64,
    pub kb_canon: C64,
}

/// `t̃x_n² = Σ_k x_k² y_{n⊖k}²`.
pub(crate) fn joint_squares(x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|n| (0..3).map(|k| (x[k] * y[(n + 3 - k) % 3]).powi(2)).sum())
}

pub(crate) fn upsilon_for(tx2: &[f64; 3]) -> [usize; 3] {
    if tx2[0] >= tx2[2] {
        [2, 1, 0]
    } else {
        [0, 2, 1]
    }
}

fn x_condition(x: &[f64; 3], strict: bool) -> bool {
    let first = if strict {
        x[0] > x[2] + tol::TIE
    } else {
        x[0] > x[2] - tol::TIE
    };
    first && x[1] >= x[2] - tol::TIE
}

fn y_condition(y: &[f64; 3]) -> bool {
    y[0] >= y[1] - tol::TIE && y[1] >= y[2] - tol::TIE && y[0] - y[2] > tol::TIE
}

/// Brings `(ka, kb)` into canonical form.
///
/// Transforms are tried in the order (conjugated, shift_a, shift_b), each
/// ascending. A first pass demands `x_0 > x_2` by more than the tie
/// tolerance; only if no transform passes is the tolerant comparison used.
/// Zero overlaps must be handled by the caller.
pub fn canonicalize(ka: Overlap, kb: Overlap) -> Result<CanonicalPair> {
    // Rank deficiency is invariant under the relabelings.
    amplitudes_from_overlap(ka.value())?;
    amplitudes_from_overlap(kb.value())?;

    for strict in [true, false] {
        for conjugated in [false, true] {
            for shift_a in 0..3u8 {
                for shift_b in 0..3u8 {
                    let (ka_c, kb_c) = transformed(ka, kb, conjugated, shift_a, shift_b);
                    let x = amplitudes_from_overlap(ka_c)?;
                    let y = amplitudes_from_overlap(kb_c)?;
                    if x_condition(&x, strict) && y_condition(&y) {
                        let upsilon = upsilon_for(&joint_squares(&x, &y));
                        return Ok(CanonicalPair {
                            x,
                            y,
                            upsilon,
                            record: CanonRecord {
                                shift_a,
                                shift_b,
                                conjugated,
                            },
                            ka_canon: ka_c,
                            kb_canon: kb_c,
                        });
                    }
                }
            }
        }
    }
    Err(Error::NoCanonicalForm)
}

fn transformed(ka: Overlap, kb: Overlap, conjugated: bool, sa: u8, sb: u8) -> (C64, C64) {
    let (a, b) = if conjugated {
        (ka.value().conj(), kb.value().conj())
    } else {
        (ka.value(), kb.value())
    };
    (tau_pow(sa as i64) * a, tau_pow(sb as i64) * b)
}

/// State vectors in the eigenbasis of the symmetry unitary.
#[derive(Clone, Debug)]
pub struct StateVectors {
    pub a: [CVec<3>; 3],
    pub b: [CVec<3>; 3],
}

impl StateVectors {
    /// `|Ψ_r⟩ = |a_r⟩ ⊗ |b_r⟩`.
    pub fn joint(&self) -> [CVec<9>; 3] {
        std::array::from_fn(|r| kron_vec3(&self.a[r], &self.b[r]))
    }
}

/// `Σ_n w_n τ^{rn} |n⟩` for `r = 0, 1, 2`.
pub fn symmetric_triple(w: &[f64; 3]) -> [CVec<3>; 3] {
    std::array::from_fn(|r| std::array::from_fn(|n| tau_pow((r * n) as i64) * w[n]))
}

/// Like [`canonicalize`], but also accepts an orthogonal `kb`.
///
/// Bob's amplitudes are then uniform and Alice's triple is kept as given;
/// Bob alone identifies the state, so no ordering on `x` is needed.
pub fn prepare_pair(ka: Overlap, kb: Overlap) -> Result<CanonicalPair> {
    if !kb.is_orthogonal() {
        return canonicalize(ka, kb);
    }
    let x = amplitudes_from_overlap(ka.value())?;
    let y = [1.0 / 3f64.sqrt(); 3];
    Ok(CanonicalPair {
        x,
        y,
        upsilon: upsilon_for(&joint_squares(&x, &y)),
        record: CanonRecord::IDENTITY,
        ka_canon: ka.value(),
        kb_canon: C64::new(0.0, 0.0),
    })
}

pub fn state_vectors(pair: &CanonicalPair) -> StateVectors {
    StateVectors {
        a: symmetric_triple(&pair.x),
        b: symmetric_triple(&pair.y),
    }
}
