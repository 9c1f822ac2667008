//! S-plane geometry.
//!
//! An operator `T` on Alice's space is mapped to the diagonal of its
//! symmetrization `Ŝ(T) = (1/3) Σ_k V^k T V^{k†}`, normalized to unit trace.
//! The point `[s_{υ_1}, s_{υ_0}]` lives in the first quadrant. The optimal
//! one-way measurement exists iff `s(1) = [1/3, 1/3]` lies in the triangle
//! spanned by the images of Alice's three optimal outcome directions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{tol, CVec, Operator3, C64};
use crate::optimality::pair_eta;
use crate::povm::{announce_vector, filter_vector, no_info_vector};
use crate::states::CanonicalPair;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SPlanePoint {
    /// `s_{υ_1}`.
    pub u: f64,
    /// `s_{υ_0}`.
    pub v: f64,
}

impl SPlanePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        SPlanePoint { u, v }
    }

    pub fn distance(&self, other: &SPlanePoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

pub const IDENTITY_POINT: SPlanePoint = SPlanePoint::new(1.0 / 3.0, 1.0 / 3.0);

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Triangle {
    pub e1: SPlanePoint,
    pub e2: SPlanePoint,
    pub e3: SPlanePoint,
    pub degenerate: bool,
}

/// Group average over `V = diag(1, τ, τ²)`; keeps only the diagonal.
pub fn symmetrize(t: &Operator3) -> Operator3 {
    let d = t.real_diagonal();
    Operator3::from_real_diag(d)
}

pub fn s_point(t: &Operator3, upsilon: &[usize; 3]) -> Result<SPlanePoint> {
    let tr = t.trace().re;
    if !(tr >= 1e-14) {
        return Err(Error::ZeroOperator);
    }
    let s = symmetrize(t).real_diagonal().map(|d| d / tr);
    Ok(SPlanePoint::new(s[upsilon[1]], s[upsilon[0]]))
}

fn s_of_vector(v: &CVec<3>, upsilon: &[usize; 3]) -> SPlanePoint {
    s_point(&Operator3::projector(v), upsilon).expect("nonzero vector")
}

pub fn triangle_vertices(pair: &CanonicalPair) -> Triangle {
    let e1 = s_of_vector(&announce_vector(pair, 0), &pair.upsilon);
    let e2 = s_of_vector(&filter_vector(pair, 0), &pair.upsilon);
    let e3 = s_of_vector(&no_info_vector(pair), &pair.upsilon);
    let cross = (e1.u - e3.u) * (e2.v - e3.v) - (e1.v - e3.v) * (e2.u - e3.u);
    Triangle {
        e1,
        e2,
        e3,
        degenerate: cross.abs() <= 1e-10,
    }
}

/// `(y_n² - q)^{-1}`.
pub fn u_values(pair: &CanonicalPair, q: f64) -> [f64; 3] {
    pair.y.map(|y| 1.0 / (y * y - q))
}

/// Unit vector `∝ Σ_n x_n^{-1} (y_{υ_n}² - q)^{-1} |n⟩`, or `|υ_2⟩` at
/// `q = y_2²`.
pub fn gamma_q(pair: &CanonicalPair, q: f64) -> CVec<3> {
    let y2 = pair.y[2] * pair.y[2];
    if (q - y2).abs() <= 1e-10 {
        return no_info_vector(pair);
    }
    let raw: [f64; 3] = std::array::from_fn(|n| {
        let yy = pair.y[pair.upsilon[n]];
        1.0 / (pair.x[n] * (yy * yy - q))
    });
    let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.map(|v| C64::new(v / n, 0.0))
}

/// Points of the curve `C` on the grid `q = η - (1/t - 1)`, `t` uniform in
/// `[0, 1]`, with `t = 0` standing for `q = -∞`. The point at `q = y_2²`
/// is inserted in parameter order.
pub fn curve_c(pair: &CanonicalPair, samples: usize) -> Vec<SPlanePoint> {
    let samples = samples.max(2);
    let eta = pair_eta(pair);
    let y2 = pair.y[2] * pair.y[2];
    let mut out = Vec::with_capacity(samples + 1);
    let mut inserted = false;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        if i == 0 {
            out.push(s_of_vector(&announce_vector(pair, 0), &pair.upsilon));
            continue;
        }
        let q = eta - (1.0 / t - 1.0);
        if !inserted && q >= y2 {
            out.push(s_of_vector(&no_info_vector(pair), &pair.upsilon));
            inserted = true;
            if (q - y2).abs() <= 1e-10 {
                continue;
            }
        }
        out.push(s_of_vector(&gamma_q(pair, q), &pair.upsilon));
    }
    out
}

/// Barycentric weights `(w1, w2, w3)` of `p`; `None` for a degenerate
/// triangle.
pub fn barycentric(p: &SPlanePoint, t: &Triangle) -> Option<[f64; 3]> {
    if t.degenerate {
        return None;
    }
    let (a, b) = ((t.e1.u - t.e3.u, t.e1.v - t.e3.v), (t.e2.u - t.e3.u, t.e2.v - t.e3.v));
    let det = a.0 * b.1 - a.1 * b.0;
    let (du, dv) = (p.u - t.e3.u, p.v - t.e3.v);
    let w1 = (du * b.1 - dv * b.0) / det;
    let w2 = (a.0 * dv - a.1 * du) / det;
    Some([w1, w2, 1.0 - w1 - w2])
}

pub fn in_triangle(p: &SPlanePoint, t: &Triangle, tol: f64) -> bool {
    match barycentric(p, t) {
        Some(w) => w.iter().all(|w| *w >= -tol),
        None => {
            let (du, dv) = (t.e1.u - t.e3.u, t.e1.v - t.e3.v);
            let len2 = du * du + dv * dv;
            if len2 == 0.0 {
                return p.distance(&t.e3) <= tol;
            }
            let s = ((p.u - t.e3.u) * du + (p.v - t.e3.v) * dv) / len2;
            let foot = SPlanePoint::new(t.e3.u + s * du, t.e3.v + s * dv);
            (-tol..=1.0 + tol).contains(&s) && p.distance(&foot) <= tol
        }
    }
}

pub fn identity_membership(pair: &CanonicalPair) -> bool {
    in_triangle(&IDENTITY_POINT, &triangle_vertices(pair), tol::BARY)
}

/// `t̃c(q) = (u_1² - u_0²) / (u_2² - u_0²)`.
pub fn tc(pair: &CanonicalPair, q: f64) -> f64 {
    let u = u_values(pair, q).map(|v| v * v);
    (u[1] - u[0]) / (u[2] - u[0])
}

/// `lim_{q → -∞} t̃c(q) = (y_0² - y_1²) / (y_0² - y_2²)`.
pub fn tc_limit(pair: &CanonicalPair) -> f64 {
    let y = pair.y.map(|v| v * v);
    (y[0] - y[1]) / (y[0] - y[2])
}
