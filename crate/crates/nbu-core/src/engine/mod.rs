//! First-principles computation of the Nielsen-Borsuk-Ulam number.
//!
//! The pipeline builds an explicitly perturbed representative of the homotopy
//! class (a realizer), locates the coincidences of the pair `(f', f' o s)`
//! numerically, snaps them to exact rational points, classifies them through
//! the cokernel of `A(I - S)`, pairs them into Borsuk-Ulam classes and counts
//! the essential ones by local indices.

mod classes;
mod numeric;
mod realizer;

pub use classes::{
    bu_pairing, coincidence_set_affine, count_pairs, index_parity_check, nbu_first_principles,
    pseudo_index, usual_class_of, BUClass, BUClassKind, ClassContext, ClassId, NBUReport,
    ReportDiagnostics, ReportMethod,
};
pub use numeric::{find_coincidences_numeric, local_index_numeric, snap_coordinate};
pub use realizer::{build_realizer, with_extra_terms, Realizer};

use crate::exact_lattice::IntMatrix;
use crate::torus_geometry::{AffineTorusMap, FreeInvolution, TorusPoint};
use num::rational::BigRational;
use num::ToPrimitive;
use std::f64::consts::PI;
use std::fmt;

/// One perturbation term: adds `amplitude * sin(pi * half_freq * t)` of the
/// source coordinate to the target coordinate. Even `half_freq` gives a
/// smooth circle function; odd `half_freq` is continuous with a corner at
/// `t = 0`. Both vanish at `t = 0` and `t = 1/2`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PerturbTerm {
    pub target: usize,
    pub source: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub amplitude: BigRational,
    pub half_freq: u32,
}

fn serialize_rational<S: serde::Serializer>(
    r: &BigRational,
    ser: S,
) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&r.to_string())
}

impl PerturbTerm {
    pub fn amplitude_f64(&self) -> f64 {
        self.amplitude.to_f64().unwrap()
    }

    /// Denominator of the amplitude, the `n` in `1/n`.
    pub fn denominator(&self) -> u64 {
        self.amplitude.denom().to_u64().unwrap_or(u64::MAX)
    }
}

/// Affine base map plus null-homotopic sine terms.
#[derive(Clone, Debug)]
pub struct PerturbedMap {
    pub base: AffineTorusMap,
    pub terms: Vec<PerturbTerm>,
}

impl PerturbedMap {
    pub fn affine(base: AffineTorusMap) -> Self {
        PerturbedMap {
            base,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Evaluates a lift of the map at a real point (no reduction mod 1).
    pub fn eval_lift(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.base.linear.get_i64(i, j) as f64 * x[j];
            }
            out[i] = acc;
        }
        for (o, t) in out.iter_mut().zip(self.base.translation.to_f64()) {
            *o += t;
        }
        for term in &self.terms {
            let t = frac_f64(x[term.source]);
            out[term.target] +=
                term.amplitude_f64() * (PI * term.half_freq as f64 * t).sin();
        }
        out
    }

    /// Largest amplitude denominator among the terms (5 when there are none).
    pub fn max_denominator(&self) -> u64 {
        self.terms.iter().map(|t| t.denominator()).max().unwrap_or(5)
    }
}

pub(crate) fn frac_f64(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Residual of the coincidence equation `f'(x) = f'(s(x))`, componentwise
/// reduced to `[-1/2, 1/2)`; a coincidence has residual zero.
pub fn coincidence_residual(pm: &PerturbedMap, s: &FreeInvolution, x: &[f64]) -> Vec<f64> {
    let sx = apply_involution_f64(s, x);
    let fx = pm.eval_lift(x);
    let fsx = pm.eval_lift(&sx);
    fx.iter()
        .zip(fsx.iter())
        .map(|(a, b)| {
            let d = a - b;
            d - d.round()
        })
        .collect()
}

pub(crate) fn apply_involution_f64(s: &FreeInvolution, x: &[f64]) -> Vec<f64> {
    let n = s.dim();
    let mut out = s.map.translation.to_f64();
    for i in 0..n {
        for j in 0..n {
            out[i] += s.map.linear.get_i64(i, j) as f64 * x[j];
        }
    }
    out
}

/// `A (I - S)`, the linear part of the coincidence equation of `(f, f o s)`.
pub fn coincidence_matrix(m: &IntMatrix, s: &FreeInvolution) -> IntMatrix {
    let n = m.dim();
    m.mul(&IntMatrix::identity(n).sub(&s.map.linear))
}

/// `A t_s`, the constant part of the coincidence equation.
pub fn coincidence_offset(m: &IntMatrix, s: &FreeInvolution) -> Vec<BigRational> {
    m.mul_rat_vec(s.map.translation.coords())
}

/// A coincidence point found by the oracle.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CoincidencePoint {
    pub coords: Vec<f64>,
    #[serde(serialize_with = "serialize_snapped")]
    pub snapped: Option<TorusPoint>,
    pub local_index: i32,
    #[serde(serialize_with = "serialize_class")]
    pub usual_class: ClassId,
}

fn serialize_snapped<S: serde::Serializer>(
    p: &Option<TorusPoint>,
    ser: S,
) -> Result<S::Ok, S::Error> {
    match p {
        Some(pt) => ser.serialize_some(&pt.to_string()),
        None => ser.serialize_none(),
    }
}

fn serialize_class<S: serde::Serializer>(c: &ClassId, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&c.to_string())
}

/// Errors raised along the first-principles pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    /// No realizer construction is available for this input.
    Unsupported(String),
    /// The Jacobian of the coincidence map degenerates at a found point.
    DegenerateJacobian,
    /// Residuals stay small on a positive-dimensional set.
    NonIsolatedLocus,
    /// A found point cannot be snapped to a low-denominator rational.
    Unsnappable,
    /// The point set is not closed under the involution.
    NotSClosed,
    /// A queried point does not solve the coincidence congruence exactly.
    NotCoincidence,
    /// A single class in the halving branch carries an odd total index.
    OddClassIndex,
    /// Index data violates an internal consistency requirement.
    InconsistentIndices(String),
    /// All retries with enlarged perturbation denominators failed.
    RetriesExhausted(String),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Unsupported(what) => write!(f, "no realizer construction: {what}"),
            EngineError::DegenerateJacobian => write!(f, "degenerate coincidence Jacobian"),
            EngineError::NonIsolatedLocus => write!(f, "non-isolated coincidence locus"),
            EngineError::Unsnappable => write!(f, "coincidence point has no nearby low-denominator rational"),
            EngineError::NotSClosed => write!(f, "point set is not involution-closed"),
            EngineError::NotCoincidence => write!(f, "point is not an exact coincidence"),
            EngineError::OddClassIndex => write!(f, "odd class index in halving branch"),
            EngineError::InconsistentIndices(msg) => write!(f, "inconsistent indices: {msg}"),
            EngineError::RetriesExhausted(msg) => write!(f, "retries exhausted: {msg}"),
        }
    }
}

impl std::error::Error for EngineError {}
