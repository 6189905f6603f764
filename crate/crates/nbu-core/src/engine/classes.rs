//! Exact classification of coincidence points and the assembled
//! first-principles pipeline.
//!
//! The Nielsen (usual) class of a coincidence `x` of the pair `(f, f o s)` is
//! the residue of the integer vector `A(I - S) x - A t_s` in the cokernel of
//! `A(I - S)`, read off in Smith-normal-form coordinates. Borsuk-Ulam classes
//! are orbits of the involution action on usual classes; their essentiality
//! comes from the orientation/parity-dependent pseudo-index table.

use super::numeric::{find_coincidences_numeric, local_index_numeric, snap_coordinate};
use super::realizer::{build_realizer_scaled, Realizer};
use super::{
    coincidence_matrix, coincidence_offset, coincidence_residual, CoincidencePoint, EngineError,
    PerturbedMap,
};
use crate::exact_lattice::{
    frac, smith_normal_form, solve_torus_congruence, IntMatrix, SmithDecomposition, SolutionSet,
};
use crate::torus_geometry::{AffineTorusMap, FreeInvolution, Orientation, TorusPoint};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Canonical representative of a usual (Nielsen/Reidemeister) coincidence
/// class in Smith-normal-form coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub Vec<BigInt>);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Exact coincidence locus of the pair `(f, f o s)`.
pub fn coincidence_set_affine(f: &AffineTorusMap, s: &FreeInvolution) -> SolutionSet {
    let k = coincidence_matrix(&f.linear, s);
    let b: Vec<BigRational> = coincidence_offset(&f.linear, s).iter().map(frac).collect();
    solve_torus_congruence(&k, &b)
}

/// Precomputed data for classifying many points of one pair.
pub struct ClassContext {
    k: IntMatrix,
    offset: Vec<BigRational>,
    snf: SmithDecomposition,
}

impl ClassContext {
    pub fn new(m: &IntMatrix, s: &FreeInvolution) -> Self {
        let k = coincidence_matrix(m, s);
        let offset = coincidence_offset(m, s);
        let snf = smith_normal_form(&k);
        ClassContext { k, offset, snf }
    }

    pub fn coincidence_det(&self) -> BigInt {
        self.k.det()
    }

    /// Class id of an exact coincidence point; errors if the point does not
    /// solve the congruence.
    pub fn class_of(&self, x: &TorusPoint) -> Result<ClassId, EngineError> {
        let kx = self.k.mul_rat_vec(x.coords());
        let mut v: Vec<BigInt> = Vec::with_capacity(kx.len());
        for (a, b) in kx.iter().zip(self.offset.iter()) {
            let d = a - b;
            if !d.denom().is_one() {
                return Err(EngineError::NotCoincidence);
            }
            v.push(d.numer().clone());
        }
        let w = self.snf.u.mul_vec(&v);
        let n = w.len();
        let mut id = Vec::with_capacity(n);
        for i in 0..n {
            let d = self.snf.s.get(i, i);
            if d.is_zero() {
                id.push(w[i].clone());
            } else {
                id.push(w[i].mod_floor(d));
            }
        }
        Ok(ClassId(id))
    }
}

/// Usual coincidence class of a single point of the pair `(f, f o s)`.
pub fn usual_class_of(
    x: &TorusPoint,
    f: &AffineTorusMap,
    s: &FreeInvolution,
) -> Result<ClassId, EngineError> {
    ClassContext::new(&f.linear, s).class_of(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BUClassKind {
    Single,
    Double,
}

/// A Borsuk-Ulam coincidence class: pairs `(x, s(x))` covering one usual
/// class (single) or two usual classes swapped by the involution (double).
#[derive(Clone, Debug, serde::Serialize)]
pub struct BUClass {
    pub pairs: Vec<(CoincidencePoint, CoincidencePoint)>,
    pub kind: BUClassKind,
    #[serde(serialize_with = "serialize_class_pair")]
    pub usual_classes: (ClassId, Option<ClassId>),
    pub pseudo_index: i64,
    pub essential: bool,
}

fn serialize_class_pair<S: serde::Serializer>(
    ids: &(ClassId, Option<ClassId>),
    ser: S,
) -> Result<S::Ok, S::Error> {
    match &ids.1 {
        Some(second) => ser.serialize_str(&format!("{}|{}", ids.0, second)),
        None => ser.serialize_str(&ids.0.to_string()),
    }
}

/// Groups classified coincidence points into Borsuk-Ulam classes. The input
/// must be closed under the involution; points are paired with their images
/// and pairs merged when their usual classes intersect.
pub fn bu_pairing(
    points: &[CoincidencePoint],
    s: &FreeInvolution,
) -> Result<Vec<BUClass>, EngineError> {
    let mut by_snapped: BTreeMap<TorusPoint, &CoincidencePoint> = BTreeMap::new();
    for p in points {
        let snapped = p.snapped.as_ref().ok_or(EngineError::Unsnappable)?;
        by_snapped.insert(snapped.clone(), p);
    }
    let mut pairs: BTreeMap<TorusPoint, (CoincidencePoint, CoincidencePoint)> = BTreeMap::new();
    for (snapped, p) in &by_snapped {
        let partner_pt = s.apply(snapped);
        let partner = by_snapped
            .get(&partner_pt)
            .ok_or(EngineError::NotSClosed)?;
        let key = snapped.clone().min(partner_pt.clone());
        pairs
            .entry(key)
            .or_insert_with(|| ((*p).clone(), (*partner).clone()));
    }

    let mut grouped: BTreeMap<(ClassId, ClassId), Vec<(CoincidencePoint, CoincidencePoint)>> =
        BTreeMap::new();
    for (_, (a, b)) in pairs {
        let (ida, idb) = (a.usual_class.clone(), b.usual_class.clone());
        let key = if ida <= idb {
            (ida, idb)
        } else {
            (idb, ida)
        };
        grouped.entry(key).or_default().push((a, b));
    }

    let classes = grouped
        .into_iter()
        .map(|((id1, id2), pairs)| {
            let kind = if id1 == id2 {
                BUClassKind::Single
            } else {
                BUClassKind::Double
            };
            let usual_classes = match kind {
                BUClassKind::Single => (id1, None),
                BUClassKind::Double => (id1, Some(id2)),
            };
            BUClass {
                pairs,
                kind,
                usual_classes,
                pseudo_index: 0,
                essential: false,
            }
        })
        .collect();
    Ok(classes)
}

fn uses_mod2_branch(n: usize, orientation: Orientation) -> bool {
    match orientation {
        Orientation::Reverses => n % 2 == 0,
        Orientation::Preserves => n % 2 == 1,
    }
}

/// Pseudo-index of a Borsuk-Ulam class from the four-branch table; the value
/// is checked to be independent of representative and label choices.
pub fn pseudo_index(
    class: &BUClass,
    n: usize,
    orientation: Orientation,
) -> Result<i64, EngineError> {
    let mod2 = uses_mod2_branch(n, orientation);
    match (class.kind, mod2) {
        (BUClassKind::Single, true) => {
            let first: i64 = class.pairs.iter().map(|(a, _)| a.local_index as i64).sum();
            let second: i64 = class.pairs.iter().map(|(_, b)| b.local_index as i64).sum();
            if first.rem_euclid(2) != second.rem_euclid(2) {
                return Err(EngineError::InconsistentIndices(
                    "single-class parity differs between representatives".into(),
                ));
            }
            Ok(first.rem_euclid(2))
        }
        (BUClassKind::Single, false) => {
            let total: i64 = class
                .pairs
                .iter()
                .map(|(a, b)| a.local_index as i64 + b.local_index as i64)
                .sum();
            if total.rem_euclid(2) != 0 {
                return Err(EngineError::OddClassIndex);
            }
            Ok(total / 2)
        }
        (BUClassKind::Double, mod2) => {
            let c1 = &class.usual_classes.0;
            let sum_side = |id: &ClassId| -> i64 {
                class
                    .pairs
                    .iter()
                    .flat_map(|(a, b)| [a, b])
                    .filter(|p| &p.usual_class == id)
                    .map(|p| p.local_index as i64)
                    .sum()
            };
            let s1 = sum_side(c1);
            let s2 = class
                .usual_classes
                .1
                .as_ref()
                .map(&sum_side)
                .unwrap_or(s1);
            if mod2 {
                if s1.abs() != s2.abs() {
                    return Err(EngineError::InconsistentIndices(
                        "double-class magnitudes differ between labels".into(),
                    ));
                }
                Ok(s1.abs())
            } else {
                if s1 != s2 {
                    return Err(EngineError::InconsistentIndices(
                        "double-class indices differ between labels".into(),
                    ));
                }
                Ok(s1)
            }
        }
    }
}

/// Checks the index relation `ind(c) = (-1)^n ind(s(c))` (orientation
/// preserved) or `ind(c) = (-1)^{n-1} ind(s(c))` (reversed) for every pair.
pub fn index_parity_check(points: &[CoincidencePoint], s: &FreeInvolution, n: usize) -> bool {
    let factor: i32 = match s.orientation {
        Orientation::Preserves => {
            if n % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Orientation::Reverses => {
            if (n + 1) % 2 == 0 {
                1
            } else {
                -1
            }
        }
    };
    let mut by_snapped: BTreeMap<TorusPoint, i32> = BTreeMap::new();
    for p in points {
        if let Some(sn) = &p.snapped {
            by_snapped.insert(sn.clone(), p.local_index);
        }
    }
    points.iter().all(|p| {
        let Some(sn) = &p.snapped else { return false };
        let partner = s.apply(sn);
        match by_snapped.get(&partner) {
            Some(&pi) => p.local_index == factor * pi,
            None => false,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMethod {
    ClosedForm,
    ExactAffine,
    NumericOracle,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ReportDiagnostics {
    pub branch: String,
    /// Largest perturbation denominator in use.
    pub n0: u64,
    pub grid: usize,
    pub residual_max: f64,
    pub parity_law_ok: bool,
    pub total_index: i64,
    /// `det A(I - S)` as a string; the total index magnitude must match it.
    pub coincidence_det: String,
}

/// First-principles verdict with its class inventory.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NBUReport {
    pub nbu: u128,
    pub method: ReportMethod,
    pub classes: Vec<BUClass>,
    pub coincidence_pair_count: usize,
    pub diagnostics: ReportDiagnostics,
}

fn retryable(e: &EngineError) -> bool {
    matches!(
        e,
        EngineError::DegenerateJacobian
            | EngineError::NonIsolatedLocus
            | EngineError::Unsnappable
            | EngineError::NotCoincidence
            | EngineError::NotSClosed
    )
}

/// Full pipeline: realizer, numeric coincidence search, exact snapping and
/// classification, pairing, pseudo-indices, essential count. Degenerate
/// numerics are retried with enlarged perturbation denominators.
pub fn nbu_first_principles(
    m: &IntMatrix,
    s: &FreeInvolution,
    grid: usize,
    tol: f64,
) -> Result<NBUReport, EngineError> {
    let mut last: Option<EngineError> = None;
    for scale in [1u64, 2, 4] {
        let realizer = build_realizer_scaled(m, s, scale)?;
        match run_pipeline(m, s, &realizer, grid, tol) {
            Ok(report) => return Ok(report),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(EngineError::RetriesExhausted(
        last.map(|e| e.to_string()).unwrap_or_default(),
    ))
}

/// Locates raw coincidences: dense scan for n <= 3, analytic half-integer
/// placement (with residual verification) in higher dimension.
fn locate_raw(
    pm: &PerturbedMap,
    s: &FreeInvolution,
    grid: usize,
    tol: f64,
) -> Result<(Vec<Vec<f64>>, ReportMethod), EngineError> {
    let n = pm.dim();
    if n <= 3 {
        let pts = find_coincidences_numeric(pm, s, grid, tol)?;
        return Ok((pts, ReportMethod::NumericOracle));
    }
    let mut pts = Vec::new();
    let mut idx = vec![0u8; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&b| b as f64 * 0.5).collect();
        let res = coincidence_residual(pm, s, &x);
        if res.iter().all(|r| r.abs() < tol.max(1e-8)) {
            pts.push(x);
        }
        let mut axis = 0;
        while axis < n {
            idx[axis] += 1;
            if idx[axis] < 2 {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
        if axis == n {
            break;
        }
    }
    Ok((pts, ReportMethod::ExactAffine))
}

fn run_pipeline(
    m: &IntMatrix,
    s: &FreeInvolution,
    realizer: &Realizer,
    grid: usize,
    tol: f64,
) -> Result<NBUReport, EngineError> {
    let (raw, method) = locate_raw(&realizer.map, s, grid, tol)?;

    let ctx = ClassContext::new(m, s);
    let mut seen: BTreeMap<TorusPoint, CoincidencePoint> = BTreeMap::new();
    let mut residual_max = 0.0f64;
    for coords in raw {
        let mut snapped = Vec::with_capacity(coords.len());
        for &c in &coords {
            match snap_coordinate(c, realizer.snap_denominator) {
                Some(r) => snapped.push(r),
                None => return Err(EngineError::Unsnappable),
            }
        }
        let snapped = TorusPoint::new(snapped);
        if seen.contains_key(&snapped) {
            continue;
        }
        let class = ctx.class_of(&snapped)?;
        let local_index = local_index_numeric(&realizer.map, s, &coords)?;
        let res = coincidence_residual(&realizer.map, s, &coords);
        for r in &res {
            residual_max = residual_max.max(r.abs());
        }
        seen.insert(
            snapped.clone(),
            CoincidencePoint {
                coords,
                snapped: Some(snapped),
                local_index,
                usual_class: class,
            },
        );
    }
    let points: Vec<CoincidencePoint> = seen.into_values().collect();

    let mut classes = bu_pairing(&points, s)?;
    let n = m.dim();
    let mut essential_count: u128 = 0;
    for class in &mut classes {
        let pi = pseudo_index(class, n, s.orientation)?;
        class.pseudo_index = pi;
        class.essential = pi != 0;
        if class.essential {
            essential_count += 1;
        }
    }

    let parity_law_ok = index_parity_check(&points, s, n);
    let total_index: i64 = points.iter().map(|p| p.local_index as i64).sum();
    let pair_count = points.len() / 2;

    Ok(NBUReport {
        nbu: essential_count,
        method,
        classes,
        coincidence_pair_count: pair_count,
        diagnostics: ReportDiagnostics {
            branch: realizer.branch.clone(),
            n0: realizer.n0,
            grid,
            residual_max,
            parity_law_ok,
            total_index,
            coincidence_det: ctx.coincidence_det().to_string(),
        },
    })
}

/// Counts coincidence pairs of an arbitrary perturbed map (used for the
/// lower-bound property); indices and classes are not needed here.
pub fn count_pairs(
    pm: &PerturbedMap,
    s: &FreeInvolution,
    grid: usize,
    tol: f64,
) -> Result<usize, EngineError> {
    let pts = find_coincidences_numeric(pm, s, grid, tol)?;
    if pts.len() % 2 != 0 {
        return Err(EngineError::NotSClosed);
    }
    Ok(pts.len() / 2)
}
