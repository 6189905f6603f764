//! Affine self-maps of the n-torus and the free-involution catalog.
//!
//! A homotopy class of self-maps of `T^n = R^n / Z^n` is represented by an
//! integer matrix together with a rational translation. The catalog lists the
//! normal forms of the free involutions in dimensions 1, 2, 3 and the four
//! generalized families in higher dimension; custom affine involutions are
//! accepted after an exact involution/freeness check.

use crate::exact_lattice::{frac, solve_torus_congruence, IntMatrix};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// Point of `T^n` with exact rational coordinates in `[0,1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    coords: Vec<BigRational>,
}

impl TorusPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        TorusPoint {
            coords: coords.iter().map(frac).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        TorusPoint {
            coords: vec![BigRational::zero(); n],
        }
    }

    pub fn from_i64_pairs(pairs: &[(i64, i64)]) -> Self {
        TorusPoint::new(
            pairs
                .iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num::ToPrimitive;
        self.coords.iter().map(|c| c.to_f64().unwrap()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", format_point(&self.coords))
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_point(&self.coords))
    }
}

/// Affine self-map `x -> L x + t` of the torus.
#[derive(Clone, PartialEq, Eq)]
pub struct AffineTorusMap {
    pub linear: IntMatrix,
    pub translation: TorusPoint,
}

impl AffineTorusMap {
    pub fn new(linear: IntMatrix, translation: TorusPoint) -> Self {
        assert_eq!(linear.dim(), translation.dim());
        AffineTorusMap {
            linear,
            translation,
        }
    }

    pub fn linear_only(linear: IntMatrix) -> Self {
        let n = linear.dim();
        AffineTorusMap {
            linear,
            translation: TorusPoint::zero(n),
        }
    }

    pub fn identity(n: usize) -> Self {
        AffineTorusMap::linear_only(IntMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, p: &TorusPoint) -> TorusPoint {
        let lp = self.linear.mul_rat_vec(p.coords());
        TorusPoint::new(
            lp.iter()
                .zip(self.translation.coords())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.linear == IntMatrix::identity(self.dim()) && self.translation.is_zero()
    }
}

impl fmt::Debug for AffineTorusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.linear, self.translation)
    }
}

/// `(f o g)(x) = f(g(x))`; errors on dimension mismatch.
pub fn compose(f: &AffineTorusMap, g: &AffineTorusMap) -> Result<AffineTorusMap, TorusError> {
    if f.dim() != g.dim() {
        return Err(TorusError::DimensionMismatch {
            left: f.dim(),
            right: g.dim(),
        });
    }
    let linear = f.linear.mul(&g.linear);
    let ft = f.linear.mul_rat_vec(g.translation.coords());
    let translation = TorusPoint::new(
        ft.iter()
            .zip(f.translation.coords())
            .map(|(a, b)| a + b)
            .collect(),
    );
    Ok(AffineTorusMap::new(linear, translation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Orientation {
    Preserves,
    Reverses,
}

/// Catalog identifiers for the involution normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum InvolutionTag {
    T1Antipodal,
    T2Tau1,
    T2Tau2,
    T3H1,
    T3H2,
    T3H3,
    T3H4,
    TnTau1,
    TnTau2,
    TnTau3,
    TnTau4,
    Custom,
}

impl InvolutionTag {
    pub fn name(&self) -> &'static str {
        match self {
            InvolutionTag::T1Antipodal => "antipodal",
            InvolutionTag::T2Tau1 | InvolutionTag::TnTau1 => "tau1",
            InvolutionTag::T2Tau2 | InvolutionTag::TnTau2 => "tau2",
            InvolutionTag::T3H1 => "h1",
            InvolutionTag::T3H2 => "h2",
            InvolutionTag::T3H3 => "h3",
            InvolutionTag::T3H4 => "h4",
            InvolutionTag::TnTau3 => "tau3",
            InvolutionTag::TnTau4 => "tau4",
            InvolutionTag::Custom => "custom",
        }
    }
}

/// A free involution of the torus, validated on construction.
#[derive(Clone, Debug)]
pub struct FreeInvolution {
    pub map: AffineTorusMap,
    pub tag: InvolutionTag,
    pub orientation: Orientation,
}

impl FreeInvolution {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn apply(&self, p: &TorusPoint) -> TorusPoint {
        self.map.apply(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorusError {
    DimensionMismatch { left: usize, right: usize },
    UnknownTag { dim: usize, tag: String },
    NotInvolution,
    NotFree,
    Parse(String),
}

impl fmt::Display for TorusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            TorusError::UnknownTag { dim, tag } => {
                write!(f, "unknown involution tag `{tag}` for dimension {dim}")
            }
            TorusError::NotInvolution => write!(f, "map is not an involution"),
            TorusError::NotFree => write!(f, "involution has fixed points"),
            TorusError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for TorusError {}

/// Verdict of the exact involution/freeness validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvolutionCheck {
    Ok,
    NotInvolution,
    NotFree,
}

/// `Ok` iff `s o s = id` exactly and `s(x) = x` has no solution on the torus.
pub fn validate_free_involution(s: &AffineTorusMap) -> InvolutionCheck {
    let ss = compose(s, s).expect("same dimension");
    if !ss.is_identity() {
        return InvolutionCheck::NotInvolution;
    }
    // Fixed points solve (S - I) x = -t (mod Z^n).
    let n = s.dim();
    let si = s.linear.sub(&IntMatrix::identity(n));
    let rhs: Vec<BigRational> = s.translation.coords().iter().map(|t| -t.clone()).collect();
    if solve_torus_congruence(&si, &rhs).is_empty() {
        InvolutionCheck::Ok
    } else {
        InvolutionCheck::NotFree
    }
}

fn orientation_of(linear: &IntMatrix) -> Orientation {
    if linear.det().is_positive() {
        Orientation::Preserves
    } else {
        Orientation::Reverses
    }
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// Looks up an involution normal form; errors on unknown or mismatched tags.
pub fn catalog_involution(dim: usize, tag: InvolutionTag) -> Result<FreeInvolution, TorusError> {
    let bad = || TorusError::UnknownTag {
        dim,
        tag: format!("{tag:?}"),
    };
    let map = match (dim, tag) {
        (1, InvolutionTag::T1Antipodal) => {
            let mut t = vec![BigRational::zero()];
            t[0] = half();
            AffineTorusMap::new(IntMatrix::identity(1), TorusPoint::new(t))
        }
        (2, InvolutionTag::T2Tau1) => AffineTorusMap::new(
            IntMatrix::identity(2),
            TorusPoint::new(vec![half(), BigRational::zero()]),
        ),
        (2, InvolutionTag::T2Tau2) => AffineTorusMap::new(
            IntMatrix::from_rows(&[vec![-1, 0], vec![0, 1]]),
            TorusPoint::new(vec![BigRational::zero(), half()]),
        ),
        (3, InvolutionTag::T3H1) => AffineTorusMap::new(
            IntMatrix::identity(3),
            TorusPoint::new(vec![BigRational::zero(), BigRational::zero(), half()]),
        ),
        (3, InvolutionTag::T3H2) => AffineTorusMap::new(
            IntMatrix::from_rows(&[vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]]),
            TorusPoint::new(vec![BigRational::zero(), BigRational::zero(), half()]),
        ),
        (3, InvolutionTag::T3H3) => AffineTorusMap::new(
            IntMatrix::from_rows(&[vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]]),
            TorusPoint::new(vec![BigRational::zero(), BigRational::zero(), half()]),
        ),
        (3, InvolutionTag::T3H4) => AffineTorusMap::new(
            IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, -1, 0], vec![0, 0, 1]]),
            TorusPoint::new(vec![BigRational::zero(), BigRational::zero(), half()]),
        ),
        (n, InvolutionTag::TnTau1) if n > 3 => {
            let mut t = vec![BigRational::zero(); n];
            t[n - 1] = half();
            AffineTorusMap::new(IntMatrix::identity(n), TorusPoint::new(t))
        }
        (n, InvolutionTag::TnTau2) if n > 3 => {
            let mut m = IntMatrix::identity(n).neg();
            m.set(n - 1, n - 1, BigInt::one());
            let mut t = vec![BigRational::zero(); n];
            t[n - 1] = half();
            AffineTorusMap::new(m, TorusPoint::new(t))
        }
        (n, InvolutionTag::TnTau3) if n > 3 => {
            let mut m = IntMatrix::identity(n);
            m.set(n - 2, n - 2, BigInt::from(-1));
            let mut t = vec![BigRational::zero(); n];
            t[n - 1] = half();
            AffineTorusMap::new(m, TorusPoint::new(t))
        }
        (n, InvolutionTag::TnTau4) if n > 3 => {
            let mut m = IntMatrix::identity(n);
            m.set(0, 1, BigInt::one());
            m.set(1, 1, BigInt::from(-1));
            let mut t = vec![BigRational::zero(); n];
            t[n - 1] = half();
            AffineTorusMap::new(m, TorusPoint::new(t))
        }
        _ => return Err(bad()),
    };
    debug_assert_eq!(validate_free_involution(&map), InvolutionCheck::Ok);
    let orientation = orientation_of(&map.linear);
    Ok(FreeInvolution {
        map,
        tag,
        orientation,
    })
}

/// Wraps a custom affine map as a free involution after exact validation.
pub fn custom_involution(map: AffineTorusMap) -> Result<FreeInvolution, TorusError> {
    match validate_free_involution(&map) {
        InvolutionCheck::Ok => {
            let orientation = orientation_of(&map.linear);
            Ok(FreeInvolution {
                map,
                tag: InvolutionTag::Custom,
                orientation,
            })
        }
        InvolutionCheck::NotInvolution => Err(TorusError::NotInvolution),
        InvolutionCheck::NotFree => Err(TorusError::NotFree),
    }
}

/// Given `S H = H C` for the linear parts, decides whether some affine
/// `h = (H, t_h)` conjugates the catalog map `c` into `s`: the translation
/// must solve `(I - S) t_h = t_s - H t_c (mod Z^n)`.
pub fn solvable_translation_conjugacy(
    s: &AffineTorusMap,
    c: &AffineTorusMap,
    h_linear: &IntMatrix,
) -> bool {
    let n = s.dim();
    let lhs = IntMatrix::identity(n).sub(&s.linear);
    let htc = h_linear.mul_rat_vec(c.translation.coords());
    let rhs: Vec<BigRational> = s
        .translation
        .coords()
        .iter()
        .zip(htc.iter())
        .map(|(ts, v)| ts - v)
        .collect();
    !solve_torus_congruence(&lhs, &rhs).is_empty()
}

/// Resolves a textual tag (`antipodal`, `tau1`, `h3`, ...) for a dimension.
pub fn tag_for_dim(dim: usize, name: &str) -> Result<InvolutionTag, TorusError> {
    let tag = match (dim, name) {
        (1, "antipodal") => InvolutionTag::T1Antipodal,
        (2, "tau1") => InvolutionTag::T2Tau1,
        (2, "tau2") => InvolutionTag::T2Tau2,
        (3, "h1") => InvolutionTag::T3H1,
        (3, "h2") => InvolutionTag::T3H2,
        (3, "h3") => InvolutionTag::T3H3,
        (3, "h4") => InvolutionTag::T3H4,
        (n, "tau1") if n > 3 => InvolutionTag::TnTau1,
        (n, "tau2") if n > 3 => InvolutionTag::TnTau2,
        (n, "tau3") if n > 3 => InvolutionTag::TnTau3,
        (n, "tau4") if n > 3 => InvolutionTag::TnTau4,
        _ => {
            return Err(TorusError::UnknownTag {
                dim,
                tag: name.to_string(),
            })
        }
    };
    Ok(tag)
}

/// Parses `"1,0,0;0,1,0;1,1,2"` into a square matrix.
pub fn parse_int_matrix(text: &str) -> Result<IntMatrix, TorusError> {
    let rows: Result<Vec<Vec<BigInt>>, TorusError> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    BigInt::from_str(e.trim())
                        .map_err(|_| TorusError::Parse(format!("bad integer `{e}`")))
                })
                .collect()
        })
        .collect();
    let rows = rows?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(TorusError::Parse("matrix is not square".into()));
    }
    Ok(IntMatrix::from_bigint_rows(rows))
}

/// Parses `"0,0,1/2"` into a torus point.
pub fn parse_torus_point(text: &str) -> Result<TorusPoint, TorusError> {
    let coords: Result<Vec<BigRational>, TorusError> = text
        .split(',')
        .map(|e| parse_rational(e.trim()))
        .collect();
    Ok(TorusPoint::new(coords?))
}

pub fn parse_rational(text: &str) -> Result<BigRational, TorusError> {
    if let Some((p, q)) = text.split_once('/') {
        let num = BigInt::from_str(p.trim())
            .map_err(|_| TorusError::Parse(format!("bad rational `{text}`")))?;
        let den = BigInt::from_str(q.trim())
            .map_err(|_| TorusError::Parse(format!("bad rational `{text}`")))?;
        if den.is_zero() {
            return Err(TorusError::Parse(format!("zero denominator in `{text}`")));
        }
        Ok(BigRational::new(num, den))
    } else {
        let num = BigInt::from_str(text)
            .map_err(|_| TorusError::Parse(format!("bad rational `{text}`")))?;
        Ok(BigRational::from(num))
    }
}

pub fn format_point(coords: &[BigRational]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
