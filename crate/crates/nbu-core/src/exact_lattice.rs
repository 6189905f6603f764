//! Exact integer and rational linear algebra on the torus.
//!
//! Everything in this module is computed over `BigInt`/`BigRational`, so the
//! congruence loci and cokernel structures used by the rest of the crate are
//! exact. The central tool is the Smith normal form `U * A * V = S` with
//! unimodular `U`, `V` and a divisibility chain on the diagonal.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::fmt;

/// Square integer matrix with arbitrary-precision entries, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from `i64` rows; panics if the shape is not square.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            entries: rows.iter().flatten().map(|&e| BigInt::from(e)).collect(),
        }
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.n + j] = v;
    }

    pub fn get_i64(&self, i: usize, j: usize) -> i64 {
        use num::ToPrimitive;
        self.get(i, j).to_i64().expect("entry exceeds i64")
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(other.entries.iter()) {
            *a -= b;
        }
        out
    }

    pub fn neg(&self) -> IntMatrix {
        let mut out = self.clone();
        for a in out.entries.iter_mut() {
            *a = -a.clone();
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                let mut acc = BigInt::zero();
                for k in 0..self.n {
                    acc += self.get(i, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    pub fn mul_rat_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for k in 0..self.n {
                    acc += BigRational::from(self.get(i, k).clone()) * &v[k];
                }
                acc
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = &num / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * m[n - 1][n - 1].clone()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.entries.swap(a * self.n + j, b * self.n + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.n {
            self.entries.swap(i * self.n + a, i * self.n + b);
        }
    }

    /// row_a += c * row_b
    fn add_row_mul(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.n {
            let v = self.get(b, j) * c;
            self.entries[a * self.n + j] += v;
        }
    }

    /// col_a += c * col_b
    fn add_col_mul(&mut self, a: usize, b: usize, c: &BigInt) {
        for i in 0..self.n {
            let v = self.get(i, b) * c;
            self.entries[i * self.n + a] += v;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.n {
            let v = -self.get(a, j).clone();
            self.set(a, j, v);
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

/// `U * A * V = S` with `U`, `V` unimodular and `S` diagonal with
/// `d_1 | d_2 | ... | d_r`, zeros afterwards, all diagonal entries >= 0.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.dim()).map(|i| self.s.get(i, i).clone()).collect()
    }
}

/// Smith normal form of a square integer matrix.
///
/// Pivots are chosen by minimal absolute value with lowest row-major index as
/// tie-break, so the output is deterministic for a fixed input.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let n = a.dim();
    let mut s = a.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);

    for k in 0..n {
        'pivot: loop {
            // Minimal-absolute-value pivot in the trailing submatrix.
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if s.get(i, j).is_zero() {
                        continue;
                    }
                    best = match best {
                        None => Some((i, j)),
                        Some((bi, bj)) => {
                            if s.get(i, j).abs() < s.get(bi, bj).abs() {
                                Some((i, j))
                            } else {
                                Some((bi, bj))
                            }
                        }
                    };
                }
            }
            let (pi, pj) = match best {
                None => break 'pivot, // trailing block is zero
                Some(p) => p,
            };
            s.swap_rows(k, pi);
            u.swap_rows(k, pi);
            s.swap_cols(k, pj);
            v.swap_cols(k, pj);

            // Reduce column k below the pivot.
            let mut dirty = false;
            for i in k + 1..n {
                if s.get(i, k).is_zero() {
                    continue;
                }
                let q = rounded_div(s.get(i, k), s.get(k, k));
                if !q.is_zero() {
                    let c = -q;
                    s.add_row_mul(i, k, &c);
                    u.add_row_mul(i, k, &c);
                }
                if !s.get(i, k).is_zero() {
                    dirty = true;
                }
            }
            // Reduce row k right of the pivot.
            for j in k + 1..n {
                if s.get(k, j).is_zero() {
                    continue;
                }
                let q = rounded_div(s.get(k, j), s.get(k, k));
                if !q.is_zero() {
                    let c = -q;
                    s.add_col_mul(j, k, &c);
                    v.add_col_mul(j, k, &c);
                }
                if !s.get(k, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue 'pivot; // a smaller remainder became the new pivot candidate
            }

            // Row and column are clear; enforce pivot | trailing entries.
            let mut fixed = true;
            'scan: for i in k + 1..n {
                for j in k + 1..n {
                    if !(s.get(i, j) % s.get(k, k)).is_zero() {
                        s.add_row_mul(k, i, &BigInt::one());
                        u.add_row_mul(k, i, &BigInt::one());
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break 'pivot;
            }
        }

        if s.get(k, k).is_negative() {
            s.negate_row(k);
            u.negate_row(k);
        }
    }

    let rank = (0..n).filter(|&i| !s.get(i, i).is_zero()).count();
    SmithDecomposition { u, s, v, rank }
}

/// Division with the remainder minimized in absolute value.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Fractional part, exact: result lies in `[0, 1)`.
pub fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// Distance to the nearest integer on the circle.
pub fn circle_dist(r: &BigRational) -> BigRational {
    let f = frac(r);
    let one_minus = BigRational::one() - &f;
    if f <= one_minus {
        f
    } else {
        one_minus
    }
}

fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

/// How the solution locus of `A x = b (mod Z^n)` sits inside the torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionKind {
    Empty,
    All,
    CosetUnion,
}

/// Exact solution locus of a linear congruence on the torus: a finite union
/// of parallel affine subtori `particular + translate + span(subtorus_basis)`.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    pub kind: SolutionKind,
    pub particular: Vec<BigRational>,
    pub subtorus_basis: Vec<Vec<BigRational>>,
    pub translates: Vec<Vec<BigRational>>,
}

impl SolutionSet {
    pub fn empty(n: usize) -> Self {
        SolutionSet {
            kind: SolutionKind::Empty,
            particular: vec![BigRational::zero(); n],
            subtorus_basis: Vec::new(),
            translates: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.kind == SolutionKind::Empty
    }

    /// Number of connected components (0 when empty).
    pub fn component_count(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.translates.len()
        }
    }

    pub fn dim(&self) -> usize {
        self.subtorus_basis.len()
    }

    /// All points of a zero-dimensional solution set, reduced to `[0,1)^n`.
    pub fn enumerate_points(&self) -> Vec<Vec<BigRational>> {
        assert!(self.subtorus_basis.is_empty(), "locus is not finite");
        self.translates
            .iter()
            .map(|t| {
                self.particular
                    .iter()
                    .zip(t.iter())
                    .map(|(p, o)| frac(&(p + o)))
                    .collect()
            })
            .collect()
    }
}

/// Solves `A x = b (mod Z^n)` for `x` in the torus, exactly.
pub fn solve_torus_congruence(a: &IntMatrix, b: &[BigRational]) -> SolutionSet {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let snf = smith_normal_form(a);

    // U (A x - b) in Z^n  <=>  S y = U b (mod Z^n) with y = V^{-1} x.
    let ub: Vec<BigRational> = (0..n)
        .map(|i| {
            let mut acc = BigRational::zero();
            for k in 0..n {
                acc += BigRational::from(snf.u.get(i, k).clone()) * &b[k];
            }
            acc
        })
        .collect();

    let mut y_base = vec![BigRational::zero(); n];
    let mut torsion: Vec<(usize, BigInt)> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    for i in 0..n {
        let d = snf.s.get(i, i);
        if d.is_zero() {
            if !is_integer(&ub[i]) {
                return SolutionSet::empty(n);
            }
            free.push(i);
        } else {
            y_base[i] = frac(&(&ub[i] / BigRational::from(d.clone())));
            if *d > BigInt::one() {
                torsion.push((i, d.clone()));
            }
        }
    }

    let v_rat = |j: usize| -> Vec<BigRational> {
        (0..n)
            .map(|i| BigRational::from(snf.v.get(i, j).clone()))
            .collect()
    };

    // x = V y; basis columns of V span the free directions.
    let particular: Vec<BigRational> = {
        let x = snf.v.mul_rat_vec(&y_base);
        x.iter().map(frac).collect()
    };
    let subtorus_basis: Vec<Vec<BigRational>> = free.iter().map(|&j| v_rat(j)).collect();

    // Translate offsets: lexicographic enumeration of the SNF residues
    // k_i/d_i, carried as integer numerators over the common denominator L
    // to avoid per-step rational normalization.
    let torsion_l = torsion
        .iter()
        .fold(BigInt::one(), |acc, (_, d)| acc.lcm(d));
    let mut translate_nums: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]];
    for (idx, d) in &torsion {
        use num::ToPrimitive;
        let dd = d.to_u64().expect("torsion factor exceeds u64") as i64;
        let step_scale = &torsion_l / d;
        let col: Vec<BigInt> = (0..n).map(|i| snf.v.get(i, *idx).clone()).collect();
        let mut next = Vec::with_capacity(translate_nums.len() * dd as usize);
        for t in &translate_nums {
            for k in 0..dd {
                let kk = BigInt::from(k) * &step_scale;
                let mut nt = t.clone();
                for (c, base) in col.iter().zip(nt.iter_mut()) {
                    *base = (&*base + c * &kk).mod_floor(&torsion_l);
                }
                next.push(nt);
            }
        }
        translate_nums = next;
    }
    let translates: Vec<Vec<BigRational>> = translate_nums
        .into_iter()
        .map(|t| {
            t.into_iter()
                .map(|x| BigRational::new(x, torsion_l.clone()))
                .collect()
        })
        .collect();

    let kind = if snf.rank == 0 {
        SolutionKind::All
    } else {
        SolutionKind::CosetUnion
    };
    SolutionSet {
        kind,
        particular,
        subtorus_basis,
        translates,
    }
}

/// Checks `A x = b (mod Z^n)` exactly.
pub fn satisfies_congruence(a: &IntMatrix, b: &[BigRational], x: &[BigRational]) -> bool {
    let ax = a.mul_rat_vec(x);
    ax.iter().zip(b.iter()).all(|(l, r)| is_integer(&(l - r)))
}

/// Invariant-factor description of `Z^n / A Z^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroupStructure {
    /// Nontrivial invariant factors, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl AbelianGroupStructure {
    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors
            .iter()
            .fold(BigInt::one(), |acc, f| acc * f)
    }
}

pub fn cokernel(a: &IntMatrix) -> AbelianGroupStructure {
    let snf = smith_normal_form(a);
    let n = a.dim();
    let invariant_factors = (0..n)
        .map(|i| snf.s.get(i, i).clone())
        .filter(|d| *d > BigInt::one())
        .collect();
    AbelianGroupStructure {
        invariant_factors,
        free_rank: n - snf.rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn is_unimodular(m: &IntMatrix) -> bool {
        m.det().abs().is_one()
    }

    fn check_snf(a: &IntMatrix) {
        let snf = smith_normal_form(a);
        assert_eq!(snf.u.mul(a).mul(&snf.v), snf.s, "U*A*V != S for {:?}", a);
        assert!(is_unimodular(&snf.u));
        assert!(is_unimodular(&snf.v));
        let d = snf.diagonal();
        for i in 0..d.len() {
            assert!(!d[i].is_negative());
            if i + 1 < d.len() && !d[i + 1].is_zero() {
                assert!(!d[i].is_zero(), "zero before nonzero on diagonal");
                assert!((&d[i + 1] % &d[i]).is_zero(), "divisibility chain broken");
            }
        }
        let det_s: BigInt = d.iter().product();
        assert_eq!(det_s.abs(), a.det().abs());
    }

    #[test]
    fn snf_identity() {
        let a = IntMatrix::identity(3);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.s, IntMatrix::identity(3));
        assert_eq!(snf.rank, 3);
    }

    #[test]
    fn snf_already_diagonal() {
        let a = IntMatrix::from_rows(&[vec![2, 0], vec![0, 4]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.s, a);
    }

    #[test]
    fn snf_two_by_two() {
        // Independent oracle: d1 = gcd of all entries, d1*d2 = |det|.
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let entries = [2i64, 4, 6, 8];
        let d1 = entries.iter().fold(0i64, |g, &e| num::integer::gcd(g, e));
        let det = (2 * 8 - 4 * 6i64).abs();
        assert_eq!(d1, 2);
        assert_eq!(det / d1, 4);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.s.get_i64(0, 0), 2);
        assert_eq!(snf.s.get_i64(1, 1), 4);
        check_snf(&a);
    }

    #[test]
    fn snf_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=4);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            check_snf(&IntMatrix::from_rows(&rows));
        }
    }

    #[test]
    fn congruence_doubling_map() {
        let a = IntMatrix::from_rows(&[vec![2]]);
        let sol = solve_torus_congruence(&a, &[rat(0, 1)]);
        let pts = sol.enumerate_points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0][0], rat(0, 1));
        assert_eq!(pts[1][0], rat(1, 2));

        let sol = solve_torus_congruence(&a, &[rat(1, 2)]);
        let mut pts: Vec<BigRational> =
            sol.enumerate_points().into_iter().map(|p| p[0].clone()).collect();
        pts.sort();
        assert_eq!(pts, vec![rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn congruence_with_free_direction() {
        // Two components {x=0} and {x=1/2}, each a full circle in y.
        let a = IntMatrix::from_rows(&[vec![2, 0], vec![0, 0]]);
        let sol = solve_torus_congruence(&a, &[rat(0, 1), rat(0, 1)]);
        assert_eq!(sol.kind, SolutionKind::CosetUnion);
        assert_eq!(sol.component_count(), 2);
        assert_eq!(sol.dim(), 1);
    }

    #[test]
    fn congruence_unsolvable() {
        let a = IntMatrix::from_rows(&[vec![0]]);
        let sol = solve_torus_congruence(&a, &[rat(1, 3)]);
        assert!(sol.is_empty());
    }

    #[test]
    fn congruence_substitution_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=3);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-4..=4)).collect())
                .collect();
            let a = IntMatrix::from_rows(&rows);
            let b: Vec<BigRational> = (0..n)
                .map(|_| rat(rng.gen_range(0..6), rng.gen_range(1..=6)))
                .collect();
            let sol = solve_torus_congruence(&a, &b);
            if sol.is_empty() {
                continue;
            }
            for t in &sol.translates {
                let pt: Vec<BigRational> = sol
                    .particular
                    .iter()
                    .zip(t.iter())
                    .map(|(p, o)| frac(&(p + o)))
                    .collect();
                assert!(satisfies_congruence(&a, &b, &pt));
                if sol.subtorus_basis.is_empty() {
                    continue;
                }
                // Random points along the subtorus stay solutions.
                for s in 0..16 {
                    let mut q = pt.clone();
                    for (bi, basis) in sol.subtorus_basis.iter().enumerate() {
                        let step = rat(s as i64 * 3 + bi as i64 + 1, 17);
                        for (qc, bc) in q.iter_mut().zip(basis.iter()) {
                            *qc = frac(&(&*qc + bc * &step));
                        }
                    }
                    assert!(satisfies_congruence(&a, &b, &q));
                }
            }
        }
    }

    #[test]
    fn cokernel_examples() {
        let g = cokernel(&IntMatrix::from_rows(&[vec![2]]));
        assert_eq!(g.invariant_factors, vec![BigInt::from(2)]);
        assert_eq!(g.free_rank, 0);

        let g = cokernel(&IntMatrix::from_rows(&[vec![0]]));
        assert!(g.invariant_factors.is_empty());
        assert_eq!(g.free_rank, 1);

        let g = cokernel(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 4]]));
        assert_eq!(g.invariant_factors, vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(g.free_rank, 0);
    }

    #[test]
    fn cokernel_torsion_order_matches_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect())
                .collect();
            let a = IntMatrix::from_rows(&rows);
            let det = a.det();
            if det.is_zero() {
                continue;
            }
            assert_eq!(cokernel(&a).torsion_order(), det.abs());
        }
    }

    #[test]
    fn rounded_div_minimizes_remainder() {
        for a in -20i64..=20 {
            for b in [-7i64, -3, 2, 5] {
                let q = rounded_div(&BigInt::from(a), &BigInt::from(b));
                let r = BigInt::from(a) - &q * BigInt::from(b);
                assert!(r.abs().to_i64().unwrap() * 2 <= b.abs());
            }
        }
    }
}
