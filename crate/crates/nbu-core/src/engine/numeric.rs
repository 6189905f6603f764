//! Numeric location of coincidences: dense grid scan with periodic boundary,
//! Newton refinement (finite-difference fallback near the corner of the odd
//! half-frequency terms), deduplication, and local index computation as the
//! sign of the coincidence Jacobian determinant.

use super::{frac_f64, EngineError, PerturbedMap};
use crate::torus_geometry::FreeInvolution;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use std::f64::consts::PI;

const DEDUP_RADIUS: f64 = 1e-6;
const STEP_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 60;
const MAXN: usize = 8;

fn circle_dist_f64(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

struct TermF64 {
    target: usize,
    source: usize,
    amp: f64,
    m: f64,
    odd: bool,
}

/// Allocation-free evaluator for the coincidence map `x -> f'(x) - f'(s(x))`
/// and its Jacobian.
pub(crate) struct CoinEval {
    n: usize,
    base: [[f64; MAXN]; MAXN],
    s_lin: [[f64; MAXN]; MAXN],
    s_tr: [f64; MAXN],
    terms: Vec<TermF64>,
}

impl CoinEval {
    pub(crate) fn new(pm: &PerturbedMap, s: &FreeInvolution) -> Self {
        let n = pm.dim();
        assert!(n <= MAXN, "dimension exceeds evaluator capacity");
        let mut base = [[0.0; MAXN]; MAXN];
        let mut s_lin = [[0.0; MAXN]; MAXN];
        let mut s_tr = [0.0; MAXN];
        for i in 0..n {
            for j in 0..n {
                base[i][j] = pm.base.linear.get_i64(i, j) as f64;
                s_lin[i][j] = s.map.linear.get_i64(i, j) as f64;
            }
        }
        for (i, t) in s.map.translation.to_f64().into_iter().enumerate() {
            s_tr[i] = t;
        }
        let terms = pm
            .terms
            .iter()
            .map(|t| TermF64 {
                target: t.target,
                source: t.source,
                amp: t.amplitude_f64(),
                m: t.half_freq as f64,
                odd: t.half_freq % 2 == 1,
            })
            .collect();
        CoinEval {
            n,
            base,
            s_lin,
            s_tr,
            terms,
        }
    }

    fn involution(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = self.s_tr[i];
            for j in 0..self.n {
                acc += self.s_lin[i][j] * x[j];
            }
            out[i] = acc;
        }
    }

    /// Difference of lifts, not reduced.
    fn difference(&self, x: &[f64], sx: &mut [f64], out: &mut [f64]) {
        self.involution(x, sx);
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.base[i][j] * (x[j] - sx[j]);
            }
            out[i] = acc;
        }
        for t in &self.terms {
            let a = (PI * t.m * frac_f64(x[t.source])).sin();
            let b = (PI * t.m * frac_f64(sx[t.source])).sin();
            out[t.target] += t.amp * (a - b);
        }
    }

    /// Residual reduced componentwise to `[-1/2, 1/2)`.
    pub(crate) fn residual(&self, x: &[f64], sx: &mut [f64], out: &mut [f64]) {
        self.difference(x, sx, out);
        for v in out.iter_mut().take(self.n) {
            *v -= v.round();
        }
    }

    fn near_corner(t: f64) -> bool {
        let f = frac_f64(t);
        f < 1e-9 || f > 1.0 - 1e-9
    }

    /// Analytic Jacobian; falls back to central differences when an odd
    /// half-frequency term sits at its corner.
    fn jacobian(&self, x: &[f64], jac: &mut [[f64; MAXN]; MAXN]) {
        let n = self.n;
        let mut sx = [0.0; MAXN];
        self.involution(x, &mut sx);
        let needs_fd = self.terms.iter().any(|t| {
            t.odd && (Self::near_corner(x[t.source]) || Self::near_corner(sx[t.source]))
        });
        if needs_fd {
            self.jacobian_fd(x, jac);
            return;
        }
        // A (I - S) plus the chain-rule contributions of each term.
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.base[i][k]
                        * (if k == j { 1.0 } else { 0.0 } - self.s_lin[k][j]);
                }
                jac[i][j] = acc;
            }
        }
        for t in &self.terms {
            let da = t.amp * PI * t.m * (PI * t.m * frac_f64(x[t.source])).cos();
            jac[t.target][t.source] += da;
            let db = t.amp * PI * t.m * (PI * t.m * frac_f64(sx[t.source])).cos();
            for j in 0..n {
                jac[t.target][j] -= db * self.s_lin[t.source][j];
            }
        }
    }

    fn jacobian_fd(&self, x: &[f64], jac: &mut [[f64; MAXN]; MAXN]) {
        let n = self.n;
        let h = 1e-7;
        let mut xp = [0.0; MAXN];
        let mut xm = [0.0; MAXN];
        let mut sx = [0.0; MAXN];
        let mut rp = [0.0; MAXN];
        let mut rm = [0.0; MAXN];
        xp[..n].copy_from_slice(&x[..n]);
        xm[..n].copy_from_slice(&x[..n]);
        for c in 0..n {
            xp[c] += h;
            xm[c] -= h;
            self.difference(&xp[..n], &mut sx, &mut rp);
            self.difference(&xm[..n], &mut sx, &mut rm);
            for r in 0..n {
                jac[r][c] = (rp[r] - rm[r]) / (2.0 * h);
            }
            xp[c] = x[c];
            xm[c] = x[c];
        }
    }

    /// Per-component slope bounds `sum_j |d g_i / d x_j|`.
    fn slopes(&self) -> [f64; MAXN] {
        let n = self.n;
        let mut out = [0.0; MAXN];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.base[i][k]
                        * (if k == j { 1.0 } else { 0.0 } - self.s_lin[k][j]);
                }
                out[i] += acc.abs();
            }
        }
        for t in &self.terms {
            let d = t.amp * PI * t.m;
            out[t.target] += d;
            let srow: f64 = (0..n).map(|j| self.s_lin[t.source][j].abs()).sum();
            out[t.target] += d * srow;
        }
        out
    }
}

/// Solves `J d = r`; `None` when the pivot degenerates.
fn solve_linear(
    jac: &[[f64; MAXN]; MAXN],
    rhs: &[f64],
    n: usize,
    out: &mut [f64],
) -> Option<()> {
    let mut j = *jac;
    let mut r = [0.0; MAXN];
    r[..n].copy_from_slice(&rhs[..n]);
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if j[row][col].abs() > j[piv][col].abs() {
                piv = row;
            }
        }
        if j[piv][col].abs() < 1e-14 {
            return None;
        }
        j.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..n {
            let f = j[row][col] / j[col][col];
            for k in col..n {
                j[row][k] -= f * j[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = r[col];
        for k in col + 1..n {
            acc -= j[col][k] * out[k];
        }
        out[col] = acc / j[col][col];
    }
    Some(())
}

fn newton_refine(ev: &CoinEval, start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = ev.n;
    let mut x = [0.0; MAXN];
    x[..n].copy_from_slice(&start[..n]);
    let mut sx = [0.0; MAXN];
    let mut res = [0.0; MAXN];
    let mut step = [0.0; MAXN];
    let mut jac = [[0.0; MAXN]; MAXN];
    let mut best = f64::INFINITY;
    for iter in 0..MAX_NEWTON {
        ev.residual(&x[..n], &mut sx, &mut res);
        let rn = res[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rn < best {
            best = rn;
        }
        // Seeds sitting on a blocked residual plateau make no progress.
        if iter == 4 && best > 1e-4 {
            return None;
        }
        ev.jacobian(&x[..n], &mut jac);
        solve_linear(&jac, &res[..n], n, &mut step)?;
        let sn = step[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            x[i] = frac_f64(x[i] - step[i]);
        }
        if sn < STEP_TOL {
            ev.residual(&x[..n], &mut sx, &mut res);
            let rn = res[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return if rn < tol {
                Some(x[..n].to_vec())
            } else {
                None
            };
        }
    }
    None
}

/// All isolated coincidences of `(f', f' o s)` found by a dense scan at the
/// given per-axis resolution, refined to the residual tolerance and
/// deduplicated; lexicographically sorted.
pub fn find_coincidences_numeric(
    pm: &PerturbedMap,
    s: &FreeInvolution,
    grid: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>, EngineError> {
    assert!(grid >= 16, "grid resolution below 16");
    let ev = CoinEval::new(pm, s);
    let n = ev.n;
    let slopes = ev.slopes();
    let mut thresh = [0.0f64; MAXN];
    for i in 0..n {
        thresh[i] = 1.2 * slopes[i] * n as f64 / (2.0 * grid as f64);
    }

    let mut accepted: Vec<Vec<f64>> = Vec::new();
    let mut idx = [0usize; MAXN];
    let mut x = [0.0f64; MAXN];
    let mut sx = [0.0f64; MAXN];
    let mut res = [0.0f64; MAXN];
    let inv_grid = 1.0 / grid as f64;
    loop {
        for i in 0..n {
            x[i] = idx[i] as f64 * inv_grid;
        }
        ev.residual(&x[..n], &mut sx, &mut res);
        let is_seed = (0..n).all(|i| res[i].abs() <= thresh[i]);
        if is_seed {
            let near_known = accepted.iter().any(|a| {
                a.iter()
                    .zip(&x[..n])
                    .all(|(p, q)| circle_dist_f64(*p, *q) < 2.0 * inv_grid)
            });
            if !near_known {
                if let Some(root) = newton_refine(&ev, &x[..n], tol) {
                    let dup = accepted.iter().any(|a| {
                        a.iter()
                            .zip(root.iter())
                            .all(|(p, q)| circle_dist_f64(*p, *q) < DEDUP_RADIUS)
                    });
                    if !dup {
                        accepted.push(root);
                        if accepted.len() > 4096 {
                            return Err(EngineError::NonIsolatedLocus);
                        }
                    }
                }
            }
        }
        let mut axis = 0;
        while axis < n {
            idx[axis] += 1;
            if idx[axis] < grid {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
        if axis == n {
            break;
        }
    }

    // Distinct roots closer than a grid cell signal a positive-dimensional
    // locus that refinement failed to separate.
    for i in 0..accepted.len() {
        for j in i + 1..accepted.len() {
            let close = accepted[i]
                .iter()
                .zip(accepted[j].iter())
                .all(|(p, q)| circle_dist_f64(*p, *q) < 20.0 * DEDUP_RADIUS);
            if close {
                return Err(EngineError::NonIsolatedLocus);
            }
        }
    }
    accepted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(accepted)
}

/// Local coincidence index: the sign of `det D(f' - f' o s)` at a
/// nondegenerate coincidence point.
pub fn local_index_numeric(
    pm: &PerturbedMap,
    s: &FreeInvolution,
    x: &[f64],
) -> Result<i32, EngineError> {
    let ev = CoinEval::new(pm, s);
    let mut jac = [[0.0; MAXN]; MAXN];
    ev.jacobian(x, &mut jac);
    let det = det_f64(&jac, x.len());
    if det.abs() < 1e-13 {
        return Err(EngineError::DegenerateJacobian);
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

fn det_f64(jac: &[[f64; MAXN]; MAXN], n: usize) -> f64 {
    let mut m = *jac;
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// Best rational with denominator at most `max_den` within `1e-6` of `x`.
pub fn snap_coordinate(x: f64, max_den: u64) -> Option<BigRational> {
    let x = frac_f64(x);
    // Continued-fraction convergents of x.
    let (mut h0, mut k0, mut h1, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor() as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 as u128 > max_den as u128 {
            break;
        }
        h0 = h1;
        k0 = k1;
        h1 = h2;
        k1 = k2;
        let f = v - a as f64;
        if f.abs() < 1e-15 {
            break;
        }
        v = 1.0 / f;
    }
    if k1 == 0 {
        return None;
    }
    let cand = h1 as f64 / k1 as f64;
    if (cand - x).abs() < DEDUP_RADIUS {
        let r = BigRational::new(BigInt::from(h1), BigInt::from(k1));
        let reduced = crate::exact_lattice::frac(&r);
        if reduced.denom().to_u64().map(|d| d <= max_den).unwrap_or(false) {
            return Some(reduced);
        }
        None
    } else {
        None
    }
}
