//! Realizer construction: explicit perturbations of the affine representative
//! whose coincidence set with the involution-composed map is as small as the
//! homotopy class allows.
//!
//! Every branch adds sine terms that vanish on the half-integer lattice, so
//! surviving coincidences sit at exact low-denominator rationals. Amplitudes
//! are unit fractions chosen from exact gap computations: a perturbation can
//! never bridge the distance between distinct values of the affine part, and
//! where two perturbations must separate, the later one in the chain is made
//! strictly smaller than the guaranteed response of the earlier one.

use super::{EngineError, PerturbTerm, PerturbedMap};
use crate::exact_lattice::{circle_dist, frac, solve_torus_congruence, IntMatrix};
use crate::torus_geometry::{AffineTorusMap, FreeInvolution, InvolutionTag};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};

/// A perturbed representative together with bookkeeping for the oracle.
#[derive(Clone, Debug)]
pub struct Realizer {
    pub map: PerturbedMap,
    /// Which construction branch produced the terms.
    pub branch: String,
    /// Denominator bound for snapping oracle output to exact rationals.
    pub snap_denominator: u64,
    /// Base perturbation denominator (the largest one used).
    pub n0: u64,
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn big(x: i64) -> BigRational {
    BigRational::from(BigInt::from(x))
}

/// Largest unit fraction `1/k <= bound` with `k >= 5`, scaled by `scale`.
fn unit_amp(bound: &BigRational, scale: u64) -> BigRational {
    assert!(bound.is_positive(), "amplitude bound must be positive");
    let inv = bound.recip();
    let mut k = inv.ceil().to_integer();
    if k < BigInt::from(5) {
        k = BigInt::from(5);
    }
    if &BigRational::new(BigInt::one(), k.clone()) > bound {
        k += 1;
    }
    BigRational::new(BigInt::one(), k * BigInt::from(scale))
}

fn min_rat(items: &[BigRational]) -> BigRational {
    items.iter().min().cloned().expect("nonempty")
}

fn term(target: usize, source: usize, amplitude: BigRational, half_freq: u32) -> PerturbTerm {
    PerturbTerm {
        target,
        source,
        amplitude,
        half_freq,
    }
}

fn is_even(x: &BigInt) -> bool {
    x.is_even()
}

/// Lower bound on `|sin(2 pi r)|` for exact rational `r`: `2 dist(2r, Z)`.
fn sine_lower_bound(r: &BigRational) -> BigRational {
    circle_dist(&(r * big(2))) * big(2)
}

/// Builds the realizer for a catalog involution; custom involutions and the
/// open higher-dimensional cases are unsupported.
pub fn build_realizer(m: &IntMatrix, s: &FreeInvolution) -> Result<Realizer, EngineError> {
    build_realizer_scaled(m, s, 1)
}

/// Same with all perturbation denominators multiplied by `scale` (retries).
pub fn build_realizer_scaled(
    m: &IntMatrix,
    s: &FreeInvolution,
    scale: u64,
) -> Result<Realizer, EngineError> {
    let n = m.dim();
    if s.dim() != n {
        return Err(EngineError::Unsupported(format!(
            "dimension mismatch {n} vs {}",
            s.dim()
        )));
    }
    match s.tag {
        InvolutionTag::T1Antipodal => Ok(build_t1(m, scale)),
        InvolutionTag::T2Tau1 => Ok(build_t2_tau1(m, scale)),
        InvolutionTag::T2Tau2 => Ok(build_t2_tau2(m, scale)),
        InvolutionTag::T3H1 | InvolutionTag::T3H3 | InvolutionTag::T3H4 => {
            Ok(build_t3_h_odd(m, s, scale))
        }
        InvolutionTag::T3H2 => Ok(build_t3_h2(m, scale)),
        InvolutionTag::TnTau2 => {
            if crate::closed_form::is_g_family(m) {
                Ok(build_g_family(m, scale))
            } else {
                Err(EngineError::Unsupported(
                    "outside the block family the higher-dimensional value is open".into(),
                ))
            }
        }
        tag => Err(EngineError::Unsupported(format!(
            "no construction for involution `{}` in dimension {n}",
            tag.name()
        ))),
    }
}

fn make(m: &IntMatrix, terms: Vec<PerturbTerm>, branch: &str, snap: u64) -> Realizer {
    let map = PerturbedMap {
        base: AffineTorusMap::linear_only(m.clone()),
        terms,
    };
    let n0 = map.max_denominator();
    Realizer {
        map,
        branch: branch.to_string(),
        snap_denominator: snap.max(2),
        n0,
    }
}

fn build_t1(m: &IntMatrix, scale: u64) -> Realizer {
    let a = m.get(0, 0);
    if is_even(a) {
        let amp = BigRational::new(BigInt::one(), BigInt::from(3 * scale));
        make(m, vec![term(0, 0, amp, 2)], "t1.even", 2)
    } else {
        make(m, vec![], "t1.odd", 2)
    }
}

fn build_t2_tau1(m: &IntMatrix, scale: u64) -> Realizer {
    let col_even = is_even(m.get(0, 0)) && is_even(m.get(1, 0));
    if !col_even {
        return make(m, vec![], "t2.tau1.odd_first_column", 4);
    }
    let amp = rat(1, 5 * scale as i64);
    make(
        m,
        vec![term(0, 0, amp.clone(), 2), term(1, 0, amp, 1)],
        "t2.tau1.conflict",
        4,
    )
}

fn build_t2_tau2(m: &IntMatrix, scale: u64) -> Realizer {
    let m1 = m.get(0, 0).clone();
    let n1 = m.get(1, 0).clone();
    let m2 = m.get(0, 1).clone();
    let n2 = m.get(1, 1).clone();
    let col2_even = is_even(&m2) && is_even(&n2);
    let col1_zero = m1.is_zero() && n1.is_zero();

    if col2_even && !col1_zero {
        // Positive branch: pin x with the sine along the flipped coordinate,
        // then y with the shifted one. With both column entries live the
        // y-amplitude must stay below the guaranteed displacement of the
        // spurious x-roots, otherwise extra coincidences appear.
        if n1.is_zero() {
            let amp = rat(1, 5 * scale as i64);
            return make(
                m,
                vec![term(0, 1, amp.clone(), 2), term(1, 0, amp, 2)],
                "t2.tau2.q_zero",
                2,
            );
        }
        if m1.is_zero() {
            let amp = rat(1, 5 * scale as i64);
            return make(
                m,
                vec![term(0, 0, amp.clone(), 2), term(1, 1, amp, 2)],
                "t2.tau2.p_zero",
                2,
            );
        }
        let am1 = BigRational::from(m1.abs());
        let an1 = BigRational::from(n1.abs());
        let beta2 = unit_amp(
            &min_rat(&[rat(1, 5), (big(1) / (big(8) * &am1)).clone()]),
            scale,
        );
        // Minimal |sin| over the non-half-integer lattice points j/(2 n1).
        let sigma = if n1.abs().is_one() {
            big(1)
        } else {
            big(2) / &an1
        };
        let beta1 = unit_amp(
            &min_rat(&[
                rat(1, 5),
                big(1) / (big(8) * &an1),
                &am1 * &beta2 * &sigma / (big(8) * &an1),
            ]),
            scale,
        );
        return make(
            m,
            vec![term(0, 1, beta1, 2), term(1, 0, beta2, 2)],
            "t2.tau2.pq_nonzero",
            2,
        );
    }

    // Zero branches: produce an empty coincidence set.
    let k = super::coincidence_matrix(m, &tau2_involution());
    let b: Vec<BigRational> = super::coincidence_offset(m, &tau2_involution())
        .iter()
        .map(frac)
        .collect();
    if solve_torus_congruence(&k, &b).is_empty() {
        return make(m, vec![], "t2.tau2.affine_empty", 2);
    }
    if col1_zero {
        // Both rows constant and even: conflicting pins on the shifted axis.
        let amp = rat(1, 5 * scale as i64);
        return make(
            m,
            vec![term(0, 1, amp.clone(), 2), term(1, 1, amp, 1)],
            "t2.tau2.zero_col.conflict",
            4,
        );
    }
    if m1.is_zero() || n1.is_zero() {
        // One dead row; it must carry even parity here, and the live row odd
        // parity, so pinning x on the dead row leaves the live row off by a
        // half-integer.
        let dead = if m1.is_zero() { 0 } else { 1 };
        let amp = rat(1, 5 * scale as i64);
        return make(
            m,
            vec![term(dead, 0, amp, 2)],
            "t2.tau2.odd.dead_pin",
            2,
        );
    }
    // Both rows live, mixed parity: pin x on an odd-parity row; all of its
    // roots are displaced from the half-integers, and the other row cannot
    // absorb the displacement once its own amplitude is small enough.
    let pin = if !is_even(&m2) { 0 } else { 1 };
    let other = 1 - pin;
    let pin_coeff = if pin == 0 { m1.clone() } else { n1.clone() };
    let other_coeff = if pin == 0 { n1.clone() } else { m1.clone() };
    let apc = BigRational::from(pin_coeff.abs());
    let aoc = BigRational::from(other_coeff.abs());
    let beta1 = unit_amp(
        &min_rat(&[rat(1, 5), big(1) / (big(32) * (&aoc + big(1)))]),
        scale,
    );
    // Odd-lattice points are at least 1/(2|pin_coeff|) away from half-integers.
    let sigma1 = big(1) / &apc;
    let beta2 = unit_amp(
        &min_rat(&[
            rat(1, 5),
            big(1) / (big(64) * &apc),
            &aoc * &beta1 * &sigma1 / (big(8) * &apc),
        ]),
        scale,
    );
    make(
        m,
        vec![term(pin, 0, beta1, 2), term(other, 1, beta2, 2)],
        "t2.tau2.odd.both_live",
        2,
    )
}

fn tau2_involution() -> FreeInvolution {
    crate::torus_geometry::catalog_involution(2, InvolutionTag::T2Tau2).expect("catalog")
}

/// Shared scheme for the three involutions whose coincidence system involves
/// only one coordinate: one nonzero row (if any) is left exact, the other two
/// rows pin the shifted coordinate to incompatible sets.
fn build_t3_h_odd(m: &IntMatrix, s: &FreeInvolution, scale: u64) -> Realizer {
    // Row coefficients of the coincidence system A_i * y = c_i / 2.
    let (i, j) = match s.tag {
        InvolutionTag::T3H1 => (0i64, 0i64),
        InvolutionTag::T3H3 => (1, 0),
        InvolutionTag::T3H4 => (1, 1),
        _ => unreachable!(),
    };
    let sign = if i == 1 { -1 } else { 1 };
    let coeff = |col2: &BigInt, col1: &BigInt| -> BigInt {
        // b - a*i*j - b*(-1)^i
        col2 - col1 * BigInt::from(i * j) - col2 * BigInt::from(sign)
    };
    let a_c = [
        coeff(m.get(0, 1), m.get(0, 0)),
        coeff(m.get(1, 1), m.get(1, 0)),
        coeff(m.get(2, 1), m.get(2, 0)),
    ];
    let halves = [
        rat(1, 2) * BigRational::from(m.get(0, 2).clone()),
        rat(1, 2) * BigRational::from(m.get(1, 2).clone()),
        rat(1, 2) * BigRational::from(m.get(2, 2).clone()),
    ];

    let nulls: Vec<usize> = (0..3).filter(|&r| a_c[r].is_zero()).collect();
    let (eps_row, delta_row, case) = match nulls.len() {
        3 => (1, 2, "case1"),
        2 => (nulls[0], nulls[1], "case2"),
        1 => {
            let non_null = (0..3).find(|r| !a_c[*r].is_zero()).unwrap();
            (non_null, nulls[0], "case3")
        }
        _ => (1, 2, "case4"),
    };
    // Exact residual values of the perturbed rows over the pivot lattice.
    let pivot = (0..3).find(|&r| !a_c[r].is_zero() && r != eps_row && r != delta_row);
    let mut dvals: Vec<BigRational> = Vec::new();
    match pivot {
        Some(rp) => {
            let p = &a_c[rp];
            let count = p.abs().to_i64().unwrap();
            for jj in 0..count {
                let y0 = frac(&((&halves[rp] + big(jj)) / BigRational::from(p.clone())));
                for r in [eps_row, delta_row] {
                    let v = BigRational::from(a_c[r].clone()) * &y0 - &halves[r];
                    dvals.push(v);
                }
            }
        }
        None => {
            for r in [eps_row, delta_row] {
                dvals.push(-&halves[r]);
            }
        }
    }
    let gap = dvals
        .iter()
        .map(circle_dist)
        .filter(|d| d.is_positive())
        .min()
        .unwrap_or_else(|| big(1));
    let amp = unit_amp(&min_rat(&[rat(1, 5), gap / big(8)]), scale);
    let branch = format!("h_odd.{}.{}", s.tag.name(), case);
    make(
        m,
        vec![
            term(eps_row, 2, amp.clone(), 2),
            term(delta_row, 2, amp, 1),
        ],
        &branch,
        4,
    )
}

struct H2Data {
    rows: [(BigInt, BigInt); 3],
    halves: [BigRational; 3],
    parities_even: bool,
    p: BigInt,
    q: BigInt,
    o: BigInt,
}

fn h2_data(m: &IntMatrix) -> H2Data {
    let rows = [
        (m.get(0, 0).clone(), m.get(0, 1).clone()),
        (m.get(1, 0).clone(), m.get(1, 1).clone()),
        (m.get(2, 0).clone(), m.get(2, 1).clone()),
    ];
    let halves = [
        rat(1, 2) * BigRational::from(m.get(0, 2).clone()),
        rat(1, 2) * BigRational::from(m.get(1, 2).clone()),
        rat(1, 2) * BigRational::from(m.get(2, 2).clone()),
    ];
    let parities_even =
        is_even(m.get(0, 2)) && is_even(m.get(1, 2)) && is_even(m.get(2, 2));
    let det2 = |x: &(BigInt, BigInt), y: &(BigInt, BigInt)| -> BigInt {
        &x.0 * &y.1 - &x.1 * &y.0
    };
    H2Data {
        p: det2(&rows[1], &rows[2]),
        q: det2(&rows[0], &rows[2]),
        o: det2(&rows[0], &rows[1]),
        rows,
        halves,
        parities_even,
    }
}

fn build_t3_h2(m: &IntMatrix, scale: u64) -> Realizer {
    let d = h2_data(m);

    // Rank-2 case: leave two independent rows exact and pin everything with
    // an amplitude chain on the remaining row.
    let rank2 = if !d.p.is_zero() {
        Some((0usize, 1usize, 2usize, "p"))
    } else if !d.q.is_zero() {
        Some((1, 0, 2, "q"))
    } else if !d.o.is_zero() {
        Some((2, 0, 1, "o"))
    } else {
        None
    };
    if let Some((k, i, j, minor_name)) = rank2 {
        return build_h2_rank2(m, &d, k, i, j, minor_name, scale);
    }

    // Rank <= 1 from here on.
    let col1_zero = d.rows.iter().all(|r| r.0.is_zero());
    let col2_zero = d.rows.iter().all(|r| r.1.is_zero());
    let row3_zero = d.rows[2].0.is_zero() && d.rows[2].1.is_zero();
    if d.parities_even && row3_zero && !col1_zero && !col2_zero {
        return build_h2_rank1_published(m, &d, scale);
    }
    build_h2_scheme_z(m, &d, scale)
}

fn enumerate_lattice(
    rows: [(BigInt, BigInt); 3],
    halves: &[BigRational; 3],
    i: usize,
    j: usize,
) -> Vec<(BigRational, BigRational)> {
    let a = IntMatrix::from_bigint_rows(vec![
        vec![&rows[i].0 * BigInt::from(2), &rows[i].1 * BigInt::from(2)],
        vec![&rows[j].0 * BigInt::from(2), &rows[j].1 * BigInt::from(2)],
    ]);
    let b = vec![halves[i].clone(), halves[j].clone()];
    let sol = solve_torus_congruence(&a, &b);
    if sol.is_empty() {
        return Vec::new();
    }
    assert!(sol.subtorus_basis.is_empty(), "rank-2 block must pin (x, y)");
    sol.enumerate_points()
        .into_iter()
        .map(|p| (p[0].clone(), p[1].clone()))
        .collect()
}

fn build_h2_rank2(
    m: &IntMatrix,
    d: &H2Data,
    k: usize,
    i: usize,
    j: usize,
    minor_name: &str,
    scale: u64,
) -> Realizer {
    let lattice = enumerate_lattice(d.rows.clone(), &d.halves, i, j);
    let mut dvals: Vec<BigRational> = Vec::new();
    let mut sigma_y = big(1);
    let mut sigma_x = big(1);
    let mut snap: u64 = 2;
    for (x0, y0) in &lattice {
        let v = BigRational::from(d.rows[k].0.clone()) * x0 * big(2)
            + BigRational::from(d.rows[k].1.clone()) * y0 * big(2)
            - &d.halves[k];
        dvals.push(v);
        let sy = sine_lower_bound(y0);
        if sy.is_positive() && sy < sigma_y {
            sigma_y = sy;
        }
        let sx = sine_lower_bound(x0);
        if sx.is_positive() && sx < sigma_x {
            sigma_x = sx;
        }
        let dx = x0.denom().to_u64().unwrap_or(u64::MAX);
        let dy = y0.denom().to_u64().unwrap_or(u64::MAX);
        snap = snap.max(dx).max(dy);
    }
    let gap = dvals
        .iter()
        .map(circle_dist)
        .filter(|g| g.is_positive())
        .min()
        .unwrap_or_else(|| big(1));
    let b1 = unit_amp(&min_rat(&[rat(1, 5), gap / big(8)]), scale);
    let b2 = unit_amp(&(&b1 * &sigma_y / big(8)), scale);
    let b3 = unit_amp(&(&b2 * &sigma_x / big(8)), scale);
    let parity = if d.parities_even { "even" } else { "odd" };
    let branch = format!("h2.{parity}.rank2.{minor_name}");
    make(
        m,
        vec![
            term(k, 1, b1, 2),
            term(k, 0, b2, 2),
            term(k, 2, b3, 2),
        ],
        &branch,
        snap * 2,
    )
}

/// Published construction for the even, rank-deficient branch with dead third
/// row: pin x on the third row, y through one of the live rows, and make the
/// shifted-coordinate amplitude small enough that displaced y-roots cannot be
/// absorbed.
fn build_h2_rank1_published(m: &IntMatrix, d: &H2Data, scale: u64) -> Realizer {
    let r1_live = !d.rows[0].0.is_zero() || !d.rows[0].1.is_zero();
    let r2_live = !d.rows[1].0.is_zero() || !d.rows[1].1.is_zero();
    if r1_live && r2_live {
        // rows[0] = d1 * w, rows[1] = d2 * w with w primitive.
        let g1 = d.rows[0].0.gcd(&d.rows[0].1);
        let w = (
            &d.rows[0].0 / &g1,
            &d.rows[0].1 / &g1,
        );
        let d1 = g1.clone();
        let d2 = if !w.0.is_zero() {
            &d.rows[1].0 / &w.0
        } else {
            &d.rows[1].1 / &w.1
        };
        debug_assert_eq!(&d.rows[1].0, &(&d2 * &w.0));
        debug_assert_eq!(&d.rows[1].1, &(&d2 * &w.1));
        // w has both entries nonzero here (both columns are nonzero).
        let a_d1 = BigRational::from(d1.abs());
        let a_d2 = BigRational::from(d2.abs());
        let a_d2w2 = BigRational::from((&d2 * &w.1).abs());

        // y-lattice of the perturbed second row over x0 in {0, 1/2}.
        let mut gap1 = big(1);
        let mut sigma = big(1);
        let den = &d2 * &w.1 * BigInt::from(2);
        let count = den.abs().to_i64().unwrap();
        for x_num in [0i64, 1] {
            let x0 = rat(x_num, 2);
            let off = BigRational::from((&d2 * &w.0).clone()) * &x0 * big(2);
            for jj in 0..count {
                let y0 = frac(&((big(jj) - &off) / BigRational::from(den.clone())));
                let v1 = BigRational::from(d.rows[0].0.clone()) * &x0 * big(2)
                    + BigRational::from(d.rows[0].1.clone()) * &y0 * big(2)
                    - &d.halves[0];
                let g = circle_dist(&v1);
                if g.is_positive() && g < gap1 {
                    gap1 = g;
                }
                let sy = sine_lower_bound(&y0);
                if sy.is_positive() && sy < sigma {
                    sigma = sy;
                }
            }
        }
        let by = unit_amp(
            &min_rat(&[
                rat(1, 5),
                big(1) / (big(16) * &a_d2w2),
                &gap1 * &a_d2 / (big(16) * (&a_d1 + big(1))),
            ]),
            scale,
        );
        let bz = unit_amp(
            &min_rat(&[
                &gap1 / big(8),
                &a_d1 * &by * &sigma / (big(16) * &a_d2),
            ]),
            scale,
        );
        let bx = unit_amp(&rat(1, 5), scale);
        return make(
            m,
            vec![term(0, 2, bz, 2), term(1, 1, by, 2), term(2, 0, bx, 2)],
            "h2.even.rank1.b1",
            4,
        );
    }
    // Exactly one live row among the first two: pin y on the dead row, the
    // shifted coordinate on the live row, x on the third.
    let dead = if r1_live { 1 } else { 0 };
    let live = 1 - dead;
    let amp = rat(1, 5 * scale as i64);
    make(
        m,
        vec![
            term(dead, 1, amp.clone(), 2),
            term(live, 2, amp.clone(), 2),
            term(2, 0, amp, 2),
        ],
        "h2.even.rank1.b2",
        2,
    )
}

/// Rank <= 1 conflict scheme: one nonzero row (if any) stays exact; the other
/// two rows pin the shifted coordinate to disjoint sets, or are blocked
/// outright by a nonzero discrete residual.
fn build_h2_scheme_z(m: &IntMatrix, d: &H2Data, scale: u64) -> Realizer {
    let pivot = (0..3).find(|&r| !d.rows[r].0.is_zero() || !d.rows[r].1.is_zero());
    let free: Vec<usize> = (0..3).filter(|r| Some(*r) != pivot).collect();
    let (eps_row, delta_row) = (free[0], free[1]);

    let mut dvals: Vec<BigRational> = Vec::new();
    match pivot {
        Some(rp) => {
            let (p1, p2) = (&d.rows[rp].0, &d.rows[rp].1);
            // lambda_i = rows[i] / rows[rp] as exact rationals.
            let pick = if !p1.is_zero() { 0 } else { 1 };
            let denom = if pick == 0 { p1.clone() } else { p2.clone() };
            let reach = (p1.abs() + p2.abs()).to_i64().unwrap() * 2 + 1;
            for r in [eps_row, delta_row] {
                let num = if pick == 0 {
                    d.rows[r].0.clone()
                } else {
                    d.rows[r].1.clone()
                };
                let lambda = BigRational::new(num, denom.clone());
                for mm in -reach..=reach {
                    let v = &lambda * (&d.halves[rp] + big(mm)) - &d.halves[r];
                    dvals.push(v);
                }
            }
        }
        None => {
            for r in [eps_row, delta_row] {
                dvals.push(-&d.halves[r]);
            }
        }
    }
    let gap = dvals
        .iter()
        .map(circle_dist)
        .filter(|g| g.is_positive())
        .min()
        .unwrap_or_else(|| big(1));
    let amp = unit_amp(&min_rat(&[rat(1, 5), gap / big(8)]), scale);
    let col1_zero = d.rows.iter().all(|r| r.0.is_zero());
    let col2_zero = d.rows.iter().all(|r| r.1.is_zero());
    let branch = if !d.parities_even {
        "h2.odd.rank1"
    } else if col1_zero || col2_zero {
        "h2.even.col_zero"
    } else {
        "h2.even.pq_zero_u_nonzero"
    };
    make(
        m,
        vec![
            term(eps_row, 2, amp.clone(), 2),
            term(delta_row, 2, amp, 1),
        ],
        branch,
        4,
    )
}

fn build_g_family(m: &IntMatrix, scale: u64) -> Realizer {
    let n = m.dim();
    let amp = rat(1, 5 * scale as i64);
    make(m, vec![term(n - 1, n - 1, amp, 2)], "tn.tau2.g_family", 2)
}

/// Adds `count` random extra terms with squared-denominator amplitude; the
/// result stays homotopic to the base map, so its coincidence pair count can
/// only witness the lower bound.
pub fn with_extra_terms(r: &Realizer, seed: u64, count: usize) -> PerturbedMap {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = r.map.dim();
    let n0 = r.n0.min(3000);
    let den = BigInt::from(n0) * BigInt::from(n0);
    let mut pm = r.map.clone();
    for _ in 0..count {
        let target = rng.gen_range(0..n);
        let source = rng.gen_range(0..n);
        let half_freq = *[1u32, 2, 3, 4].get(rng.gen_range(0..4)).unwrap();
        pm.terms.push(PerturbTerm {
            target,
            source,
            amplitude: BigRational::new(BigInt::one(), den.clone()),
            half_freq,
        });
    }
    pm
}
