//! Exact integer and rational linear algebra: Hermite and Smith normal forms,
//! integer kernels, saturation, reduced row echelon form and determinants.

use rug::{Integer, Rational};

pub type ZMatrix = Vec<Vec<Integer>>;
pub type QMatrix = Vec<Vec<Rational>>;

pub fn floor_div(a: &Integer, b: &Integer) -> Integer {
    let (q, _) = <(Integer, Integer)>::from(a.div_rem_floor_ref(b));
    q
}

fn row_axpy(dst: &mut [Integer], q: &Integer, src: &[Integer]) {
    // dst -= q * src
    for (d, s) in dst.iter_mut().zip(src) {
        if *s != 0 {
            *d -= Integer::from(q * s);
        }
    }
}

pub fn identity_z(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect())
        .collect()
}

pub fn identity_q(n: usize) -> QMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| Rational::from((i == j) as u32)).collect())
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul_z(a: &[Vec<Integer>], b: &[Vec<Integer>], ncols: usize) -> ZMatrix {
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    let mut acc = Integer::new();
                    for (k, x) in row.iter().enumerate() {
                        if *x != 0 && b[k][j] != 0 {
                            acc += Integer::from(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul_q(a: &[Vec<Rational>], b: &[Vec<Rational>], ncols: usize) -> QMatrix {
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    let mut acc = Rational::new();
                    for (k, x) in row.iter().enumerate() {
                        if *x != 0 && b[k][j] != 0 {
                            acc += Rational::from(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn vec_mat_q(v: &[Rational], b: &[Vec<Rational>], ncols: usize) -> Vec<Rational> {
    mat_mul_q(&[v.to_vec()], b, ncols).pop().unwrap()
}

pub fn to_q(a: &[Vec<Integer>]) -> QMatrix {
    a.iter()
        .map(|r| r.iter().map(|x| Rational::from(x.clone())).collect())
        .collect()
}

/// Common denominator of all entries, and the matrix scaled by it.
pub fn clear_denominators(a: &[Vec<Rational>]) -> (Integer, ZMatrix) {
    let mut den = Integer::from(1);
    for row in a {
        for x in row {
            den.lcm_mut(x.denom());
        }
    }
    let rows = a
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let y = Rational::from(x * &den);
                    y.numer().clone()
                })
                .collect()
        })
        .collect();
    (den, rows)
}

/// Row-style Hermite normal form on the first `ncols` columns, applying the same
/// row operations to `u` when given. Returns the rank; rows beyond it are zero
/// on the first `ncols` columns.
fn hnf_core(a: &mut ZMatrix, mut u: Option<&mut ZMatrix>, ncols: usize) -> usize {
    let m = a.len();
    let mut pr = 0;
    for c in 0..ncols {
        if pr == m {
            break;
        }
        let mut found = false;
        loop {
            let piv = (pr..m)
                .filter(|&i| a[i][c] != 0)
                .min_by(|&i, &j| a[i][c].cmp_abs(&a[j][c]));
            let Some(piv) = piv else { break };
            found = true;
            a.swap(pr, piv);
            if let Some(u) = u.as_deref_mut() {
                u.swap(pr, piv);
            }
            let prow = a[pr].clone();
            let urow = u.as_deref().map(|u| u[pr].clone());
            let mut clean = true;
            for i in pr + 1..m {
                if a[i][c] != 0 {
                    let q = floor_div(&a[i][c], &prow[c]);
                    row_axpy(&mut a[i], &q, &prow);
                    if let (Some(u), Some(ur)) = (u.as_deref_mut(), urow.as_ref()) {
                        row_axpy(&mut u[i], &q, ur);
                    }
                    if a[i][c] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if a[pr][c] < 0 {
            for x in a[pr].iter_mut() {
                *x = Integer::from(-&*x);
            }
            if let Some(u) = u.as_deref_mut() {
                for x in u[pr].iter_mut() {
                    *x = Integer::from(-&*x);
                }
            }
        }
        let prow = a[pr].clone();
        let urow = u.as_deref().map(|u| u[pr].clone());
        for i in 0..pr {
            if a[i][c] != 0 {
                let q = floor_div(&a[i][c], &prow[c]);
                if q != 0 {
                    row_axpy(&mut a[i], &q, &prow);
                    if let (Some(u), Some(ur)) = (u.as_deref_mut(), urow.as_ref()) {
                        row_axpy(&mut u[i], &q, ur);
                    }
                }
            }
        }
        pr += 1;
    }
    pr
}

/// Hermite normal form of the row lattice: nonzero rows only, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hnf(rows: &[Vec<Integer>]) -> ZMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    let n = rows[0].len();
    let mut a = rows.to_vec();
    let rank = hnf_core(&mut a, None, n);
    a.truncate(rank);
    a
}

/// HNF with transform: returns `(h, u)` with `u * rows = h`, `u` unimodular and
/// `h` keeping its zero rows at the bottom.
pub fn hnf_with_transform(rows: &[Vec<Integer>], ncols: usize) -> (ZMatrix, ZMatrix, usize) {
    let mut a = rows.to_vec();
    let mut u = identity_z(rows.len());
    let rank = hnf_core(&mut a, Some(&mut u), ncols);
    (a, u, rank)
}

/// ℤ-basis of `{x ∈ ℤ^m : x·A = 0}` for the m×n matrix `A`.
pub fn integer_left_kernel(a: &[Vec<Integer>], ncols: usize) -> ZMatrix {
    if a.is_empty() {
        return Vec::new();
    }
    let (_, u, rank) = hnf_with_transform(a, ncols);
    let mut k: ZMatrix = u.into_iter().skip(rank).collect();
    let m = a.len();
    if k.is_empty() {
        return k;
    }
    k = hnf(&k);
    debug_assert!(k.iter().all(|x| x.len() == m));
    k
}

/// ℤ-basis (HNF) of the saturation `ℚ·rows ∩ ℤ^n`.
pub fn saturate(rows: &[Vec<Integer>], n: usize) -> ZMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    // integer vectors y with rows·y = 0
    let at = transpose(rows, n);
    let right_kernel = integer_left_kernel(&at, rows.len());
    if right_kernel.is_empty() {
        return identity_z(n);
    }
    let k = transpose(&right_kernel, n);
    integer_left_kernel(&k, right_kernel.len())
}

#[derive(Debug, Clone)]
pub struct Snf {
    pub d: ZMatrix,
    pub u: ZMatrix,
    pub v: ZMatrix,
    /// Nonzero diagonal entries, each dividing the next.
    pub diag: Vec<Integer>,
}

fn swap_cols(a: &mut ZMatrix, i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn col_axpy(a: &mut ZMatrix, dst: usize, q: &Integer, src: usize) {
    for row in a.iter_mut() {
        if row[src] != 0 {
            let t = Integer::from(q * &row[src]);
            row[dst] -= t;
        }
    }
}

/// Smith normal form with unimodular transforms, `u·a·v = d`.
pub fn snf(a: &[Vec<Integer>], ncols: usize) -> Snf {
    let m = a.len();
    let n = ncols;
    let mut d = a.to_vec();
    let mut u = identity_z(m);
    let mut v = identity_z(n);
    let mut diag = Vec::new();
    for t in 0..m.min(n) {
        let mut any = false;
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if d[i][j] != 0 {
                        match best {
                            Some((bi, bj)) if d[i][j].cmp_abs(&d[bi][bj]).is_ge() => {}
                            _ => best = Some((i, j)),
                        }
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            any = true;
            d.swap(t, bi);
            u.swap(t, bi);
            swap_cols(&mut d, t, bj);
            swap_cols(&mut v, t, bj);
            let mut clean = true;
            let prow = d[t].clone();
            let urow = u[t].clone();
            for i in t + 1..m {
                if d[i][t] != 0 {
                    let q = floor_div(&d[i][t], &prow[t]);
                    row_axpy(&mut d[i], &q, &prow);
                    row_axpy(&mut u[i], &q, &urow);
                    if d[i][t] != 0 {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if d[t][j] != 0 {
                    let q = floor_div(&d[t][j], &d[t][t]);
                    col_axpy(&mut d, j, &q, t);
                    col_axpy(&mut v, j, &q, t);
                    if d[t][j] != 0 {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }
            let mut bad = None;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if !d[i][j].is_divisible(&d[t][t]) {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let (ri, ui) = (d[i].clone(), u[i].clone());
                    let minus_one = Integer::from(-1);
                    row_axpy(&mut d[t], &minus_one, &ri);
                    row_axpy(&mut u[t], &minus_one, &ui);
                }
                None => break,
            }
        }
        if !any {
            break;
        }
        if d[t][t] < 0 {
            for x in d[t].iter_mut() {
                *x = Integer::from(-&*x);
            }
            for x in u[t].iter_mut() {
                *x = Integer::from(-&*x);
            }
        }
        diag.push(d[t][t].clone());
    }
    Snf { d, u, v, diag }
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (QMatrix, Vec<usize>) {
    let mut a = rows.to_vec();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..ncols {
        if pr == m {
            break;
        }
        let Some(p) = (pr..m).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(pr, p);
        let inv = Rational::from(a[pr][c].recip_ref());
        for x in a[pr].iter_mut() {
            *x *= &inv;
        }
        let prow = a[pr].clone();
        for i in 0..m {
            if i != pr && a[i][c] != 0 {
                let f = a[i][c].clone();
                for (x, y) in a[i].iter_mut().zip(&prow) {
                    if *y != 0 {
                        *x -= Rational::from(&f * y);
                    }
                }
            }
        }
        pivots.push(c);
        pr += 1;
    }
    a.truncate(pr);
    (a, pivots)
}

pub fn rank_q(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

pub fn det_q(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Rational::from(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| m[i][c] != 0) else {
            return Rational::new();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        let prow = m[c].clone();
        for row in m.iter_mut().skip(c + 1) {
            if row[c] != 0 {
                let f = Rational::from(&row[c] / &piv);
                for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                    *x -= Rational::from(&f * y);
                }
            }
        }
    }
    det
}

pub fn det_z(a: &[Vec<Integer>]) -> Integer {
    let q = det_q(&to_q(a));
    q.numer().clone()
}

pub fn inverse_q(a: &[Vec<Rational>]) -> Option<QMatrix> {
    let n = a.len();
    let aug: QMatrix = a
        .iter()
        .zip(identity_q(n))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    let (r, piv) = rref(&aug, 2 * n);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Coordinates of each row of `targets` in the row basis `basis` (rows linearly
/// independent). `None` if some target is outside the ℚ-span.
pub fn coordinates_in_basis(
    basis: &[Vec<Rational>],
    targets: &[Vec<Rational>],
    ncols: usize,
) -> Option<QMatrix> {
    let r = basis.len();
    if r == 0 {
        return if targets.iter().all(|t| t.iter().all(|x| *x == 0)) {
            Some(vec![Vec::new(); targets.len()])
        } else {
            None
        };
    }
    // rref of [basis^T | targets^T] solves basis^T c = t for every target at once
    let bt = transpose(basis, ncols);
    let tt = transpose(targets, ncols);
    let aug: QMatrix = bt
        .into_iter()
        .zip(tt)
        .map(|(a, b)| a.into_iter().chain(b).collect())
        .collect();
    let (red, piv) = rref(&aug, r + targets.len());
    if piv.len() != r || piv.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    for row in red.iter().skip(r) {
        if row.iter().any(|x| *x != 0) {
            return None;
        }
    }
    let coords: QMatrix = (0..targets.len())
        .map(|t| (0..r).map(|i| red[i][r + t].clone()).collect())
        .collect();
    Some(coords)
}

/// Solve `x·A = b` for `x` (any solution), if one exists.
pub fn solve_left_q(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    let m = a.len();
    let at = transpose(a, ncols);
    let aug: QMatrix = at
        .into_iter()
        .zip(b)
        .map(|(row, bi)| row.into_iter().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let (red, piv) = rref(&aug, m + 1);
    if piv.last() == Some(&m) {
        return None;
    }
    let mut x = vec![Rational::new(); m];
    for (row, &p) in red.iter().zip(&piv) {
        x[p] = row[m].clone();
    }
    Some(x)
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    Rational::from_str_radix(s.trim(), 10).ok()
}
