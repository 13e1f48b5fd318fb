//! Multiprecision real and complex helpers built on MPFR floats.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

pub type Real = Float;
pub type RMatrix = Vec<Vec<Real>>;

/// Working precision in decimal digits; every numeric routine takes one
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrecisionContext {
    pub digits: u32,
}

const GUARD_BITS: u32 = 64;

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 30 {
            return Err(Error::InvalidInput(format!(
                "precision must be at least 30 digits, got {digits}"
            )));
        }
        Ok(Self { digits })
    }

    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// Comparison tolerance `10^-(digits-10)`.
    pub fn tau(&self) -> Real {
        self.pow10(-(self.digits as i32 - 10))
    }

    pub fn pow10(&self, e: i32) -> Real {
        Float::with_val(self.bits(), 10).pow(e)
    }

    pub fn zero(&self) -> Real {
        Float::new(self.bits())
    }

    pub fn real<T>(&self, v: T) -> Real
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), v)
    }

    pub fn from_rational(&self, q: &Rational) -> Real {
        Float::with_val(self.bits(), q)
    }

    pub fn pi(&self) -> Real {
        Float::with_val(self.bits(), Constant::Pi)
    }

    pub fn parse(&self, s: &str) -> Result<Real> {
        let p = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        Ok(Float::with_val(self.bits(), p))
    }

    pub fn doubled(&self) -> Self {
        Self { digits: self.digits * 2 }
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn fmt_real(x: &Real, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits as usize))
}

pub fn abs(x: &Real) -> Real {
    Float::with_val(x.prec(), x.abs_ref())
}

pub fn max_abs<'a>(ctx: &PrecisionContext, xs: impl IntoIterator<Item = &'a Real>) -> Real {
    let mut m = ctx.zero();
    for x in xs {
        let a = abs(x);
        if a > m {
            m = a;
        }
    }
    m
}

/// A complex number as a pair of MPFR floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Cplx {
    pub re: Real,
    pub im: Real,
}

impl Cplx {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Self::new(ctx.zero(), ctx.zero())
    }

    pub fn from_real(re: Real) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    /// `exp(2πi·k/m)`.
    pub fn root_of_unity(ctx: &PrecisionContext, k: i64, m: u64) -> Self {
        let m = m as i64;
        let k = k.rem_euclid(m);
        let angle = ctx.pi() * 2u32 * Float::with_val(ctx.bits(), k) / m;
        let (s, c) = angle.sin_cos(ctx.zero());
        Self::new(c, s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(Float::with_val(self.re.prec(), &self.re + &o.re), Float::with_val(self.re.prec(), &self.im + &o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(Float::with_val(self.re.prec(), &self.re - &o.re), Float::with_val(self.re.prec(), &self.im - &o.im))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.re.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Self::new(re, im)
    }

    pub fn scale(&self, x: &Real) -> Self {
        Self::new(Float::with_val(self.re.prec(), &self.re * x), Float::with_val(self.re.prec(), &self.im * x))
    }

    pub fn neg(&self) -> Self {
        Self::new(Float::with_val(self.re.prec(), -&self.re), Float::with_val(self.re.prec(), -&self.im))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Float::with_val(self.re.prec(), -&self.im))
    }

    pub fn norm(&self) -> Real {
        let p = self.re.prec();
        (Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())).sqrt()
    }

    pub fn inv(&self) -> Self {
        let p = self.re.prec();
        let n2 = Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref());
        Self::new(Float::with_val(p, &self.re / &n2), -Float::with_val(p, &self.im / &n2))
    }
}

pub fn rmat_zeros(ctx: &PrecisionContext, m: usize, n: usize) -> RMatrix {
    vec![vec![ctx.zero(); n]; m]
}

pub fn rmat_mul(ctx: &PrecisionContext, a: &[Vec<Real>], b: &[Vec<Real>], ncols: usize) -> RMatrix {
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    let mut acc = ctx.zero();
                    for (k, x) in row.iter().enumerate() {
                        acc += Float::with_val(ctx.bits(), x * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn rmat_from_q(ctx: &PrecisionContext, a: &[Vec<Rational>]) -> RMatrix {
    a.iter()
        .map(|r| r.iter().map(|x| ctx.from_rational(x)).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting. Returns the determinant and
/// the smallest pivot magnitude seen, relative to the largest entry.
pub fn det_r(ctx: &PrecisionContext, a: &[Vec<Real>]) -> Real {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = ctx.real(1);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| abs(&m[i][c]).partial_cmp(&abs(&m[j][c])).unwrap())
            .unwrap();
        if m[p][c].is_zero() {
            return ctx.zero();
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        let prow = m[c].clone();
        for row in m.iter_mut().skip(c + 1) {
            let f = Float::with_val(ctx.bits(), &row[c] / &piv);
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                *x -= Float::with_val(ctx.bits(), &f * y);
            }
        }
    }
    det
}

/// Numerical rank by Gaussian elimination with partial pivoting; pivots below
/// `τ·max|a|` count as zero.
pub fn rank_r(ctx: &PrecisionContext, a: &[Vec<Real>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let ncols = a[0].len();
    let mut m = a.to_vec();
    let scale = max_abs(ctx, a.iter().flatten());
    let cutoff = Float::with_val(ctx.bits(), &scale * &ctx.tau());
    let mut rank = 0;
    for c in 0..ncols {
        if rank == m.len() {
            break;
        }
        let p = (rank..m.len())
            .max_by(|&i, &j| abs(&m[i][c]).partial_cmp(&abs(&m[j][c])).unwrap())
            .unwrap();
        if abs(&m[p][c]) <= cutoff {
            continue;
        }
        m.swap(p, rank);
        let prow = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = Float::with_val(ctx.bits(), &row[c] / &prow[c]);
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                *x -= Float::with_val(ctx.bits(), &f * y);
            }
        }
        rank += 1;
    }
    rank
}

/// Solve the square system `a·x = b` (columns of `b` are right-hand sides).
pub fn solve_r(ctx: &PrecisionContext, a: &[Vec<Real>], b: &[Vec<Real>]) -> Result<RMatrix> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut m: RMatrix = a
        .iter()
        .zip(b)
        .map(|(r, s)| r.iter().chain(s).cloned().collect())
        .collect();
    let scale = max_abs(ctx, a.iter().flatten());
    let floor = Float::with_val(ctx.bits(), &scale * &ctx.tau());
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| abs(&m[i][c]).partial_cmp(&abs(&m[j][c])).unwrap())
            .unwrap();
        if abs(&m[p][c]) <= floor {
            return Err(Error::PrecisionExhausted(
                "pivot below tolerance in linear solve".into(),
            ));
        }
        m.swap(p, c);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x /= &piv;
        }
        let prow = m[c].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= Float::with_val(ctx.bits(), &f * y);
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..n + k].to_vec()).collect())
}

/// Least squares solution of `x·A ≈ b` for row vectors (A is m×n, b has length n),
/// through the normal equations at working precision.
pub fn least_squares_left(ctx: &PrecisionContext, a: &[Vec<Real>], b: &[Real]) -> Result<Vec<Real>> {
    let m = a.len();
    let gram: RMatrix = (0..m)
        .map(|i| (0..m).map(|j| dot(ctx, &a[i], &a[j])).collect())
        .collect();
    let rhs: RMatrix = (0..m).map(|i| vec![dot(ctx, &a[i], b)]).collect();
    let x = solve_r(ctx, &gram, &rhs)?;
    Ok(x.into_iter().map(|mut r| r.remove(0)).collect())
}

pub fn dot(ctx: &PrecisionContext, a: &[Real], b: &[Real]) -> Real {
    let mut acc = ctx.zero();
    for (x, y) in a.iter().zip(b) {
        acc += Float::with_val(ctx.bits(), x * y);
    }
    acc
}

pub fn round_to_integer(x: &Real) -> (Integer, Real) {
    let r = Float::with_val(x.prec(), x.round_ref());
    let dist = Float::with_val(x.prec(), x - &r).abs();
    (r.to_integer().expect("finite"), dist)
}

/// Best rational approximation with denominator at most `max_den`, accepted only
/// when within `tol`.
pub fn rationalize(x: &Real, max_den: u64, tol: &Real) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = x.to_rational()?;
    let bound = Integer::from(max_den);
    let (mut p0, mut q0, mut p1, mut q1) = (Integer::from(0), Integer::from(1), Integer::from(1), Integer::from(0));
    let mut rest = exact.clone();
    let mut best: Option<Rational> = None;
    loop {
        let a = rest.clone().floor().numer().clone();
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if q2 > bound {
            break;
        }
        let cand = Rational::from((p2.clone(), q2.clone()));
        let err = Float::with_val(x.prec(), Rational::from(&cand - &exact)).abs();
        if err <= *tol {
            best = Some(cand);
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = rest - Rational::from(a);
        if frac == 0 {
            break;
        }
        rest = frac.recip();
    }
    best
}

/// Newton refinement of a simple real root of an integer polynomial
/// (coefficients low to high) starting from `x0`.
pub fn newton_root(ctx: &PrecisionContext, poly: &[Integer], x0: Real) -> Result<Real> {
    let mut x = Float::with_val(ctx.bits(), x0);
    let tol = ctx.pow10(-(ctx.digits as i32) - 5);
    for _ in 0..200 {
        let (f, df) = eval_poly_and_derivative(ctx, poly, &x);
        if df.is_zero() {
            return Err(Error::PrecisionExhausted("zero derivative in Newton step".into()));
        }
        let step = Float::with_val(ctx.bits(), &f / &df);
        x -= &step;
        let scale = Float::with_val(ctx.bits(), abs(&x) + 1u32);
        if abs(&step) <= Float::with_val(ctx.bits(), &tol * &scale) {
            return Ok(x);
        }
    }
    Err(Error::PrecisionExhausted("Newton iteration did not converge".into()))
}

pub fn eval_poly_and_derivative(ctx: &PrecisionContext, poly: &[Integer], x: &Real) -> (Real, Real) {
    let mut f = ctx.zero();
    let mut df = ctx.zero();
    for c in poly.iter().rev() {
        df = Float::with_val(ctx.bits(), &df * x) + &f;
        f = Float::with_val(ctx.bits(), &f * x) + c;
    }
    (f, df)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_and_bits() {
        let ctx = PrecisionContext::new(50).unwrap();
        assert!(ctx.bits() >= 166 + 64);
        assert_eq!(ctx.tau(), ctx.pow10(-40));
        assert!(PrecisionContext::new(20).is_err());
    }

    #[test]
    fn continued_fraction() {
        let ctx = PrecisionContext::new(40).unwrap();
        let x = ctx.real(355) / 113u32;
        let q = rationalize(&x, 1_000_000, &ctx.tau()).unwrap();
        assert_eq!(q, Rational::from((355, 113)));
        assert!(rationalize(&ctx.pi(), 1_000_000, &ctx.tau()).is_none());
    }

    #[test]
    fn golden_ratio_by_newton() {
        let ctx = PrecisionContext::new(60).unwrap();
        let poly = [Integer::from(-1), Integer::from(-1), Integer::from(1)];
        let phi = newton_root(&ctx, &poly, ctx.real(1.6)).unwrap();
        let exact = (ctx.real(5).sqrt() + 1u32) / 2u32;
        assert!(abs(&(phi - exact)) < ctx.tau());
    }

    #[test]
    fn real_solve_and_det() {
        let ctx = PrecisionContext::new(40).unwrap();
        let a = vec![vec![ctx.real(2), ctx.real(1)], vec![ctx.real(1), ctx.real(3)]];
        assert!(abs(&(det_r(&ctx, &a) - 5u32)) < ctx.tau());
        let x = least_squares_left(&ctx, &a, &[ctx.real(5), ctx.real(10)]).unwrap();
        assert!(abs(&(x[0].clone() - 1u32)) < ctx.tau());
        assert!(abs(&(x[1].clone() - 3u32)) < ctx.tau());
    }
}
