//! Exact arithmetic in a number field `ℚ[x]/(f)` given by a monic integer
//! polynomial, and reduction modulo primes not dividing the discriminant.

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::{PrecisionContext, Real};
use rug::{Float, Integer, Rational};

/// Element in power-basis coordinates.
pub type FieldElem = Vec<Rational>;

#[derive(Debug, Clone, PartialEq)]
pub struct NumberField {
    /// Monic defining polynomial, low degree first.
    pub poly: Vec<Integer>,
}

impl NumberField {
    pub fn new(poly: Vec<Integer>) -> Result<Self> {
        if poly.len() < 2 || poly[poly.len() - 1] != 1 {
            return Err(Error::InvalidInput("defining polynomial must be monic of degree ≥ 1".into()));
        }
        Ok(Self { poly })
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn zero(&self) -> FieldElem {
        vec![Rational::new(); self.degree()]
    }

    pub fn one(&self) -> FieldElem {
        self.from_rational(&Rational::from(1))
    }

    pub fn from_rational(&self, q: &Rational) -> FieldElem {
        let mut z = self.zero();
        z[0] = q.clone();
        z
    }

    pub fn theta(&self) -> FieldElem {
        let mut z = self.zero();
        if self.degree() > 1 {
            z[1] = Rational::from(1);
        } else {
            z[0] = Rational::from(-&self.poly[0]);
        }
        z
    }

    fn reduce(&self, mut c: Vec<Rational>) -> FieldElem {
        let n = self.degree();
        while c.len() > n {
            let top = c.pop().unwrap();
            if top != 0 {
                let shift = c.len() - n;
                for i in 0..n {
                    c[shift + i] -= Rational::from(&top * &self.poly[i]);
                }
            }
        }
        c.resize(n, Rational::new());
        c
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.iter().zip(b).map(|(x, y)| Rational::from(x + y)).collect()
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.iter().zip(b).map(|(x, y)| Rational::from(x - y)).collect()
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        a.iter().map(|x| Rational::from(-x)).collect()
    }

    pub fn scale(&self, a: &FieldElem, q: &Rational) -> FieldElem {
        a.iter().map(|x| Rational::from(x * q)).collect()
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let n = self.degree();
        let mut c = vec![Rational::new(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if *y != 0 {
                    c[i + j] += Rational::from(x * y);
                }
            }
        }
        self.reduce(c)
    }

    /// Matrix of `y ↦ y·a` on row vectors of coordinates.
    pub fn multiplication_matrix(&self, a: &FieldElem) -> Vec<Vec<Rational>> {
        let n = self.degree();
        (0..n)
            .map(|i| {
                let mut e = self.zero();
                e[i] = Rational::from(1);
                self.mul(&e, a)
            })
            .collect()
    }

    pub fn inverse(&self, a: &FieldElem) -> Result<FieldElem> {
        let m = self.multiplication_matrix(a);
        let one = self.one();
        linalg::solve_left_q(&m, &one, self.degree()).ok_or_else(|| Error::InvalidInput("element is not invertible".into()))
    }

    pub fn pow(&self, a: &FieldElem, k: i64) -> Result<FieldElem> {
        let mut base = if k < 0 { self.inverse(a)? } else { a.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `a(α)` for another element `α` (used to apply automorphisms).
    pub fn compose(&self, a: &FieldElem, alpha: &FieldElem) -> FieldElem {
        let mut acc = self.zero();
        for c in a.iter().rev() {
            acc = self.mul(&acc, alpha);
            acc[0] += c;
        }
        acc
    }

    /// Characteristic polynomial of multiplication by `a`, monic, low degree first.
    pub fn charpoly(&self, a: &FieldElem) -> Vec<Rational> {
        // Faddeev-LeVerrier
        let n = self.degree();
        let m = self.multiplication_matrix(a);
        let mut coeffs = vec![Rational::new(); n + 1];
        coeffs[n] = Rational::from(1);
        let mut mk = vec![vec![Rational::new(); n]; n];
        for k in 1..=n {
            // M_k = A·M_{k-1} + c_{n-k+1} I
            let mut next = linalg::mat_mul_q(&m, &mk, n);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += &coeffs[n - k + 1];
            }
            let am = linalg::mat_mul_q(&m, &next, n);
            let tr: Rational = (0..n).fold(Rational::new(), |acc, i| acc + &am[i][i]);
            coeffs[n - k] = -tr / k as u32;
            mk = next;
        }
        coeffs
    }

    pub fn norm(&self, a: &FieldElem) -> Rational {
        linalg::det_q(&self.multiplication_matrix(a))
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        a.iter().all(|x| *x == 0)
    }

    /// Value at a real root of the defining polynomial.
    pub fn eval(&self, ctx: &PrecisionContext, a: &FieldElem, root: &Real) -> Real {
        let mut acc = ctx.zero();
        for c in a.iter().rev() {
            acc = Float::with_val(ctx.bits(), &acc * root) + ctx.from_rational(c);
        }
        acc
    }

    /// Whether `f mod q` is squarefree, so that `O/q ≅ F_q[x]/(f)`.
    pub fn good_reduction(&self, q: u64) -> bool {
        let f = reduce_poly(&self.poly, q);
        let df = derivative_mod(&f, q);
        let g = poly_gcd_mod(&f, &df, q);
        g.len() == 1
    }
}

pub fn valuation_q(x: &Rational, p: u64) -> i64 {
    if *x == 0 {
        return i64::MAX;
    }
    let p = Integer::from(p);
    crate::lattice::valuation(x.numer(), &p) as i64 - crate::lattice::valuation(x.denom(), &p) as i64
}

/// `x mod q` for a q-integral rational.
pub fn rational_mod(x: &Rational, q: u64) -> Option<u64> {
    let qq = Integer::from(q);
    let den = Integer::from(x.denom() % &qq);
    if den == 0 {
        return None;
    }
    let inv = den.invert(&qq).ok()?;
    let num = Integer::from(x.numer() % &qq);
    let r = (num * inv) % &qq;
    let r = if r < 0 { r + &qq } else { r };
    r.to_u64()
}

fn reduce_poly(p: &[Integer], q: u64) -> Vec<u64> {
    let mut out: Vec<u64> = p
        .iter()
        .map(|c| {
            let r = Integer::from(c % q);
            let r = if r < 0 { r + q } else { r };
            r.to_u64().unwrap()
        })
        .collect();
    trim(&mut out);
    out
}

fn trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

fn derivative_mod(p: &[u64], q: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..p.len()).map(|i| (p[i] as u128 * i as u128 % q as u128) as u64).collect();
    if d.is_empty() {
        d.push(0);
    }
    trim(&mut d);
    d
}

fn inv_mod(a: u64, q: u64) -> u64 {
    Integer::from(a).invert(&Integer::from(q)).unwrap().to_u64().unwrap()
}

fn poly_rem_mod(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], q);
    while r.len() > db && !(r.len() == 1 && r[0] == 0) {
        let c = (*r.last().unwrap() as u128 * lead_inv as u128 % q as u128) as u64;
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            let t = (c as u128 * *bi as u128 % q as u128) as u64;
            r[shift + i] = (r[shift + i] + q - t) % q;
        }
        r.pop();
        if r.is_empty() {
            r.push(0);
        }
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    trim(&mut r);
    r
}

fn poly_gcd_mod(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !(y.len() == 1 && y[0] == 0) {
        let r = poly_rem_mod(&x, &y, q);
        x = y;
        y = r;
    }
    x
}

/// The ring `F_q[x]/(f mod q)` for a prime of good reduction.
#[derive(Debug, Clone)]
pub struct ResidueRing {
    pub q: u64,
    poly: Vec<u64>,
    n: usize,
}

impl ResidueRing {
    pub fn new(field: &NumberField, q: u64) -> Result<Self> {
        if !field.good_reduction(q) {
            return Err(Error::InvalidInput(format!(
                "{q} divides the discriminant of the defining polynomial; residues mod {q} are not supported"
            )));
        }
        Ok(Self { q, poly: reduce_poly(&field.poly, q), n: field.degree() })
    }

    pub fn reduce(&self, a: &FieldElem) -> Result<Vec<u64>> {
        a.iter()
            .map(|c| rational_mod(c, self.q).ok_or_else(|| Error::InvalidInput(format!("element is not {}-integral", self.q))))
            .collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let q = self.q as u128;
        let mut c = vec![0u64; 2 * self.n - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                c[i + j] = ((c[i + j] as u128 + *x as u128 * *y as u128) % q) as u64;
            }
        }
        while c.len() > self.n {
            let top = c.pop().unwrap();
            if top != 0 {
                let shift = c.len() - self.n;
                for i in 0..self.n {
                    let t = (top as u128 * self.poly[i] as u128 % q) as u64;
                    c[shift + i] = (c[shift + i] + self.q - t) % self.q;
                }
            }
        }
        c
    }

    pub fn one(&self) -> Vec<u64> {
        let mut e = vec![0; self.n];
        e[0] = 1;
        e
    }
}

/// Whether every coefficient of the characteristic polynomial of `a` is
/// integral away from the primes in `allowed`.
pub fn is_s_integral(field: &NumberField, a: &FieldElem, allowed: &[u64]) -> bool {
    field.charpoly(a).iter().all(|c| {
        let mut d = c.denom().clone();
        for &p in allowed {
            while d.is_divisible_u(p as u32) {
                d /= p as u32;
            }
        }
        d == 1
    })
}

/// Whether `a` is a unit of `ℤ[1/S]`-integers, i.e. `a` and `a^{-1}` are both
/// S-integral.
pub fn is_s_unit(field: &NumberField, a: &FieldElem, allowed: &[u64]) -> Result<bool> {
    if field.is_zero(a) {
        return Ok(false);
    }
    let inv = field.inverse(a)?;
    Ok(is_s_integral(field, a, allowed) && is_s_integral(field, &inv, allowed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> NumberField {
        NumberField::new(vec![Integer::from(-1), Integer::from(-1), Integer::from(1)]).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn arithmetic_in_golden_field() {
        let k = golden();
        let t = k.theta();
        assert_eq!(k.mul(&t, &t), vec![r(1), r(1)]);
        let inv = k.inverse(&t).unwrap();
        assert_eq!(inv, vec![r(-1), r(1)]);
        assert_eq!(k.norm(&t), -1);
        assert_eq!(k.charpoly(&t), vec![r(-1), r(-1), r(1)]);
        assert_eq!(k.pow(&t, -2).unwrap(), k.mul(&inv, &inv));
    }

    #[test]
    fn s_units() {
        let k = golden();
        let two = k.from_rational(&r(2));
        assert!(!is_s_unit(&k, &two, &[]).unwrap());
        assert!(is_s_unit(&k, &two, &[2]).unwrap());
        assert!(is_s_unit(&k, &k.theta(), &[]).unwrap());
    }

    #[test]
    fn residues_mod_three() {
        let k = golden();
        assert!(!k.good_reduction(5));
        let r3 = ResidueRing::new(&k, 3).unwrap();
        let t = r3.reduce(&k.theta()).unwrap();
        // θ has order 8 in F_9^*
        let mut x = r3.one();
        let mut order = 0;
        loop {
            x = r3.mul(&x, &t);
            order += 1;
            if x == r3.one() {
                break;
            }
        }
        assert_eq!(order, 8);
        assert_eq!(rational_mod(&Rational::from((1, 2)), 3), Some(2));
    }
}
