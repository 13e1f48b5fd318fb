//! Exact arithmetic in ℚ(ζ_m), elements stored as polynomials modulo Φ_m.

use crate::numeric::{Cplx, PrecisionContext};
use rug::{Integer, Rational};
use std::fmt;
use std::sync::Arc;

/// Φ_m with integer coefficients, low degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<Integer> {
    // x^m - 1 divided by Φ_d for every proper divisor d
    let mut num: Vec<Integer> = vec![Integer::new(); m as usize + 1];
    num[0] = Integer::from(-1);
    num[m as usize] = Integer::from(1);
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = exact_div(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn exact_div(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    // b monic
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let da = a.len() - 1;
    let mut q = vec![Integer::new(); da - db + 1];
    for i in (0..=da - db).rev() {
        let c = rem[i + db].clone();
        if c != 0 {
            for (j, bj) in b.iter().enumerate() {
                rem[i + j] -= Integer::from(&c * bj);
            }
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(|x| *x == 0));
    q
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub fn mobius(mut n: u64) -> i64 {
    let mut s = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            s = -s;
        }
        p += 1;
    }
    if n > 1 {
        s = -s;
    }
    s
}

/// Ramanujan sum `Σ_{k mod n, (k,n)=1} ζ_n^{k a}`.
pub fn ramanujan_sum(n: u64, a: u64) -> i64 {
    let g = crate::abelian::gcd(n, a % n);
    let g = if g == 0 { n } else { g };
    let m = n / g;
    mobius(m) * (euler_phi(n) / euler_phi(m)) as i64
}

#[derive(Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    pub m: u64,
    pub phi: Vec<Integer>,
    powers: Vec<Vec<Rational>>,
}

impl CyclotomicField {
    pub fn new(m: u64) -> Arc<Self> {
        let m = m.max(1);
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        let mut powers = Vec::with_capacity(m as usize);
        let mut cur = vec![Rational::new(); deg];
        cur[0] = Rational::from(1);
        for _ in 0..m {
            powers.push(cur.clone());
            cur = Self::times_x(&phi, &cur);
        }
        Arc::new(Self { m, phi, powers })
    }

    fn times_x(phi: &[Integer], a: &[Rational]) -> Vec<Rational> {
        let deg = a.len();
        let mut out = vec![Rational::new(); deg];
        let top = a[deg - 1].clone();
        for i in (1..deg).rev() {
            out[i] = a[i - 1].clone();
        }
        if top != 0 {
            for i in 0..deg {
                out[i] -= Rational::from(&top * &phi[i]);
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Cyc {
    pub field: Arc<CyclotomicField>,
    pub coeffs: Vec<Rational>,
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Cyc {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        Self { field: field.clone(), coeffs: vec![Rational::new(); field.degree()] }
    }

    pub fn from_rational(field: &Arc<CyclotomicField>, q: &Rational) -> Self {
        let mut z = Self::zero(field);
        z.coeffs[0] = q.clone();
        z
    }

    /// ζ_m^j.
    pub fn root(field: &Arc<CyclotomicField>, j: i64) -> Self {
        let m = field.m as i64;
        Self { field: field.clone(), coeffs: field.powers[j.rem_euclid(m) as usize].clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Rational::from(a + b)).collect();
        Self { field: self.field.clone(), coeffs }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Rational::from(a - b)).collect();
        Self { field: self.field.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|a| Rational::from(-a)).collect();
        Self { field: self.field.clone(), coeffs }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|a| Rational::from(a * q)).collect();
        Self { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(&self.field);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if *b == 0 {
                    continue;
                }
                let prod = Rational::from(a * b);
                for (k, c) in self.field.powers[(i + j) % self.field.m as usize].iter().enumerate() {
                    if *c != 0 {
                        out.coeffs[k] += Rational::from(&prod * c);
                    }
                }
            }
        }
        out
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.field);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a != 0 {
                out = out.add(&Self::root(&self.field, -(i as i64)).scale(a));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs.iter().skip(1).all(|c| *c == 0) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> Cplx {
        let mut acc = Cplx::zero(ctx);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a != 0 {
                let z = Cplx::root_of_unity(ctx, i as i64, self.field.m);
                acc = acc.add(&z.scale(&ctx.from_rational(a)));
            }
        }
        acc
    }

    pub fn render(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        let ints = |v: &[i64]| v.iter().map(|&x| Integer::from(x)).collect::<Vec<_>>();
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn roots_multiply() {
        let f = CyclotomicField::new(12);
        let a = Cyc::root(&f, 5);
        let b = Cyc::root(&f, 9);
        assert_eq!(a.mul(&b), Cyc::root(&f, 2));
        assert_eq!(a.mul(&a.conj()), Cyc::from_rational(&f, &Rational::from(1)));
        let mut s = Cyc::zero(&f);
        for j in 0..12 {
            s = s.add(&Cyc::root(&f, j));
        }
        assert!(s.is_zero());
    }

    #[test]
    fn ramanujan_sums() {
        assert_eq!(ramanujan_sum(5, 0), 4);
        assert_eq!(ramanujan_sum(5, 2), -1);
        assert_eq!(ramanujan_sum(6, 1), 1);
        assert_eq!(ramanujan_sum(6, 2), -1);
        assert_eq!(ramanujan_sum(4, 1), 0);
    }
}
