//! Group rings over ℚ, ℚ(ζ_m), ℝ and ℂ, with the distinguished elements used
//! throughout: character idempotents, `e_{S,r}`, `δ_T`, inertia idempotents
//! and norm elements.

use crate::abelian::{rational_orbits, Character, FiniteAbelianGroup, Quotient, RationalCharacterOrbit, Subgroup};
use crate::arithmetic::{order_of_vanishing, ExtensionData};
use crate::cyclotomic::{ramanujan_sum, Cyc, CyclotomicField};
use crate::error::{Error, Result};
use crate::numeric::{fmt_real, Cplx, PrecisionContext, Real};
use rug::{Float, Rational};
use serde_json::{json, Value};
use std::fmt::Debug;
use std::sync::Arc;

/// Coefficient domain of a group ring.
pub trait Coeff: Clone + Debug + Send + Sync {
    type Ctx: Clone + Debug + PartialEq + Send + Sync;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn from_rational(q: &Rational, ctx: &Self::Ctx) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn render(&self) -> String;
}

impl Coeff for Rational {
    type Ctx = ();
    fn zero(_: &()) -> Self {
        Rational::new()
    }
    fn from_rational(q: &Rational, _: &()) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Coeff for Cyc {
    type Ctx = Arc<CyclotomicField>;
    fn zero(ctx: &Self::Ctx) -> Self {
        Cyc::zero(ctx)
    }
    fn from_rational(q: &Rational, ctx: &Self::Ctx) -> Self {
        Cyc::from_rational(ctx, q)
    }
    fn add(&self, o: &Self) -> Self {
        Cyc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Cyc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Cyc::mul(self, o)
    }
    fn neg(&self) -> Self {
        Cyc::neg(self)
    }
    fn is_zero(&self) -> bool {
        Cyc::is_zero(self)
    }
    fn render(&self) -> String {
        Cyc::render(self)
    }
}

impl Coeff for Real {
    type Ctx = PrecisionContext;
    fn zero(ctx: &PrecisionContext) -> Self {
        ctx.zero()
    }
    fn from_rational(q: &Rational, ctx: &PrecisionContext) -> Self {
        ctx.from_rational(q)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn neg(&self) -> Self {
        Float::with_val(self.prec(), -self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn render(&self) -> String {
        let digits = (f64::from(self.prec()) / std::f64::consts::LOG2_10) as u32;
        fmt_real(self, digits.saturating_sub(20).max(10))
    }
}

impl Coeff for Cplx {
    type Ctx = PrecisionContext;
    fn zero(ctx: &PrecisionContext) -> Self {
        Cplx::zero(ctx)
    }
    fn from_rational(q: &Rational, ctx: &PrecisionContext) -> Self {
        Cplx::from_real(ctx.from_rational(q))
    }
    fn add(&self, o: &Self) -> Self {
        Cplx::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Cplx::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Cplx::mul(self, o)
    }
    fn neg(&self) -> Self {
        Cplx::neg(self)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn render(&self) -> String {
        format!("{}+{}i", Coeff::render(&self.re), Coeff::render(&self.im))
    }
}

/// Element of a group ring, dense in the group's index order.
#[derive(Debug, Clone)]
pub struct GroupRingElement<C: Coeff> {
    group: FiniteAbelianGroup,
    coeffs: Vec<C>,
    ctx: C::Ctx,
}

pub type QElem = GroupRingElement<Rational>;
pub type CycElem = GroupRingElement<Cyc>;
pub type RElem = GroupRingElement<Real>;
pub type CElem = GroupRingElement<Cplx>;

impl<C: Coeff> PartialEq for GroupRingElement<C>
where
    C: PartialEq,
{
    fn eq(&self, o: &Self) -> bool {
        self.group == o.group && self.coeffs == o.coeffs
    }
}

impl<C: Coeff> GroupRingElement<C> {
    pub fn zero(group: &FiniteAbelianGroup, ctx: &C::Ctx) -> Self {
        Self { group: group.clone(), coeffs: vec![C::zero(ctx); group.order()], ctx: ctx.clone() }
    }

    pub fn one(group: &FiniteAbelianGroup, ctx: &C::Ctx) -> Self {
        Self::basis(group, 0, ctx)
    }

    pub fn basis(group: &FiniteAbelianGroup, index: usize, ctx: &C::Ctx) -> Self {
        let mut x = Self::zero(group, ctx);
        x.coeffs[index] = C::from_rational(&Rational::from(1), ctx);
        x
    }

    pub fn group_element(group: &FiniteAbelianGroup, g: &[u64], ctx: &C::Ctx) -> Self {
        Self::basis(group, group.index_of(g), ctx)
    }

    pub fn from_coeffs(group: &FiniteAbelianGroup, coeffs: Vec<C>, ctx: &C::Ctx) -> Self {
        assert_eq!(coeffs.len(), group.order());
        Self { group: group.clone(), coeffs, ctx: ctx.clone() }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, g: &[u64]) -> &C {
        &self.coeffs[self.group.index_of(g)]
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.neg()).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn scale(&self, c: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        self.scale(&C::from_rational(q, &self.ctx))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.group.order();
        let els = self.group.elements();
        let mut out = Self::zero(&self.group, &self.ctx);
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if o.coeffs[j].is_zero() {
                    continue;
                }
                let k = self.group.index_of(&self.group.add(&els[i], &els[j]));
                out.coeffs[k] = out.coeffs[k].add(&self.coeffs[i].mul(&o.coeffs[j]));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(&self.group, &self.ctx);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The involution `σ ↦ σ^{-1}`.
    pub fn involution(&self) -> Self {
        let inv = self.group.inverse_indices();
        let mut coeffs = vec![C::zero(&self.ctx); self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[inv[i]] = c.clone();
        }
        Self { coeffs, ..self.clone() }
    }

    pub fn augmentation(&self) -> C {
        self.coeffs.iter().fold(C::zero(&self.ctx), |a, b| a.add(b))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Linear extension of `G → Δ`.
    pub fn project(&self, q: &Quotient) -> Self {
        let mut out = Self::zero(&q.target, &self.ctx);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = q.target.index_of(&q.project(&self.group.element(i)));
            out.coeffs[k] = out.coeffs[k].add(c);
        }
        out
    }

    pub fn map<D: Coeff>(&self, ctx: &D::Ctx, f: impl Fn(&C) -> D) -> GroupRingElement<D> {
        GroupRingElement { group: self.group.clone(), coeffs: self.coeffs.iter().map(f).collect(), ctx: ctx.clone() }
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| json!([self.group.element(i), c.render()]))
            .collect();
        json!({ "coeffs": coeffs })
    }
}

impl QElem {
    pub fn rational_zero(group: &FiniteAbelianGroup) -> Self {
        Self::zero(group, &())
    }

    pub fn rational_one(group: &FiniteAbelianGroup) -> Self {
        Self::one(group, &())
    }

    pub fn sigma(group: &FiniteAbelianGroup, g: &[u64]) -> Self {
        Self::group_element(group, g, &())
    }

    pub fn from_json(group: &FiniteAbelianGroup, v: &Value) -> Result<Self> {
        let mut x = Self::rational_zero(group);
        let entries = v["coeffs"].as_array().ok_or_else(|| Error::Parse("missing coeffs".into()))?;
        for e in entries {
            let g: Vec<u64> = serde_json::from_value(e[0].clone())?;
            if !group.is_valid(&g) {
                return Err(Error::Parse(format!("{g:?} is not a group element")));
            }
            let s = e[1].as_str().ok_or_else(|| Error::Parse("scalar must be a string".into()))?;
            let q = crate::linalg::parse_rational(s).ok_or_else(|| Error::Parse(format!("bad rational {s}")))?;
            let i = group.index_of(&g);
            x.coeffs[i] += q;
        }
        Ok(x)
    }

    pub fn to_real(&self, ctx: &PrecisionContext) -> RElem {
        self.map(ctx, |q| ctx.from_rational(q))
    }

    pub fn to_cyc(&self, field: &Arc<CyclotomicField>) -> CycElem {
        self.map(field, |q| Cyc::from_rational(field, q))
    }

    /// Value of the algebra map `ℚ[G] → ℚ(ζ_m)` induced by χ.
    pub fn character_value(&self, chi: &Character, field: &Arc<CyclotomicField>) -> Cyc {
        let mut acc = Cyc::zero(field);
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                let j = chi.value_power(&self.group.element(i)) as i64;
                let z = Cyc::root(field, j * (field.m / self.group.exponent()) as i64);
                acc = acc.add(&z.scale(c));
            }
        }
        acc
    }

    /// Rational coordinates, for use as a lattice vector.
    pub fn vector(&self) -> Vec<Rational> {
        self.coeffs.clone()
    }

    pub fn from_vector(group: &FiniteAbelianGroup, v: Vec<Rational>) -> Self {
        Self::from_coeffs(group, v, &())
    }

    /// Matrix of multiplication by `self` on ℚ[G] acting on row vectors:
    /// `row(x·self) = row(x) · M`.
    pub fn multiplication_matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.group.order();
        (0..n)
            .map(|i| Self::basis(&self.group, i, &()).mul(self).coeffs)
            .collect()
    }

    pub fn inverse(&self) -> Option<QElem> {
        let m = self.multiplication_matrix();
        let inv = crate::linalg::inverse_q(&m)?;
        Some(Self::from_vector(&self.group, inv[0].clone()))
    }
}

impl RElem {
    pub fn max_abs_diff(&self, o: &RElem) -> Real {
        let mut m = self.ctx.zero();
        for (a, b) in self.coeffs.iter().zip(&o.coeffs) {
            let d = Float::with_val(a.prec(), a - b).abs();
            if d > m {
                m = d;
            }
        }
        m
    }

    pub fn max_abs(&self) -> Real {
        crate::numeric::max_abs(&self.ctx, self.coeffs.iter())
    }

    /// Image under the ℝ-algebra map induced by χ.
    pub fn character_value(&self, chi: &Character) -> Cplx {
        let ctx = self.ctx;
        let m = self.group.exponent();
        let mut acc = Cplx::zero(&ctx);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let j = chi.value_power(&self.group.element(i)) as i64;
                acc = acc.add(&Cplx::root_of_unity(&ctx, j, m).scale(c));
            }
        }
        acc
    }

    pub fn vector(&self) -> Vec<Real> {
        self.coeffs.clone()
    }
}

/// Leibniz determinant of a square matrix over a commutative group ring.
pub fn determinant<C: Coeff>(group: &FiniteAbelianGroup, m: &[Vec<GroupRingElement<C>>], ctx: &C::Ctx) -> GroupRingElement<C> {
    use itertools::Itertools;
    let r = m.len();
    let mut total = GroupRingElement::zero(group, ctx);
    for perm in (0..r).permutations(r) {
        let mut term = GroupRingElement::one(group, ctx);
        for (i, &p) in perm.iter().enumerate() {
            term = term.mul(&m[i][p]);
        }
        let inversions = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        total = if inversions % 2 == 1 { total.sub(&term) } else { total.add(&term) };
    }
    total
}

/// `e_χ = (1/|G|) Σ_σ χ(σ) σ^{-1}`.
pub fn idempotent(chi: &Character) -> CycElem {
    let g = chi.group();
    let field = CyclotomicField::new(g.exponent());
    let n = Rational::from((1, g.order() as u32));
    let coeffs = g
        .elements()
        .iter()
        .map(|tau| {
            // coefficient of τ is χ(τ^{-1})/|G|
            let j = chi.value_power(&g.neg(tau)) as i64;
            Cyc::root(&field, j).scale(&n)
        })
        .collect();
    CycElem::from_coeffs(g, coeffs, &field)
}

/// Sum of `e_χ` over a rational orbit; rational by Galois invariance.
pub fn orbit_idempotent(orbit: &RationalCharacterOrbit) -> QElem {
    let chi = &orbit.representative;
    let g = chi.group();
    let ord = chi.order();
    let m = g.exponent();
    let coeffs = g
        .elements()
        .iter()
        .map(|tau| {
            let j = chi.value_power(&g.neg(tau));
            // χ(τ^{-1}) = ζ_ord^{b}
            let b = j / (m / ord);
            Rational::from((ramanujan_sum(ord, b), g.order() as i64))
        })
        .collect();
    QElem::from_coeffs(g, coeffs, &())
}

/// Sum of orbit idempotents over the characters selected by `keep` (which must
/// be constant on rational orbits).
pub fn idempotent_sum(g: &FiniteAbelianGroup, keep: impl Fn(&Character) -> bool) -> QElem {
    let mut e = QElem::rational_zero(g);
    for orbit in rational_orbits(g) {
        if keep(&orbit.representative) {
            debug_assert!(orbit.members.iter().all(&keep));
            e = e.add(&orbit_idempotent(&orbit));
        }
    }
    e
}

/// `e_{S,r}`: sum of `e_χ` over characters with `r_S(χ) = r`.
pub fn e_s_r(ext: &ExtensionData) -> QElem {
    idempotent_sum(&ext.group, |chi| order_of_vanishing(chi, ext) == ext.r)
}

/// `δ_T = Π_{q∈T} (1 − σ_q^{-1} Nq)`.
pub fn delta_t(ext: &ExtensionData) -> Result<QElem> {
    let g = &ext.group;
    let mut d = QElem::rational_one(g);
    for q in &ext.t_places {
        if !q.inertia.is_trivial() {
            return Err(Error::Ramified(q.label.clone()));
        }
        let norm = q.norm.clone().ok_or_else(|| Error::InvalidInput(format!("T place {} has no norm", q.label)))?;
        let factor = QElem::rational_one(g).sub(&QElem::sigma(g, &g.neg(&q.frobenius)).scale_rational(&Rational::from(norm)));
        d = d.mul(&factor);
    }
    let field = CyclotomicField::new(g.exponent());
    for chi in crate::abelian::enumerate_characters(g) {
        if d.character_value(&chi, &field).is_zero() {
            return Err(Error::InvalidInput(format!("δ_T is a zero divisor (killed by character {:?})", chi.exponents())));
        }
    }
    Ok(d)
}

/// `e_I = (1/|I|) Σ_{σ∈I} σ`.
pub fn inertia_idempotent(i: &Subgroup) -> QElem {
    norm_element(i).scale_rational(&Rational::from((1, i.order() as u32)))
}

/// `s(T) = Σ_{σ∈T} σ`.
pub fn norm_element(t: &Subgroup) -> QElem {
    let g = t.parent();
    let mut x = QElem::rational_zero(g);
    for idx in t.indices() {
        x.coeffs[idx] = Rational::from(1);
    }
    x
}

/// `1 − σ^{-1} e_I`, the Euler-type factor of a finite place.
pub fn euler_factor(frobenius: &[u64], inertia: &Subgroup) -> QElem {
    let g = inertia.parent();
    QElem::rational_one(g).sub(&QElem::sigma(g, &g.neg(frobenius)).mul(&inertia_idempotent(inertia)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::enumerate_characters;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn idempotents_of_c2() {
        let g = FiniteAbelianGroup::new(&[2]).unwrap();
        let chars = enumerate_characters(&g);
        let field = CyclotomicField::new(2);
        let e0 = idempotent(&chars[0]);
        let e1 = idempotent(&chars[1]);
        assert_eq!(e0.coeffs()[1], Cyc::from_rational(&field, &q(1, 2)));
        assert_eq!(e1.coeffs()[1], Cyc::from_rational(&field, &q(-1, 2)));
        assert_eq!(e0.mul(&e0), e0);
        assert!(e0.mul(&e1).is_zero());
    }

    #[test]
    fn idempotent_of_c3() {
        let g = FiniteAbelianGroup::new(&[3]).unwrap();
        let chi = &enumerate_characters(&g)[1];
        let e = idempotent(chi);
        let f = e.ctx().clone();
        let third = q(1, 3);
        assert_eq!(e.coeffs()[0], Cyc::from_rational(&f, &third));
        // coefficient of σ² is ζ₃/3, of σ is ζ₃²/3
        assert_eq!(e.coeffs()[2], Cyc::root(&f, 1).scale(&third));
        assert_eq!(e.coeffs()[1], Cyc::root(&f, 2).scale(&third));
        assert_eq!(e.mul(&e), e);
    }

    #[test]
    fn orbit_idempotents_match_cyclotomic_sums() {
        for factors in [vec![6u64], vec![2, 4], vec![12]] {
            let g = FiniteAbelianGroup::new(&factors).unwrap();
            let field = CyclotomicField::new(g.exponent());
            let mut total = QElem::rational_zero(&g);
            for orbit in rational_orbits(&g) {
                let e = orbit_idempotent(&orbit);
                let mut direct = CycElem::zero(&g, &field);
                for chi in &orbit.members {
                    direct = direct.add(&idempotent(chi));
                }
                assert_eq!(e.to_cyc(&field), direct);
                assert_eq!(e.mul(&e), e);
                total = total.add(&e);
            }
            assert_eq!(total, QElem::rational_one(&g));
        }
    }

    #[test]
    fn norm_and_inertia() {
        let g = FiniteAbelianGroup::new(&[2]).unwrap();
        let whole = Subgroup::whole(&g);
        assert_eq!(norm_element(&whole).coeffs(), &[q(1, 1), q(1, 1)]);
        assert_eq!(inertia_idempotent(&whole).coeffs(), &[q(1, 2), q(1, 2)]);
        assert_eq!(inertia_idempotent(&Subgroup::trivial(&g)), QElem::rational_one(&g));
    }

    #[test]
    fn projection_to_trivial_quotient() {
        let g = FiniteAbelianGroup::new(&[2]).unwrap();
        let qt = crate::abelian::quotient_and_projection(&g, &Subgroup::whole(&g)).unwrap();
        let x = QElem::from_vector(&g, vec![q(3, 1), q(5, 1)]);
        assert_eq!(x.project(&qt).coeffs(), &[q(8, 1)]);
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        let x = QElem::from_vector(&g, vec![q(1, 2), q(0, 1), q(-3, 1), q(7, 5)]);
        let y = QElem::from_json(&g, &x.to_json()).unwrap();
        assert_eq!(x, y);
    }
}
