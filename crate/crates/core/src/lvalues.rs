//! Dirichlet characters, L-derivatives at s = 0, the S,T-modified leading
//! terms, Stickelberger elements, `ω_K` and ζ* products over subfields.

use crate::abelian::{enumerate_characters, gcd, presentation, Character, FiniteAbelianGroup, Quotient, Subgroup};
use crate::arithmetic::{order_of_vanishing, ExtensionData, PlaceData};
use crate::error::{Error, Result};
use crate::field::FieldInstance;
use crate::group_ring::{idempotent, CElem, RElem};
use crate::numeric::{Cplx, PrecisionContext, Real};
use rug::Float;
use std::collections::BTreeMap;

/// A character of `(ℤ/f)^×` with values `ζ_order^k`, stored per residue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter {
    pub modulus: u64,
    /// Root-of-unity order the value powers refer to.
    pub order: u64,
    values: Vec<Option<u64>>,
}

impl DirichletCharacter {
    /// Values given for every residue coprime to the modulus.
    pub fn new(modulus: u64, order: u64, values: Vec<Option<u64>>) -> Result<Self> {
        if modulus == 0 || order == 0 || values.len() != modulus as usize {
            return Err(Error::InvalidInput("malformed Dirichlet character".into()));
        }
        for a in 0..modulus {
            let coprime = gcd(a, modulus) == 1;
            if coprime != values[a as usize].is_some() {
                return Err(Error::InvalidInput(format!("value at {a} does not match coprimality")));
            }
        }
        let chi = Self { modulus, order, values };
        for a in 0..modulus {
            for b in 0..modulus {
                if let (Some(x), Some(y)) = (chi.value(a), chi.value(b)) {
                    if chi.value(a * b).unwrap() != (x + y) % order {
                        return Err(Error::InvalidInput("character is not multiplicative".into()));
                    }
                }
            }
        }
        Ok(chi)
    }

    pub fn trivial(modulus: u64) -> Self {
        let values = (0..modulus).map(|a| (gcd(a, modulus) == 1).then_some(0)).collect();
        Self { modulus, order: 1, values }
    }

    /// `k` with `χ(a) = ζ_order^k`, or `None` when `gcd(a, f) > 1`.
    pub fn value(&self, a: u64) -> Option<u64> {
        self.values[(a % self.modulus) as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().flatten().all(|&k| k == 0)
    }

    pub fn is_even(&self) -> bool {
        self.value(self.modulus - 1) == Some(0) || self.modulus <= 2
    }

    /// `(ψ̂, 𝔣_ψ)`: the smallest modulus inducing ψ and the primitive character.
    pub fn primitive_part(&self) -> (DirichletCharacter, u64) {
        let f = self.modulus;
        for d in (1..=f).filter(|d| f.is_multiple_of(*d)) {
            let induced = (0..f).all(|a| a % d != 1 % d || self.value(a).is_none_or(|k| k == 0));
            if !induced {
                continue;
            }
            let values = (0..d)
                .map(|a| {
                    if gcd(a, d) != 1 {
                        return None;
                    }
                    let lift = (0..f / d).map(|k| a + k * d).find(|&x| gcd(x, f) == 1).expect("lift exists");
                    self.value(lift)
                })
                .collect();
            return (DirichletCharacter { modulus: d, order: self.order, values }, d);
        }
        unreachable!("the modulus itself always induces ψ")
    }

    pub fn conductor(&self) -> u64 {
        self.primitive_part().1
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|v| v.map(|k| (self.order - k) % self.order)).collect();
        Self { modulus: self.modulus, order: self.order, values }
    }
}

/// All characters of `(ℤ/f)^×`.
pub fn all_characters(f: u64) -> Result<Vec<DirichletCharacter>> {
    if f == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    let units: Vec<u64> = (1..=f).map(|a| a % f).filter(|&a| gcd(a, f) == 1).collect();
    let pres = presentation(1 % f, &units, |a, b| a * b % f)?;
    let m = pres.group.exponent();
    Ok(enumerate_characters(&pres.group)
        .iter()
        .map(|chi| {
            let values = (0..f)
                .map(|a| pres.coordinates(&a).filter(|_| gcd(a, f) == 1).map(|x| chi.value_power(&x)))
                .collect();
            DirichletCharacter { modulus: f, order: m, values }
        })
        .collect())
}

/// The even primitive quadratic character of conductor f, when it is unique.
pub fn quadratic_character(f: u64) -> Result<DirichletCharacter> {
    let found: Vec<DirichletCharacter> = all_characters(f)?
        .into_iter()
        .filter(|c| !c.is_trivial() && c.is_even() && c.is_primitive())
        .filter(|c| c.values.iter().flatten().all(|&k| (2 * k) % c.order == 0))
        .collect();
    match found.len() {
        1 => Ok(found.into_iter().next().unwrap()),
        0 => Err(Error::InvalidInput(format!("no even primitive quadratic character of conductor {f}"))),
        n => Err(Error::InvalidInput(format!("{n} even primitive quadratic characters of conductor {f}"))),
    }
}

/// `ζ(0)`.
pub fn zeta_at_0(ctx: &PrecisionContext) -> Real {
    ctx.real(-1) / 2u32
}

/// `ζ′(0) = −log(2π)/2`.
pub fn zeta_derivative_at_0(ctx: &PrecisionContext) -> Real {
    -(ctx.pi() * 2u32).ln() / 2u32
}

/// `L′(0, χ̂) = −½ Σ_{a mod 𝔣} χ̂(a) log|1 − ζ_𝔣^a|` for an even primitive
/// nontrivial character.
pub fn l_derivative_at_0(chi: &DirichletCharacter, ctx: &PrecisionContext) -> Result<Cplx> {
    if chi.is_trivial() {
        return Err(Error::InvalidInput("the trivial character has a pole, not a derivative".into()));
    }
    if !chi.is_even() {
        return Err(Error::InvalidInput("odd character: L(0, χ) does not vanish".into()));
    }
    if !chi.is_primitive() {
        return Err(Error::InvalidInput(format!("character mod {} is imprimitive", chi.modulus)));
    }
    let f = chi.modulus;
    let pi = ctx.pi();
    let mut acc = Cplx::zero(ctx);
    for a in 1..f {
        if let Some(k) = chi.value(a) {
            // |1 − ζ_f^a| = 2 sin(πa/f)
            let angle = Float::with_val(ctx.bits(), &pi * a) / f;
            let log = (angle.sin() * 2u32).ln();
            acc = acc.add(&Cplx::root_of_unity(ctx, k as i64, chi.order).scale(&log));
        }
    }
    Ok(acc.scale(&(ctx.real(-1) / 2u32)))
}

/// Order of vanishing at `s = 0` and the leading Taylor coefficient.
#[derive(Debug, Clone)]
pub struct Leading {
    pub order: usize,
    pub value: Cplx,
}

impl Leading {
    /// Coefficient of `s^k` for `k ≤ order`.
    pub fn coefficient_up_to_order(&self, k: usize, ctx: &PrecisionContext) -> Result<Cplx> {
        match k.cmp(&self.order) {
            std::cmp::Ordering::Less => Ok(Cplx::zero(ctx)),
            std::cmp::Ordering::Equal => Ok(self.value.clone()),
            std::cmp::Ordering::Greater => Err(Error::InvalidInput(format!(
                "coefficient of s^{k} lies beyond the leading term (order {})",
                self.order
            ))),
        }
    }
}

/// Source of primitive L-values `L(s, χ̂)` at s = 0 for characters of G.
pub trait LOracle {
    fn group(&self) -> &FiniteAbelianGroup;
    fn leading(&self, chi: &Character) -> Result<Leading>;
    /// Coefficient of `s^k` in the Taylor series of `L(s, χ̂)` at 0.
    fn coefficient(&self, chi: &Character, k: usize) -> Result<Cplx>;
    fn provenance(&self) -> &'static str;
}

/// Genuine k = ℚ oracle: characters of `G` read as Dirichlet characters
/// modulo the conductor through the Artin map.
#[derive(Debug, Clone)]
pub struct DirichletOracle {
    pub conductor: u64,
    group: FiniteAbelianGroup,
    residues: Vec<Option<Vec<u64>>>,
    ctx: PrecisionContext,
}

impl DirichletOracle {
    pub fn new(inst: &FieldInstance) -> Result<Self> {
        let f = inst.conductor;
        let residues: Vec<Option<Vec<u64>>> = (0..f)
            .map(|a| if gcd(a, f) == 1 { inst.residue_element(a).cloned() } else { None })
            .collect();
        if (0..f).any(|a| gcd(a, f) == 1 && residues[a as usize].is_none()) {
            return Err(Error::validation("artin-map", "a unit residue has no Galois image"));
        }
        Ok(Self { conductor: f, group: inst.group().clone(), residues, ctx: inst.ctx })
    }

    pub fn dirichlet(&self, chi: &Character) -> DirichletCharacter {
        let values = self.residues.iter().map(|g| g.as_ref().map(|g| chi.value_power(g))).collect();
        DirichletCharacter { modulus: self.conductor, order: self.group.exponent(), values }
    }

    pub fn with_precision(&self, ctx: &PrecisionContext) -> Self {
        Self { ctx: *ctx, ..self.clone() }
    }
}

impl LOracle for DirichletOracle {
    fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    fn leading(&self, chi: &Character) -> Result<Leading> {
        if chi.is_trivial() {
            return Ok(Leading { order: 0, value: Cplx::from_real(zeta_at_0(&self.ctx)) });
        }
        let (prim, _) = self.dirichlet(chi).primitive_part();
        Ok(Leading { order: 1, value: l_derivative_at_0(&prim, &self.ctx)? })
    }

    fn coefficient(&self, chi: &Character, k: usize) -> Result<Cplx> {
        if chi.is_trivial() && k == 1 {
            return Ok(Cplx::from_real(zeta_derivative_at_0(&self.ctx)));
        }
        self.leading(chi)?.coefficient_up_to_order(k, &self.ctx)
    }

    fn provenance(&self) -> &'static str {
        "dirichlet"
    }
}

/// Synthetic oracle: caller-supplied leading terms per character.
#[derive(Debug, Clone)]
pub struct TableOracle {
    group: FiniteAbelianGroup,
    entries: BTreeMap<Vec<u64>, Leading>,
    ctx: PrecisionContext,
}

impl TableOracle {
    /// Missing conjugates are filled in by complex conjugation; a present
    /// conjugate must agree.
    pub fn new(group: &FiniteAbelianGroup, entries: Vec<(Character, Leading)>, ctx: &PrecisionContext) -> Result<Self> {
        let mut map: BTreeMap<Vec<u64>, Leading> = BTreeMap::new();
        for (chi, lead) in &entries {
            if chi.group() != group {
                return Err(Error::InvalidInput("table character on another group".into()));
            }
            map.insert(chi.exponents().to_vec(), lead.clone());
        }
        for (chi, lead) in &entries {
            let bar = chi.inverse().exponents().to_vec();
            let expected = Leading { order: lead.order, value: lead.value.conj() };
            match map.get(&bar) {
                Some(other) => {
                    let d = other.value.sub(&expected.value).norm();
                    if other.order != lead.order || d > ctx.tau() {
                        return Err(Error::validation("lvalues", format!("conjugate entries for {:?} disagree", chi.exponents())));
                    }
                }
                None => {
                    map.insert(bar, expected);
                }
            }
        }
        Ok(Self { group: group.clone(), entries: map, ctx: *ctx })
    }
}

impl LOracle for TableOracle {
    fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    fn leading(&self, chi: &Character) -> Result<Leading> {
        self.entries
            .get(chi.exponents())
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no table entry for character {:?}", chi.exponents())))
    }

    fn coefficient(&self, chi: &Character, k: usize) -> Result<Cplx> {
        self.leading(chi)?.coefficient_up_to_order(k, &self.ctx)
    }

    fn provenance(&self) -> &'static str {
        "table"
    }
}

fn log_norm(p: &PlaceData, ctx: &PrecisionContext) -> Result<Real> {
    let n = p.norm.as_ref().ok_or_else(|| Error::InvalidInput(format!("place {} has no norm", p.label)))?;
    Ok(ctx.real(n).ln())
}

fn char_value(psi: &Character, g: &[u64], ctx: &PrecisionContext) -> Cplx {
    Cplx::root_of_unity(ctx, psi.value_power(g) as i64, psi.group().exponent())
}

/// Leading term of `L_{S,T}(s, ψ)` for a character ψ of `sub.group`, with
/// `q : G → sub.group`. The S-Euler factors `1 − ψ(σ_v)Nv^{-s}` at places
/// where ψ is unramified contribute `log Nv` (ψ trivial on `D_v`) or
/// `1 − ψ(σ_v)`; each T factor contributes `1 − ψ(σ_𝔮)N𝔮`.
pub fn l_st_leading(
    psi: &Character,
    sub: &ExtensionData,
    q: &Quotient,
    oracle: &dyn LOracle,
    ctx: &PrecisionContext,
) -> Result<Leading> {
    let chi = Character::inflate(psi, q);
    let mut lead = oracle.leading(&chi)?;
    for v in sub.finite_s_places() {
        if !psi.is_trivial_on(&v.inertia) {
            continue;
        }
        if psi.is_trivial_on(&v.decomposition) {
            lead.order += 1;
            lead.value = lead.value.scale(&log_norm(v, ctx)?);
        } else {
            let one = Cplx::from_real(ctx.real(1));
            lead.value = lead.value.mul(&one.sub(&char_value(psi, &v.frobenius, ctx)));
        }
    }
    for t in &sub.t_places {
        let n = t.norm.as_ref().ok_or_else(|| Error::InvalidInput(format!("T place {} has no norm", t.label)))?;
        let one = Cplx::from_real(ctx.real(1));
        let factor = one.sub(&char_value(psi, &t.frobenius, ctx).scale(&ctx.real(n)));
        lead.value = lead.value.mul(&factor);
    }
    Ok(lead)
}

/// `e_χ` with numeric coefficients.
pub fn numeric_idempotent(chi: &Character, ctx: &PrecisionContext) -> CElem {
    idempotent(chi).map(ctx, |c| c.eval(ctx))
}

/// Real part of a group ring element whose imaginary parts must vanish.
pub fn real_part(x: &CElem, ctx: &PrecisionContext) -> Result<RElem> {
    let scale = x.coeffs().iter().map(|c| c.norm()).fold(ctx.real(1), |a, b| a.max(&b));
    let tol = Float::with_val(ctx.bits(), ctx.tau() * &scale);
    for c in x.coeffs() {
        if c.im.clone().abs() > tol {
            return Err(Error::PrecisionExhausted("group ring element is not real".into()));
        }
    }
    Ok(x.map(ctx, |c| c.re.clone()))
}

/// `Θ^{(r)}_{S,T}(0) = Σ_ψ [s^r] L_{S,T}(s, ψ) e_{ψ^{-1}}` over `sub.group`.
pub fn stickelberger_leading(
    sub: &ExtensionData,
    q: &Quotient,
    oracle: &dyn LOracle,
    ctx: &PrecisionContext,
) -> Result<RElem> {
    let delta = &sub.group;
    let mut theta = CElem::zero(delta, ctx);
    for psi in enumerate_characters(delta) {
        let lead = l_st_leading(&psi, sub, q, oracle, ctx)?;
        if lead.order < sub.r {
            return Err(Error::InvalidInput(format!(
                "L_{{S,T}}(s, ψ) vanishes to order {} < r at s = 0 for ψ = {:?}",
                lead.order,
                psi.exponents()
            )));
        }
        if lead.order == sub.r {
            theta = theta.add(&numeric_idempotent(&psi.inverse(), ctx).scale(&lead.value));
        }
    }
    real_part(&theta, ctx)
}

/// `ω_K = Σ_{r_S(χ)=r} L^{(r)}(0, χ̂) e_{χ^{-1}}`.
pub fn omega_k(ext: &ExtensionData, oracle: &dyn LOracle, ctx: &PrecisionContext) -> Result<RElem> {
    let mut omega = CElem::zero(&ext.group, ctx);
    for chi in enumerate_characters(&ext.group) {
        if order_of_vanishing(&chi, ext) == ext.r {
            let c = oracle.coefficient(&chi, ext.r)?;
            omega = omega.add(&numeric_idempotent(&chi.inverse(), ctx).scale(&c));
        }
    }
    real_part(&omega, ctx)
}

/// `Π_{r_S(χ)=r} L^{(r)}(0, χ̂)`, the determinant of multiplication by `ω_K`
/// on `e_{S,r}ℝ[G]`.
pub fn omega_determinant(ext: &ExtensionData, oracle: &dyn LOracle, ctx: &PrecisionContext) -> Result<Real> {
    let mut acc = Cplx::from_real(ctx.real(1));
    for chi in enumerate_characters(&ext.group) {
        if order_of_vanishing(&chi, ext) == ext.r {
            acc = acc.mul(&oracle.coefficient(&chi, ext.r)?);
        }
    }
    Ok(acc.re)
}

/// Branch (a) of `ζ*_F(0)` for `F = K^H`: the product of the leading terms
/// of `L(s, χ̂)` over the characters trivial on H.
pub fn zeta_star_from_characters(h: &Subgroup, oracle: &dyn LOracle, ctx: &PrecisionContext) -> Result<(usize, Real)> {
    let mut order = 0;
    let mut acc = Cplx::from_real(ctx.real(1));
    for chi in enumerate_characters(oracle.group()) {
        if chi.is_trivial_on(h) {
            let lead = oracle.leading(&chi)?;
            order += lead.order;
            acc = acc.mul(&lead.value);
        }
    }
    Ok((order, acc.re))
}

/// Branch (b): `−h_F·Reg_F/|μ(F)|`.
pub fn zeta_star_from_class_number(h: u64, regulator: &Real, roots_of_unity: u64) -> Real {
    -Float::with_val(regulator.prec(), regulator * h) / roots_of_unity
}

/// Both sides of `Π_{r_S(χ)=r} L^{(r)}(0,χ̂) = Π_I ζ*_{K_I}(0)^{(−1)^{|I|}}`,
/// where I runs over all subsets of `family` (I = ∅ giving ζ*_K) and
/// `K_I = K^{D_I}`.
#[derive(Debug, Clone)]
pub struct InclusionExclusion {
    pub characters_side: Real,
    pub subfield_side: Real,
    pub terms: Vec<(Vec<String>, Real)>,
}

pub fn inclusion_exclusion(
    ext: &ExtensionData,
    family: &[&PlaceData],
    oracle: &dyn LOracle,
    ctx: &PrecisionContext,
) -> Result<InclusionExclusion> {
    let characters_side = omega_determinant(ext, oracle, ctx)?;
    let mut subfield_side = ctx.real(1);
    let mut terms = Vec::new();
    for mask in 0u64..1 << family.len() {
        let members: Vec<&PlaceData> = (0..family.len()).filter(|i| mask >> i & 1 == 1).map(|i| family[i]).collect();
        let mut d = Subgroup::trivial(&ext.group);
        for p in &members {
            d = d.join(&p.decomposition);
        }
        let (_, z) = zeta_star_from_characters(&d, oracle, ctx)?;
        if members.len().is_multiple_of(2) {
            subfield_side *= &z;
        } else {
            subfield_side /= &z;
        }
        terms.push((members.iter().map(|p| p.label.clone()).collect(), z));
    }
    Ok(InclusionExclusion { characters_side, subfield_side, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::CycleDivisor;
    use crate::arithmetic::{subfield_k_g, ExtensionData};
    use crate::abelian::quotient_and_projection;
    use rug::Integer;

    fn close(a: &Real, b: &Real, tol: &Real) -> bool {
        Float::with_val(a.prec(), a - b).abs() < *tol
    }

    #[test]
    fn primitive_parts() {
        let (p, f) = DirichletCharacter::trivial(15).primitive_part();
        assert_eq!(f, 1);
        assert!(p.is_trivial());
        let chi5 = quadratic_character(5).unwrap();
        assert_eq!(chi5.primitive_part().1, 5);
        // the mod-20 character induced from the quadratic character mod 5
        let values = (0..20u64).map(|a| if gcd(a, 20) == 1 { chi5.value(a) } else { None }).collect();
        let chi20 = DirichletCharacter::new(20, chi5.order, values).unwrap();
        let (prim, f) = chi20.primitive_part();
        assert_eq!(f, 5);
        assert_eq!(prim, chi5);
    }

    #[test]
    fn quadratic_oracle_values() {
        let ctx = PrecisionContext::new(50).unwrap();
        let phi = (ctx.real(5).sqrt() + 1u32) / 2u32;
        let l5 = l_derivative_at_0(&quadratic_character(5).unwrap(), &ctx).unwrap();
        assert!(close(&l5.re, &phi.ln(), &ctx.pow10(-40)));
        let l8 = l_derivative_at_0(&quadratic_character(8).unwrap(), &ctx).unwrap();
        assert!(close(&l8.re, &(ctx.real(2).sqrt() + 1u32).ln(), &ctx.pow10(-40)));
        assert!(l8.im.is_zero() || l8.im.clone().abs() < ctx.tau());
    }

    #[test]
    fn oracle_rejects_bad_characters() {
        let ctx = PrecisionContext::new(30).unwrap();
        let odd = all_characters(5).unwrap().into_iter().find(|c| !c.is_even()).unwrap();
        assert!(l_derivative_at_0(&odd, &ctx).is_err());
        let chi5 = quadratic_character(5).unwrap();
        let values = (0..10u64).map(|a| if gcd(a, 10) == 1 { chi5.value(a) } else { None }).collect();
        let imprimitive = DirichletCharacter::new(10, chi5.order, values).unwrap();
        assert!(l_derivative_at_0(&imprimitive, &ctx).is_err());
        assert!(l_derivative_at_0(&DirichletCharacter::trivial(7), &ctx).is_err());
    }

    #[test]
    fn conjugate_characters_agree() {
        let ctx = PrecisionContext::new(40).unwrap();
        for chi in all_characters(13).unwrap() {
            if chi.is_trivial() || !chi.is_even() {
                continue;
            }
            let a = l_derivative_at_0(&chi, &ctx).unwrap();
            let b = l_derivative_at_0(&chi.conj(), &ctx).unwrap();
            assert!(a.conj().sub(&b).norm() < ctx.tau());
        }
    }

    fn sqrt5(s_prime: &[(&str, u64, u64)], t: &[(&str, u64, u64)]) -> ExtensionData {
        let g = FiniteAbelianGroup::new(&[2]).unwrap();
        let whole = Subgroup::whole(&g);
        let five = PlaceData {
            label: "5".into(),
            norm: Some(Integer::from(5)),
            inertia: whole.clone(),
            decomposition: whole,
            frobenius: vec![0],
        };
        let mk = |v: &[(&str, u64, u64)]| {
            v.iter()
                .map(|(l, n, f)| PlaceData::unramified(l, Some(Integer::from(*n)), vec![*f], &g).unwrap())
                .collect::<Vec<_>>()
        };
        ExtensionData { group: g.clone(), r: 1, ramified: vec![five], s_prime: mk(s_prime), t_places: mk(t), roots_of_unity: 2 }
    }

    /// Quadratic-character oracle for ℚ(√5), built without a field file.
    struct Sqrt5Oracle(FiniteAbelianGroup, PrecisionContext);

    impl LOracle for Sqrt5Oracle {
        fn group(&self) -> &FiniteAbelianGroup {
            &self.0
        }
        fn leading(&self, chi: &Character) -> Result<Leading> {
            if chi.is_trivial() {
                Ok(Leading { order: 0, value: Cplx::from_real(zeta_at_0(&self.1)) })
            } else {
                Ok(Leading { order: 1, value: l_derivative_at_0(&quadratic_character(5)?, &self.1)? })
            }
        }
        fn coefficient(&self, chi: &Character, k: usize) -> Result<Cplx> {
            self.leading(chi)?.coefficient_up_to_order(k, &self.1)
        }
        fn provenance(&self) -> &'static str {
            "test"
        }
    }

    #[test]
    fn trivial_character_leading_term() {
        let ctx = PrecisionContext::new(50).unwrap();
        let ext = sqrt5(&[], &[("3", 3, 1)]);
        let oracle = Sqrt5Oracle(ext.group.clone(), ctx);
        let bottom = subfield_k_g(&CycleDivisor::one(), &ext).unwrap();
        assert_eq!(bottom.ext.s_size(), 1);
        // S = {∞, 5} over ℚ: the prime 5 kept as an S place
        let top = crate::arithmetic::subfield_fixed_by(&Subgroup::whole(&ext.group), &ext).unwrap();
        let psi = Character::trivial(&top.ext.group);
        let lead = l_st_leading(&psi, &top.ext, &top.quotient, &oracle, &ctx).unwrap();
        assert_eq!(lead.order, 1);
        assert!(close(&lead.value.re, &ctx.real(5).ln(), &ctx.pow10(-40)));
    }

    #[test]
    fn quadratic_leading_term_with_t() {
        let ctx = PrecisionContext::new(50).unwrap();
        let ext = sqrt5(&[], &[("3", 3, 1)]);
        let oracle = Sqrt5Oracle(ext.group.clone(), ctx);
        let q = quotient_and_projection(&ext.group, &Subgroup::trivial(&ext.group)).unwrap();
        let chi = enumerate_characters(&q.target)[1].clone();
        let lead = l_st_leading(&chi, &ext, &q, &oracle, &ctx).unwrap();
        let phi = (ctx.real(5).sqrt() + 1u32) / 2u32;
        assert_eq!(lead.order, 1);
        assert!(close(&lead.value.re, &(phi.clone().ln() * 4u32), &ctx.pow10(-40)));
        // Θ = log 5·e_{χ₀} + 4 log ε·e_{χ₁}
        let theta = stickelberger_leading(&ext, &q, &oracle, &ctx).unwrap();
        let c = theta.coeffs();
        let log5 = ctx.real(5).ln();
        let four_log = phi.clone().ln() * 4u32;
        let e0 = Float::with_val(ctx.bits(), &log5 + &four_log) / 2u32;
        let e1 = Float::with_val(ctx.bits(), &log5 - &four_log) / 2u32;
        assert!(close(&c[0], &e0, &ctx.tau()));
        assert!(close(&c[1], &e1, &ctx.tau()));
    }

    #[test]
    fn omega_for_sqrt5() {
        let ctx = PrecisionContext::new(50).unwrap();
        let ext = sqrt5(&[("7", 7, 1)], &[("3", 3, 1)]);
        let oracle = Sqrt5Oracle(ext.group.clone(), ctx);
        let omega = omega_k(&ext, &oracle, &ctx).unwrap();
        let half_log = ((ctx.real(5).sqrt() + 1u32) / 2u32).ln() / 2u32;
        assert!(close(&omega.coeffs()[0], &half_log, &ctx.tau()));
        assert!(close(&omega.coeffs()[1], &-half_log.clone(), &ctx.tau()));
        let det = omega_determinant(&ext, &oracle, &ctx).unwrap();
        assert!(close(&det, &(half_log * 2u32), &ctx.tau()));
        let seven = ext.s_prime[0].clone();
        let five = ext.ramified[0].clone();
        let ie = inclusion_exclusion(&ext, &[&five, &seven], &oracle, &ctx).unwrap();
        assert!(close(&ie.characters_side, &ie.subfield_side, &ctx.tau()));
        let (order, z) = zeta_star_from_characters(&Subgroup::whole(&ext.group), &oracle, &ctx).unwrap();
        assert_eq!(order, 0);
        assert!(close(&z, &zeta_at_0(&ctx), &ctx.tau()));
    }

    #[test]
    fn table_oracle_fills_conjugates() {
        let ctx = PrecisionContext::new(30).unwrap();
        let g = FiniteAbelianGroup::new(&[3]).unwrap();
        let chi = enumerate_characters(&g)[1].clone();
        let value = Cplx::new(ctx.real(1), ctx.real(2));
        let t = TableOracle::new(&g, vec![(chi.clone(), Leading { order: 1, value })], &ctx).unwrap();
        let bar = t.leading(&chi.inverse()).unwrap();
        assert!(bar.value.sub(&Cplx::new(ctx.real(1), ctx.real(-2))).norm() < ctx.tau());
        assert!(t.coefficient(&chi, 0).unwrap().norm().is_zero());
        assert!(t.coefficient(&chi, 2).is_err());
        assert!(t.leading(&Character::trivial(&g)).is_err());
    }
}
