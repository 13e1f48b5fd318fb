//! Rubin-Stark elements of genuine `r = 1` instances, found by rounding a
//! real linear solve and certified exactly, and the module they generate.

use crate::abelian::Subgroup;
use crate::arithmetic::{inertia_span, order_of_vanishing, subfield_k_g, CycleDivisor, SubExtension};
use crate::error::{Error, Result};
use crate::field::FieldInstance;
use crate::group_ring::{idempotent_sum, QElem, RElem};
use crate::lattice::{GModuleLattice, RationalLattice};
use crate::linalg::QMatrix;
use crate::lvalues::{stickelberger_leading, LOracle};
use crate::numeric::{self, Real};
use crate::numfield::{is_s_unit, ResidueRing};
use rug::{Float, Integer, Rational};

/// Largest exponent accepted when rounding.
pub const EXPONENT_BOUND: u64 = 20;

#[derive(Debug, Clone)]
pub struct StarkElement {
    pub divisor: CycleDivisor,
    pub label: String,
    /// `Gal(K/K_𝔤)`.
    pub subgroup: Subgroup,
    pub sub: SubExtension,
    /// `η = (−1)^negative Π u_k^{a_k}` on the S-unit basis of K.
    pub exponents: Vec<Integer>,
    pub negative: bool,
    /// `Θ^{(1)}_{S_𝔤,T}(0)` in `ℝ[Gal(K_𝔤/ℚ)]`.
    pub theta: RElem,
    pub rounding_distance: Real,
    /// `|R_{w'}(η) − Θ|`.
    pub residual: Real,
    pub fixed_by_subgroup: bool,
    pub s_unit: bool,
    pub congruent_mod_t: bool,
}

impl StarkElement {
    pub fn certified(&self) -> bool {
        self.fixed_by_subgroup && self.s_unit && self.congruent_mod_t
    }

    pub fn exponent_vector(&self) -> Vec<Rational> {
        self.exponents.iter().map(|a| Rational::from(a.clone())).collect()
    }
}

/// Primes of ℚ below the places in `S_𝔤 \ S_∞`.
fn s_primes(sub: &SubExtension) -> Vec<u64> {
    sub.ext.finite_s_places().filter_map(|p| p.label.parse().ok()).collect()
}

/// `e_{S_𝔤,r}` of `K_𝔤`, inflated to `ℚ[G]`.
pub fn inflated_e(inst: &FieldInstance, sub: &SubExtension) -> QElem {
    idempotent_sum(inst.group(), |chi| match chi.descend(&sub.quotient) {
        Some(psi) => order_of_vanishing(&psi, &sub.ext) == sub.ext.r,
        None => false,
    })
}

/// Exponent vectors of `e_{S_𝔤,r}U_{S_𝔤,T}(K_𝔤)`: T-congruent S-units of K
/// fixed by H, with zero valuation above the ramified primes not dividing 𝔤,
/// and killed by `1 − e_{S_𝔤,r}`. On this lattice the infinite logarithm is
/// injective.
pub fn constraint_lattice(inst: &FieldInstance, sub: &SubExtension, g: &CycleDivisor, h: &Subgroup) -> RationalLattice {
    let fixed = inst.s_units.with_lattice(inst.st_lattice.clone()).map(|m| m.fixed_sublattice(h)).unwrap_or_else(|_| {
        RationalLattice::zero(inst.s_rank())
    });
    let excluded: Vec<u64> = (0..inst.ext.ramified.len())
        .filter(|i| !g.contains(*i))
        .filter_map(|i| inst.ext.ramified[i].label.parse().ok())
        .collect();
    let mut cols: Vec<usize> = Vec::new();
    let mut offset = 0;
    for fp in &inst.finite_primes {
        if excluded.contains(&fp.prime) {
            cols.extend(offset..offset + fp.count());
        }
        offset += fp.count();
    }
    let one_minus_e = QElem::rational_one(inst.group()).sub(&inflated_e(inst, sub));
    let fixed = fixed.kernel_of(&inst.s_units.group_ring_action(&one_minus_e), inst.s_rank());
    if cols.is_empty() {
        return fixed;
    }
    let mat: QMatrix = inst
        .basis
        .iter()
        .map(|b| {
            let flat: Vec<i64> = b.valuations.iter().flatten().copied().collect();
            cols.iter().map(|&c| Rational::from(flat[c])).collect()
        })
        .collect();
    fixed.kernel_of(&mat, cols.len())
}

/// `R_{w'}` of an element of K fixed by H, as an element of `ℝ[G/H]`:
/// `π(λ_K(x))/|H|`.
pub fn restricted_log(inst: &FieldInstance, sub: &SubExtension, exps: &[Rational]) -> RElem {
    let ctx = &inst.ctx;
    let full = RElem::from_coeffs(inst.group(), inst.inf_log(exps), ctx);
    full.project(&sub.quotient).scale(&Float::with_val(ctx.bits(), Float::with_val(ctx.bits(), 1) / sub.quotient.kernel.order() as u32))
}

pub fn solve_stark_element(inst: &FieldInstance, g: &CycleDivisor, oracle: &dyn LOracle) -> Result<StarkElement> {
    let ctx = &inst.ctx;
    if inst.ext.r != 1 {
        return Err(Error::InvalidInput("Stark elements are recognized only for r = 1".into()));
    }
    let sub = subfield_k_g(g, &inst.ext)?;
    let h = inertia_span(&g.complement(inst.ext.ramified.len()), &inst.ext);
    let theta = stickelberger_leading(&sub.ext, &sub.quotient, oracle, ctx)?;
    let lattice = constraint_lattice(inst, &sub, g, &h);
    let basis = lattice.basis().clone();
    let label = g.describe(&inst.ext);
    if basis.is_empty() {
        if theta.max_abs() < ctx.tau() {
            return trivial_element(inst, g, h, sub, theta, label);
        }
        return Err(Error::validation("stark", format!("no units available for {label}")));
    }
    let rows: Vec<Vec<Real>> = basis.iter().map(|b| restricted_log(inst, &sub, b).vector()).collect();
    let coeffs = numeric::least_squares_left(ctx, &rows, &theta.vector())?;
    let mut worst = ctx.zero();
    let mut ints = Vec::new();
    for c in &coeffs {
        let (a, d) = numeric::round_to_integer(c);
        if d > worst {
            worst = d;
        }
        ints.push(a);
    }
    let tol = ctx.pow10(-50).max(&ctx.tau());
    if worst > tol {
        return Err(Error::validation(
            "stark",
            format!("Stark element not recognized at this precision (distance {})", numeric::fmt_real(&worst, 5)),
        ));
    }
    let mut exps = vec![Integer::new(); inst.s_rank()];
    for (a, b) in ints.iter().zip(&basis) {
        for (e, x) in exps.iter_mut().zip(b) {
            let v = Rational::from(x * a);
            if !v.is_integer() {
                return Err(Error::validation("stark", "non-integral exponent vector"));
            }
            *e += v.numer();
        }
    }
    if exps.iter().any(|e| e.clone().abs() > EXPONENT_BOUND) {
        return Err(Error::validation("stark", format!("exponents exceed the sanity bound {EXPONENT_BOUND}")));
    }
    let negative = inst.st_sign(&exps).ok_or_else(|| Error::validation("stark", "exponents leave U_{S,T}"))?;
    let q: Vec<Rational> = exps.iter().map(|a| Rational::from(a.clone())).collect();
    let residual = restricted_log(inst, &sub, &q).max_abs_diff(&theta);
    let mut value = inst.element(&exps)?;
    if negative {
        value = inst.field.neg(&value);
    }
    let (fixed, s_unit, cong) = certify(inst, &value, &h, &s_primes(&sub))?;
    Ok(StarkElement {
        divisor: g.clone(),
        label,
        subgroup: h,
        sub,
        exponents: exps,
        negative,
        theta,
        rounding_distance: worst,
        residual,
        fixed_by_subgroup: fixed,
        s_unit,
        congruent_mod_t: cong,
    })
}

fn trivial_element(
    inst: &FieldInstance,
    g: &CycleDivisor,
    h: Subgroup,
    sub: SubExtension,
    theta: RElem,
    label: String,
) -> Result<StarkElement> {
    let ctx = &inst.ctx;
    Ok(StarkElement {
        divisor: g.clone(),
        label,
        subgroup: h,
        sub,
        exponents: vec![Integer::new(); inst.s_rank()],
        negative: false,
        residual: theta.max_abs(),
        theta,
        rounding_distance: ctx.zero(),
        fixed_by_subgroup: true,
        s_unit: true,
        congruent_mod_t: true,
    })
}

/// Exact checks: fixed by H, an S-unit, and `≡ 1` modulo every T prime.
fn certify(inst: &FieldInstance, x: &[Rational], h: &Subgroup, allowed: &[u64]) -> Result<(bool, bool, bool)> {
    let x = x.to_vec();
    let fixed = h.elements().iter().all(|g| inst.apply(g, &x) == x);
    let s_unit = is_s_unit(&inst.field, &x, allowed)?;
    let mut cong = true;
    for t in &inst.ext.t_places {
        let q: u64 = t.label.parse().map_err(|_| Error::InvalidInput(format!("T place {} is not a prime", t.label)))?;
        let ring = ResidueRing::new(&inst.field, q)?;
        cong &= ring.reduce(&x)? == ring.one();
    }
    Ok((fixed, s_unit, cong))
}

/// `St_{K,T}`: the ℤ[G]-span of the `η_{K_𝔤}` inside the exponent lattice.
#[derive(Debug, Clone)]
pub struct StarkModule {
    pub elements: Vec<StarkElement>,
    pub module: GModuleLattice,
}

pub fn build_stark_module(inst: &FieldInstance, oracle: &dyn LOracle) -> Result<StarkModule> {
    let mut elements = Vec::new();
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    let actions = inst.s_units.all_actions();
    for g in CycleDivisor::all(inst.ext.ramified.len()) {
        let eta = solve_stark_element(inst, &g, oracle)?;
        let v = eta.exponent_vector();
        for a in &actions {
            gens.push(crate::linalg::vec_mat_q(&v, a, inst.s_rank()));
        }
        elements.push(eta);
    }
    let lattice = RationalLattice::from_generators(inst.s_rank(), &gens);
    let module = inst.s_units.with_lattice(lattice)?;
    Ok(StarkModule { elements, module })
}

/// `N_H^r = |H|^{r−1} N_H`.
pub fn norm_power(h: &Subgroup, r: usize) -> QElem {
    let scale = Rational::from((h.order() as u64).pow((r as u32).saturating_sub(1)));
    crate::group_ring::norm_element(h).scale_rational(&scale)
}
