//! Assembly of the index formulas: each identity is evaluated both as
//! printed and in corrected form, with every term recorded in a
//! deterministic report.

use crate::abelian::{enumerate_characters, quotient_and_projection, Subgroup};
use crate::arithmetic::{check_hypotheses, subfield_k_g, CycleDivisor, ExtensionData, HypothesisItem, PlaceData};
use crate::error::Result;
use crate::field::FieldInstance;
use crate::group_ring::{delta_t, e_s_r, euler_factor, QElem, RElem};
use crate::lattice::{
    apply_blockwise, rubin_lattice, rubin_vs_wedge_index, sinnott_index, sinnott_index_real, GModuleLattice, IndexMode,
    RationalLattice, RealLattice,
};
use crate::lvalues::{
    inclusion_exclusion, l_st_leading, omega_determinant, omega_k, zeta_star_from_characters, zeta_star_from_class_number, LOracle,
};
use crate::numeric::{self, PrecisionContext, RMatrix, Real};
use crate::regulator::{
    all_subgroups, c_constant, c_k_r, classical_regulator, group_ring_vs_degree_zero, lambda_image, lambda_rank,
    product_formula_residual, restriction_check, unit_vs_st_index, RegulatorFrame,
};
use crate::arithmetic::sinnott_module;
use crate::stark::build_stark_module;
use crate::synthetic::SyntheticInstance;
use rug::{Float, Rational};
use serde::Serialize;

/// Significant digits printed for real values.
pub const REPORT_DIGITS: u32 = 40;
/// Largest denominator accepted when rationalizing real indices.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// The identity exactly as printed.
    Literal,
    /// The identity with the missing factors restored.
    Corrected,
    /// An internal cross-check between independent computations.
    Consistency,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub form: Form,
    pub statement: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub tolerance: String,
    pub passed: bool,
}

impl Check {
    /// A boolean identity without numeric sides.
    pub fn flag(id: &str, statement: &str, passed: bool) -> Self {
        Self {
            id: id.into(),
            form: Form::Consistency,
            statement: statement.into(),
            lhs: String::new(),
            rhs: String::new(),
            residual: String::new(),
            tolerance: String::new(),
            passed,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} [{}] {}\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            match self.form {
                Form::Literal => "literal",
                Form::Corrected => "corrected",
                Form::Consistency => "consistency",
            },
            self.statement
        );
        if !self.rhs.is_empty() {
            out += &format!("     lhs {}\n     rhs {}\n     residual {} (tolerance {})\n", self.lhs, self.rhs, self.residual, self.tolerance);
        } else if !self.lhs.is_empty() {
            out += &format!("     {}\n", self.lhs);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub name: String,
    pub value: String,
    /// Exact rational form, when the value is rational by construction.
    pub rational: Option<String>,
    pub source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub instance: String,
    pub kind: String,
    pub precision: u32,
    pub hypotheses: Vec<HypothesisItem>,
    pub terms: Vec<Term>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(instance: &str, kind: &str, ctx: &PrecisionContext, ext: &ExtensionData) -> Self {
        let hyp = check_hypotheses(ext, ext.r);
        Self {
            instance: instance.to_string(),
            kind: kind.to_string(),
            precision: ctx.digits,
            hypotheses: hyp.items,
            terms: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn hypotheses_passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed)
    }

    pub fn failed_hypotheses(&self) -> Vec<u8> {
        self.hypotheses.iter().filter(|h| !h.passed).map(|h| h.id).collect()
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    fn finish(mut self) -> Self {
        self.passed = self.hypotheses_passed() && self.checks.iter().all(|c| c.passed);
        self
    }

    fn term(&mut self, name: &str, value: &Real, source: &str) {
        self.terms.push(Term {
            name: name.into(),
            value: numeric::fmt_real(value, REPORT_DIGITS),
            rational: None,
            source: source.into(),
        });
    }

    fn term_q(&mut self, name: &str, value: &Rational, source: &str) {
        self.terms.push(Term { name: name.into(), value: value.to_string(), rational: Some(value.to_string()), source: source.into() });
    }

    /// A real value that is rational by construction, recorded in both forms.
    fn term_rationalized(&mut self, name: &str, value: &Real, source: &str) {
        let tol = value.clone().abs().max(&Float::with_val(value.prec(), 1)) * Float::with_val(value.prec(), 1e-20);
        let q = numeric::rationalize(value, MAX_DENOMINATOR, &Float::with_val(value.prec(), tol));
        self.terms.push(Term {
            name: name.into(),
            value: numeric::fmt_real(value, REPORT_DIGITS),
            rational: q.map(|q| q.to_string()),
            source: source.into(),
        });
    }

    fn real_check(&mut self, id: &str, form: Form, statement: &str, lhs: &Real, rhs: &Real, tol: &Real) {
        let residual = relative_residual(lhs, rhs);
        self.checks.push(Check {
            id: id.into(),
            form,
            statement: statement.into(),
            lhs: numeric::fmt_real(lhs, REPORT_DIGITS),
            rhs: numeric::fmt_real(rhs, REPORT_DIGITS),
            residual: numeric::fmt_real(&residual, 6),
            tolerance: numeric::fmt_real(tol, 3),
            passed: residual < *tol,
        });
    }

    fn flag(&mut self, id: &str, form: Form, statement: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            id: id.into(),
            form,
            statement: statement.into(),
            lhs: detail,
            rhs: String::new(),
            residual: String::new(),
            tolerance: String::new(),
            passed,
        });
    }

    fn error(&mut self, id: &str, statement: &str, err: &crate::Error) {
        self.flag(id, Form::Consistency, statement, false, format!("error: {err}"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("instance {} ({}) at {} digits\n", self.instance, self.kind, self.precision);
        for h in &self.hypotheses {
            out += &format!("  hypothesis ({}) {}: {}\n", h.id, if h.passed { "holds" } else { "FAILS" }, h.detail);
        }
        for t in &self.terms {
            match &t.rational {
                Some(q) if *q != t.value => out += &format!("  {} = {} (= {}) [{}]\n", t.name, t.value, q, t.source),
                _ => out += &format!("  {} = {} [{}]\n", t.name, t.value, t.source),
            }
        }
        for c in &self.checks {
            out += &c.to_text();
        }
        out += &format!("verdict: {}\n", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

/// Parts of a report selected by the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Full,
    Index,
    Regulator,
    Stark,
    LValue,
}

impl Section {
    fn keeps_check(self, id: &str) -> bool {
        let prefixes: &[&str] = match self {
            Section::Full => return true,
            Section::Index => &["stark_index", "delta_cancellation", "index_formula", "units_span", "rubin_contains_wedge"],
            Section::Regulator => &[
                "product_formula",
                "lambda_injective",
                "restriction",
                "regulator_",
                "subfield_regulator",
                "c_unit_index",
                "character_product",
            ],
            Section::Stark => &["stark_", "image_law"],
            Section::LValue => &["inclusion_exclusion", "zeta_star"],
        };
        prefixes.iter().any(|p| id.starts_with(p)) && !(self == Section::Stark && id.starts_with("stark_index"))
    }

    fn keeps_term(self, source: &str) -> bool {
        match self {
            Section::Full => true,
            Section::Index => matches!(source, "lattice" | "group_ring" | "data" | "index"),
            Section::Regulator => source == "regulator",
            Section::Stark => source == "stark",
            Section::LValue => source == "lvalues",
        }
    }
}

impl VerificationReport {
    /// The report restricted to one section; the verdict covers only the
    /// retained checks and the hypotheses.
    pub fn section(&self, section: Section) -> VerificationReport {
        let mut out = self.clone();
        out.terms.retain(|t| section.keeps_term(&t.source));
        out.checks.retain(|c| section.keeps_check(&c.id));
        if self.checks.iter().any(|c| c.id == "engine") && !out.checks.iter().any(|c| c.id == "engine") {
            out.checks.extend(self.checks.iter().filter(|c| c.id == "engine").cloned());
        }
        out.finish()
    }
}

/// `L^{(r_S(χ))}_{S,T}(0, χ̂)` for every character, as report terms.
fn character_terms(report: &mut VerificationReport, ext: &ExtensionData, oracle: &dyn LOracle, ctx: &PrecisionContext) -> Result<()> {
    let g = &ext.group;
    let q = quotient_and_projection(g, &Subgroup::trivial(g))?;
    for chi in enumerate_characters(g) {
        let lead = l_st_leading(&chi, ext, &q, oracle, ctx)?;
        let re = numeric::fmt_real(&lead.value.re, REPORT_DIGITS);
        let value = if lead.value.im.clone().abs() < ctx.tau() {
            re
        } else {
            format!("{re} + {}i", numeric::fmt_real(&lead.value.im, REPORT_DIGITS))
        };
        let exps: Vec<String> = chi.exponents().iter().map(|e| e.to_string()).collect();
        report.terms.push(Term {
            name: format!("L_S,T^({})(0, χ̂) for χ = [{}]", lead.order, exps.join(",")),
            value,
            rational: None,
            source: "lvalues".into(),
        });
    }
    Ok(())
}

pub fn relative_residual(lhs: &Real, rhs: &Real) -> Real {
    let d = Float::with_val(lhs.prec(), lhs - rhs).abs();
    let scale = rhs.clone().abs();
    if scale.is_zero() {
        d
    } else {
        d / scale
    }
}

/// Relative tolerance of the global index identities: `10^{-(digits-20)}`.
pub fn index_tolerance(ctx: &PrecisionContext) -> Real {
    ctx.pow10(-(ctx.digits as i32 - 20))
}

/// Tolerance for L-value identities: `10^{-40}`, or `τ` if that is looser.
pub fn lvalue_tolerance(ctx: &PrecisionContext) -> Real {
    ctx.pow10(-40).max(&ctx.tau())
}

fn to_real(x: &QElem, ctx: &PrecisionContext) -> RElem {
    x.to_real(ctx)
}

/// `x·L` for a real group ring element and a rational lattice of `ℚ[G]`.
fn times_real(x: &RElem, l: &RationalLattice, ctx: &PrecisionContext) -> RMatrix {
    let g = x.group().clone();
    l.basis().iter().map(|v| x.mul(&to_real(&QElem::from_vector(&g, v.clone()), ctx)).vector()).collect()
}

/// `U^{(r)}` for the full ramification divisor.
fn sinnott_module_for(ext: &ExtensionData) -> Result<GModuleLattice> {
    sinnott_module(ext, ext.r, &ext.full_divisor())
}

fn group_ring_lattice(g: &crate::abelian::FiniteAbelianGroup) -> Result<GModuleLattice> {
    GModuleLattice::in_group_ring(g, RationalLattice::standard(g.order()))
}

/// `E_{S'} = Π_{v∈S'} (1 − σ_v^{-1})`.
pub fn s_prime_factor(ext: &ExtensionData) -> QElem {
    let mut x = QElem::rational_one(&ext.group);
    for v in &ext.s_prime {
        x = x.mul(&euler_factor(&v.frobenius, &v.inertia));
    }
    x
}

/// `D_I` for a family of places.
fn decomposition_join(ext: &ExtensionData, members: &[&PlaceData]) -> Subgroup {
    let mut d = Subgroup::trivial(&ext.group);
    for p in members {
        d = d.join(&p.decomposition);
    }
    d
}

fn subsets<'a>(family: &[&'a PlaceData]) -> Vec<Vec<&'a PlaceData>> {
    (1u64..1 << family.len())
        .map(|mask| (0..family.len()).filter(|i| mask >> i & 1 == 1).map(|i| family[i]).collect())
        .collect()
}

/// Terms shared by the Stark-index identity on genuine and synthetic data.
struct StarkIndexInputs {
    e: QElem,
    omega: RElem,
    /// `R_w(e⋂^r)`.
    rubin_image: RealLattice,
    /// `R_w(e·St)`.
    stark_image: RealLattice,
}

fn stark_index_section(report: &mut VerificationReport, ext: &ExtensionData, inputs: &StarkIndexInputs, ctx: &PrecisionContext) -> Result<()> {
    let g = &ext.group;
    let e = &inputs.e;
    let tol = ctx.pow10(-(ctx.digits as i32 - 15));
    let zg = group_ring_lattice(g)?;
    let zg_e = zg.apply(e);
    let u = sinnott_module_for(ext)?;
    let e_u = u.apply(e);
    let delta = delta_t(ext)?;
    let e_sp = s_prime_factor(ext);
    let idx_delta_lit = sinnott_index(&zg_e, &u.apply(&e.mul(&delta)), IndexMode::Rational)?;
    let idx_delta_corr = sinnott_index(&zg_e, &u.apply(&e.mul(&delta).mul(&e_sp)), IndexMode::Rational)?;
    let idx_rubin = sinnott_index_real(&RealLattice::from_rational(ctx, &zg_e), &inputs.rubin_image)?;
    let e_u_real = RealLattice::from_rational(ctx, &e_u);
    let omega_e_u = RealLattice::new(ctx, g.order(), times_real(&inputs.omega, &e_u, ctx))?;
    let idx_omega = sinnott_index_real(&e_u_real, &omega_e_u)?;
    let lhs = sinnott_index_real(&inputs.rubin_image, &inputs.stark_image)?;
    report.term("stark index (e⋂ : e·St), through R_w images", &lhs, "index");
    report.term_q("(eℤ[G] : e·δ_T·U)", &idx_delta_lit, "lattice");
    report.term_q("(eℤ[G] : e·δ_T·E_S'·U)", &idx_delta_corr, "lattice");
    report.term("(eℤ[G] : R_w(e⋂))", &idx_rubin, "index");
    report.term("(eU : ω·eU)", &idx_omega, "lvalues");

    let lit = Float::with_val(ctx.bits(), ctx.from_rational(&idx_delta_lit) / &idx_rubin) * &idx_omega;
    let corr = Float::with_val(ctx.bits(), ctx.from_rational(&idx_delta_corr) / &idx_rubin) * &idx_omega;
    report.real_check(
        "stark_index",
        Form::Literal,
        "(e⋂ : e·St) = (eℤ[G] : e·δ_T·U)/(eℤ[G] : R_w(e⋂))·(eU : ω·eU)",
        &lhs,
        &lit,
        &tol,
    );
    report.real_check(
        "stark_index",
        Form::Corrected,
        "(e⋂ : e·St) = (eℤ[G] : e·δ_T·E_S'·U)/(eℤ[G] : R_w(e⋂))·(eU : ω·eU)",
        &lhs,
        &corr,
        &tol,
    );
    let e_delta_u = u.apply(&e.mul(&delta));
    let idx_omega_delta = sinnott_index_real(
        &RealLattice::from_rational(ctx, &e_delta_u),
        &RealLattice::new(ctx, g.order(), times_real(&inputs.omega, &e_delta_u, ctx))?,
    )?;
    report.real_check(
        "delta_cancellation",
        Form::Consistency,
        "(e·δ_T·U : ω·e·δ_T·U) = (eU : ω·eU)",
        &idx_omega_delta,
        &idx_omega,
        &ctx.tau(),
    );
    Ok(())
}

/// `π_F(e·R_w(η_F))` against `π_F(ω·|H|^r·δ_T·Π_𝔭(1 − σ_𝔭^{-1}e_{I_𝔭})·e)`,
/// with 𝔭 over the primes ramified in F (as printed) or over all finite
/// places of `S_𝔤` (corrected).
fn image_law_section(
    report: &mut VerificationReport,
    ext: &ExtensionData,
    omega: &RElem,
    e: &QElem,
    images: &[(CycleDivisor, RElem)],
    ctx: &PrecisionContext,
) -> Result<()> {
    let g = &ext.group;
    let delta = delta_t(ext)?;
    let mut worst_lit = ctx.zero();
    let mut worst_corr = ctx.zero();
    for (d, image) in images {
        let sub = subfield_k_g(d, ext)?;
        let h = sub.quotient.kernel.order() as u64;
        let hr = Rational::from(h.pow(ext.r as u32));
        let lhs = to_real(e, ctx).mul(image).project(&sub.quotient);
        let factor = |labels: Vec<String>| -> QElem {
            let mut x = delta.scale_rational(&hr);
            for l in labels {
                let p = ext.place_by_label(&l).expect("place of K");
                x = x.mul(&euler_factor(&p.frobenius, &p.inertia));
            }
            x.mul(e)
        };
        let lit = factor(sub.ext.ramified.iter().map(|p| p.label.clone()).collect());
        let corr = factor(sub.ext.finite_s_places().map(|p| p.label.clone()).collect());
        for (x, worst) in [(lit, &mut worst_lit), (corr, &mut worst_corr)] {
            let rhs = omega.mul(&to_real(&x, ctx)).project(&sub.quotient);
            let scale = rhs.max_abs().max(&ctx.real(1));
            let r = Float::with_val(ctx.bits(), lhs.max_abs_diff(&rhs) / scale);
            if r > *worst {
                *worst = r;
            }
        }
    }
    let zero = ctx.zero();
    let _ = g;
    report.real_check(
        "image_law",
        Form::Literal,
        "π_F(e·R_w(η_F)) = π_F(ω·|H|^r·δ_T·Π_{𝔭|𝔣_F}(1 − σ_𝔭^{-1}e_{I_𝔭})·e) for every K_𝔤",
        &worst_lit,
        &zero,
        &ctx.tau(),
    );
    report.real_check(
        "image_law",
        Form::Corrected,
        "π_F(e·R_w(η_F)) = π_F(ω·|H|^r·δ_T·Π_{v∈S_𝔤 finite}(1 − σ_v^{-1}e_{I_v})·e) for every K_𝔤",
        &worst_corr,
        &zero,
        &ctx.tau(),
    );
    Ok(())
}

fn class_number(inst: &FieldInstance, h: &Subgroup) -> Option<u64> {
    if h.order() == inst.group().order() {
        return Some(1);
    }
    inst.subfield_for(h).and_then(|s| s.class_number)
}

/// `β = c_K·c_{K,r}^{-1}·Π_{∅≠I⊂family} (c_{K_I}·h_{K_I})^{(−1)^{|I|}}`.
fn beta(inst: &FieldInstance, family: &[&PlaceData], c_k: &Rational, c_kr: &Rational) -> Result<Rational> {
    let mut b = Rational::from(c_k / c_kr);
    for members in subsets(family) {
        let d = decomposition_join(&inst.ext, &members);
        let c = c_constant(inst, &d)?.value;
        let h = class_number(inst, &d)
            .ok_or_else(|| crate::Error::InvalidInput(format!("no class number for the fixed field of a subgroup of order {}", d.order())))?;
        let t = &c * Rational::from(h);
        if members.len() % 2 == 0 {
            b *= t;
        } else {
            b /= t;
        }
    }
    Ok(b)
}

/// `Reg_K·c_{K,r}·c_K^{-1}·Π_{∅≠I⊂family} c_{K_I}^{(−1)^{|I|+1}}·Reg_{K_I}^{(−1)^{|I|}}`.
fn regulator_product(inst: &FieldInstance, family: &[&PlaceData], c_k: &Rational, c_kr: &Rational) -> Result<Real> {
    let ctx = &inst.ctx;
    let g = inst.group();
    let mut acc = classical_regulator(inst, &Subgroup::trivial(g))?;
    acc *= ctx.from_rational(&Rational::from(c_kr / c_k));
    for members in subsets(family) {
        let d = decomposition_join(&inst.ext, &members);
        let c = ctx.from_rational(&c_constant(inst, &d)?.value);
        let reg = classical_regulator(inst, &d)?;
        if members.len() % 2 == 0 {
            acc = acc * reg / c;
        } else {
            acc = acc * c / reg;
        }
    }
    Ok(acc)
}

/// The full verification of a genuine `r = 1` instance.
pub fn verify_genuine(inst: &FieldInstance, oracle: &dyn LOracle) -> VerificationReport {
    let mut report = VerificationReport::new(&inst.name, "genuine", &inst.ctx, &inst.ext);
    if !report.hypotheses_passed() {
        return report.finish();
    }
    if let Err(err) = genuine_sections(&mut report, inst, oracle) {
        report.error("engine", "evaluation of all terms", &err);
    }
    report.finish()
}

fn genuine_sections(report: &mut VerificationReport, inst: &FieldInstance, oracle: &dyn LOracle) -> Result<()> {
    let ctx = &inst.ctx;
    let ext = &inst.ext;
    let g = inst.group();
    let e = e_s_r(ext);
    let tol = index_tolerance(ctx);

    // units and logarithms
    report.real_check(
        "product_formula",
        Form::Consistency,
        "Σ_w log|u|_w = 0 for every S-unit of the basis",
        &product_formula_residual(inst),
        &ctx.zero(),
        &ctx.tau(),
    );
    let rank = lambda_rank(inst);
    report.flag(
        "lambda_injective",
        Form::Consistency,
        "λ_K is injective on the unit lattice",
        rank == inst.unit_rank,
        format!("rank {rank} of {}", inst.unit_rank),
    );
    let (same_span, unit_st) = unit_vs_st_index(inst, &e)?;
    report.flag(
        "units_span",
        Form::Consistency,
        "e·U_{S,T} and e·U_{S_∞} span the same space",
        same_span,
        format!("(eU_S∞ : eU_S,T) = {unit_st}"),
    );
    let frame = RegulatorFrame::genuine(inst, &inst.st_lattice)?;
    let worst = restriction_check(&frame, &all_subgroups(g))?;
    report.real_check(
        "restriction",
        Form::Consistency,
        "π_F(R_w(u_F)) = |H|^r·R_w'(u_F) for all subgroups H and fixed wedges",
        &worst,
        &ctx.zero(),
        &ctx.tau(),
    );

    // Stark elements
    let st = build_stark_module(inst, oracle)?;
    let cut = ctx.pow10(-50).max(&ctx.tau());
    let mut worst_dist = ctx.zero();
    let mut all_certified = true;
    for eta in &st.elements {
        all_certified &= eta.certified();
        if eta.rounding_distance > worst_dist {
            worst_dist = eta.rounding_distance.clone();
        }
        let exps: Vec<String> = eta.exponents.iter().map(|a| a.to_string()).collect();
        report.terms.push(Term {
            name: format!("η for 𝔤 = {}", eta.label),
            value: format!("{}[{}]", if eta.negative { "-" } else { "" }, exps.join(",")),
            rational: None,
            source: "stark".into(),
        });
    }
    report.flag(
        "stark_certificates",
        Form::Consistency,
        "each η is fixed by Gal(K/K_𝔤), an S_𝔤-unit, and ≡ 1 modulo T",
        all_certified,
        format!("{} elements", st.elements.len()),
    );
    report.real_check(
        "stark_rounding",
        Form::Consistency,
        "rounding distance of every Stark exponent vector below 1e-50",
        &worst_dist,
        &ctx.zero(),
        &cut,
    );
    character_terms(report, ext, oracle, ctx)?;
    let omega = omega_k(ext, oracle, ctx)?;
    let images: Vec<(CycleDivisor, RElem)> = st
        .elements
        .iter()
        .map(|eta| (eta.divisor.clone(), RElem::from_coeffs(g, inst.inf_log(&eta.exponent_vector()), ctx)))
        .collect();
    image_law_section(report, ext, &omega, &e, &images, ctx)?;

    // lattices
    let module = inst.s_units.with_lattice(inst.st_lattice.clone())?;
    let e_rubin = module.apply(&e);
    let e_st = st.module.apply(&e);
    let rubin_image = lambda_image(inst, &e_rubin)?;
    let stark_image = lambda_image(inst, &e_st)?;
    let lhs_exact = sinnott_index(&e_rubin, &e_st, IndexMode::Rational)?;
    let lhs = sinnott_index_real(&rubin_image, &stark_image)?;
    report.real_check(
        "stark_index_paths",
        Form::Consistency,
        "(e⋂ : e·St) through R_w images equals the exact exponent-lattice index",
        &lhs,
        &ctx.from_rational(&lhs_exact),
        &tol,
    );
    let inputs = StarkIndexInputs { e: e.clone(), omega: omega.clone(), rubin_image: rubin_image.clone(), stark_image };
    stark_index_section(report, ext, &inputs, ctx)?;
    let det_omega = omega_determinant(ext, oracle, ctx)?.abs();
    report.term("|det ω_K|", &det_omega, "lvalues");

    // regulator index
    let zg_e = group_ring_lattice(g)?.apply(&e);
    let reg_lhs = sinnott_index_real(&RealLattice::from_rational(ctx, &zg_e), &rubin_image)?;
    let ck = c_constant(inst, &Subgroup::trivial(g))?;
    let ckr = c_k_r(inst, &e)?;
    report.term_q("c_K", &ck.value, "regulator");
    report.term_q("c_K,r", &ckr.value, "regulator");
    report.term_q("|Ĥ⁰(H, U)| for H = 1", &Rational::from(ck.h0.clone()), "lattice");
    let ram: Vec<&PlaceData> = ext.ramified.iter().collect();
    let full: Vec<&PlaceData> = ext.ramified.iter().chain(&ext.s_prime).collect();
    let zx = group_ring_vs_degree_zero(g, ext.r, &e)?;
    report.term_q("(eℤ[G] : eX)", &zx, "lattice");
    report.term_q("(eU_S∞ : eU_S,T)", &unit_st, "lattice");
    for (k, d) in all_subgroups(g).into_iter().enumerate() {
        if let Ok(reg) = classical_regulator(inst, &d) {
            report.term(&format!("Reg of the fixed field of a subgroup of order {}", d.order()), &reg, "regulator");
            let c = c_constant(inst, &d)?;
            report.term_q(&format!("c_F for |H| = {}", d.order()), &c.value, "regulator");
            let rhs = Float::with_val(ctx.bits(), ctx.from_rational(&c.value) * &c.regulator_index);
            report.real_check(
                &format!("subfield_regulator_{}_{k}", d.order()),
                Form::Consistency,
                "Reg_F = c_F·(S(N_H X) : λ S(N_H U))",
                &reg,
                &rhs,
                &tol,
            );
            report.real_check(
                &format!("c_unit_index_{}_{k}", d.order()),
                Form::Consistency,
                "(S(λN_H U) : λN_H U) in ℝ-mode equals the exact index",
                &c.unit_index_real,
                &ctx.from_rational(&c.unit_index),
                &tol,
            );
        }
    }
    let reg_lit = regulator_product(inst, &ram, &ck.value, &ckr.value)?;
    let reg_full = regulator_product(inst, &full, &ck.value, &ckr.value)?;
    report.real_check(
        "regulator_index",
        Form::Literal,
        "(eℤ[G] : R_w(e⋀U_{S,T})) = Reg_K·c_{K,r}·c_K^{-1}·Π_{∅≠I⊂Ram} c_{K_I}^{(−1)^{|I|+1}}·Reg_{K_I}^{(−1)^{|I|}}",
        &reg_lhs,
        &reg_lit,
        &tol,
    );
    let reg_corr = Float::with_val(ctx.bits(), &reg_full * ctx.from_rational(&Rational::from(&zx * &unit_st)));
    report.real_check(
        "regulator_index",
        Form::Corrected,
        "(eℤ[G] : R_w(e⋀U_{S,T})) = (eℤ[G] : eX)·(eU_S∞ : eU_S,T)·[the same product over ∅≠I⊂Ram∪S']",
        &reg_lhs,
        &reg_corr,
        &tol,
    );
    let direct = Float::with_val(ctx.bits(), ctx.from_rational(&ckr.value) * &ckr.character_product);
    report.real_check(
        "character_product",
        Form::Consistency,
        "(eX : eλU) = c_{K,r}·Π_{r_S(χ)=r}(e_χX : e_χλU)",
        &ckr.direct_index,
        &direct,
        &tol,
    );
    report.real_check(
        "regulator_family",
        Form::Consistency,
        "(eX : eλU) = Reg_K·c_{K,r}·c_K^{-1}·Π_{∅≠I⊂Ram∪S'} c_{K_I}^{(−1)^{|I|+1}}·Reg_{K_I}^{(−1)^{|I|}}",
        &ckr.direct_index,
        &reg_full,
        &tol,
    );

    // the index formula
    let h_k = class_number(inst, &Subgroup::trivial(g))
        .ok_or_else(|| crate::Error::InvalidInput("class number of K missing".into()))?;
    let u = sinnott_module_for(ext)?;
    let zg_u = sinnott_index(&zg_e, &u.apply(&e), IndexMode::Rational)?;
    let rw = rubin_vs_wedge_index(&module, ext.r, &e)?;
    let beta_ram = beta(inst, &ram, &ck.value, &ckr.value)?;
    let beta_full = beta(inst, &full, &ck.value, &ckr.value)?;
    let det_delta = sinnott_index(&zg_e, &group_ring_lattice(g)?.apply(&e.mul(&delta_t(ext)?)), IndexMode::Rational)?;
    let det_sp = sinnott_index(&zg_e, &group_ring_lattice(g)?.apply(&e.mul(&s_prime_factor(ext))), IndexMode::Rational)?;
    report.term_q("h_K (ingested)", &Rational::from(h_k), "data");
    report.term_q("(eℤ[G] : eU^(r))", &zg_u, "lattice");
    report.term_q("(e⋂ : e⋀)", &rw, "lattice");
    report.term_q("β over Ram", &beta_ram, "regulator");
    report.term_q("β over Ram ∪ S'", &beta_full, "regulator");
    report.term_q("|det δ_T| on eℚ[G]", &det_delta, "group_ring");
    report.term_q("|det E_S'| on eℚ[G]", &det_sp, "group_ring");
    let base = Rational::from(h_k) * &zg_u * &rw;
    let lit = Rational::from(&base * &beta_ram);
    let corr = base * &beta_full * &det_delta * &det_sp / Rational::from(&zx * &unit_st);
    report.term_rationalized("main index (e⋂ : e·St)", &lhs, "index");
    report.real_check(
        "index_formula",
        Form::Literal,
        "(e⋂ : e·St) = h_K·(eℤ[G] : eU^(r))·(e⋂ : e⋀)·β_K",
        &lhs,
        &ctx.from_rational(&lit),
        &tol,
    );
    report.real_check(
        "index_formula",
        Form::Corrected,
        "(e⋂ : e·St) = h_K·(eℤ[G] : eU^(r))·(e⋂ : e⋀)·β·|det δ_T|·|det E_S'| / ((eℤ[G] : eX)·(eU_S∞ : eU_S,T)), β over Ram ∪ S'",
        &lhs,
        &ctx.from_rational(&corr),
        &tol,
    );

    // L-values
    let lt = lvalue_tolerance(ctx);
    for (id, form, fam) in [("inclusion_exclusion", Form::Literal, &ram), ("inclusion_exclusion", Form::Corrected, &full)] {
        let ie = inclusion_exclusion(ext, fam, oracle, ctx)?;
        let labels: Vec<String> = fam.iter().map(|p| p.label.clone()).collect();
        report.real_check(
            id,
            form,
            &format!("Π_{{r_S(χ)=r}} L^(r)(0,χ̂) = Π_{{I⊂{{{}}}}} ζ*_{{K_I}}(0)^{{(−1)^{{|I|}}}}", labels.join(",")),
            &ie.characters_side,
            &ie.subfield_side,
            &lt,
        );
    }
    for (k, d) in all_subgroups(g).into_iter().enumerate() {
        let (Some(h), Ok(reg)) = (class_number(inst, &d), classical_regulator(inst, &d)) else { continue };
        let (_, a) = zeta_star_from_characters(&d, oracle, ctx)?;
        let b = zeta_star_from_class_number(h, &reg, ext.roots_of_unity);
        report.real_check(
            &format!("zeta_star_{}_{k}", d.order()),
            Form::Consistency,
            "ζ*_F(0) from characters equals −h_F·Reg_F/|μ_F|",
            &a,
            &b,
            &lt,
        );
    }
    Ok(())
}

/// Verification of a synthetic instance: the regulator identities and the
/// Stark index in literal and corrected form.
pub fn verify_synthetic(inst: &SyntheticInstance) -> VerificationReport {
    let mut report = VerificationReport::new(&inst.name, "synthetic", &inst.ctx, &inst.ext);
    if !report.hypotheses_passed() {
        return report.finish();
    }
    if let Err(err) = synthetic_sections(&mut report, inst) {
        report.error("engine", "evaluation of all terms", &err);
    }
    report.finish()
}

fn synthetic_sections(report: &mut VerificationReport, inst: &SyntheticInstance) -> Result<()> {
    let ctx = &inst.ctx;
    let ext = &inst.ext;
    let g = inst.group();
    let e = e_s_r(ext);
    let frame = &inst.frame;

    let worst = restriction_check(frame, &all_subgroups(g))?;
    report.real_check(
        "restriction",
        Form::Consistency,
        "π_F(R_w(u_F)) = |H|^r·R_w'(u_F) for all subgroups H and fixed wedges",
        &worst,
        &ctx.zero(),
        &ctx.tau(),
    );
    let s = frame.pairing.s();
    let mut worst_ev = ctx.zero();
    for pick in (0..s).collect::<Vec<_>>().windows(ext.r) {
        let factors: Vec<Vec<Rational>> = pick
            .iter()
            .map(|&i| (0..s).map(|k| Rational::from(((k == i) as i64) + ((k + 1 == i) as i64))).collect())
            .collect();
        let a = frame.regulator_ev(&frame.ev(&factors));
        let b = frame.regulator_direct(&factors);
        let d = a.max_abs_diff(&b);
        if d > worst_ev {
            worst_ev = d;
        }
    }
    report.real_check(
        "regulator_paths",
        Form::Consistency,
        "R_w through pairing coordinates equals det(λ_j(m_i))",
        &worst_ev,
        &ctx.zero(),
        &ctx.tau(),
    );

    let (wedge, rubin) = rubin_lattice(&inst.module, ext.r)?;
    let rw = rubin_vs_wedge_index(&inst.module, ext.r, &e)?;
    report.term_q("(e⋂ : e⋀)", &rw, "lattice");
    report.flag(
        "rubin_contains_wedge",
        Form::Consistency,
        "⋂^r M contains ⋀^r M with finite index",
        rubin.contains_lattice(&wedge.wedge) && rw > 0,
        format!("index {rw}"),
    );

    character_terms(report, ext, &inst.oracle, ctx)?;
    let omega = omega_k(ext, &inst.oracle, ctx)?;
    let images = inst.stark_images()?;
    image_law_section(report, ext, &omega, &e, &images, ctx)?;

    let e_rubin = apply_blockwise(&e, &rubin);
    let rubin_image = frame.image(&e_rubin)?;
    let zg_e = group_ring_lattice(g)?.apply(&e);
    let reference = RealLattice::new(ctx, g.order(), times_real(&omega, &zg_e, ctx))?;
    let mut gens = Vec::new();
    let er = to_real(&e, ctx);
    for (_, img) in &images {
        for x in g.elements() {
            gens.push(er.mul(img).mul(&to_real(&QElem::sigma(g, &x), ctx)).vector());
        }
    }
    let stark_image = reference.span_of(&gens, MAX_DENOMINATOR)?;
    let inputs = StarkIndexInputs { e: e.clone(), omega, rubin_image, stark_image };
    stark_index_section(report, ext, &inputs, ctx)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::load_field_instance;
    use crate::lvalues::DirichletOracle;
    use crate::synthetic::load_synthetic;

    fn data(name: &str) -> String {
        format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"))
    }

    #[test]
    #[ignore]
    fn dump_reports() {
        let ctx = PrecisionContext::new(100).unwrap();
        for name in ["q-sqrt5", "q-sqrt2", "q-sqrt2-sqrt5", "bad-torsion"] {
            let k = load_field_instance(data(name), &ctx).unwrap();
            let oracle = DirichletOracle::new(&k).unwrap();
            println!("{}", verify_genuine(&k, &oracle).to_text());
        }
        let s = load_synthetic(data("synthetic-r2"), &ctx).unwrap();
        println!("{}", verify_synthetic(&s).to_text());
    }
}
