//! Logarithmic embeddings, the group ring regulator `R_w`, classical
//! regulators and the correction constants `c_F`, `c_{K,r}`.

use crate::abelian::{quotient_and_projection, FiniteAbelianGroup, Subgroup};
use crate::error::{Error, Result};
use crate::field::FieldInstance;
use crate::group_ring::{determinant, QElem, RElem};
use crate::lattice::{
    semisimplify, sinnott_index, sinnott_index_real, tate_h0, GModuleLattice, IndexMode, PairingFrame, RationalLattice,
    RealLattice,
};
use crate::linalg::QMatrix;
use crate::numeric::{self, PrecisionContext, RMatrix, Real};
use itertools::Itertools;
use rug::{Float, Integer, Rational};

/// A G-lattice M with chosen places `w_1..w_r` and the logarithms
/// `−log|b_k|_{g w_j}` of its basis, which determine `R_w` on `ℝ⋀^r M`.
#[derive(Debug, Clone)]
pub struct RegulatorFrame {
    pub ctx: PrecisionContext,
    pub r: usize,
    pub pairing: PairingFrame,
    /// `logs[k][j][g] = −log|b_k|_{g w_j}`.
    logs: Vec<Vec<Vec<Real>>>,
    /// `a[j][k] = −log|b_k|_{w_j}`.
    pub a: RMatrix,
}

impl RegulatorFrame {
    pub fn from_logs(ctx: &PrecisionContext, module: &GModuleLattice, r: usize, logs: Vec<Vec<Vec<Real>>>) -> Result<Self> {
        let n = module.group.order();
        if logs.len() != module.rank() || logs.iter().any(|l| l.len() != r || l.iter().any(|v| v.len() != n)) {
            return Err(Error::InvalidInput("log table does not match the module".into()));
        }
        let a = (0..r).map(|j| logs.iter().map(|l| l[j][0].clone()).collect()).collect();
        Ok(Self { ctx: *ctx, r, pairing: PairingFrame::new(module), logs, a })
    }

    /// `r = 1` frame of a G-stable sublattice of the S-unit exponent space,
    /// with `w₁` the first real embedding.
    pub fn genuine(inst: &FieldInstance, lattice: &RationalLattice) -> Result<Self> {
        let module = inst.s_units.with_lattice(lattice.clone())?;
        let logs = lattice.basis().iter().map(|b| vec![inst.inf_log(b)]).collect();
        Self::from_logs(&inst.ctx, &module, 1, logs)
    }

    /// Frame of `M ⊂ ℤ[G]^r` with `−log|m|_{g w_j} = (ρ·m_j)_g`.
    pub fn synthetic(ctx: &PrecisionContext, module: &GModuleLattice, r: usize, rho: &RElem) -> Result<Self> {
        let g = &module.group;
        let n = g.order();
        if module.dim() != r * n {
            return Err(Error::InvalidInput("synthetic module must live in ℤ[G]^r".into()));
        }
        let logs = module
            .lattice
            .basis()
            .iter()
            .map(|b| {
                (0..r)
                    .map(|j| {
                        let block = QElem::from_vector(g, b[j * n..(j + 1) * n].to_vec()).to_real(ctx);
                        rho.mul(&block).vector()
                    })
                    .collect()
            })
            .collect();
        Self::from_logs(ctx, module, r, logs)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.pairing.module.group
    }

    pub fn module(&self) -> &GModuleLattice {
        &self.pairing.module
    }

    /// `−log|m|_{g w_j}` for all g, with m in basis coordinates.
    pub fn place_logs(&self, coords: &[Rational], j: usize) -> Vec<Real> {
        let n = self.group().order();
        let mut out = vec![self.ctx.zero(); n];
        for (c, l) in coords.iter().zip(&self.logs) {
            if *c == 0 {
                continue;
            }
            let c = self.ctx.from_rational(c);
            for (o, x) in out.iter_mut().zip(&l[j]) {
                *o += Float::with_val(self.ctx.bits(), &c * x);
            }
        }
        out
    }

    /// `λ_j(m) = −Σ_σ log|σm|_{w_j} σ^{-1} = Σ_g (−log|m|_{g w_j}) g`.
    pub fn lambda(&self, coords: &[Rational], j: usize) -> RElem {
        RElem::from_coeffs(self.group(), self.place_logs(coords, j), &self.ctx)
    }

    /// `R_w(m_1 ∧ … ∧ m_r) = det(λ_j(m_i))`, evaluated directly.
    pub fn regulator_direct(&self, factors: &[Vec<Rational>]) -> RElem {
        let m: Vec<Vec<RElem>> = factors.iter().map(|f| (0..self.r).map(|j| self.lambda(f, j)).collect()).collect();
        determinant(self.group(), &m, &self.ctx)
    }

    /// `R_w` on pairing coordinates: `Σ_J det(A[:,J])·ev_J`.
    pub fn regulator_ev(&self, ev: &[Rational]) -> RElem {
        let g = self.group();
        let n = g.order();
        let mut out = vec![self.ctx.zero(); n];
        for (b, subset) in self.pairing.subsets(self.r).iter().enumerate() {
            let block = &ev[b * n..(b + 1) * n];
            if block.iter().all(|x| *x == 0) {
                continue;
            }
            let minor: RMatrix = self.a.iter().map(|row| subset.iter().map(|&k| row[k].clone()).collect()).collect();
            let d = numeric::det_r(&self.ctx, &minor);
            for (o, x) in out.iter_mut().zip(block) {
                if *x != 0 {
                    *o += Float::with_val(self.ctx.bits(), &d * &self.ctx.from_rational(x));
                }
            }
        }
        RElem::from_coeffs(g, out, &self.ctx)
    }

    pub fn ev(&self, factors: &[Vec<Rational>]) -> Vec<Rational> {
        self.pairing.ev(self.r, factors)
    }

    /// `R_w` of every basis vector of a lattice in pairing coordinates.
    pub fn image(&self, l: &RationalLattice) -> Result<RealLattice> {
        let rows = l.basis().iter().map(|v| self.regulator_ev(v).vector()).collect();
        RealLattice::new(&self.ctx, self.group().order(), rows)
    }

    /// `R_{w'}` over `F = K^H`, computed from the places `γ_δ w_j` directly,
    /// for factors fixed by H.
    pub fn restricted_regulator(&self, h: &Subgroup, factors: &[Vec<Rational>]) -> Result<RElem> {
        let q = quotient_and_projection(self.group(), h)?;
        let delta = &q.target;
        let g = self.group();
        let m: Vec<Vec<RElem>> = factors
            .iter()
            .map(|f| {
                (0..self.r)
                    .map(|j| {
                        let logs = self.place_logs(f, j);
                        let coeffs = q.coset_reps.iter().map(|gamma| logs[g.index_of(gamma)].clone()).collect();
                        RElem::from_coeffs(delta, coeffs, &self.ctx)
                    })
                    .collect()
            })
            .collect();
        Ok(determinant(delta, &m, &self.ctx))
    }

    /// Residual of `π_F(R_w(u_F)) = |H|^r R_{w'}(u_F)`, relative to the size
    /// of the right side, for `u_F` the wedge of H-fixed factors.
    pub fn restriction_residual(&self, h: &Subgroup, factors: &[Vec<Rational>]) -> Result<Real> {
        let ctx = &self.ctx;
        let q = quotient_and_projection(self.group(), h)?;
        let lhs = self.regulator_ev(&self.ev(factors)).project(&q);
        let hr = ctx.real((h.order() as u32).pow(self.r as u32));
        let rhs = self.restricted_regulator(h, factors)?.scale(&hr);
        let scale = rhs.max_abs().max(&ctx.real(1));
        Ok(lhs.max_abs_diff(&rhs) / scale)
    }
}

/// `X = {Σ a_w w : Σ a_w = 0} ⊂ ℤ[G]^r`.
pub fn degree_zero_module(g: &FiniteAbelianGroup, r: usize) -> Result<GModuleLattice> {
    let dim = g.order() * r;
    let gens: QMatrix = (1..dim)
        .map(|i| {
            let mut v = vec![Rational::new(); dim];
            v[0] = Rational::from(-1);
            v[i] = Rational::from(1);
            v
        })
        .collect();
    GModuleLattice::in_group_ring_blocks(g, r, RationalLattice::from_generators(dim, &gens))
}

/// `U_{S_∞}(K)` mod torsion as a G-lattice in exponent coordinates.
pub fn unit_module(inst: &FieldInstance) -> Result<GModuleLattice> {
    inst.s_units.with_lattice(inst.unit_lattice())
}

/// `ℒ_S` of an exponent vector: infinite coordinates `−log|x|_{g w₁}`, then
/// `v_w(x)·log Nw` at the finite places.
pub fn log_embedding(inst: &FieldInstance, exps: &[Rational]) -> Vec<Real> {
    inst.s_log(exps)
}

/// `λ_K` of every basis vector of a lattice of units.
pub fn lambda_image(inst: &FieldInstance, l: &RationalLattice) -> Result<RealLattice> {
    let rows = l.basis().iter().map(|b| inst.inf_log(b)).collect();
    RealLattice::new(&inst.ctx, inst.group().order(), rows)
}

/// Largest `|Σ_w log|u|_w|` over the S-unit basis.
pub fn product_formula_residual(inst: &FieldInstance) -> Real {
    let ctx = &inst.ctx;
    let mut worst = ctx.zero();
    for row in &inst.basis_logs {
        let s: Real = row.iter().fold(ctx.zero(), |acc, x| acc + x);
        let s = numeric::abs(&s);
        if s > worst {
            worst = s;
        }
    }
    worst
}

/// Fundamental units of `F = K^H` as exponent vectors.
pub fn subfield_units(inst: &FieldInstance, h: &Subgroup) -> Result<Vec<Vec<Integer>>> {
    if h.is_trivial() {
        return Ok(inst.unit_lattice().basis().iter().map(|r| r.iter().map(|x| x.numer().clone()).collect()).collect());
    }
    if h.order() == inst.group().order() {
        return Ok(Vec::new());
    }
    inst.subfield_for(h)
        .map(|s| s.units.clone())
        .ok_or_else(|| Error::InvalidInput(format!("no unit data for the fixed field of a subgroup of order {}", h.order())))
}

/// `Reg_F = |det λ_F|` on a fundamental system, against the basis
/// `w_δ − w_last` of `X(F)`.
pub fn classical_regulator(inst: &FieldInstance, h: &Subgroup) -> Result<Real> {
    let ctx = &inst.ctx;
    let units = subfield_units(inst, h)?;
    let q = quotient_and_projection(inst.group(), h)?;
    let n_f = q.target.order();
    if units.len() + 1 != n_f {
        return Err(Error::RankDeficient(format!("{} units for a field of degree {n_f}", units.len())));
    }
    if units.is_empty() {
        return Ok(ctx.real(1));
    }
    let g = inst.group();
    let m: RMatrix = units
        .iter()
        .map(|u| {
            let exps: Vec<Rational> = u.iter().map(|x| Rational::from(x.clone())).collect();
            let logs = inst.inf_log(&exps);
            q.coset_reps[..n_f - 1].iter().map(|gamma| logs[g.index_of(gamma)].clone()).collect()
        })
        .collect();
    let det = numeric::abs(&numeric::det_r(ctx, &m));
    if det < ctx.tau() {
        return Err(Error::RankDeficient("units are dependent".into()));
    }
    Ok(det)
}

/// Semi-simplification index `(S(M) : M)` of a G-stable lattice, 1 on rank 0.
fn ss_index(module: &GModuleLattice, l: &RationalLattice) -> Result<(RationalLattice, Rational)> {
    if l.rank() == 0 {
        return Ok((l.clone(), Rational::from(1)));
    }
    let (s, idx) = semisimplify(&module.with_lattice(l.clone())?)?;
    Ok((s.lattice, idx))
}

/// The terms of `c_F`.
#[derive(Debug, Clone)]
pub struct CConstant {
    pub value: Rational,
    /// `(S(λ_K(N_H U)) : λ_K(N_H U))`, exact through the G-equivariance of λ_K.
    pub unit_index: Rational,
    /// The same index in ℝ-mode on the λ_K images.
    pub unit_index_real: Real,
    pub x_index: Rational,
    pub h0: Integer,
    /// `(S(N_H X) : S(λ_K(N_H U)))` in ℝ-mode.
    pub regulator_index: Real,
}

/// `c_F` for `F = K^H`.
pub fn c_constant(inst: &FieldInstance, h: &Subgroup) -> Result<CConstant> {
    let ctx = &inst.ctx;
    let u = unit_module(inst)?;
    let x = degree_zero_module(inst.group(), 1)?;
    let nu = u.norm_image(h);
    let (s_nu, unit_index) = ss_index(&u, &nu)?;
    let nx = x.norm_image(h);
    let (s_nx, x_index) = ss_index(&x, &nx)?;
    let h0 = tate_h0(h, &u)?;
    let value = Rational::from(&unit_index / &x_index) / Rational::from(h0.clone());
    let (unit_index_real, regulator_index) = if nu.rank() == 0 {
        (ctx.real(1), ctx.real(1))
    } else {
        let l_s = lambda_image(inst, &s_nu)?;
        let l_n = lambda_image(inst, &nu)?;
        let sx = RealLattice::from_rational(ctx, &s_nx);
        (sinnott_index_real(&l_s, &l_n)?, sinnott_index_real(&sx, &l_s)?)
    };
    Ok(CConstant { value, unit_index, unit_index_real, x_index, h0, regulator_index })
}

/// The terms of `c_{K,r}`, computed with `U_{S_∞}(K)`.
#[derive(Debug, Clone)]
pub struct CKr {
    pub value: Rational,
    pub unit_index: Rational,
    pub x_index: Rational,
    /// `Π_{r_S(χ)=r} (e_χX : e_χλ_K U) = (S(eX) : S(eλ_K U))` in ℝ-mode.
    pub character_product: Real,
    /// `(eX : eλ_K U)` in ℝ-mode.
    pub direct_index: Real,
}

pub fn c_k_r(inst: &FieldInstance, e: &QElem) -> Result<CKr> {
    let ctx = &inst.ctx;
    let u = unit_module(inst)?;
    let x = degree_zero_module(inst.group(), 1)?;
    let eu = u.apply(e);
    let ex = x.apply(e);
    let (s_eu, unit_index) = ss_index(&u, &eu)?;
    let (s_ex, x_index) = ss_index(&x, &ex)?;
    let value = Rational::from(&unit_index / &x_index);
    let (character_product, direct_index) = if eu.rank() == 0 {
        (ctx.real(1), ctx.real(1))
    } else {
        let a = sinnott_index_real(&RealLattice::from_rational(ctx, &s_ex), &lambda_image(inst, &s_eu)?)?;
        let b = sinnott_index_real(&RealLattice::from_rational(ctx, &ex), &lambda_image(inst, &eu)?)?;
        (a, b)
    };
    Ok(CKr { value, unit_index, x_index, character_product, direct_index })
}

/// `(eℤ[G] : eX)` for `X ⊂ ℤ[G]^r`, exact.
pub fn group_ring_vs_degree_zero(g: &FiniteAbelianGroup, r: usize, e: &QElem) -> Result<Rational> {
    let x = degree_zero_module(g, r)?;
    let full = GModuleLattice::in_group_ring_blocks(g, r, RationalLattice::standard(g.order() * r))?;
    let a = full.apply(e);
    let b = x.apply(e);
    if a.rank() == 0 {
        return Ok(Rational::from(1));
    }
    sinnott_index(&a, &b, IndexMode::Rational)
}

/// Whether `eU_{S_∞}` and `eU_{S,T}` span the same space, with the index
/// `(eU_{S_∞} : eU_{S,T})`.
pub fn unit_vs_st_index(inst: &FieldInstance, e: &QElem) -> Result<(bool, Rational)> {
    let act = inst.s_units.group_ring_action(e);
    let s = inst.s_rank();
    let a = inst.unit_lattice().image(&act, s);
    let b = inst.st_lattice.image(&act, s);
    let same = a.same_span(&b);
    if !same || a.rank() == 0 {
        return Ok((same, Rational::from(1)));
    }
    Ok((same, sinnott_index(&a, &b, IndexMode::Rational)?))
}

/// Rank of `λ_K` on the unit lattice, numerically.
pub fn lambda_rank(inst: &FieldInstance) -> usize {
    let rows: RMatrix = inst.unit_lattice().basis().iter().map(|b| inst.inf_log(b)).collect();
    numeric::rank_r(&inst.ctx, &rows)
}

/// Every r-subset of a basis of `M^H`, as basis-coordinate factors.
pub fn fixed_wedges(frame: &RegulatorFrame, h: &Subgroup) -> Result<Vec<Vec<Vec<Rational>>>> {
    let fixed = frame.module().fixed_sublattice(h);
    let coords: Vec<Vec<Rational>> = fixed
        .basis()
        .iter()
        .map(|v| frame.pairing.coordinates(v).ok_or_else(|| Error::InvalidInput("fixed vector outside M".into())))
        .collect::<Result<_>>()?;
    Ok(coords.into_iter().combinations(frame.r).collect())
}

/// Worst restriction residual over all subgroups, on deterministic inputs.
pub fn restriction_check(frame: &RegulatorFrame, subgroups: &[Subgroup]) -> Result<Real> {
    let mut worst = frame.ctx.zero();
    for h in subgroups {
        for factors in fixed_wedges(frame, h)? {
            let res = frame.restriction_residual(h, &factors)?;
            if res > worst {
                worst = res;
            }
        }
    }
    Ok(worst)
}

/// All subgroups of G, by brute force over generating pairs.
pub fn all_subgroups(g: &FiniteAbelianGroup) -> Vec<Subgroup> {
    let mut out: Vec<Subgroup> = Vec::new();
    let elems = g.elements();
    let mut push = |s: Subgroup| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    push(Subgroup::trivial(g));
    for a in &elems {
        for b in &elems {
            push(Subgroup::generated_by(g, &[a.clone(), b.clone()]).unwrap());
        }
    }
    let mut grown = true;
    while grown {
        grown = false;
        let current = out.clone();
        for s in &current {
            for t in &current {
                let j = s.join(t);
                if !out.contains(&j) {
                    out.push(j);
                    grown = true;
                }
            }
        }
    }
    out.sort_by_key(|s| s.order());
    out
}
