//! Rational and real lattices, G-module lattices, generalised Sinnott indices,
//! Tate cohomology Ĥ⁰, semi-simplification, exterior powers over ℤ[G] and
//! Rubin's lattice.
//!
//! Exterior powers are handled in "pairing coordinates". For a G-lattice `M`
//! with ℤ-basis `b_1..b_s` and dual basis `φ_k`, the maps
//! `Φ_k(m) = Σ_g φ_k(g^{-1}m) g` form a ℤ-basis of `Hom_G(M, ℤ[G])`, and
//! `m ↦ (Φ_k(m))_k` embeds `ℚM` into `ℚ[G]^s`. Taking r×r minors embeds
//! `ℚ⋀^r_{ℚ[G]} M` into `ℚ[G]^{C(s,r)}`; the coordinate of a wedge at the
//! subset `J` is exactly the pairing with `Φ_{j_1}∧…∧Φ_{j_r}`. Rubin's lattice
//! is then the set of points of the image with integral coordinates.

use crate::abelian::{rational_orbits, FiniteAbelianGroup, Subgroup};
use crate::error::{Error, Result};
use crate::group_ring::{orbit_idempotent, QElem};
use crate::linalg::{self, QMatrix, ZMatrix};
use crate::numeric::{self, PrecisionContext, RMatrix, Real};
use itertools::Itertools;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLattice {
    dim: usize,
    basis: QMatrix,
}

impl RationalLattice {
    pub fn from_generators(dim: usize, gens: &[Vec<Rational>]) -> Self {
        let gens: Vec<Vec<Rational>> = gens.iter().filter(|g| g.iter().any(|x| *x != 0)).cloned().collect();
        if gens.is_empty() {
            return Self { dim, basis: Vec::new() };
        }
        let (den, rows) = linalg::clear_denominators(&gens);
        let h = linalg::hnf(&rows);
        let basis = h
            .into_iter()
            .map(|row| row.into_iter().map(|x| Rational::from((x, den.clone()))).collect())
            .collect();
        Self { dim, basis }
    }

    pub fn from_integer_rows(dim: usize, rows: &[Vec<Integer>]) -> Self {
        Self::from_generators(dim, &linalg::to_q(rows))
    }

    pub fn standard(dim: usize) -> Self {
        Self { dim, basis: linalg::identity_q(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn coordinates(&self, v: &[Vec<Rational>]) -> Option<QMatrix> {
        linalg::coordinates_in_basis(&self.basis, v, self.dim)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        match self.coordinates(&[v.to_vec()]) {
            Some(c) => c[0].iter().all(|x| x.is_integer()),
            None => false,
        }
    }

    pub fn contains_lattice(&self, o: &RationalLattice) -> bool {
        o.basis.iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, o: &RationalLattice) -> RationalLattice {
        let mut g = self.basis.clone();
        g.extend(o.basis.iter().cloned());
        Self::from_generators(self.dim, &g)
    }

    /// Image under `v ↦ v·mat`, with `mat` of size dim × `new_dim`.
    pub fn image(&self, mat: &[Vec<Rational>], new_dim: usize) -> RationalLattice {
        Self::from_generators(new_dim, &linalg::mat_mul_q(&self.basis, mat, new_dim))
    }

    pub fn scaled(&self, q: &Rational) -> RationalLattice {
        let g: QMatrix = self.basis.iter().map(|r| r.iter().map(|x| Rational::from(x * q)).collect()).collect();
        Self::from_generators(self.dim, &g)
    }

    /// `ℚ-span ∩ ℤ^dim`.
    pub fn saturation(&self) -> RationalLattice {
        if self.basis.is_empty() {
            return self.clone();
        }
        let (_, rows) = linalg::clear_denominators(&self.basis);
        Self::from_integer_rows(self.dim, &linalg::saturate(&rows, self.dim))
    }

    /// `{v ∈ L : v·mat = 0}` for `mat` of size dim × `ncols`.
    pub fn kernel_of(&self, mat: &[Vec<Rational>], ncols: usize) -> RationalLattice {
        if self.basis.is_empty() || ncols == 0 {
            return self.clone();
        }
        let img = linalg::mat_mul_q(&self.basis, mat, ncols);
        let (_, rows) = linalg::clear_denominators(&img);
        let k = if rows.iter().all(|r| r.iter().all(|x| *x == 0)) {
            linalg::identity_z(self.rank())
        } else {
            linalg::integer_left_kernel(&rows, ncols)
        };
        Self::from_generators(self.dim, &linalg::mat_mul_q(&linalg::to_q(&k), &self.basis, self.dim))
    }

    pub fn intersection(&self, o: &RationalLattice) -> RationalLattice {
        if self.basis.is_empty() || o.basis.is_empty() {
            return Self::zero(self.dim);
        }
        let mut stacked = self.basis.clone();
        stacked.extend(o.basis.iter().map(|r| r.iter().map(|x| Rational::from(-x)).collect()));
        let (_, rows) = linalg::clear_denominators(&stacked);
        let k = linalg::integer_left_kernel(&rows, self.dim);
        let coords: QMatrix = k.iter().map(|r| r[..self.rank()].iter().map(|x| Rational::from(x.clone())).collect()).collect();
        Self::from_generators(self.dim, &linalg::mat_mul_q(&coords, &self.basis, self.dim))
    }

    pub fn same_span(&self, o: &RationalLattice) -> bool {
        self.rank() == o.rank() && self.coordinates(&o.basis).is_some()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.basis.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    Rational,
    PAdic(u64),
}

/// `(M : N) = |det γ|` for the linear map carrying `M` onto `N`; in p-adic
/// mode `p^{v_p(det γ)}`.
pub fn sinnott_index(m: &RationalLattice, n: &RationalLattice, mode: IndexMode) -> Result<Rational> {
    if m.dim != n.dim || m.rank() != n.rank() {
        return Err(Error::IncomparableLattices(format!("ranks {} and {}", m.rank(), n.rank())));
    }
    if m.rank() == 0 {
        return Ok(Rational::from(1));
    }
    let c = m
        .coordinates(&n.basis)
        .ok_or_else(|| Error::IncomparableLattices("spans differ".into()))?;
    let det = linalg::det_q(&c).abs();
    if det == 0 {
        return Err(Error::IncomparableLattices("spans differ".into()));
    }
    Ok(match mode {
        IndexMode::Rational => det,
        IndexMode::PAdic(p) => {
            let p = Integer::from(p);
            let v = valuation(det.numer(), &p) as i64 - valuation(det.denom(), &p) as i64;
            if v >= 0 {
                Rational::from(p.pow(v as u32))
            } else {
                Rational::from((Integer::from(1), p.pow((-v) as u32)))
            }
        }
    })
}

pub fn valuation(n: &Integer, p: &Integer) -> u32 {
    if *n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    let mut x = n.clone();
    while x.is_divisible(p) {
        x /= p;
        v += 1;
    }
    v
}

/// A lattice given by a basis of real vectors.
#[derive(Debug, Clone)]
pub struct RealLattice {
    pub dim: usize,
    pub basis: RMatrix,
    pub ctx: PrecisionContext,
}

impl RealLattice {
    pub fn new(ctx: &PrecisionContext, dim: usize, basis: RMatrix) -> Result<Self> {
        let l = Self { dim, basis, ctx: *ctx };
        l.check_rank()?;
        Ok(l)
    }

    pub fn from_rational(ctx: &PrecisionContext, l: &RationalLattice) -> Self {
        Self { dim: l.dim, basis: numeric::rmat_from_q(ctx, &l.basis), ctx: *ctx }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn gram(&self) -> RMatrix {
        let r = self.rank();
        (0..r)
            .map(|i| (0..r).map(|j| numeric::dot(&self.ctx, &self.basis[i], &self.basis[j])).collect())
            .collect()
    }

    /// Numerically full rank: the Gram determinant must stay well above the
    /// working tolerance relative to the scale of the basis.
    fn check_rank(&self) -> Result<()> {
        if self.rank() == 0 {
            return Ok(());
        }
        let g = self.gram();
        let scale = numeric::max_abs(&self.ctx, g.iter().flatten());
        let det = numeric::det_r(&self.ctx, &g).abs();
        let floor = Float::with_val(self.ctx.bits(), &scale * &self.ctx.tau()).pow(self.rank() as u32);
        if det <= floor {
            return Err(Error::PrecisionExhausted("basis is numerically rank deficient".into()));
        }
        Ok(())
    }
}

impl RealLattice {
    /// Coordinates of real row vectors in this basis, certified by the
    /// reconstruction residual.
    pub fn coordinates_of(&self, rows: &[Vec<Real>]) -> Result<RMatrix> {
        let ctx = &self.ctx;
        let r = self.rank();
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        if r == 0 {
            if rows.iter().flatten().all(|x| x.is_zero()) {
                return Ok(vec![Vec::new(); rows.len()]);
            }
            return Err(Error::IncomparableLattices("vectors outside the zero lattice".into()));
        }
        let gm = self.gram();
        let cross: RMatrix = rows
            .iter()
            .map(|v| (0..r).map(|j| numeric::dot(ctx, v, &self.basis[j])).collect())
            .collect();
        // C·G_M = cross, so C^T = G_M^{-1} cross^T
        let crt = linalg::transpose(&cross, r);
        let ct = numeric::solve_r(ctx, &gm, &crt)?;
        let c = linalg::transpose(&ct, rows.len());
        let recon = numeric::rmat_mul(ctx, &c, &self.basis, self.dim);
        let scale = numeric::max_abs(ctx, rows.iter().flatten()).max(&ctx.real(1)).clone();
        let mut worst = ctx.zero();
        for (a, b) in recon.iter().flatten().zip(rows.iter().flatten()) {
            let d = Float::with_val(ctx.bits(), a - b).abs();
            if d > worst {
                worst = d;
            }
        }
        let tol = Float::with_val(ctx.bits(), &ctx.tau() * &scale);
        if worst > tol {
            return Err(Error::IncomparableLattices(format!("span mismatch, residual {}", numeric::fmt_real(&worst, 10))));
        }
        Ok(c)
    }

    /// The ℤ-span of `gens`, which must have rational coordinates (denominator
    /// at most `max_den`) in this basis.
    pub fn span_of(&self, gens: &[Vec<Real>], max_den: u64) -> Result<RealLattice> {
        let c = self.coordinates_of(gens)?;
        let tol = self.ctx.pow10(-((self.ctx.digits as i32) / 2));
        let q: QMatrix = c
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        numeric::rationalize(x, max_den, &tol)
                            .ok_or_else(|| Error::PrecisionExhausted("coordinates are not rational".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let l = RationalLattice::from_generators(self.rank(), &q);
        let basis = numeric::rmat_mul(&self.ctx, &numeric::rmat_from_q(&self.ctx, l.basis()), &self.basis, self.dim);
        RealLattice::new(&self.ctx, self.dim, basis)
    }
}

/// ℝ-mode index, through the coordinates of `N` in the span of `M`.
pub fn sinnott_index_real(m: &RealLattice, n: &RealLattice) -> Result<Real> {
    let ctx = &m.ctx;
    if m.dim != n.dim || m.rank() != n.rank() {
        return Err(Error::IncomparableLattices(format!("ranks {} and {}", m.rank(), n.rank())));
    }
    if m.rank() == 0 {
        return Ok(ctx.real(1));
    }
    let c = m.coordinates_of(&n.basis)?;
    Ok(numeric::det_r(ctx, &c).abs())
}

/// A lattice with a G-action given by one matrix per group generator acting
/// on row vectors of the ambient space.
#[derive(Debug, Clone)]
pub struct GModuleLattice {
    pub lattice: RationalLattice,
    pub group: FiniteAbelianGroup,
    pub generator_actions: Vec<QMatrix>,
}

impl GModuleLattice {
    pub fn new(lattice: RationalLattice, group: &FiniteAbelianGroup, generator_actions: Vec<QMatrix>) -> Result<Self> {
        if generator_actions.len() != group.rank() {
            return Err(Error::InvalidInput("one action matrix per generator required".into()));
        }
        let m = Self { lattice, group: group.clone(), generator_actions };
        m.validate()?;
        Ok(m)
    }

    /// ℚ[G] (or a sublattice of it) with the multiplication action.
    pub fn in_group_ring(group: &FiniteAbelianGroup, lattice: RationalLattice) -> Result<Self> {
        let actions = (0..group.rank())
            .map(|i| QElem::sigma(group, &group.generator(i)).multiplication_matrix())
            .collect();
        Self::new(lattice, group, actions)
    }

    /// `ℚ[G]^k` in blocks, sublattice given.
    pub fn in_group_ring_blocks(group: &FiniteAbelianGroup, blocks: usize, lattice: RationalLattice) -> Result<Self> {
        let n = group.order();
        let actions = (0..group.rank())
            .map(|i| {
                let mult = QElem::sigma(group, &group.generator(i)).multiplication_matrix();
                block_diagonal(&mult, n, blocks)
            })
            .collect();
        Self::new(lattice, group, actions)
    }

    fn validate(&self) -> Result<()> {
        let dim = self.lattice.dim();
        for (i, a) in self.generator_actions.iter().enumerate() {
            let d = self.group.factors()[i];
            let mut p = linalg::identity_q(dim);
            for _ in 0..d {
                p = linalg::mat_mul_q(&p, a, dim);
            }
            if p != linalg::identity_q(dim) {
                return Err(Error::InvalidInput(format!("action of generator {i} has wrong order")));
            }
            for b in self.lattice.basis() {
                let img = linalg::vec_mat_q(b, a, dim);
                if !self.lattice.contains(&img) {
                    return Err(Error::InvalidInput("lattice is not G-stable".into()));
                }
            }
        }
        for i in 0..self.generator_actions.len() {
            for j in 0..i {
                let ab = linalg::mat_mul_q(&self.generator_actions[i], &self.generator_actions[j], dim);
                let ba = linalg::mat_mul_q(&self.generator_actions[j], &self.generator_actions[i], dim);
                if ab != ba {
                    return Err(Error::InvalidInput("generator actions do not commute".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn with_lattice(&self, lattice: RationalLattice) -> Result<Self> {
        Self::new(lattice, &self.group, self.generator_actions.clone())
    }

    /// Ambient action matrix of an arbitrary group element.
    pub fn action(&self, g: &[u64]) -> QMatrix {
        let dim = self.dim();
        let mut p = linalg::identity_q(dim);
        for (a, &k) in self.generator_actions.iter().zip(g) {
            for _ in 0..k {
                p = linalg::mat_mul_q(&p, a, dim);
            }
        }
        p
    }

    pub fn all_actions(&self) -> Vec<QMatrix> {
        self.group.elements().iter().map(|g| self.action(g)).collect()
    }

    /// Ambient matrix of a group ring element acting on the right.
    pub fn group_ring_action(&self, x: &QElem) -> QMatrix {
        let dim = self.dim();
        let mut out = vec![vec![Rational::new(); dim]; dim];
        for (g, a) in self.group.elements().iter().zip(self.all_actions()) {
            let c = x.coeff(g);
            if *c == 0 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    if a[i][j] != 0 {
                        out[i][j] += Rational::from(c * &a[i][j]);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &QElem) -> RationalLattice {
        self.lattice.image(&self.group_ring_action(x), self.dim())
    }

    /// Matrices `C_g` with `B·A_g = C_g·B` in the lattice basis `B`.
    pub fn basis_actions(&self) -> Vec<ZMatrix> {
        self.all_actions()
            .iter()
            .map(|a| {
                let img = linalg::mat_mul_q(self.lattice.basis(), a, self.dim());
                let c = self.lattice.coordinates(&img).expect("G-stable");
                c.into_iter()
                    .map(|row| row.into_iter().map(|x| x.numer().clone()).collect())
                    .collect()
            })
            .collect()
    }

    /// `M^H`.
    pub fn fixed_sublattice(&self, h: &Subgroup) -> RationalLattice {
        let r = self.rank();
        let dim = self.dim();
        if r == 0 {
            return self.lattice.clone();
        }
        let actions = self.basis_actions();
        let mut stacked: ZMatrix = vec![Vec::new(); r];
        for hidx in h.indices() {
            let c = &actions[hidx];
            for i in 0..r {
                for j in 0..r {
                    let v = &c[i][j] - Integer::from((i == j) as u32);
                    stacked[i].push(v);
                }
            }
        }
        let cols = stacked[0].len();
        let k = if cols == 0 { linalg::identity_z(r) } else { linalg::integer_left_kernel(&stacked, cols) };
        let coords = linalg::to_q(&k);
        RationalLattice::from_generators(dim, &linalg::mat_mul_q(&coords, self.lattice.basis(), dim))
    }

    /// `N_H·M`.
    pub fn norm_image(&self, h: &Subgroup) -> RationalLattice {
        self.apply(&crate::group_ring::norm_element(h))
    }
}

fn block_diagonal(a: &[Vec<Rational>], n: usize, blocks: usize) -> QMatrix {
    let dim = n * blocks;
    let mut out = vec![vec![Rational::new(); dim]; dim];
    for b in 0..blocks {
        for i in 0..n {
            for j in 0..n {
                out[b * n + i][b * n + j] = a[i][j].clone();
            }
        }
    }
    out
}

/// `|Ĥ⁰(H, M)| = (M^H : N_H M)`.
pub fn tate_h0(h: &Subgroup, m: &GModuleLattice) -> Result<Integer> {
    let fixed = m.fixed_sublattice(h);
    let norms = m.norm_image(h);
    let idx = sinnott_index(&fixed, &norms, IndexMode::Rational)?;
    if !idx.is_integer() {
        return Err(Error::InvalidInput("norm image is not inside the fixed points".into()));
    }
    Ok(idx.numer().clone())
}

/// `S(M) = Σ_e e·M` over rational-orbit idempotents, with `(S(M) : M)`.
pub fn semisimplify(m: &GModuleLattice) -> Result<(GModuleLattice, Rational)> {
    let mut gens = Vec::new();
    for orbit in rational_orbits(&m.group) {
        let e = orbit_idempotent(&orbit);
        gens.extend(m.apply(&e).basis().iter().cloned());
    }
    let s = RationalLattice::from_generators(m.dim(), &gens);
    let idx = sinnott_index(&s, &m.lattice, IndexMode::Rational)?;
    Ok((m.with_lattice(s)?, idx))
}

/// Blockwise action of a group ring element on pairing coordinates.
pub fn apply_blockwise(x: &QElem, l: &RationalLattice) -> RationalLattice {
    let n = x.group().order();
    let blocks = l.dim() / n.max(1);
    let mult = x.multiplication_matrix();
    l.image(&block_diagonal(&mult, n, blocks), l.dim())
}

/// Dual-basis pairing data of a G-lattice, enough to evaluate wedges.
#[derive(Debug, Clone)]
pub struct PairingFrame {
    pub module: GModuleLattice,
    /// `inv_actions[g] = C_{g^{-1}}` in basis coordinates.
    inv_actions: Vec<ZMatrix>,
}

impl PairingFrame {
    pub fn new(module: &GModuleLattice) -> Self {
        let actions = module.basis_actions();
        let inv = module.group.inverse_indices();
        let inv_actions = (0..actions.len()).map(|g| actions[inv[g]].clone()).collect();
        Self { module: module.clone(), inv_actions }
    }

    pub fn s(&self) -> usize {
        self.module.rank()
    }

    /// `Φ_k(m)` for all k, where `m` is given by its basis coordinates.
    pub fn phi(&self, coords: &[Rational]) -> Vec<QElem> {
        let g = &self.module.group;
        let s = self.s();
        let mut out = vec![QElem::rational_zero(g); s];
        for (gi, c) in self.inv_actions.iter().enumerate() {
            for (k, slot) in out.iter_mut().enumerate() {
                let mut acc = Rational::new();
                for (l, x) in coords.iter().enumerate() {
                    if *x != 0 && c[l][k] != 0 {
                        acc += Rational::from(x * &c[l][k]);
                    }
                }
                if acc != 0 {
                    let mut v = slot.vector();
                    v[gi] = acc;
                    *slot = QElem::from_vector(g, v);
                }
            }
        }
        out
    }

    pub fn subsets(&self, r: usize) -> Vec<Vec<usize>> {
        (0..self.s()).combinations(r).collect()
    }

    /// Pairing coordinates of `m_1 ∧ … ∧ m_r`, each `m_i` in basis coordinates.
    pub fn ev(&self, r: usize, factors: &[Vec<Rational>]) -> Vec<Rational> {
        assert_eq!(factors.len(), r);
        let g = &self.module.group;
        let phis: Vec<Vec<QElem>> = factors.iter().map(|m| self.phi(m)).collect();
        let mut out = Vec::new();
        for subset in self.subsets(r) {
            let mat: Vec<Vec<QElem>> = (0..r).map(|a| subset.iter().map(|&j| phis[a][j].clone()).collect()).collect();
            out.extend(group_ring_det(g, &mat).vector());
        }
        out
    }

    pub fn ambient_dim(&self, r: usize) -> usize {
        binomial(self.s(), r) * self.module.group.order()
    }

    /// Basis coordinates of an ambient vector of `ℚM`.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        self.module.lattice.coordinates(&[v.to_vec()]).map(|mut c| c.remove(0))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Leibniz determinant over the commutative ring ℚ[G].
pub fn group_ring_det(g: &FiniteAbelianGroup, m: &[Vec<QElem>]) -> QElem {
    let r = m.len();
    let mut total = QElem::rational_zero(g);
    if r == 0 {
        return QElem::rational_one(g);
    }
    for perm in (0..r).permutations(r) {
        let mut term = QElem::rational_one(g);
        for (i, &p) in perm.iter().enumerate() {
            term = term.mul(&m[i][p]);
            if term.is_zero() {
                break;
            }
        }
        if permutation_sign(&perm) < 0 {
            total = total.sub(&term);
        } else {
            total = total.add(&term);
        }
    }
    total
}

pub fn permutation_sign(p: &[usize]) -> i32 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// The lattice `⋀̃^r M` in pairing coordinates, with its ℚ-dimension and
/// the dimension predicted by isotypic multiplicities.
#[derive(Debug, Clone)]
pub struct WedgeSpace {
    pub frame: PairingFrame,
    pub r: usize,
    pub wedge: RationalLattice,
    pub expected_dim: usize,
}

impl WedgeSpace {
    pub fn ambient_dim(&self) -> usize {
        self.wedge.dim()
    }

    pub fn module_in_ambient(&self, l: RationalLattice) -> Result<GModuleLattice> {
        let blocks = binomial(self.frame.s(), self.r);
        GModuleLattice::in_group_ring_blocks(&self.frame.module.group, blocks, l)
    }
}

/// `Σ_W C(m_W, r)·dim W` over the rational constituents of `ℚM`.
pub fn expected_wedge_dim(m: &GModuleLattice, r: usize) -> usize {
    let mut total = 0;
    for orbit in rational_orbits(&m.group) {
        let e = orbit_idempotent(&orbit);
        let dim_w = orbit.members.len();
        let piece = m.apply(&e).rank();
        total += binomial(piece / dim_w, r) * dim_w;
    }
    total
}

pub fn wedge_image(m: &GModuleLattice, r: usize) -> Result<WedgeSpace> {
    if r == 0 {
        return Err(Error::InvalidInput("wedge degree must be at least 1".into()));
    }
    let frame = PairingFrame::new(m);
    let s = frame.s();
    let dim = frame.ambient_dim(r);
    let unit = |i: usize| {
        let mut v = vec![Rational::new(); s];
        v[i] = Rational::from(1);
        v
    };
    let gens: QMatrix = frame
        .subsets(r)
        .iter()
        .map(|sub| frame.ev(r, &sub.iter().map(|&i| unit(i)).collect::<Vec<_>>()))
        .collect();
    let wedge = RationalLattice::from_generators(dim, &gens);
    let expected_dim = expected_wedge_dim(m, r);
    if wedge.rank() != expected_dim {
        return Err(Error::RankDeficient(format!(
            "wedge image has rank {} but isotypic count gives {}",
            wedge.rank(),
            expected_dim
        )));
    }
    Ok(WedgeSpace { frame, r, wedge, expected_dim })
}

/// `⋂^r_G M` in pairing coordinates.
pub fn rubin_lattice(m: &GModuleLattice, r: usize) -> Result<(WedgeSpace, RationalLattice)> {
    let w = wedge_image(m, r)?;
    let rubin = w.wedge.saturation();
    Ok((w, rubin))
}

/// `(e⋂^r M : e⋀̃^r M)`.
pub fn rubin_vs_wedge_index(m: &GModuleLattice, r: usize, e: &QElem) -> Result<Rational> {
    let (w, rubin) = rubin_lattice(m, r)?;
    let a = apply_blockwise(e, &rubin);
    let b = apply_blockwise(e, &w.wedge);
    sinnott_index(&a, &b, IndexMode::Rational)
}
