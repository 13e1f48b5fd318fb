//! Genuine real abelian fields over ℚ read from instance files. Everything that
//! can be checked is rechecked on load: the Galois table against the numeric
//! embeddings and Frobenius congruences, unit and S-unit conditions, valuations,
//! the G-action on the unit lattice, and congruences modulo T.

use crate::abelian::{gcd, presentation, quotient_and_projection, Elem, FiniteAbelianGroup, Quotient, Subgroup};
use crate::arithmetic::{ExtensionData, PlaceData};
use crate::error::{Error, Result};
use crate::lattice::{GModuleLattice, RationalLattice};
use crate::linalg::{self, QMatrix};
use crate::numeric::{self, PrecisionContext, Real};
use crate::numfield::{is_s_unit, FieldElem, NumberField, ResidueRing};
use rug::{Float, Integer, Rational};
use serde::Deserialize;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

/// Primes below this bound (and all primes of S' and T) get a Frobenius
/// congruence check against the Galois table.
const FROBENIUS_CHECK_BOUND: u64 = 100;

#[derive(Debug, Clone, Deserialize)]
pub struct RawUnit {
    pub label: String,
    pub coords: Vec<String>,
    #[serde(default)]
    pub valuations: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pub logs: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawGalois {
    pub residue: u64,
    pub image: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawPrime {
    pub prime: u64,
    pub norm: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawSubfield {
    pub label: String,
    pub kernel_subgroup: Vec<u64>,
    #[serde(default)]
    pub units: Vec<RawUnit>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawInstance {
    pub name: String,
    pub base_field: String,
    pub conductor: u64,
    pub kernel_subgroup: Vec<u64>,
    pub polynomial: Vec<i64>,
    pub embeddings: Vec<String>,
    pub galois: Vec<RawGalois>,
    pub s_prime: Vec<u64>,
    #[serde(rename = "T")]
    pub t: Vec<RawPrime>,
    pub units: Vec<RawUnit>,
    #[serde(default)]
    pub sunits: Vec<RawUnit>,
    pub class_numbers: BTreeMap<String, u64>,
    #[serde(default)]
    pub subfields: Vec<RawSubfield>,
    pub torsion_order: u64,
    #[serde(default)]
    pub note: Option<String>,
}

/// A member of the ingested S-unit basis.
#[derive(Debug, Clone)]
pub struct BasisUnit {
    pub label: String,
    pub value: FieldElem,
    /// Valuation at each place above each finite prime of S, in the order of
    /// [`FinitePrime::places`].
    pub valuations: Vec<Vec<i64>>,
}

/// The places of K above one finite prime of S, indexed by the cosets
/// `γ_j D_𝔭` of the decomposition group: place j is `γ_j 𝔓₀`.
#[derive(Debug, Clone)]
pub struct FinitePrime {
    pub prime: u64,
    pub places: Quotient,
    pub residue_degree: u32,
    pub log_norm: Real,
}

impl FinitePrime {
    pub fn count(&self) -> usize {
        self.places.target.order()
    }

    /// Index of the place `g·(γ_j 𝔓₀)`.
    pub fn act(&self, g: &[u64], j: usize) -> usize {
        let gj = self.places.source.add(g, &self.places.coset_reps[j]);
        self.places.target.index_of(&self.places.project(&gj))
    }
}

#[derive(Debug, Clone)]
pub struct SubfieldData {
    pub label: String,
    /// `H = Gal(K/F)`.
    pub subgroup: Subgroup,
    /// Fundamental units of F as exponent vectors on the S-unit basis of K.
    pub units: Vec<Vec<Integer>>,
    pub class_number: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct FieldInstance {
    pub name: String,
    pub conductor: u64,
    pub field: NumberField,
    pub ctx: PrecisionContext,
    pub ext: ExtensionData,
    /// Real roots of the defining polynomial in file order.
    pub roots: Vec<Real>,
    /// For each group element g (by index), the root giving the place `g·w₁`,
    /// i.e. `|x|_{g w₁} = |e₀(g⁻¹x)|`.
    pub place_embedding: Vec<usize>,
    /// For each group element, the matrix of its action on power-basis rows.
    pub automorphisms: Vec<QMatrix>,
    residue_class: HashMap<u64, Elem>,
    pub basis: Vec<BasisUnit>,
    /// The first `unit_rank` basis members are units, the rest S-units.
    pub unit_rank: usize,
    pub finite_primes: Vec<FinitePrime>,
    /// `U_S(K)/μ` in exponent coordinates with its exact G-action.
    pub s_units: GModuleLattice,
    /// Signs with `σ(u_k) = ±Π u_j^{a_j}`, per generator of G and basis member.
    pub action_signs: Vec<Vec<bool>>,
    /// `S`-logarithms of the basis: rows indexed by basis, columns by the
    /// places `g·w₁` followed by the finite places of S.
    pub basis_logs: Vec<Vec<Real>>,
    /// Relations among `(-1, u_1, …, u_s)` modulo T.
    pub t_relations: RationalLattice,
    /// `U_{S,T}(K)` in exponent coordinates.
    pub st_lattice: RationalLattice,
    pub torsion_free: bool,
    pub class_numbers: BTreeMap<String, u64>,
    pub subfields: Vec<SubfieldData>,
    pub torsion_order: u64,
    pub note: Option<String>,
}

fn parse_q(s: &str, what: &str) -> Result<Rational> {
    linalg::parse_rational(s).ok_or_else(|| Error::Parse(format!("{what}: cannot read {s:?} as a rational")))
}

fn parse_elem(field: &NumberField, coords: &[String], what: &str) -> Result<FieldElem> {
    if coords.len() != field.degree() {
        return Err(Error::Parse(format!("{what}: expected {} coordinates, got {}", field.degree(), coords.len())));
    }
    coords.iter().map(|c| parse_q(c, what)).collect()
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn load_field_instance(path: impl AsRef<Path>, ctx: &PrecisionContext) -> Result<FieldInstance> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let raw: RawInstance = serde_json::from_str(&text)?;
    FieldInstance::from_raw(raw, ctx)
}

impl FieldInstance {
    pub fn from_raw(raw: RawInstance, ctx: &PrecisionContext) -> Result<Self> {
        if raw.base_field != "Q" {
            return Err(Error::InvalidInput(format!("base field {} is not supported; only Q", raw.base_field)));
        }
        let field = NumberField::new(raw.polynomial.iter().map(|&c| Integer::from(c)).collect())?;
        let n = field.degree();
        if n < 2 {
            return Err(Error::InvalidInput("K must be a proper extension of Q".into()));
        }
        let f = raw.conductor;
        if f < 2 {
            return Err(Error::InvalidInput("conductor must be at least 2".into()));
        }

        // G = (ℤ/f)^× / kernel
        let kernel: Vec<u64> = raw.kernel_subgroup.iter().map(|a| a % f).collect();
        let units_mod_f: Vec<u64> = (1..f).filter(|&a| gcd(a, f) == 1).collect();
        for &a in &kernel {
            if gcd(a, f) != 1 {
                return Err(Error::validation("kernel", format!("{a} is not a unit modulo {f}")));
            }
            for &b in &kernel {
                if !kernel.contains(&(a * b % f)) {
                    return Err(Error::validation("kernel", "kernel_subgroup is not closed under multiplication"));
                }
            }
        }
        if !kernel.contains(&1) {
            return Err(Error::validation("kernel", "kernel_subgroup does not contain 1"));
        }
        let canon = |a: u64| kernel.iter().map(|h| a % f * h % f).min().unwrap();
        let gens: Vec<u64> = raw.galois.iter().map(|g| canon(g.residue)).collect();
        if raw.galois.iter().any(|g| gcd(g.residue, f) != 1) {
            return Err(Error::validation("galois", "Galois residues must be units modulo the conductor"));
        }
        let pres = presentation(canon(1), &gens, |x, y| canon(x * y % f))?;
        if units_mod_f.iter().any(|&a| !pres.words.contains_key(&canon(a))) {
            return Err(Error::validation("galois", "Galois residues do not generate (Z/f)^x modulo the kernel"));
        }
        let group = pres.group.clone();
        if group.order() != n {
            return Err(Error::validation(
                "degree",
                format!("|(Z/{f})^x / kernel| = {} but the polynomial has degree {n}", group.order()),
            ));
        }
        let residue_class: HashMap<u64, Elem> =
            units_mod_f.iter().map(|&a| (a, pres.coordinates(&canon(a)).unwrap())).collect();

        // automorphisms from the generator images
        let gen_mats: Vec<QMatrix> = raw
            .galois
            .iter()
            .map(|g| {
                let alpha = parse_elem(&field, &g.image, "galois image")?;
                let mut rows = Vec::with_capacity(n);
                let mut p = field.one();
                for _ in 0..n {
                    rows.push(p.clone());
                    p = field.mul(&p, &alpha);
                }
                // f(α) = 0
                if !field.is_zero(&p_eval(&field, &alpha)) {
                    return Err(Error::validation(
                        "galois",
                        format!("image of theta under residue {} is not a root of the polynomial", g.residue),
                    ));
                }
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        for a in &gen_mats {
            for b in &gen_mats {
                if linalg::mat_mul_q(a, b, n) != linalg::mat_mul_q(b, a, n) {
                    return Err(Error::validation("galois", "Galois images do not commute"));
                }
            }
        }
        let mut automorphisms = vec![Vec::new(); group.order()];
        for (key, word) in &pres.words {
            let mut m = linalg::identity_q(n);
            for (j, &k) in word.iter().enumerate() {
                for _ in 0..k {
                    m = linalg::mat_mul_q(&m, &gen_mats[j], n);
                }
            }
            let idx = group.index_of(&pres.coordinates(key).unwrap());
            if automorphisms[idx].is_empty() {
                automorphisms[idx] = m;
            } else if automorphisms[idx] != m {
                return Err(Error::validation("galois", "Galois images violate the relations of the group"));
            }
        }
        for key in pres.words.keys() {
            for (j, g) in gens.iter().enumerate() {
                let x = group.index_of(&pres.coordinates(key).unwrap());
                let y = group.index_of(&pres.coordinates(&canon(key * g % f)).unwrap());
                if linalg::mat_mul_q(&automorphisms[x], &gen_mats[j], n) != automorphisms[y] {
                    return Err(Error::validation("galois", "Galois images violate the relations of the group"));
                }
            }
        }

        // embeddings
        if raw.embeddings.len() != n {
            return Err(Error::validation("embeddings", format!("expected {n} real embeddings")));
        }
        let mut roots = Vec::with_capacity(n);
        for s in &raw.embeddings {
            let seed = ctx.parse(s)?;
            roots.push(numeric::newton_root(ctx, &field.poly, seed)?);
        }
        let tol = ctx.tau();
        for i in 0..n {
            for j in 0..i {
                if numeric::abs(&Float::with_val(ctx.bits(), &roots[i] - &roots[j])) < tol {
                    return Err(Error::validation("embeddings", "two listed embeddings converge to the same root"));
                }
            }
        }
        // idx(g): e_idx(θ) = e₀(g θ)
        let mut image_root = vec![usize::MAX; group.order()];
        for (gi, m) in automorphisms.iter().enumerate() {
            let v = field.eval(ctx, &m[1], &roots[0]);
            let hit: Vec<usize> = (0..n)
                .filter(|&j| numeric::abs(&Float::with_val(ctx.bits(), &v - &roots[j])) < tol)
                .collect();
            if hit.len() != 1 {
                return Err(Error::validation("galois", "embedding permutation does not match the Galois table"));
            }
            image_root[gi] = hit[0];
        }
        let mut seen = image_root.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != n {
            return Err(Error::validation("galois", "Galois table does not permute the embeddings"));
        }
        let inv = group.inverse_indices();
        let place_embedding: Vec<usize> = (0..group.order()).map(|g| image_root[inv[g]]).collect();

        // ramification
        let mut ramified = Vec::new();
        for (p, k) in prime_factors(f) {
            let pk = p.pow(k);
            let m = f / pk;
            let inertia_elems: Vec<Elem> =
                units_mod_f.iter().filter(|&&a| a % m == 1 % m).map(|a| residue_class[a].clone()).collect();
            let inertia = Subgroup::from_elements(&group, &inertia_elems)?;
            if inertia.is_trivial() {
                return Err(Error::validation("conductor", format!("{p} divides the conductor but is unramified in K")));
            }
            let frob_res = units_mod_f.iter().copied().find(|&a| a % pk == 1 % pk && a % m == p % m).unwrap();
            let frobenius = residue_class[&frob_res].clone();
            let decomposition = Subgroup::generated_by(&group, std::slice::from_ref(&frobenius))?.join(&inertia);
            ramified.push(PlaceData { label: p.to_string(), norm: Some(Integer::from(p)), inertia, decomposition, frobenius });
        }
        let unramified = |p: u64, what: &str| -> Result<PlaceData> {
            if !is_prime(p) {
                return Err(Error::validation(what, format!("{p} is not prime")));
            }
            if f.is_multiple_of(p) {
                return Err(Error::Ramified(p.to_string()));
            }
            PlaceData::unramified(&p.to_string(), Some(Integer::from(p)), residue_class[&(p % f)].clone(), &group)
        };
        let s_prime: Vec<PlaceData> = raw.s_prime.iter().map(|&p| unramified(p, "s_prime")).collect::<Result<_>>()?;
        let mut t_places = Vec::new();
        for t in &raw.t {
            if t.norm != t.prime {
                return Err(Error::validation("T", format!("norm of {} over Q must be {}, got {}", t.prime, t.prime, t.norm)));
            }
            t_places.push(unramified(t.prime, "T")?);
        }
        let ext = ExtensionData { group: group.clone(), r: 1, ramified, s_prime, t_places, roots_of_unity: raw.torsion_order };
        ext.validate()?;
        if raw.torsion_order != 2 {
            return Err(Error::validation("torsion", "a totally real field has exactly two roots of unity"));
        }

        // Frobenius congruences σ_p(θ) ≡ θ^p mod p
        let mut check_primes: Vec<u64> = (2..FROBENIUS_CHECK_BOUND).filter(|&p| is_prime(p)).collect();
        check_primes.extend(raw.s_prime.iter().copied());
        check_primes.extend(raw.t.iter().map(|t| t.prime));
        check_primes.sort();
        check_primes.dedup();
        for p in check_primes {
            if f.is_multiple_of(p) || !field.good_reduction(p) {
                continue;
            }
            let frob = &automorphisms[group.index_of(&residue_class[&(p % f)])];
            let diff = field.sub(&frob[1], &field.pow(&field.theta(), p as i64)?);
            let congruent = diff.iter().all(|c| crate::numfield::rational_mod(c, p) == Some(0));
            if !congruent {
                return Err(Error::validation(
                    "frobenius",
                    format!("the Galois image for residue {p} is not congruent to theta^{p} modulo {p}"),
                ));
            }
        }

        // places above the finite primes of S
        let finite_primes: Vec<FinitePrime> = ext
            .finite_s_places()
            .map(|pl| {
                let p: u64 = pl.label.parse().unwrap();
                let places = quotient_and_projection(&group, &pl.decomposition)?;
                let residue_degree = (pl.decomposition.order() / pl.inertia.order()) as u32;
                let log_norm = Float::with_val(ctx.bits(), ctx.real(p).ln() * residue_degree);
                Ok(FinitePrime { prime: p, places, residue_degree, log_norm })
            })
            .collect::<Result<_>>()?;
        let s_primes: Vec<u64> = finite_primes.iter().map(|p| p.prime).collect();

        // the S-unit basis
        let mut basis = Vec::new();
        for (raw_u, is_unit) in raw.units.iter().map(|u| (u, true)).chain(raw.sunits.iter().map(|u| (u, false))) {
            let value = parse_elem(&field, &raw_u.coords, &raw_u.label)?;
            let allowed: &[u64] = if is_unit { &[] } else { &s_primes };
            if !is_s_unit(&field, &value, allowed)? {
                let kind = if is_unit { "a unit" } else { "an S-unit" };
                return Err(Error::validation("units", format!("{} is not {kind}", raw_u.label)));
            }
            for key in raw_u.valuations.keys() {
                if !s_primes.iter().any(|p| p.to_string() == *key) {
                    return Err(Error::validation("units", format!("{} has a valuation at {key}, which is not in S", raw_u.label)));
                }
            }
            let mut valuations = Vec::new();
            for fp in &finite_primes {
                let v = match raw_u.valuations.get(&fp.prime.to_string()) {
                    Some(v) => v.clone(),
                    None => vec![0; fp.count()],
                };
                if v.len() != fp.count() {
                    return Err(Error::validation(
                        "units",
                        format!("{}: {} places above {}, got {} valuations", raw_u.label, fp.count(), fp.prime, v.len()),
                    ));
                }
                if is_unit && v.iter().any(|&x| x != 0) {
                    return Err(Error::validation("units", format!("{} is listed as a unit but has nonzero valuations", raw_u.label)));
                }
                // v_p(N u) = f_p Σ_j v_j
                let norm = field.norm(&value);
                let vp = crate::numfield::valuation_q(&norm, fp.prime);
                if vp != fp.residue_degree as i64 * v.iter().sum::<i64>() {
                    return Err(Error::validation(
                        "valuations",
                        format!("{}: valuations above {} disagree with the norm", raw_u.label, fp.prime),
                    ));
                }
                valuations.push(v);
            }
            basis.push(BasisUnit { label: raw_u.label.clone(), value, valuations });
        }
        let unit_rank = raw.units.len();
        let s = basis.len();
        let expected_rank = n - 1 + finite_primes.iter().map(|p| p.count()).sum::<usize>();
        if s != expected_rank {
            return Err(Error::validation("units", format!("expected {expected_rank} basis S-units, got {s}")));
        }
        if unit_rank != n - 1 {
            return Err(Error::validation("units", format!("expected {} fundamental units, got {unit_rank}", n - 1)));
        }

        let mut inst = FieldInstance {
            name: raw.name.clone(),
            conductor: f,
            field,
            ctx: *ctx,
            ext,
            roots,
            place_embedding,
            automorphisms,
            residue_class,
            basis,
            unit_rank,
            finite_primes,
            s_units: GModuleLattice::new(RationalLattice::standard(0), &FiniteAbelianGroup::trivial(), vec![])?,
            action_signs: Vec::new(),
            basis_logs: Vec::new(),
            t_relations: RationalLattice::zero(s + 1),
            st_lattice: RationalLattice::zero(s),
            torsion_free: false,
            class_numbers: raw.class_numbers.clone(),
            subfields: Vec::new(),
            torsion_order: raw.torsion_order,
            note: raw.note.clone(),
        };
        inst.basis_logs = inst.basis.iter().map(|b| inst.s_log_of(&b.value, &b.valuations)).collect();

        // product formula and the file's numeric logs
        for (b, raw_u) in inst.basis.iter().zip(raw.units.iter().chain(&raw.sunits)) {
            let row = &inst.basis_logs[inst.index_of_label(&b.label).unwrap()];
            let total = row.iter().fold(ctx.zero(), |acc, x| acc + x);
            if numeric::abs(&total) > ctx.tau() {
                return Err(Error::validation("product formula", format!("{}: S-logarithms do not sum to zero", b.label)));
            }
            if !raw_u.logs.is_empty() {
                let loose = ctx.pow10(-25);
                for (j, s) in raw_u.logs.iter().enumerate() {
                    let given = ctx.parse(s)?;
                    let actual = inst.field.eval(ctx, &b.value, &inst.roots[j]).abs().ln();
                    if numeric::abs(&Float::with_val(ctx.bits(), &given - &actual)) > loose {
                        return Err(Error::validation("logs", format!("{}: listed log under embedding {j} is wrong", b.label)));
                    }
                }
            }
        }
        if numeric::rank_r(ctx, &inst.basis_logs) != s {
            return Err(Error::validation("units", "the listed S-units are multiplicatively dependent"));
        }

        // G-action on exponent vectors
        let mut actions = Vec::new();
        let mut signs = Vec::new();
        for gi in 0..group.rank() {
            let g = group.generator(gi);
            let mut rows = Vec::new();
            let mut sg = Vec::new();
            for k in 0..s {
                let image = inst.apply(&g, &inst.basis[k].value);
                let vals = inst.permuted_valuations(&g, &inst.basis[k].valuations);
                let logs = inst.s_log_of(&image, &vals);
                let (exps, negative) = inst.recognize(&image, &logs).map_err(|_| {
                    Error::validation(
                        "galois action",
                        format!("the conjugate of {} is not in the span of the basis", inst.basis[k].label),
                    )
                })?;
                rows.push(exps.into_iter().map(Rational::from).collect());
                sg.push(negative);
            }
            actions.push(rows);
            signs.push(sg);
        }
        inst.s_units = GModuleLattice::new(RationalLattice::standard(s), &group, actions)?;
        inst.action_signs = signs;

        // U_{S,T} from relations modulo T
        let rings: Vec<ResidueRing> =
            inst.ext.t_places.iter().map(|q| ResidueRing::new(&inst.field, q.label.parse().unwrap())).collect::<Result<_>>()?;
        let reduce_all = |x: &FieldElem| -> Result<Vec<Vec<u64>>> { rings.iter().map(|r| r.reduce(x)).collect() };
        let one: Vec<Vec<u64>> = rings.iter().map(|r| r.one()).collect();
        let mut gens_mod_t = vec![reduce_all(&inst.field.from_rational(&Rational::from(-1)))?];
        for b in &inst.basis {
            gens_mod_t.push(reduce_all(&b.value)?);
        }
        let mul = |x: &Vec<Vec<u64>>, y: &Vec<Vec<u64>>| -> Vec<Vec<u64>> {
            rings.iter().enumerate().map(|(i, r)| r.mul(&x[i], &y[i])).collect()
        };
        let rel = presentation(one.clone(), &gens_mod_t, mul)?;
        let relations = RationalLattice::from_integer_rows(s + 1, &rel.relations);
        if relations.rank() != s + 1 {
            return Err(Error::validation("T", "relations modulo T do not have full rank"));
        }
        let mut minus_one = vec![Rational::new(); s + 1];
        minus_one[0] = Rational::from(1);
        inst.torsion_free = !relations.contains(&minus_one);
        let projected: Vec<Vec<Rational>> = relations.basis().iter().map(|r| r[1..].to_vec()).collect();
        inst.st_lattice = RationalLattice::from_generators(s, &projected);
        inst.t_relations = relations;
        // every basis vector of U_{S,T} is ≡ 1 modulo T
        for row in inst.st_lattice.basis() {
            let exps: Vec<Integer> = row.iter().map(|q| q.numer().clone()).collect();
            let negative = inst.st_sign(&exps).ok_or_else(|| Error::validation("T", "U_{S,T} basis vector without a sign"))?;
            let mut acc = one.clone();
            if negative {
                acc = mul(&acc, &gens_mod_t[0]);
            }
            for (k, e) in exps.iter().enumerate() {
                let mut base = gens_mod_t[k + 1].clone();
                let order = element_order(&base, &one, &mul);
                let mut k2 = e.mod_u(order as u32) as u64;
                let mut pow = one.clone();
                while k2 > 0 {
                    if k2 & 1 == 1 {
                        pow = mul(&pow, &base);
                    }
                    base = mul(&base, &base);
                    k2 >>= 1;
                }
                acc = mul(&acc, &pow);
            }
            if acc != one {
                return Err(Error::validation("T", "U_{S,T} generator is not congruent to 1 modulo T"));
            }
        }
        if let Some(flag) = crate::arithmetic::torsion_free(&inst.ext) {
            if flag != inst.torsion_free {
                return Err(Error::validation("torsion", "torsion-freeness from T norms disagrees with residue computation"));
            }
        }
        if inst.st_lattice.rank() != s {
            return Err(Error::validation("T", "U_{S,T} does not have full rank"));
        }
        GModuleLattice::with_lattice(&inst.s_units, inst.st_lattice.clone())?;

        // subfields
        for sf in &raw.subfields {
            let mut elems = Vec::new();
            for &a in &sf.kernel_subgroup {
                let c = inst
                    .residue_class
                    .get(&(a % f))
                    .ok_or_else(|| Error::validation("subfields", format!("{}: {a} is not a unit mod {f}", sf.label)))?;
                elems.push(c.clone());
            }
            for &a in &kernel {
                if !sf.kernel_subgroup.iter().any(|&b| b % f == a) {
                    return Err(Error::validation("subfields", format!("{}: kernel does not contain that of K", sf.label)));
                }
            }
            let subgroup = Subgroup::from_elements(&group, &elems)?;
            if subgroup.order() * kernel.len() != sf.kernel_subgroup.len() {
                return Err(Error::validation("subfields", format!("{}: kernel_subgroup is not a subgroup", sf.label)));
            }
            let expected = group.order() / subgroup.order() - 1;
            if sf.units.len() != expected {
                return Err(Error::validation("subfields", format!("{}: expected {expected} units", sf.label)));
            }
            let mut units = Vec::new();
            for u in &sf.units {
                let value = parse_elem(&inst.field, &u.coords, &u.label)?;
                if !is_s_unit(&inst.field, &value, &[])? {
                    return Err(Error::validation("subfields", format!("{} is not a unit", u.label)));
                }
                for h in subgroup.elements() {
                    if inst.apply(&h, &value) != value {
                        return Err(Error::validation("subfields", format!("{} is not fixed by Gal(K/{})", u.label, sf.label)));
                    }
                }
                let zero_vals: Vec<Vec<i64>> = inst.finite_primes.iter().map(|p| vec![0; p.count()]).collect();
                let logs = inst.s_log_of(&value, &zero_vals);
                let (exps, _) = inst
                    .recognize(&value, &logs)
                    .map_err(|_| Error::validation("subfields", format!("{} is not in the unit group of K", u.label)))?;
                units.push(exps);
            }
            let class_number = inst.class_numbers.get(&sf.label).copied();
            inst.subfields.push(SubfieldData { label: sf.label.clone(), subgroup, units, class_number });
        }
        if let Some(k) = inst.subfields.iter().find(|s| s.subgroup.is_trivial()) {
            let own = RationalLattice::from_integer_rows(s, &k.units);
            if own != inst.unit_lattice() {
                return Err(Error::validation("subfields", "units listed for K differ from the fundamental units"));
            }
        }
        Ok(inst)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.ext.group
    }

    pub fn s_rank(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.label == label)
    }

    /// Group element of the residue class `a mod f`.
    pub fn residue_element(&self, a: u64) -> Option<&Elem> {
        self.residue_class.get(&(a % self.conductor))
    }

    pub fn apply(&self, g: &[u64], x: &FieldElem) -> FieldElem {
        let m = &self.automorphisms[self.group().index_of(g)];
        linalg::vec_mat_q(x, m, self.field.degree())
    }

    /// Valuations of `g(x)` from those of x: `v_{γ_j𝔓}(g x) = v_{g⁻¹γ_j𝔓}(x)`.
    pub fn permuted_valuations(&self, g: &[u64], vals: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let ginv = self.group().neg(g);
        self.finite_primes
            .iter()
            .zip(vals)
            .map(|(fp, v)| (0..fp.count()).map(|j| v[fp.act(&ginv, j)]).collect())
            .collect()
    }

    /// `ℒ_S(x) = -Σ_w log|x|_w · w` for an exact element with known valuations.
    pub fn s_log_of(&self, x: &FieldElem, vals: &[Vec<i64>]) -> Vec<Real> {
        let ctx = &self.ctx;
        let mut out: Vec<Real> = self
            .place_embedding
            .iter()
            .map(|&e| -self.field.eval(ctx, x, &self.roots[e]).abs().ln())
            .collect();
        for (fp, v) in self.finite_primes.iter().zip(vals) {
            for &vj in v {
                out.push(Float::with_val(ctx.bits(), &fp.log_norm * vj));
            }
        }
        out
    }

    /// `ℒ_S` of `Π u_k^{a_k}`.
    pub fn s_log(&self, exps: &[Rational]) -> Vec<Real> {
        let ctx = &self.ctx;
        let width = self.basis_logs[0].len();
        let mut out = vec![ctx.zero(); width];
        for (a, row) in exps.iter().zip(&self.basis_logs) {
            if *a == 0 {
                continue;
            }
            let a = ctx.from_rational(a);
            for (o, x) in out.iter_mut().zip(row) {
                *o += Float::with_val(ctx.bits(), &a * x);
            }
        }
        out
    }

    /// The infinite part `ℒ_{S,∞}`, indexed by the places `g·w₁`.
    pub fn inf_log(&self, exps: &[Rational]) -> Vec<Real> {
        let mut v = self.s_log(exps);
        v.truncate(self.group().order());
        v
    }

    /// Exact `Π u_k^{a_k}` (no sign).
    pub fn element(&self, exps: &[Integer]) -> Result<FieldElem> {
        let mut acc = self.field.one();
        for (b, a) in self.basis.iter().zip(exps) {
            if *a != 0 {
                let k = a.to_i64().ok_or_else(|| Error::InvalidInput("exponent too large".into()))?;
                acc = self.field.mul(&acc, &self.field.pow(&b.value, k)?);
            }
        }
        Ok(acc)
    }

    /// Finds integer exponents and a sign with `x = ±Π u_k^{a_k}`, given
    /// `ℒ_S(x)`; verified exactly.
    pub fn recognize(&self, x: &FieldElem, logs: &[Real]) -> Result<(Vec<Integer>, bool)> {
        let ctx = &self.ctx;
        let real = numeric::least_squares_left(ctx, &self.basis_logs, logs)?;
        let mut exps = Vec::new();
        for r in &real {
            let (a, dist) = numeric::round_to_integer(r);
            if dist > ctx.pow10(-(ctx.digits as i32) / 2) {
                return Err(Error::validation("recognition", "non-integral exponent"));
            }
            exps.push(a);
        }
        let y = self.element(&exps)?;
        if y == *x {
            return Ok((exps, false));
        }
        if self.field.neg(&y) == *x {
            return Ok((exps, true));
        }
        Err(Error::validation("recognition", "exact check failed"))
    }

    /// For exponents in `U_{S,T}`, whether the sign `-1` is needed so that
    /// `±Π u^a ≡ 1 mod T`. `None` if the exponents are not in `U_{S,T}`.
    pub fn st_sign(&self, exps: &[Integer]) -> Option<bool> {
        let mut v: Vec<Rational> = std::iter::once(Rational::new()).chain(exps.iter().map(|a| Rational::from(a.clone()))).collect();
        if self.t_relations.contains(&v) {
            return Some(false);
        }
        v[0] = Rational::from(1);
        if self.t_relations.contains(&v) {
            return Some(true);
        }
        None
    }

    /// `U_{S_∞}(K)` inside the exponent lattice.
    pub fn unit_lattice(&self) -> RationalLattice {
        let s = self.s_rank();
        let rows: Vec<Vec<Integer>> = (0..self.unit_rank)
            .map(|i| (0..s).map(|j| Integer::from((i == j) as u32)).collect())
            .collect();
        RationalLattice::from_integer_rows(s, &rows)
    }

    pub fn subfield_for(&self, h: &Subgroup) -> Option<&SubfieldData> {
        self.subfields.iter().find(|s| &s.subgroup == h)
    }

    pub fn valuation_matrix_row(&self, exps: &[Integer]) -> Vec<Integer> {
        let mut out = Vec::new();
        for (pi, fp) in self.finite_primes.iter().enumerate() {
            for j in 0..fp.count() {
                let mut acc = Integer::new();
                for (b, a) in self.basis.iter().zip(exps) {
                    acc += Integer::from(a * b.valuations[pi][j]);
                }
                out.push(acc);
            }
        }
        out
    }
}

fn p_eval(field: &NumberField, alpha: &FieldElem) -> FieldElem {
    let coeffs: Vec<Rational> = field.poly.iter().map(|c| Rational::from(c.clone())).collect();
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = field.mul(&acc, alpha);
        acc[0] += c;
    }
    acc
}

fn element_order<F: Fn(&Vec<Vec<u64>>, &Vec<Vec<u64>>) -> Vec<Vec<u64>>>(
    x: &Vec<Vec<u64>>,
    one: &Vec<Vec<u64>>,
    mul: &F,
) -> u64 {
    let mut y = x.clone();
    let mut k = 1;
    while &y != one {
        y = mul(&y, x);
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
    }

    fn raw(name: &str) -> RawInstance {
        serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    #[test]
    fn golden_field_loads() {
        let k = load_field_instance(data("q-sqrt5.json"), &ctx()).unwrap();
        assert_eq!(k.group().factors(), &[2]);
        assert_eq!(k.ext.ramified.len(), 1);
        assert_eq!(k.ext.ramified[0].label, "5");
        assert!(k.torsion_free);
        assert_eq!(k.s_rank(), 3);
        // σ(ε) = -ε⁻¹
        assert_eq!(k.s_units.generator_actions[0][0][0], -1);
        assert!(k.action_signs[0][0]);
        // ε has order 8 in F_9^*, -1 ≡ ε⁴, √5 ≡ ε⁶ and 7 ≡ 1 mod 3
        assert!(k.st_lattice.contains(&[Rational::from(4), Rational::new(), Rational::new()]));
        assert!(!k.st_lattice.contains(&[Rational::from(2), Rational::new(), Rational::new()]));
        assert!(k.st_lattice.contains(&[Rational::from(2), Rational::from(1), Rational::new()]));
        assert!(k.st_lattice.contains(&[Rational::new(), Rational::new(), Rational::from(1)]));
        assert_eq!(k.st_sign(&[Integer::from(4), Integer::new(), Integer::new()]), Some(true));
    }

    #[test]
    fn all_shipped_instances_load() {
        for name in ["q-sqrt2.json", "q-sqrt2-sqrt5.json", "bad-torsion.json"] {
            load_field_instance(data(name), &ctx()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        let bad = load_field_instance(data("bad-torsion.json"), &ctx()).unwrap();
        assert!(!bad.torsion_free);
        let quartic = load_field_instance(data("q-sqrt2-sqrt5.json"), &ctx()).unwrap();
        assert_eq!(quartic.group().factors(), &[2, 2]);
        assert_eq!(quartic.ext.ramified.len(), 2);
        assert_eq!(quartic.finite_primes.iter().map(|p| p.count()).collect::<Vec<_>>(), vec![1, 1, 2]);
        assert_eq!(quartic.subfields.len(), 5);
    }

    #[test]
    fn non_unit_is_rejected() {
        let mut r = raw("q-sqrt5.json");
        r.units[0].coords = vec!["2".into(), "0".into()];
        r.units[0].logs.clear();
        let err = FieldInstance::from_raw(r, &ctx()).unwrap_err();
        assert!(matches!(err, Error::Validation { ref invariant, .. } if invariant == "units"), "{err}");
    }

    #[test]
    fn swapped_frobenius_is_rejected() {
        let mut r = raw("q-sqrt2-sqrt5.json");
        let i7 = r.galois.iter().position(|g| g.residue == 7).unwrap();
        let i11 = r.galois.iter().position(|g| g.residue == 11).unwrap();
        let tmp = r.galois[i7].image.clone();
        r.galois[i7].image = r.galois[i11].image.clone();
        r.galois[i11].image = tmp;
        let err = FieldInstance::from_raw(r, &ctx()).unwrap_err();
        assert!(matches!(err, Error::Validation { ref invariant, .. } if invariant == "frobenius"), "{err}");
    }

    #[test]
    fn wrong_valuation_is_rejected() {
        let mut r = raw("q-sqrt2-sqrt5.json");
        let pi3 = r.sunits.iter_mut().find(|u| u.label == "pi3").unwrap();
        pi3.valuations.insert("3".into(), vec![2, 0]);
        assert!(FieldInstance::from_raw(r, &ctx()).is_err());
    }
}
