//! Abstract ramification data of an abelian extension `K/k`: places of S and T,
//! orders of vanishing, the hypotheses on `(K/k, S, T, r)`, the subfields
//! `K_𝔤` and `K_I`, and Sinnott modules.

use crate::abelian::{quotient_and_projection, Character, Elem, FiniteAbelianGroup, Quotient, Subgroup};
use crate::error::{Error, Result};
use crate::group_ring::{euler_factor, norm_element, QElem};
use crate::lattice::{GModuleLattice, RationalLattice};
use rug::{Integer, Rational};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceData {
    pub label: String,
    /// Absolute norm `N𝔭` of the place of k, when known.
    pub norm: Option<Integer>,
    pub inertia: Subgroup,
    pub decomposition: Subgroup,
    /// A Frobenius representative, well defined modulo inertia.
    pub frobenius: Elem,
}

impl PlaceData {
    pub fn unramified(label: &str, norm: Option<Integer>, frobenius: Elem, group: &FiniteAbelianGroup) -> Result<Self> {
        let inertia = Subgroup::trivial(group);
        let decomposition = Subgroup::generated_by(group, std::slice::from_ref(&frobenius))?;
        Ok(Self { label: label.to_string(), norm, inertia, decomposition, frobenius })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.inertia.is_subset_of(&self.decomposition) {
            return Err(Error::validation("place", format!("{}: inertia not inside decomposition", self.label)));
        }
        if !self.decomposition.contains(&self.frobenius) {
            return Err(Error::validation("place", format!("{}: Frobenius outside decomposition group", self.label)));
        }
        let generated = Subgroup::generated_by(self.inertia.parent(), std::slice::from_ref(&self.frobenius))
            .unwrap()
            .join(&self.inertia);
        if generated != self.decomposition {
            return Err(Error::validation("place", format!("{}: D/I is not generated by Frobenius", self.label)));
        }
        Ok(())
    }

    /// The place's data pushed to a quotient of the Galois group.
    pub fn push(&self, q: &Quotient) -> PlaceData {
        PlaceData {
            label: self.label.clone(),
            norm: self.norm.clone(),
            inertia: q.project_subgroup(&self.inertia),
            decomposition: q.project_subgroup(&self.decomposition),
            frobenius: q.project(&self.frobenius),
        }
    }

    /// Parity of the residue characteristic, read off the norm.
    pub fn residue_characteristic_is_odd(&self) -> Option<bool> {
        self.norm.as_ref().map(|n| n.is_odd())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionData {
    pub group: FiniteAbelianGroup,
    /// Number of infinite places of k; all split completely in K.
    pub r: usize,
    pub ramified: Vec<PlaceData>,
    pub s_prime: Vec<PlaceData>,
    pub t_places: Vec<PlaceData>,
    /// `|μ(K)|`; 2 for totally real K.
    pub roots_of_unity: u64,
}

impl ExtensionData {
    pub fn validate(&self) -> Result<()> {
        for p in self.ramified.iter().chain(&self.s_prime).chain(&self.t_places) {
            if p.inertia.parent() != &self.group {
                return Err(Error::validation("place", format!("{} belongs to another group", p.label)));
            }
            p.validate()?;
        }
        for p in &self.ramified {
            if p.inertia.is_trivial() {
                return Err(Error::validation("ramification", format!("{} listed as ramified but has trivial inertia", p.label)));
            }
        }
        for p in self.s_prime.iter().chain(&self.t_places) {
            if !p.inertia.is_trivial() {
                return Err(Error::Ramified(p.label.clone()));
            }
        }
        let mut labels = BTreeSet::new();
        for p in self.ramified.iter().chain(&self.s_prime).chain(&self.t_places) {
            if !labels.insert(p.label.clone()) {
                return Err(Error::validation("disjointness", format!("place {} appears twice among Ram, S' and T", p.label)));
            }
        }
        Ok(())
    }

    pub fn finite_s_places(&self) -> impl Iterator<Item = &PlaceData> {
        self.ramified.iter().chain(&self.s_prime)
    }

    /// `|S|`, counting the r infinite places.
    pub fn s_size(&self) -> usize {
        self.r + self.ramified.len() + self.s_prime.len()
    }

    pub fn full_divisor(&self) -> CycleDivisor {
        CycleDivisor::new((0..self.ramified.len()).collect())
    }

    pub fn place_by_label(&self, label: &str) -> Option<&PlaceData> {
        self.ramified.iter().chain(&self.s_prime).chain(&self.t_places).find(|p| p.label == label)
    }
}

/// A divisor `𝔤 ∣ 𝔣̂`, stored as indices into the ramified places.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CycleDivisor(pub BTreeSet<usize>);

impl CycleDivisor {
    pub fn new(indices: BTreeSet<usize>) -> Self {
        Self(indices)
    }

    pub fn one() -> Self {
        Self(BTreeSet::new())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn divides(&self, other: &CycleDivisor) -> bool {
        self.0.is_subset(&other.0)
    }

    /// All divisors of the radical with `n` prime factors.
    pub fn all(n: usize) -> Vec<CycleDivisor> {
        (0u64..1 << n)
            .map(|mask| CycleDivisor((0..n).filter(|i| mask >> i & 1 == 1).collect()))
            .collect()
    }

    pub fn complement(&self, n: usize) -> CycleDivisor {
        CycleDivisor((0..n).filter(|i| !self.0.contains(i)).collect())
    }

    pub fn labels(&self, ext: &ExtensionData) -> Vec<String> {
        self.0.iter().map(|&i| ext.ramified[i].label.clone()).collect()
    }

    pub fn describe(&self, ext: &ExtensionData) -> String {
        if self.0.is_empty() {
            "(1)".into()
        } else {
            self.labels(ext).join("*")
        }
    }
}

/// `r_S(χ)`.
pub fn order_of_vanishing(chi: &Character, ext: &ExtensionData) -> usize {
    if chi.is_trivial() {
        return ext.s_size() - 1;
    }
    ext.r + ext.finite_s_places().filter(|p| chi.is_trivial_on(&p.decomposition)).count()
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisItem {
    pub id: u8,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub items: Vec<HypothesisItem>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failed_ids(&self) -> Vec<u8> {
        self.items.iter().filter(|i| !i.passed).map(|i| i.id).collect()
    }
}

/// Whether `U_{S,T}(K)` is torsion-free, decided from the roots of unity of K
/// and the residue characteristics in T. `None` if some norm is unknown.
pub fn torsion_free(ext: &ExtensionData) -> Option<bool> {
    if ext.roots_of_unity == 1 {
        return Some(true);
    }
    if ext.roots_of_unity != 2 {
        return None;
    }
    // -1 ≡ 1 modulo 𝔮 exactly when 𝔮 lies over 2
    let mut any_odd = false;
    for q in &ext.t_places {
        match q.residue_characteristic_is_odd() {
            Some(true) => any_odd = true,
            Some(false) => {}
            None => return None,
        }
    }
    Some(any_odd)
}

pub fn check_hypotheses(ext: &ExtensionData, r: usize) -> HypothesisReport {
    let mut items = Vec::new();
    let stray: Vec<&str> = ext
        .s_prime
        .iter()
        .chain(&ext.t_places)
        .filter(|p| !p.inertia.is_trivial())
        .map(|p| p.label.as_str())
        .collect();
    items.push(HypothesisItem {
        id: 1,
        passed: stray.is_empty(),
        detail: if stray.is_empty() {
            "S contains the infinite and all ramified places".into()
        } else {
            format!("ramified places outside S: {}", stray.join(","))
        },
    });
    items.push(HypothesisItem {
        id: 2,
        passed: ext.r >= r,
        detail: format!("{} infinite places split completely (K totally real), need {r}", ext.r),
    });
    items.push(HypothesisItem {
        id: 3,
        passed: ext.s_size() > r,
        detail: format!("|S| = {}, need at least {}", ext.s_size(), r + 1),
    });
    let s_labels: BTreeSet<&str> = ext.finite_s_places().map(|p| p.label.as_str()).collect();
    let overlap: Vec<&str> = ext.t_places.iter().map(|p| p.label.as_str()).filter(|l| s_labels.contains(l)).collect();
    let (ok4, detail4) = if ext.t_places.is_empty() {
        (false, "T is empty".to_string())
    } else if !overlap.is_empty() {
        (false, format!("S and T share {}", overlap.join(",")))
    } else {
        match torsion_free(ext) {
            Some(true) => (true, "T nonempty, disjoint from S, U_{S,T} torsion-free".to_string()),
            Some(false) => (false, "U_{S,T} has torsion: -1 is congruent to 1 modulo every place of T".to_string()),
            None => (false, "torsion-freeness undecidable from the given data".to_string()),
        }
    };
    items.push(HypothesisItem { id: 4, passed: ok4, detail: detail4 });
    HypothesisReport { items }
}

/// `T_𝔞(K)`: the subgroup generated by the inertia groups of the primes in 𝔞.
pub fn inertia_span(a: &CycleDivisor, ext: &ExtensionData) -> Subgroup {
    let mut gens = Vec::new();
    for &i in &a.0 {
        gens.extend(ext.ramified[i].inertia.generators().iter().cloned());
    }
    Subgroup::generated_by(&ext.group, &gens).unwrap()
}

/// A quotient field of K together with the map from G.
#[derive(Debug, Clone)]
pub struct SubExtension {
    pub ext: ExtensionData,
    pub quotient: Quotient,
}

fn check_divisor(g: &CycleDivisor, ext: &ExtensionData) -> Result<()> {
    if g.0.iter().any(|&i| i >= ext.ramified.len()) {
        return Err(Error::NotADivisor(format!("{:?}", g.0)));
    }
    Ok(())
}

fn push_places(places: &[PlaceData], q: &Quotient, ramified: &mut Vec<PlaceData>, unramified: &mut Vec<PlaceData>) {
    for p in places {
        let pushed = p.push(q);
        if pushed.inertia.is_trivial() {
            unramified.push(pushed);
        } else {
            ramified.push(pushed);
        }
    }
}

/// `K_𝔤 = K^{T_{𝔣̂/𝔤}}` with `S_𝔤 = S_∞ ∪ {𝔮 ∣ 𝔤} ∪ S'`. Primes dividing 𝔤 that
/// become unramified in `K_𝔤` are kept in S as extra unramified places.
pub fn subfield_k_g(g: &CycleDivisor, ext: &ExtensionData) -> Result<SubExtension> {
    check_divisor(g, ext)?;
    let h = inertia_span(&g.complement(ext.ramified.len()), ext);
    let q = quotient_and_projection(&ext.group, &h)?;
    let mut ramified = Vec::new();
    let mut s_prime = Vec::new();
    let dividing: Vec<PlaceData> = g.0.iter().map(|&i| ext.ramified[i].clone()).collect();
    push_places(&dividing, &q, &mut ramified, &mut s_prime);
    s_prime.extend(ext.s_prime.iter().map(|p| p.push(&q)));
    let t_places = ext.t_places.iter().map(|p| p.push(&q)).collect();
    let sub = ExtensionData { group: q.target.clone(), r: ext.r, ramified, s_prime, t_places, roots_of_unity: ext.roots_of_unity };
    sub.validate()?;
    Ok(SubExtension { ext: sub, quotient: q })
}

/// `K_I = K^{D_I}` with the same set S.
pub fn subfield_k_i(indices: &BTreeSet<usize>, ext: &ExtensionData) -> Result<SubExtension> {
    if indices.is_empty() {
        return Err(Error::InvalidInput("I must be nonempty".into()));
    }
    let mut d = Subgroup::trivial(&ext.group);
    for &i in indices {
        let p = ext.ramified.get(i).ok_or_else(|| Error::NotADivisor(format!("{i}")))?;
        d = d.join(&p.decomposition);
    }
    subfield_fixed_by(&d, ext)
}

/// The fixed field of `h`, keeping the same set S.
pub fn subfield_fixed_by(h: &Subgroup, ext: &ExtensionData) -> Result<SubExtension> {
    let q = quotient_and_projection(&ext.group, h)?;
    let mut ramified = Vec::new();
    let mut s_prime = Vec::new();
    push_places(&ext.ramified, &q, &mut ramified, &mut s_prime);
    s_prime.extend(ext.s_prime.iter().map(|p| p.push(&q)));
    let t_places = ext.t_places.iter().map(|p| p.push(&q)).collect();
    let sub = ExtensionData { group: q.target.clone(), r: ext.r, ramified, s_prime, t_places, roots_of_unity: ext.roots_of_unity };
    sub.validate()?;
    Ok(SubExtension { ext: sub, quotient: q })
}

/// Generators `α(𝔯,𝔰) = s(T_𝔯)^r Π_{𝔭∣𝔰/𝔯} (1 − σ_𝔭^{-1} e_{I_𝔭})` for 𝔯 ∣ 𝔰.
pub fn sinnott_generators(ext: &ExtensionData, r: usize, s: &CycleDivisor) -> Result<Vec<QElem>> {
    check_divisor(s, ext)?;
    let g = &ext.group;
    if s.0.is_empty() {
        return Ok(vec![QElem::rational_one(g)]);
    }
    let elems: Vec<usize> = s.0.iter().copied().collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << elems.len() {
        let rho = CycleDivisor((0..elems.len()).filter(|i| mask >> i & 1 == 1).map(|i| elems[i]).collect());
        let mut alpha = norm_element(&inertia_span(&rho, ext)).pow(r as u32);
        for &i in &elems {
            if !rho.contains(i) {
                let p = &ext.ramified[i];
                alpha = alpha.mul(&euler_factor(&p.frobenius, &p.inertia));
            }
        }
        out.push(alpha);
    }
    Ok(out)
}

/// `U^{(r)}_𝔰 ⊂ ℚ[G]`.
pub fn sinnott_module(ext: &ExtensionData, r: usize, s: &CycleDivisor) -> Result<GModuleLattice> {
    let g = &ext.group;
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    for alpha in sinnott_generators(ext, r, s)? {
        for x in g.elements() {
            gens.push(alpha.mul(&QElem::sigma(g, &x)).vector());
        }
    }
    GModuleLattice::in_group_ring(g, RationalLattice::from_generators(g.order(), &gens))
}
