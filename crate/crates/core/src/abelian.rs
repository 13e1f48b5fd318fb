//! Finite abelian groups in invariant-factor form, subgroups, quotients and
//! exact characters.

use crate::error::{Error, Result};
use crate::linalg::{self, ZMatrix};
use rug::Integer;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

pub type Elem = Vec<u64>;

const MAX_ORDER: u64 = 1_000_000;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    /// Factors equal to 1 are dropped; the rest must form a divisibility chain.
    pub fn new(factors: &[u64]) -> Result<Self> {
        let factors: Vec<u64> = factors.iter().copied().filter(|&d| d != 1).collect();
        if factors.contains(&0) {
            return Err(Error::InvalidInput("invariant factor 0 gives an infinite group".into()));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidInput(format!("{factors:?} is not a divisibility chain")));
        }
        let order = factors.iter().try_fold(1u64, |a, &d| a.checked_mul(d));
        match order {
            Some(o) if o <= MAX_ORDER => Ok(Self { factors }),
            _ => Err(Error::InvalidInput("group order exceeds 10^6".into())),
        }
    }

    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    /// The group `ℤ^n / rowspace(relations)` together with the images of the
    /// standard generators.
    pub fn from_relations(n: usize, relations: &[Vec<Integer>]) -> Result<(Self, Vec<Elem>)> {
        let reduced = linalg::hnf(relations);
        if reduced.len() < n {
            return Err(Error::InvalidInput("relations do not define a finite group".into()));
        }
        let s = linalg::snf(&reduced, n);
        let keep: Vec<usize> = (0..n).filter(|&i| s.diag[i] != 1).collect();
        let factors: Vec<u64> = keep.iter().map(|&i| s.diag[i].to_u64().unwrap()).collect();
        let g = Self::new(&factors)?;
        let images = (0..n)
            .map(|row| {
                keep.iter()
                    .zip(&factors)
                    .map(|(&i, &d)| {
                        let x = s.v[row][i].clone() % d;
                        let x = if x < 0 { x + d } else { x };
                        x.to_u64().unwrap()
                    })
                    .collect()
            })
            .collect();
        Ok((g, images))
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product::<u64>() as usize
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn identity(&self) -> Elem {
        vec![0; self.factors.len()]
    }

    pub fn generator(&self, i: usize) -> Elem {
        let mut e = self.identity();
        e[i] = 1;
        e
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Elem {
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> Elem {
        a.iter().zip(&self.factors).map(|(x, d)| (d - x) % d).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul_int(&self, a: &[u64], k: i64) -> Elem {
        a.iter()
            .zip(&self.factors)
            .map(|(x, &d)| ((*x as i128 * k as i128).rem_euclid(d as i128)) as u64)
            .collect()
    }

    /// Reduce an arbitrary integer vector into canonical coordinates.
    pub fn reduce(&self, v: &[i64]) -> Elem {
        v.iter()
            .zip(&self.factors)
            .map(|(x, &d)| x.rem_euclid(d as i64) as u64)
            .collect()
    }

    /// Mixed radix index; the identity has index 0.
    pub fn index_of(&self, a: &[u64]) -> usize {
        let mut idx = 0usize;
        for (x, d) in a.iter().zip(&self.factors) {
            idx = idx * *d as usize + *x as usize;
        }
        idx
    }

    pub fn element(&self, mut idx: usize) -> Elem {
        let mut e = vec![0; self.factors.len()];
        for (i, d) in self.factors.iter().enumerate().rev() {
            e[i] = (idx % *d as usize) as u64;
            idx /= *d as usize;
        }
        e
    }

    pub fn elements(&self) -> Vec<Elem> {
        (0..self.order()).map(|i| self.element(i)).collect()
    }

    pub fn element_order(&self, a: &[u64]) -> u64 {
        a.iter()
            .zip(&self.factors)
            .fold(1, |acc, (x, d)| lcm(acc, d / gcd(*x, *d)))
    }

    pub fn is_valid(&self, a: &[u64]) -> bool {
        a.len() == self.factors.len() && a.iter().zip(&self.factors).all(|(x, d)| x < d)
    }

    /// Table `t[i][j] = index(element i + element j)`.
    pub fn addition_table(&self) -> Vec<Vec<usize>> {
        let els = self.elements();
        els.iter()
            .map(|a| els.iter().map(|b| self.index_of(&self.add(a, b))).collect())
            .collect()
    }

    pub fn inverse_indices(&self) -> Vec<usize> {
        self.elements()
            .iter()
            .map(|a| self.index_of(&self.neg(a)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    generators: Vec<Elem>,
    member: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, o: &Self) -> bool {
        self.parent == o.parent && self.member == o.member
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    pub fn generated_by(parent: &FiniteAbelianGroup, generators: &[Elem]) -> Result<Self> {
        for g in generators {
            if !parent.is_valid(g) {
                return Err(Error::InvalidInput(format!("{g:?} is not an element of {:?}", parent.factors())));
            }
        }
        let mut member = vec![false; parent.order()];
        member[0] = true;
        let mut queue = VecDeque::from([parent.identity()]);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = parent.add(&x, g);
                let i = parent.index_of(&y);
                if !member[i] {
                    member[i] = true;
                    queue.push_back(y);
                }
            }
        }
        Ok(Self {
            parent: parent.clone(),
            generators: generators.to_vec(),
            member,
        })
    }

    /// Accepts an explicit element list only if it is closed under composition.
    pub fn from_elements(parent: &FiniteAbelianGroup, elements: &[Elem]) -> Result<Self> {
        let h = Self::generated_by(parent, elements)?;
        let mut listed = vec![false; parent.order()];
        for e in elements {
            listed[parent.index_of(e)] = true;
        }
        if listed[0] && listed == h.member {
            Ok(h)
        } else {
            Err(Error::NotASubgroup(format!("{elements:?} is not closed under composition")))
        }
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self::generated_by(parent, &[]).unwrap()
    }

    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        let gens: Vec<Elem> = (0..parent.rank()).map(|i| parent.generator(i)).collect();
        Self::generated_by(parent, &gens).unwrap()
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn contains(&self, a: &[u64]) -> bool {
        self.member[self.parent.index_of(a)]
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.member[i]
    }

    pub fn order(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn elements(&self) -> Vec<Elem> {
        (0..self.parent.order())
            .filter(|&i| self.member[i])
            .map(|i| self.parent.element(i))
            .collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.parent.order()).filter(|&i| self.member[i]).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn join(&self, other: &Subgroup) -> Subgroup {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Subgroup::generated_by(&self.parent, &gens).unwrap()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.member.iter().zip(&other.member).all(|(a, b)| !*a || *b)
    }
}

/// `G → G/H` with invariant-factor target and coset representatives.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub source: FiniteAbelianGroup,
    pub target: FiniteAbelianGroup,
    /// Images of the source's standard generators.
    pub generator_images: Vec<Elem>,
    /// `coset_reps[index in Δ]`; the first is the identity.
    pub coset_reps: Vec<Elem>,
    pub kernel: Subgroup,
}

impl Quotient {
    pub fn project(&self, a: &[u64]) -> Elem {
        let mut out = self.target.identity();
        for (x, img) in a.iter().zip(&self.generator_images) {
            out = self.target.add(&out, &self.target.mul_int(img, *x as i64));
        }
        out
    }

    pub fn project_subgroup(&self, h: &Subgroup) -> Subgroup {
        let gens: Vec<Elem> = h.generators().iter().map(|g| self.project(g)).collect();
        Subgroup::generated_by(&self.target, &gens).unwrap()
    }

    pub fn compose(&self, next: &Quotient) -> Result<Quotient> {
        let kernel_gens: Vec<Elem> = self
            .source
            .elements()
            .into_iter()
            .filter(|g| next.project(&self.project(g)) == next.target.identity())
            .collect();
        let k = Subgroup::generated_by(&self.source, &kernel_gens)?;
        quotient_and_projection(&self.source, &k)
    }
}

pub fn quotient_and_projection(g: &FiniteAbelianGroup, h: &Subgroup) -> Result<Quotient> {
    if h.parent() != g {
        return Err(Error::NotASubgroup("subgroup belongs to a different group".into()));
    }
    let n = g.rank();
    let mut rels: ZMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Integer::from(if i == j { g.factors()[i] } else { 0 }))
                .collect()
        })
        .collect();
    for x in h.generators() {
        rels.push(x.iter().map(|&v| Integer::from(v)).collect());
    }
    let (target, generator_images) = if n == 0 {
        (FiniteAbelianGroup::trivial(), Vec::new())
    } else {
        FiniteAbelianGroup::from_relations(n, &rels)?
    };
    let mut q = Quotient {
        source: g.clone(),
        target: target.clone(),
        generator_images,
        coset_reps: Vec::new(),
        kernel: h.clone(),
    };
    let mut reps: Vec<Option<Elem>> = vec![None; target.order()];
    for x in g.elements() {
        let i = target.index_of(&q.project(&x));
        if reps[i].is_none() {
            reps[i] = Some(x);
        }
    }
    q.coset_reps = reps.into_iter().map(|r| r.expect("projection is surjective")).collect();
    Ok(q)
}

/// An exact character `g ↦ ζ_m^{Σ aᵢ gᵢ (m/dᵢ)}` with `m = exp(G)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    group: FiniteAbelianGroup,
    exps: Vec<u64>,
}

impl Character {
    pub fn new(group: &FiniteAbelianGroup, exps: Vec<u64>) -> Result<Self> {
        if !group.is_valid(&exps) {
            return Err(Error::InvalidInput(format!("bad character exponents {exps:?}")));
        }
        Ok(Self { group: group.clone(), exps })
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self { group: group.clone(), exps: group.identity() }
    }

    /// Build from the values on the standard generators, each given as a
    /// fraction `num/den` of a full turn.
    pub fn from_generator_values(group: &FiniteAbelianGroup, turns: &[(u64, u64)]) -> Result<Self> {
        let exps = turns
            .iter()
            .zip(group.factors())
            .map(|(&(num, den), &d)| {
                if (num * d) % den != 0 {
                    Err(Error::InvalidInput("value is not a d-th root of unity".into()))
                } else {
                    Ok((num * d / den) % d)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, exps)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&a| a == 0)
    }

    /// Power `j` with `χ(g) = ζ_m^j`, `m = exp(G)`.
    pub fn value_power(&self, g: &[u64]) -> u64 {
        let m = self.group.exponent();
        let mut j = 0u64;
        for ((a, x), d) in self.exps.iter().zip(g).zip(self.group.factors()) {
            j = (j + (a * x % d) * (m / d)) % m;
        }
        j
    }

    /// `χ(g)` as a reduced fraction of a full turn.
    pub fn value_turns(&self, g: &[u64]) -> (u64, u64) {
        let m = self.group.exponent();
        let j = self.value_power(g);
        let c = gcd(j, m);
        (j / c, m / c)
    }

    pub fn order(&self) -> u64 {
        self.group.element_order(&self.exps)
    }

    pub fn pow(&self, k: i64) -> Character {
        Character { group: self.group.clone(), exps: self.group.mul_int(&self.exps, k) }
    }

    pub fn inverse(&self) -> Character {
        self.pow(-1)
    }

    pub fn mul(&self, o: &Character) -> Character {
        Character { group: self.group.clone(), exps: self.group.add(&self.exps, &o.exps) }
    }

    pub fn is_trivial_on(&self, h: &Subgroup) -> bool {
        h.generators().iter().all(|g| self.value_power(g) == 0)
    }

    /// Index in the enumeration order of `enumerate_characters`.
    pub fn index(&self) -> usize {
        self.group.index_of(&self.exps)
    }

    /// The character of `q.target` whose inflation is `self`, if `self` is trivial on the kernel.
    pub fn descend(&self, q: &Quotient) -> Option<Character> {
        if !self.is_trivial_on(&q.kernel) {
            return None;
        }
        let delta = &q.target;
        let turns: Vec<(u64, u64)> = (0..delta.rank())
            .map(|i| self.value_turns(&q.coset_reps[delta.index_of(&delta.generator(i))]))
            .collect();
        Character::from_generator_values(delta, &turns).ok()
    }

    /// Inflation of a character of `q.target` to `q.source`.
    pub fn inflate(psi: &Character, q: &Quotient) -> Character {
        let g = &q.source;
        let turns: Vec<(u64, u64)> = (0..g.rank())
            .map(|i| psi.value_turns(&q.project(&g.generator(i))))
            .collect();
        Character::from_generator_values(g, &turns).expect("inflation is well defined")
    }
}

pub fn enumerate_characters(g: &FiniteAbelianGroup) -> Vec<Character> {
    g.elements()
        .into_iter()
        .map(|exps| Character { group: g.clone(), exps })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RationalCharacterOrbit {
    pub representative: Character,
    pub members: Vec<Character>,
}

pub fn rational_orbits(g: &FiniteAbelianGroup) -> Vec<RationalCharacterOrbit> {
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for chi in enumerate_characters(g) {
        if seen[chi.index()] {
            continue;
        }
        let ord = chi.order();
        let members: Vec<Character> = (1..=ord)
            .filter(|&k| gcd(k, ord) == 1)
            .map(|k| chi.pow(k as i64))
            .collect();
        for m in &members {
            seen[m.index()] = true;
        }
        out.push(RationalCharacterOrbit { representative: chi, members });
    }
    out
}

/// Structure of the subgroup generated by concrete elements of some finite
/// abelian group: the abstract group, the coordinates of every reachable
/// element, and a generating set of the relation lattice among the generators.
pub struct Presentation<K> {
    pub group: FiniteAbelianGroup,
    pub generator_images: Vec<Elem>,
    pub words: HashMap<K, Vec<i64>>,
    pub relations: ZMatrix,
}

pub fn presentation<K, F>(identity: K, generators: &[K], mul: F) -> Result<Presentation<K>>
where
    K: Clone + Eq + Hash,
    F: Fn(&K, &K) -> K,
{
    let n = generators.len();
    let mut words: HashMap<K, Vec<i64>> = HashMap::new();
    words.insert(identity.clone(), vec![0; n]);
    let mut queue = VecDeque::from([identity]);
    let mut relations: ZMatrix = Vec::new();
    while let Some(x) = queue.pop_front() {
        let wx = words[&x].clone();
        for (j, g) in generators.iter().enumerate() {
            let y = mul(&x, g);
            let mut candidate = wx.clone();
            candidate[j] += 1;
            match words.get(&y) {
                Some(wy) => {
                    if *wy != candidate {
                        relations.push(candidate.iter().zip(wy).map(|(a, b)| Integer::from(a - b)).collect());
                    }
                }
                None => {
                    if words.len() as u64 >= MAX_ORDER {
                        return Err(Error::InvalidInput("group too large to enumerate".into()));
                    }
                    words.insert(y.clone(), candidate);
                    queue.push_back(y);
                }
            }
        }
    }
    let relations = linalg::hnf(&relations);
    let (group, generator_images) = if n == 0 {
        (FiniteAbelianGroup::trivial(), Vec::new())
    } else {
        FiniteAbelianGroup::from_relations(n, &relations)?
    };
    Ok(Presentation { group, generator_images, words, relations })
}

impl<K: Clone + Eq + Hash> Presentation<K> {
    pub fn coordinates(&self, x: &K) -> Option<Elem> {
        let w = self.words.get(x)?;
        let mut out = self.group.identity();
        for (k, img) in w.iter().zip(&self.generator_images) {
            out = self.group.add(&out, &self.group.mul_int(img, *k));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn character_counts() {
        let c2 = FiniteAbelianGroup::new(&[2]).unwrap();
        let chars = enumerate_characters(&c2);
        assert_eq!(chars.len(), 2);
        assert!(chars[0].is_trivial());
        assert_eq!(chars[1].value_turns(&[1]), (1, 2));

        let v4 = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        assert!(enumerate_characters(&v4).iter().all(|c| c.order() <= 2));

        let c6 = FiniteAbelianGroup::new(&[6]).unwrap();
        let mut orders: Vec<u64> = enumerate_characters(&c6).iter().map(|c| c.order()).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 3, 3, 6, 6]);
    }

    #[test]
    fn quotients() {
        let c4 = FiniteAbelianGroup::new(&[4]).unwrap();
        let h = Subgroup::generated_by(&c4, &[vec![2]]).unwrap();
        let q = quotient_and_projection(&c4, &h).unwrap();
        assert_eq!(q.target.factors(), &[2]);
        assert_eq!(q.coset_reps, vec![vec![0], vec![1]]);

        let whole = Subgroup::whole(&c4);
        let q = quotient_and_projection(&c4, &whole).unwrap();
        assert_eq!(q.target.order(), 1);
        assert_eq!(q.coset_reps, vec![vec![0]]);

        let v4 = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        let h = Subgroup::generated_by(&v4, &[vec![1, 0]]).unwrap();
        let q = quotient_and_projection(&v4, &h).unwrap();
        assert_eq!(q.target.factors(), &[2]);
        assert_ne!(q.project(&[0, 1]), q.target.identity());
        assert_eq!(q.project(&[1, 0]), q.target.identity());
    }

    #[test]
    fn not_a_subgroup() {
        let c4 = FiniteAbelianGroup::new(&[4]).unwrap();
        assert!(matches!(
            Subgroup::from_elements(&c4, &[vec![0], vec![1]]),
            Err(Error::NotASubgroup(_))
        ));
        assert!(Subgroup::from_elements(&c4, &[vec![0], vec![2]]).is_ok());
    }

    #[test]
    fn orbit_sizes() {
        let sizes = |n: u64| {
            let mut s: Vec<usize> = rational_orbits(&FiniteAbelianGroup::new(&[n]).unwrap())
                .iter()
                .map(|o| o.members.len())
                .collect();
            s.sort();
            s
        };
        assert_eq!(sizes(2), vec![1, 1]);
        assert_eq!(sizes(3), vec![1, 2]);
        assert_eq!(sizes(5), vec![1, 4]);
    }

    #[test]
    fn presentation_of_units_mod_15() {
        let gens = [2u64, 11];
        let p = presentation(1u64, &gens, |a, b| a * b % 15).unwrap();
        assert_eq!(p.group.factors(), &[2, 4]);
        assert_eq!(p.words.len(), 8);
    }

    #[test]
    fn descend_and_inflate() {
        let g = FiniteAbelianGroup::new(&[2, 4]).unwrap();
        let h = Subgroup::generated_by(&g, &[vec![1, 2]]).unwrap();
        let q = quotient_and_projection(&g, &h).unwrap();
        let trivial_on_h: Vec<Character> =
            enumerate_characters(&g).into_iter().filter(|c| c.is_trivial_on(&h)).collect();
        assert_eq!(trivial_on_h.len(), q.target.order());
        for chi in trivial_on_h {
            let psi = chi.descend(&q).unwrap();
            assert_eq!(Character::inflate(&psi, &q), chi);
        }
    }
}
