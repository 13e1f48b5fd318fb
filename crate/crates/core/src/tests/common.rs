#![allow(dead_code)]
//! Shared constructions and brute-force oracles for the tests.

use rand::Rng;
use rug::ops::Pow;
use rug::{Integer, Rational};
use stark_index::abelian::{FiniteAbelianGroup, Subgroup};
use stark_index::group_ring::{norm_element, QElem};
use stark_index::lattice::{GModuleLattice, RationalLattice};
use stark_index::linalg;
use std::collections::HashSet;

pub fn data(name: &str) -> String {
    format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

/// Invariant factor lists `d₁ | … | d_k` of every abelian group of order `n`.
pub fn groups_of_order(n: u64) -> Vec<Vec<u64>> {
    fn rec(rest: u64, last: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 1 {
            out.push(acc.clone());
            return;
        }
        for d in 2..=rest {
            if rest.is_multiple_of(d) && d % last == 0 {
                acc.push(d);
                rec(rest / d, d, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut out);
    out
}

pub fn groups_up_to(max: u64) -> Vec<FiniteAbelianGroup> {
    let mut out = vec![FiniteAbelianGroup::trivial()];
    for n in 2..=max {
        for f in groups_of_order(n) {
            out.push(FiniteAbelianGroup::new(&f).unwrap());
        }
    }
    out
}

pub fn small_groups() -> Vec<FiniteAbelianGroup> {
    [vec![], vec![2], vec![3], vec![4], vec![2, 2]]
        .iter()
        .map(|f| if f.is_empty() { FiniteAbelianGroup::trivial() } else { FiniteAbelianGroup::new(f).unwrap() })
        .collect()
}

pub fn q(n: i64) -> Rational {
    Rational::from(n)
}

/// `g·x` for `x ∈ ℚ[G]^b` stored blockwise.
pub fn act(g: &FiniteAbelianGroup, x: &QElem, v: &[Rational]) -> Vec<Rational> {
    let n = g.order();
    v.chunks(n).flat_map(|block| x.mul(&QElem::from_vector(g, block.to_vec())).vector()).collect()
}

/// A random G-stable lattice in `ℚ[G]^b`: the ℤ-span of the G-orbits of a
/// few random integer vectors.
pub fn random_g_lattice(rng: &mut impl Rng, g: &FiniteAbelianGroup, b: usize, ngens: usize, bound: i64) -> GModuleLattice {
    let dim = g.order() * b;
    let mut gens = Vec::new();
    for _ in 0..ngens {
        let v: Vec<Rational> = (0..dim).map(|_| q(rng.gen_range(-bound..=bound))).collect();
        for x in g.elements() {
            gens.push(act(g, &QElem::sigma(g, &x), &v));
        }
    }
    GModuleLattice::in_group_ring_blocks(g, b, RationalLattice::from_generators(dim, &gens)).unwrap()
}

/// As `random_g_lattice`, retried until it spans `ℚ[G]^b`.
pub fn random_full_g_lattice(rng: &mut impl Rng, g: &FiniteAbelianGroup, b: usize, bound: i64) -> GModuleLattice {
    loop {
        let m = random_g_lattice(rng, g, b, b + 1, bound);
        if m.rank() == g.order() * b {
            return m;
        }
    }
}

/// A random full-rank lattice of `ℚ^n` with small entries and denominators.
pub fn random_lattice(rng: &mut impl Rng, n: usize) -> RationalLattice {
    loop {
        let gens: Vec<Vec<Rational>> = (0..n)
            .map(|_| (0..n).map(|_| Rational::from((rng.gen_range(-6i64..=6), rng.gen_range(1u32..=3)))).collect())
            .collect();
        let l = RationalLattice::from_generators(n, &gens);
        if l.rank() == n {
            return l;
        }
    }
}

/// Brute-force `|Ĥ⁰(H, M)|` for `M ⊂ ℚ[G]^b`: with `Λ = |H|·M^H ⊂ N_H M`,
/// `(M^H : N_H M) = |H|^{rk M^H} / |N_H M / Λ|`, and the classes of
/// `N_H M / Λ` are enumerated as images of `M / |H|M`.
pub fn tate_h0_brute_force(h: &Subgroup, m: &GModuleLattice) -> Integer {
    let g = h.parent().clone();
    let order = h.order() as i64;
    let norm = norm_element(h);
    let fixed = m.fixed_sublattice(h);
    let basis = m.lattice.basis().clone();
    let s = basis.len();
    let mut classes = HashSet::new();
    let total = (order as u64).pow(s as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = vec![q(0); m.dim()];
        for b in &basis {
            let c = (rest % order as u64) as i64;
            rest /= order as u64;
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += Rational::from(bi * c);
            }
        }
        let y = act(&g, &norm, &x);
        let coords = fixed.coordinates(&[y]).expect("norms are fixed");
        let key: Vec<Integer> = coords[0]
            .iter()
            .map(|c| {
                assert!(c.is_integer());
                c.numer().clone().modulo(&Integer::from(order))
            })
            .collect();
        classes.insert(key);
    }
    let num = Integer::from(order).pow(fixed.rank() as u32);
    let den = Integer::from(classes.len());
    assert!(num.is_divisible(&den));
    num / den
}

/// Integer ℤ-basis of `Hom_G(M, ℤ[G])` for `M` spanning `ℚ[G]^b`, as vectors
/// `a ∈ ℚ[G]^b` acting by `m ↦ Σ a_i m_i`: the dual of the lattice of
/// coefficient functionals.
pub fn hom_basis(m: &GModuleLattice) -> Vec<Vec<QElem>> {
    let g = m.group.clone();
    let n = g.order();
    let b = m.dim() / n;
    // coefficient of γ in Σ_i a_i m_i is Σ_{i,h} a_i(h) m_i(h^{-1}γ)
    let mut funcs = Vec::new();
    for mv in m.lattice.basis() {
        for gamma in g.elements() {
            let mut f = vec![q(0); n * b];
            for i in 0..b {
                for hh in g.elements() {
                    let src = g.sub(&gamma, &hh);
                    f[i * n + g.index_of(&hh)] = mv[i * n + g.index_of(&src)].clone();
                }
            }
            funcs.push(f);
        }
    }
    let l = RationalLattice::from_generators(n * b, &funcs);
    assert_eq!(l.rank(), n * b, "module must span ℚ[G]^b");
    let inv = linalg::inverse_q(l.basis()).unwrap();
    // dual basis: columns of B^{-1}
    (0..n * b)
        .map(|c| {
            let col: Vec<Rational> = (0..n * b).map(|r| inv[r][c].clone()).collect();
            col.chunks(n).map(|blk| QElem::from_vector(&g, blk.to_vec())).collect()
        })
        .collect()
}

fn qelem_det(g: &FiniteAbelianGroup, m: &[Vec<QElem>]) -> QElem {
    let r = m.len();
    if r == 1 {
        return m[0][0].clone();
    }
    let mut acc = QElem::rational_zero(g);
    for col in 0..r {
        let minor: Vec<Vec<QElem>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, x)| x.clone()).collect()).collect();
        let term = m[0][col].mul(&qelem_det(g, &minor));
        acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if n < r {
        return vec![];
    }
    let mut out = subsets(n - 1, r);
    for mut s in subsets(n - 1, r - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Brute-force `(⋂^r M : ⋀̃^r M)`: evaluate every basis wedge of M against
/// every wedge of a Hom basis, and take the gcd of the maximal minors of the
/// resulting integer matrix, which is the index of its row lattice in its
/// saturation.
pub fn rubin_index_brute_force(m: &GModuleLattice, r: usize) -> Option<Integer> {
    let g = m.group.clone();
    let n = g.order();
    let b = m.dim() / n;
    let homs = hom_basis(m);
    let elems: Vec<Vec<QElem>> =
        m.lattice.basis().iter().map(|v| v.chunks(n).map(|blk| QElem::from_vector(&g, blk.to_vec())).collect()).collect();
    let apply = |a: &[QElem], x: &[QElem]| -> QElem {
        (0..b).fold(QElem::rational_zero(&g), |acc, i| acc.add(&a[i].mul(&x[i])))
    };
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for j in subsets(elems.len(), r) {
        let mut row = Vec::new();
        for i in subsets(homs.len(), r) {
            let mat: Vec<Vec<QElem>> = i.iter().map(|&ia| j.iter().map(|&jb| apply(&homs[ia], &elems[jb])).collect()).collect();
            row.extend(qelem_det(&g, &mat).vector());
        }
        rows.push(row);
    }
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    assert!(rows.iter().flatten().all(|x| x.is_integer()), "wedges of M pair integrally with Hom wedges");
    let l = RationalLattice::from_generators(ncols, &rows);
    let k = l.rank();
    if k == 0 {
        return None;
    }
    let basis: Vec<Vec<Integer>> = l.basis().iter().map(|r| r.iter().map(|x| x.numer().clone()).collect()).collect();
    let mut gcd = Integer::new();
    for cols in subsets(ncols, k) {
        let minor: Vec<Vec<Integer>> = basis.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        gcd = gcd.gcd(&linalg::det_z(&minor));
        if gcd == 1 {
            break;
        }
    }
    Some(gcd)
}
