//! Definitional identities run by `stark-index selftest`: small cases whose
//! answer follows by unfolding a definition.

use crate::abelian::{enumerate_characters, quotient_and_projection, rational_orbits, FiniteAbelianGroup, Subgroup};
use crate::arithmetic::{check_hypotheses, order_of_vanishing, CycleDivisor, ExtensionData, PlaceData};
use crate::group_ring::{delta_t, inertia_idempotent, norm_element, orbit_idempotent, QElem};
use crate::lattice::{
    rubin_lattice, rubin_vs_wedge_index, semisimplify, sinnott_index, tate_h0, wedge_image, GModuleLattice, IndexMode,
    RationalLattice,
};
use crate::linalg;
use crate::lvalues::zeta_star_from_class_number;
use crate::numeric::PrecisionContext;
use crate::verify::Check;
use rug::{Integer, Rational};

fn q(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}

fn qv(g: &FiniteAbelianGroup, v: &[(i64, i64)]) -> QElem {
    QElem::from_vector(g, v.iter().map(|&(a, b)| q(a, b)).collect())
}

fn place(label: &str, norm: u64, inertia: Subgroup, decomposition: Subgroup, frobenius: Vec<u64>) -> PlaceData {
    PlaceData { label: label.into(), norm: Some(Integer::from(norm)), inertia, decomposition, frobenius }
}

/// ℚ(√5) with S = {∞, 5, s'} and T = {3}; `split` makes s' split.
fn sqrt5(t: bool, split: bool) -> ExtensionData {
    let g = FiniteAbelianGroup::new(&[2]).unwrap();
    let whole = Subgroup::whole(&g);
    let one = Subgroup::trivial(&g);
    let s_prime = if split {
        place("11", 11, one.clone(), one.clone(), vec![0])
    } else {
        place("7", 7, one.clone(), whole.clone(), vec![1])
    };
    ExtensionData {
        group: g.clone(),
        r: 1,
        ramified: vec![place("5", 5, whole.clone(), whole.clone(), vec![0])],
        s_prime: vec![s_prime],
        t_places: if t { vec![place("3", 3, one, whole, vec![1])] } else { vec![] },
        roots_of_unity: 2,
    }
}

fn trivial_action(g: &FiniteAbelianGroup, l: RationalLattice) -> GModuleLattice {
    let dim = l.dim();
    GModuleLattice::new(l, g, vec![linalg::identity_q(dim); g.rank()]).expect("trivial action")
}

/// Runs every definitional identity and reports one check per identity.
pub fn selftest() -> Vec<Check> {
    let mut out = Vec::new();
    let mut check = |id: &str, statement: &str, passed: bool| out.push(Check::flag(id, statement, passed));
    let c2 = FiniteAbelianGroup::new(&[2]).unwrap();
    let c3 = FiniteAbelianGroup::new(&[3]).unwrap();
    let c4 = FiniteAbelianGroup::new(&[4]).unwrap();
    let v4 = FiniteAbelianGroup::new(&[2, 2]).unwrap();
    let triv = FiniteAbelianGroup::trivial();

    let chars = enumerate_characters(&c2);
    check(
        "dual_c2",
        "Ĉ₂ = {χ₀, χ₁} with χ₁(σ) = −1",
        chars.len() == 2 && chars[0].is_trivial() && chars[1].value_turns(&[1]) == (1, 2),
    );
    let chars = enumerate_characters(&v4);
    check("dual_v4", "C₂×C₂ has four characters, all real", chars.len() == 4 && chars.iter().all(|c| c.order() <= 2));

    let h = Subgroup::generated_by(&c4, &[vec![2]]).unwrap();
    let quo = quotient_and_projection(&c4, &h).unwrap();
    check(
        "quotient_c4",
        "C₄/⟨σ²⟩ = C₂ with coset representatives {1, σ}",
        quo.target.order() == 2 && quo.coset_reps == vec![vec![0], vec![1]],
    );
    let quo = quotient_and_projection(&c4, &Subgroup::whole(&c4)).unwrap();
    check("quotient_full", "G/G is trivial with the single representative 1", quo.target.order() == 1 && quo.coset_reps.len() == 1);

    let orbits = rational_orbits(&c2);
    check("orbits_c2", "C₂ has two singleton rational orbits", orbits.len() == 2 && orbits.iter().all(|o| o.members.len() == 1));
    let mut sizes: Vec<usize> = rational_orbits(&c3).iter().map(|o| o.members.len()).collect();
    sizes.sort();
    check("orbits_c3", "C₃ has the orbits {1} and {χ, χ²}", sizes == vec![1, 2]);

    let orbits = rational_orbits(&c2);
    let e0 = orbit_idempotent(&orbits[0]);
    let e1 = orbit_idempotent(&orbits[1]);
    check("idempotent_trivial_c2", "e_{χ₀} = (1 + σ)/2 on C₂", e0 == qv(&c2, &[(1, 2), (1, 2)]));
    check("idempotent_sign_c2", "e_{χ₁} = (1 − σ)/2 on C₂", e1 == qv(&c2, &[(1, 2), (-1, 2)]));
    let total = rational_orbits(&c3).iter().fold(QElem::rational_zero(&c3), |acc, o| acc.add(&orbit_idempotent(o)));
    check("idempotents_complete_c3", "the rational idempotents of C₃ sum to 1", total == QElem::rational_one(&c3));

    let ext = sqrt5(true, false);
    check("delta_sqrt5", "δ_T = 1 − 3σ for ℚ(√5), T = {3}", delta_t(&ext).unwrap() == qv(&c2, &[(1, 1), (-3, 1)]));
    let tg = ExtensionData {
        group: triv.clone(),
        r: 1,
        ramified: vec![],
        s_prime: vec![],
        t_places: vec![place("3", 3, Subgroup::trivial(&triv), Subgroup::trivial(&triv), vec![])],
        roots_of_unity: 2,
    };
    check("delta_trivial_group", "δ_T = −2 for trivial G, T = {3}", delta_t(&tg).unwrap() == qv(&triv, &[(-2, 1)]));

    let x = qv(&c2, &[(5, 1), (7, 1)]);
    let to_one = quotient_and_projection(&c2, &Subgroup::whole(&c2)).unwrap();
    check("projection_to_trivial", "a + bσ ↦ a + b under C₂ → 1", x.project(&to_one) == qv(&to_one.target, &[(12, 1)]));
    check("inertia_idempotent_trivial", "e_I = 1 for I = {1}", inertia_idempotent(&Subgroup::trivial(&c2)) == QElem::rational_one(&c2));
    check(
        "inertia_idempotent_whole",
        "e_I = (1 + σ)/2 and N_I = 1 + σ for I = C₂",
        inertia_idempotent(&Subgroup::whole(&c2)) == qv(&c2, &[(1, 2), (1, 2)])
            && norm_element(&Subgroup::whole(&c2)) == qv(&c2, &[(1, 1), (1, 1)]),
    );

    let z2 = RationalLattice::standard(2);
    let n = RationalLattice::from_generators(2, &[vec![q(2, 1), q(0, 1)], vec![q(0, 1), q(3, 1)]]);
    check("sinnott_diagonal", "(ℤ² : ⟨(2,0),(0,3)⟩) = 6", sinnott_index(&z2, &n, IndexMode::Rational).ok() == Some(q(6, 1)));
    let half = RationalLattice::from_generators(1, &[vec![q(3, 2)]]);
    check(
        "sinnott_fractional",
        "(ℤ : ℤ·3/2) = 3/2",
        sinnott_index(&RationalLattice::standard(1), &half, IndexMode::Rational).ok() == Some(q(3, 2)),
    );
    let n = RationalLattice::from_generators(2, &[vec![q(6, 1), q(0, 1)], vec![q(0, 1), q(2, 1)]]);
    check("sinnott_2adic", "(ℤ² : ⟨(6,0),(0,2)⟩) in ℚ₂ mode = 4", sinnott_index(&z2, &n, IndexMode::PAdic(2)).ok() == Some(q(4, 1)));

    let whole = Subgroup::whole(&c2);
    let zg = GModuleLattice::in_group_ring(&c2, RationalLattice::standard(2)).unwrap();
    check("tate_trivial", "Ĥ⁰(C₂, ℤ) has order 2", tate_h0(&whole, &trivial_action(&c2, RationalLattice::standard(1))).ok() == Some(Integer::from(2)));
    check("tate_group_ring", "Ĥ⁰(C₂, ℤ[C₂]) is trivial", tate_h0(&whole, &zg).ok() == Some(Integer::from(1)));
    check(
        "semisimplify_trivial_group",
        "(S(M) : M) = 1 for trivial G",
        semisimplify(&trivial_action(&triv, RationalLattice::standard(3))).map(|s| s.1).ok() == Some(q(1, 1)),
    );
    let decomposed = GModuleLattice::in_group_ring(
        &c2,
        RationalLattice::from_generators(2, &[vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(-1, 2)]]),
    )
    .unwrap();
    check("semisimplify_decomposed", "(S(M) : M) = 1 when M is already decomposed", semisimplify(&decomposed).map(|s| s.1).ok() == Some(q(1, 1)));

    let m2 = trivial_action(&triv, RationalLattice::standard(2));
    check("wedge_trivial_group", "⋀̃²ℤ² has rank one for trivial G", wedge_image(&m2, 2).map(|w| w.wedge.rank()).ok() == Some(1));
    check(
        "rubin_saturated",
        "⋂¹M = M for trivial G and M = ℤ²",
        rubin_lattice(&m2, 1).map(|(w, l)| l == w.wedge && l.rank() == 2).unwrap_or(false),
    );
    for (name, g) in [("c2", &c2), ("c3", &c3), ("v4", &v4)] {
        let zg = GModuleLattice::in_group_ring(g, RationalLattice::standard(g.order())).unwrap();
        check(
            &format!("rubin_group_ring_{name}"),
            "⋂¹ℤ[G] = ℤ[G] and (⋂¹ : ⋀̃¹) = 1",
            rubin_lattice(&zg, 1).map(|(w, l)| l == w.wedge).unwrap_or(false)
                && rubin_vs_wedge_index(&zg, 1, &QElem::rational_one(g)).ok() == Some(q(1, 1)),
        );
    }

    let sign = enumerate_characters(&c2)[1].clone();
    check("vanishing_inert", "r_S(χ) = 1 for ℚ(√5), S = {∞, 5, 7}", order_of_vanishing(&sign, &sqrt5(true, false)) == 1);
    check("vanishing_split", "r_S(χ) = 2 for ℚ(√5), S = {∞, 5, 11}", order_of_vanishing(&sign, &sqrt5(true, true)) == 2);
    let hyp = check_hypotheses(&sqrt5(false, false), 1);
    check("empty_t", "T = ∅ fails hypothesis (4)", hyp.items.iter().any(|h| h.id == 4 && !h.passed));

    let ctx = PrecisionContext::new(30).unwrap();
    let z = zeta_star_from_class_number(1, &ctx.real(1), 2);
    check("zeta_star_q", "ζ*_ℚ(0) = −1/2", z == ctx.from_rational(&q(-1, 2)));
    check(
        "divisor_count",
        "one ramified prime gives two divisors, two give four",
        CycleDivisor::all(1).len() == 2 && CycleDivisor::all(2).len() == 4,
    );
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_definitional_identities_hold() {
        for c in super::selftest() {
            assert!(c.passed, "{} failed: {}", c.id, c.statement);
        }
    }
}
