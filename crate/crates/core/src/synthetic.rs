//! Synthetic instances: abstract ramification data, a G-lattice `M ⊂ ℤ[G]^r`
//! with logarithms given by a real group ring element ρ, and a table of
//! leading L-values. Used for the algebra of the regulator and the index
//! formulas when `r > 1`, where no genuine Stark elements are available.

use crate::abelian::{Character, Elem, FiniteAbelianGroup, Subgroup};
use crate::arithmetic::{subfield_k_g, CycleDivisor, ExtensionData, PlaceData};
use crate::error::{Error, Result};
use crate::group_ring::RElem;
use crate::lattice::GModuleLattice;
use crate::lvalues::{stickelberger_leading, Leading, TableOracle};
use crate::numeric::{Cplx, PrecisionContext};
use crate::regulator::{degree_zero_module, RegulatorFrame};
use crate::stark::norm_power;
use rug::Integer;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
pub struct RawPlace {
    pub label: String,
    pub norm: u64,
    #[serde(default)]
    pub inertia: Vec<Vec<u64>>,
    pub frobenius: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawLValue {
    pub character: Vec<u64>,
    pub order: usize,
    pub value: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawSynthetic {
    pub kind: String,
    pub name: String,
    pub group: Vec<u64>,
    pub r: usize,
    pub roots_of_unity: u64,
    pub ramified: Vec<RawPlace>,
    pub s_prime: Vec<RawPlace>,
    pub t: Vec<RawPlace>,
    /// Coefficients of ρ by group element index.
    pub rho: Vec<String>,
    pub lvalues: Vec<RawLValue>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub name: String,
    pub ctx: PrecisionContext,
    pub ext: ExtensionData,
    pub rho: RElem,
    pub oracle: TableOracle,
    /// `X ⊂ ℤ[G]^r`, standing in for `U_{S,T}`.
    pub module: GModuleLattice,
    pub frame: RegulatorFrame,
    pub note: Option<String>,
}

fn place(raw: &RawPlace, g: &FiniteAbelianGroup) -> Result<PlaceData> {
    let check = |e: &Vec<u64>| -> Result<Elem> {
        if g.is_valid(e) {
            Ok(e.clone())
        } else {
            Err(Error::Parse(format!("{}: {e:?} is not a group element", raw.label)))
        }
    };
    let inertia_gens = raw.inertia.iter().map(check).collect::<Result<Vec<_>>>()?;
    let frobenius = check(&raw.frobenius)?;
    let inertia = Subgroup::generated_by(g, &inertia_gens)?;
    let decomposition = inertia.join(&Subgroup::generated_by(g, std::slice::from_ref(&frobenius))?);
    let p = PlaceData { label: raw.label.clone(), norm: Some(Integer::from(raw.norm)), inertia, decomposition, frobenius };
    p.validate()?;
    Ok(p)
}

impl SyntheticInstance {
    pub fn from_raw(raw: RawSynthetic, ctx: &PrecisionContext) -> Result<Self> {
        if raw.kind != "synthetic" {
            return Err(Error::Parse(format!("kind {:?} is not synthetic", raw.kind)));
        }
        let g = FiniteAbelianGroup::new(&raw.group)?;
        let places = |v: &[RawPlace]| v.iter().map(|p| place(p, &g)).collect::<Result<Vec<_>>>();
        let ext = ExtensionData {
            group: g.clone(),
            r: raw.r,
            ramified: places(&raw.ramified)?,
            s_prime: places(&raw.s_prime)?,
            t_places: places(&raw.t)?,
            roots_of_unity: raw.roots_of_unity,
        };
        ext.validate()?;
        if raw.rho.len() != g.order() {
            return Err(Error::Parse(format!("rho needs {} coefficients", g.order())));
        }
        let rho = RElem::from_coeffs(&g, raw.rho.iter().map(|s| ctx.parse(s)).collect::<Result<Vec<_>>>()?, ctx);
        let mut entries = Vec::new();
        for lv in &raw.lvalues {
            let chi = Character::new(&g, lv.character.clone())?;
            entries.push((chi, Leading { order: lv.order, value: Cplx::from_real(ctx.parse(&lv.value)?) }));
        }
        let oracle = TableOracle::new(&g, entries, ctx)?;
        let module = degree_zero_module(&g, raw.r)?;
        let frame = RegulatorFrame::synthetic(ctx, &module, raw.r, &rho)?;
        Ok(Self { name: raw.name, ctx: *ctx, ext, rho, oracle, module, frame, note: raw.note })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.ext.group
    }

    /// `R_w(η_𝔤) := N_H^r·lift(Θ^{(r)}_{S_𝔤,T})`, the image a Rubin-Stark
    /// element of `K_𝔤` would have; independent of the coset lift.
    pub fn stark_images(&self) -> Result<Vec<(CycleDivisor, RElem)>> {
        let g = self.group();
        let mut out = Vec::new();
        for d in CycleDivisor::all(self.ext.ramified.len()) {
            let sub = subfield_k_g(&d, &self.ext)?;
            let theta = stickelberger_leading(&sub.ext, &sub.quotient, &self.oracle, &self.ctx)?;
            let mut lift = vec![self.ctx.zero(); g.order()];
            for (delta, c) in sub.quotient.coset_reps.iter().zip(theta.coeffs()) {
                lift[g.index_of(delta)] = c.clone();
            }
            let lift = RElem::from_coeffs(g, lift, &self.ctx);
            let n = norm_power(&sub.quotient.kernel, self.ext.r).to_real(&self.ctx);
            out.push((d, n.mul(&lift)));
        }
        Ok(out)
    }
}

/// Reads a synthetic instance file.
pub fn load_synthetic(path: impl AsRef<Path>, ctx: &PrecisionContext) -> Result<SyntheticInstance> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let raw: RawSynthetic = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    SyntheticInstance::from_raw(raw, ctx)
}

/// Whether a data file declares itself synthetic.
pub fn is_synthetic_file(path: impl AsRef<Path>) -> Result<bool> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(v.get("kind").and_then(|k| k.as_str()) == Some("synthetic"))
}
