//! Coarse-graining of a field on `C_j` by cubes `Q_M(i) = iM + [0, M)^d`.

use serde::Serialize;

use super::SpinField;
use crate::connectivity::{coarsening_side, ConnectivitySummary};
use crate::error::{Error, Result};
use crate::lattice::{add, SiteBox};
use crate::model::LatticeModel;
use crate::spin::Spin;

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub field: SpinField,
    pub summary: ExtensionSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionSummary {
    pub m: i64,
    /// Cubes whose `3M` neighbourhood lies in the domain.
    pub cubes_in_range: usize,
    /// In-range cubes on which the field is not constant on `C_j` (`#S_ε`).
    pub marked: usize,
}

/// Unordered strong `C_j` bonds inside the domain whose endpoints disagree.
pub fn broken_bonds(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, field: &SpinField) -> usize {
    let mut count = 0;
    for (i, k) in field.sites.iter().enumerate() {
        if !summary.is_in(model, j, &k) {
            continue;
        }
        for b in model.strong_bonds(model.residue_index(&k)) {
            let k2 = add(&k, &b.offset);
            if k2 > k && summary.is_in(model, j, &k2) {
                if let Some(v) = field.get(&k2) {
                    if v != field.spins[i] {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Cube indices `i` whose cube `(i - 1) M + [0, 3M)^d` lies in `sites`.
fn cubes_in_range(sites: &SiteBox, m: i64) -> SiteBox {
    let mut lo = Vec::new();
    let mut shape = Vec::new();
    for (a, &n) in sites.lo.iter().zip(&sites.shape) {
        let end = a + n as i64;
        // need (i - 1) M >= a and (i + 2) M <= end
        let first = (a + m).div_euclid(m) + if (a + m).rem_euclid(m) != 0 { 1 } else { 0 };
        let last = end.div_euclid(m) - 2;
        lo.push(first);
        shape.push((last - first + 1).max(0) as usize);
    }
    SiteBox::new(lo, shape)
}

pub fn extend(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, field: &SpinField, m: i64) -> Result<ExtensionResult> {
    field.check(model)?;
    let t = model.period();
    if m <= 0 || m % t != 0 {
        return Err(Error::Precondition(format!("cube side {m} must be a positive multiple of T = {t}")));
    }
    let m0 = coarsening_side(model, summary, j, None)?;
    if m < m0 {
        return Err(Error::Precondition(format!("cube side {m} is below the coarsening side {m0}")));
    }
    let d = model.dimension();
    let mut out = field.clone();
    let cubes = cubes_in_range(&field.sites, m);
    let mut marked = 0;
    for i in cubes.iter() {
        let cube = SiteBox::new(i.iter().map(|x| x * m).collect(), vec![m as usize; d]);
        let mut value: Option<Spin> = None;
        let mut constant = true;
        for k in cube.iter() {
            if summary.is_in(model, j, &k) {
                let s = field.get(&k).expect("cube inside domain");
                match value {
                    None => value = Some(s),
                    Some(v) if v != s => {
                        constant = false;
                        break;
                    }
                    _ => {}
                }
            }
        }
        match (constant, value) {
            (true, Some(v)) => {
                for k in cube.iter() {
                    let idx = out.sites.index(&k).expect("cube inside domain");
                    out.spins[idx] = v;
                }
            }
            (false, _) => marked += 1,
            (true, None) => {}
        }
    }
    Ok(ExtensionResult {
        field: out,
        summary: ExtensionSummary { m, cubes_in_range: cubes.len(), marked },
    })
}
