//! Upper-bound fields built from `φ̃_M` minimizers, and the convergence harness.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::Signed;
use serde::Serialize;

use super::{f_eps, DomainSpec, MultiphaseField, SpinField};
use crate::bulk_density::{solve_variant, PhiSolution, PhiTable, Variant};
use crate::connectivity::ConnectivitySummary;
use crate::error::{Error, Result};
use crate::ground_state::SolveOptions;
use crate::lattice::{add, SiteBox};
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::spin::Spin;
use crate::surface_tension::SurfaceTable;

/// The recovery field at scale `ε` with paste cubes of side `m`.
pub fn recovery_config(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    omega: &DomainSpec,
    target: &MultiphaseField,
    eps: &Rational,
    m: i64,
    options: &SolveOptions,
) -> Result<SpinField> {
    let cache = Mutex::new(HashMap::new());
    build_field(model, summary, omega, target, eps, m, options, &cache)
}

type Cache = Mutex<HashMap<Vec<Spin>, PhiSolution>>;

#[allow(clippy::too_many_arguments)]
fn build_field(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    omega: &DomainSpec,
    target: &MultiphaseField,
    eps: &Rational,
    m: i64,
    options: &SolveOptions,
    cache: &Cache,
) -> Result<SpinField> {
    let d = model.dimension();
    if omega.dimension() != d {
        return Err(Error::DomainMismatch(format!("domain has dimension {}, model has {d}", omega.dimension())));
    }
    target.validate(d, model.num_phases())?;
    let t = model.period();
    if m <= 0 || m % t != 0 {
        return Err(Error::Precondition(format!("cube side {m} must be a positive multiple of T = {t}")));
    }

    // C_j follows the discretized target, everything else starts at +1
    let mut field = SpinField::from_fn(omega, eps.clone(), |k| match summary.infinite_phase(model, k) {
        Some(j) => {
            let x: Vec<Rational> = k.iter().map(|&c| eps * Rational::from_integer(c.into())).collect();
            target.phases[j - 1].value_at(&x)
        }
        None => Spin::Up,
    })?;

    let base = SiteBox::centered_cube(d, m);
    let sites = field.sites.clone();
    let mut lo = Vec::with_capacity(d);
    let mut shape = Vec::with_capacity(d);
    for a in 0..d {
        // c m + base.lo >= sites.lo and c m + base.lo + m <= sites.lo + n
        let first = -(base.lo[a] - sites.lo[a]).div_euclid(m);
        let last = (sites.lo[a] + sites.shape[a] as i64 - base.lo[a] - m).div_euclid(m);
        lo.push(first);
        shape.push((last - first + 1).max(0) as usize);
    }
    let centers = SiteBox::new(lo, shape);
    for c in centers.iter() {
        let shift: Vec<i64> = c.iter().map(|x| x * m).collect();
        let cube = base.translated(&shift);
        let Some(z) = local_phases(model, summary, &field, &cube) else { continue };
        let mut guard = cache.lock().expect("cache lock");
        if !guard.contains_key(&z) {
            let sol = solve_variant(model, summary, &z, m, Variant::Constrained, options)?;
            guard.insert(z.clone(), sol);
        }
        let sol = &guard[&z];
        for (v, k) in sol.sites.iter().enumerate() {
            let idx = field.sites.index(&add(&k, &shift)).expect("cube lies in the domain");
            field.spins[idx] = sol.assignment[v];
        }
    }
    Ok(field)
}

/// The constant value of each `C_j` on the cube, if every phase is present
/// and constant there.
fn local_phases(model: &LatticeModel, summary: &ConnectivitySummary, field: &SpinField, cube: &SiteBox) -> Option<Vec<Spin>> {
    let mut z: Vec<Option<Spin>> = vec![None; model.num_phases()];
    for k in cube.iter() {
        if let Some(j) = summary.infinite_phase(model, &k) {
            let s = field.get(&k)?;
            match z[j - 1] {
                None => z[j - 1] = Some(s),
                Some(v) if v != s => return None,
                _ => {}
            }
        }
    }
    z.into_iter().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeRow {
    #[serde(serialize_with = "ser_rational")]
    pub eps: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub energy: Rational,
    pub energy_f64: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeReport {
    pub m: i64,
    pub reference: f64,
    pub rows: Vec<ConvergeRow>,
    /// Gaps strictly decrease along the rows.
    pub decreasing: bool,
}

impl ConvergeReport {
    pub fn final_relative_gap(&self) -> Option<f64> {
        self.rows.last().map(|r| r.gap / self.reference.abs())
    }
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

/// `F_ε` of the recovery field along `eps_list`, against the `F_hom` value.
#[allow(clippy::too_many_arguments)]
pub fn converge_report(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    omega: &DomainSpec,
    target: &MultiphaseField,
    eps_list: &[Rational],
    m: i64,
    surface: &SurfaceTable,
    phi: &PhiTable,
    options: &SolveOptions,
) -> Result<ConvergeReport> {
    if eps_list.is_empty() {
        return Err(Error::Precondition("ε list is empty".into()));
    }
    if eps_list.iter().any(|e| !e.is_positive()) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("ε list must be positive and strictly decreasing".into()));
    }
    let reference = super::f_hom(omega, target, surface, phi)?.total;
    let cache: Cache = Mutex::new(HashMap::new());
    let energies = options.execution.map(eps_list, |eps| {
        let field = build_field(model, summary, omega, target, eps, m, options, &cache)?;
        f_eps(model, &field)
    });
    let mut rows = Vec::with_capacity(eps_list.len());
    for (eps, energy) in eps_list.iter().zip(energies) {
        let energy = energy?;
        let energy_f64 = rational::to_f64(&energy);
        rows.push(ConvergeRow { eps: eps.clone(), energy, energy_f64, gap: (energy_f64 - reference).abs() });
    }
    let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    Ok(ConvergeReport { m, reference, rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulk_density::all_spin_vectors;
    use crate::connectivity::classify;
    use crate::fixtures;
    use crate::gamma_limit::tests::m1_plain;
    use crate::gamma_limit::PhaseTarget;
    use crate::rational::{int, ratio};
    use crate::spin::Spin::{Down as DN, Up as UP};

    #[test]
    fn constant_target_gives_constant_field() {
        let m = LatticeModel::from_json(fixtures::M1).unwrap();
        let s = classify(&m);
        let t = MultiphaseField::new(vec![PhaseTarget::Constant(UP)]);
        let f = recovery_config(&m, &s, &DomainSpec::unit_cube(1), &t, &ratio(1, 32), 8, &SolveOptions::default()).unwrap();
        assert!(f.spins.iter().all(|&x| x == UP));
        assert_eq!(f_eps(&m, &f).unwrap(), int(0));
    }

    #[test]
    fn jump_follows_the_target_on_the_chain() {
        let m = LatticeModel::from_json(fixtures::M1).unwrap();
        let s = classify(&m);
        let t = MultiphaseField::new(vec![PhaseTarget::Slab { normal: vec![int(1)], offset: ratio(1, 2) }]);
        let f = recovery_config(&m, &s, &DomainSpec::unit_cube(1), &t, &ratio(1, 32), 4, &SolveOptions::default()).unwrap();
        for (i, k) in f.sites.iter().enumerate() {
            if s.is_in(&m, 1, &k) {
                assert_eq!(f.spins[i], Spin::from_sign(k[0] > 16), "site {k:?}");
            }
        }
    }

    #[test]
    fn trivial_model_reports_zero() {
        let m = m1_plain();
        let s = classify(&m);
        let t = MultiphaseField::new(vec![PhaseTarget::Constant(DN)]);
        let surface = SurfaceTable::from_values([(1, vec![1], int(1))]).unwrap();
        let phi = PhiTable::from_values(all_spin_vectors(1).into_iter().map(|z| (z, int(0))));
        let eps = [ratio(1, 8), ratio(1, 16)];
        let r = converge_report(&m, &s, &DomainSpec::unit_cube(1), &t, &eps, 4, &surface, &phi, &SolveOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.energy == int(0)));
        assert_eq!(r.reference, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = m1_plain();
        let s = classify(&m);
        let t = MultiphaseField::new(vec![PhaseTarget::Constant(DN)]);
        let surface = SurfaceTable::default();
        let phi = PhiTable::from_values([(vec![DN], int(0))]);
        let omega = DomainSpec::unit_cube(1);
        let o = SolveOptions::default();
        assert!(converge_report(&m, &s, &omega, &t, &[ratio(1, 16), ratio(1, 8)], 4, &surface, &phi, &o).is_err());
        assert!(recovery_config(&m, &s, &omega, &t, &ratio(1, 8), 3, &o).is_err());
    }
}
