//! Periodic minimum problems for the bulk density `φ(z_1, ..., z_N)`.
//!
//! Three finite problems are solved per `(z, M)`:
//! `φ_M` on the cube `Q_M`, `φ̃_M` with the excluded islands pinned to `+1`,
//! and `ψ_M` on the torus `Z^d / M Z^d` (for `M` a multiple of `T`). `ψ_M`
//! is the energy density of the best `M`-periodic configuration, so
//! `φ <= ψ_M` always, while `φ_M <= φ` needs nonnegative weak weights.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::connectivity::{excluded_set, ConnectivitySummary};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ground_state::{solve, GroundStateInstance, Method, SolveOptions};
use crate::lattice::{add, SiteBox};
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::spin::Spin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `φ_M`
    Cube,
    /// `φ̃_M`
    Constrained,
    /// `ψ_M`
    Periodic,
}

/// The minimum problem over the sites of `region`. For the periodic variant
/// `region` is the fundamental domain `[0, M)^d` and bonds wrap around.
fn build(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    z: &[Spin],
    m: i64,
    variant: Variant,
) -> Result<(GroundStateInstance, SiteBox)> {
    if z.len() != model.num_phases() {
        return Err(Error::Precondition(format!("expected {} spins, got {}", model.num_phases(), z.len())));
    }
    if m <= 0 {
        return Err(Error::Precondition("M must be positive".into()));
    }
    let d = model.dimension();
    let periodic = variant == Variant::Periodic;
    if periodic && m % model.period() != 0 {
        return Err(Error::Precondition(format!("periodic problem needs M a multiple of T = {}", model.period())));
    }
    let region = if periodic {
        SiteBox::new(vec![0; d], vec![m as usize; d])
    } else {
        SiteBox::centered_cube(d, m)
    };
    let locate = |k: &[i64]| -> Option<usize> {
        if periodic {
            let wrapped: Vec<i64> = k.iter().map(|&x| x.rem_euclid(m)).collect();
            region.index(&wrapped)
        } else {
            region.index(k)
        }
    };

    let mut g = GroundStateInstance::new(region.len());
    for (v, k) in region.iter().enumerate() {
        let r = model.residue_index(&k);
        let [plus, minus] = model.forcing_of_residue(r).clone();
        g.add_unary(v, plus, minus);
        if let Some(j) = summary.in_infinite[r] {
            g.fix(v, z[j - 1]);
        }
        for b in model.strong_bonds(r) {
            if let Some(u) = locate(&add(&k, &b.offset)) {
                g.join(v, u);
            }
        }
        for b in model.weak_bonds(r) {
            if let Some(u) = locate(&add(&k, &b.offset)) {
                g.add_pair(v, u, b.weight.clone());
            }
        }
    }
    if variant == Variant::Constrained {
        for k in excluded_set(model, summary, m) {
            let v = region.index(&k).expect("excluded sites lie in the cube");
            g.fix(v, Spin::Up);
        }
    }
    Ok((g, region))
}

#[derive(Clone, Debug)]
pub struct PhiSolution {
    pub value: Rational,
    pub sites: SiteBox,
    pub assignment: Vec<Spin>,
    pub method: Method,
}

pub fn solve_variant(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    z: &[Spin],
    m: i64,
    variant: Variant,
    options: &SolveOptions,
) -> Result<PhiSolution> {
    let (g, sites) = build(model, summary, z, m, variant)?;
    let sol = solve(&g, options)?;
    let volume = Rational::from_integer(BigInt::from(m).pow(model.dimension() as u32));
    Ok(PhiSolution {
        value: sol.energy / volume,
        sites,
        assignment: sol.assignment,
        method: sol.method,
    })
}

pub fn phi_m(model: &LatticeModel, summary: &ConnectivitySummary, z: &[Spin], m: i64, options: &SolveOptions) -> Result<Rational> {
    solve_variant(model, summary, z, m, Variant::Cube, options).map(|s| s.value)
}

pub fn phi_tilde_m(model: &LatticeModel, summary: &ConnectivitySummary, z: &[Spin], m: i64, options: &SolveOptions) -> Result<Rational> {
    solve_variant(model, summary, z, m, Variant::Constrained, options).map(|s| s.value)
}

pub fn phi_periodic(model: &LatticeModel, summary: &ConnectivitySummary, z: &[Spin], m: i64, options: &SolveOptions) -> Result<Rational> {
    solve_variant(model, summary, z, m, Variant::Periodic, options).map(|s| s.value)
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&rational::format(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiEntry {
    pub m: i64,
    #[serde(serialize_with = "ser_rational")]
    pub phi: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub phi_tilde: Rational,
    /// Torus value, when `M` is a multiple of `T`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub periodic: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiRow {
    pub z: Vec<Spin>,
    pub entries: Vec<PhiEntry>,
    /// `(M, K M)` pairs in the list with `φ_{KM} < φ_M`.
    pub monotonicity_violations: Vec<(i64, i64)>,
    /// `φ_M` at the largest `M`.
    #[serde(serialize_with = "ser_rational")]
    pub lower: Rational,
    /// `ψ_M` at the largest multiple of `T` in the list, else `φ̃_M + c/M`.
    #[serde(serialize_with = "ser_rational")]
    pub upper: Rational,
    /// `φ̃_M - φ_M` at the largest `M`.
    #[serde(serialize_with = "ser_rational")]
    pub residual: Rational,
    pub estimate: f64,
}

impl PhiRow {
    pub fn entry(&self, m: i64) -> Option<&PhiEntry> {
        self.entries.iter().find(|e| e.m == m)
    }
}

pub fn check_m_list(m_list: &[i64]) -> Result<()> {
    if m_list.is_empty() {
        return Err(Error::Precondition("M list is empty".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) || m_list[0] <= 0 {
        return Err(Error::Precondition("M list must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn assemble(model: &LatticeModel, summary: &ConnectivitySummary, z: Vec<Spin>, entries: Vec<PhiEntry>) -> PhiRow {
    let mut violations = Vec::new();
    for a in &entries {
        for b in &entries {
            if b.m > a.m && b.m % a.m == 0 && b.phi < a.phi {
                violations.push((a.m, b.m));
            }
        }
    }
    let last = entries.last().expect("nonempty");
    let c = crate::connectivity::sandwich_constant(model, summary);
    let upper = entries
        .iter()
        .rev()
        .find_map(|e| e.periodic.clone())
        .unwrap_or_else(|| &last.phi_tilde + c / Rational::from_integer(last.m.into()));
    PhiRow {
        z,
        lower: last.phi.clone(),
        residual: &last.phi_tilde - &last.phi,
        estimate: rational::to_f64(&upper),
        upper,
        monotonicity_violations: violations,
        entries,
    }
}

pub fn phi_estimate(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    z: &[Spin],
    m_list: &[i64],
    options: &SolveOptions,
) -> Result<PhiRow> {
    let table = PhiTable::compute(model, summary, &[z.to_vec()], m_list, options)?;
    Ok(table.rows.into_iter().next().expect("one row"))
}

/// `φ` rows for several spin vectors.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PhiTable {
    pub rows: Vec<PhiRow>,
}

impl PhiTable {
    /// Every `(z, M, variant)` problem as one parallel work list.
    pub fn compute(
        model: &LatticeModel,
        summary: &ConnectivitySummary,
        zs: &[Vec<Spin>],
        m_list: &[i64],
        options: &SolveOptions,
    ) -> Result<Self> {
        check_m_list(m_list)?;
        let t = model.period();
        let mut work = Vec::new();
        for (zi, _) in zs.iter().enumerate() {
            for &m in m_list {
                work.push((zi, m, Variant::Cube));
                work.push((zi, m, Variant::Constrained));
                if m % t == 0 {
                    work.push((zi, m, Variant::Periodic));
                }
            }
        }
        let inner = SolveOptions { execution: Execution::Sequential, ..options.clone() };
        let solved = options
            .execution
            .map(&work, |&(zi, m, v)| solve_variant(model, summary, &zs[zi], m, v, &inner).map(|s| s.value));
        let mut values: HashMap<(usize, i64, Variant), Rational> = HashMap::new();
        for (key, value) in work.into_iter().zip(solved) {
            values.insert(key, value?);
        }
        let rows = zs
            .iter()
            .enumerate()
            .map(|(zi, z)| {
                let entries = m_list
                    .iter()
                    .map(|&m| PhiEntry {
                        m,
                        phi: values[&(zi, m, Variant::Cube)].clone(),
                        phi_tilde: values[&(zi, m, Variant::Constrained)].clone(),
                        periodic: values.get(&(zi, m, Variant::Periodic)).cloned(),
                    })
                    .collect();
                assemble(model, summary, z.clone(), entries)
            })
            .collect();
        Ok(Self { rows })
    }

    /// A table of known values.
    pub fn from_values(entries: impl IntoIterator<Item = (Vec<Spin>, Rational)>) -> Self {
        let rows = entries
            .into_iter()
            .map(|(z, value)| PhiRow {
                z,
                entries: Vec::new(),
                monotonicity_violations: Vec::new(),
                lower: value.clone(),
                upper: value.clone(),
                residual: Rational::from_integer(0.into()),
                estimate: rational::to_f64(&value),
            })
            .collect();
        Self { rows }
    }

    pub fn get(&self, z: &[Spin]) -> Result<f64> {
        self.rows
            .iter()
            .find(|r| r.z == z)
            .map(|r| r.estimate)
            .ok_or_else(|| {
                let shown: Vec<String> = z.iter().map(ToString::to_string).collect();
                Error::MissingEntry(format!("bulk density for z = ({})", shown.join(",")))
            })
    }
}

/// Every vector in `{+1, -1}^n`, `+1` first.
pub fn all_spin_vectors(n: usize) -> Vec<Vec<Spin>> {
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| Spin::from_sign(mask >> (n - 1 - i) & 1 == 0)).collect())
        .collect()
}
