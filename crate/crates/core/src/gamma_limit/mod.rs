//! Discrete energies `F_ε`, the coarse-graining extension, the limit
//! functional on piecewise-constant targets, and the recovery experiment.
//!
//! `Z^ε(Ω)` is taken as the lattice points `k` with `a_i <= ε k_i < b_i`,
//! i.e. the half-open scaled box, so that its sites tile exactly.

mod extend;
mod recovery;
mod target;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{add, SiteBox};
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::spin::Spin;

pub use extend::{broken_bonds, extend, ExtensionResult, ExtensionSummary};
pub use recovery::{converge_report, recovery_config, ConvergeReport, ConvergeRow};
pub use target::{f_hom, FHomValue, MultiphaseField, PhaseTarget, RealBox};

/// The open box `Ω = prod (lo_i, hi_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl DomainSpec {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Precondition("domain bounds must have the same positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::Precondition("domain must have nonempty interior".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit_cube(d: usize) -> Self {
        Self::new(vec![Rational::zero(); d], vec![Rational::one(); d]).expect("valid")
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Lattice sites of `Z^ε(Ω)`.
    pub fn sites(&self, eps: &Rational) -> Result<SiteBox> {
        if !eps.is_positive() {
            return Err(Error::Precondition("ε must be positive".into()));
        }
        let mut lo = Vec::new();
        let mut shape = Vec::new();
        for (a, b) in self.lo.iter().zip(&self.hi) {
            let first = ceil_i64(&(a / eps))?;
            let end = ceil_i64(&(b / eps))?;
            lo.push(first);
            shape.push((end - first).max(0) as usize);
        }
        Ok(SiteBox::new(lo, shape))
    }
}

fn ceil_i64(r: &Rational) -> Result<i64> {
    r.ceil().to_integer().to_i64().ok_or_else(|| Error::Precondition("domain too large".into()))
}

/// A spin configuration on `Z^ε(Ω)`, stored row-major over [`DomainSpec::sites`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinField {
    pub eps: Rational,
    pub omega: DomainSpec,
    pub sites: SiteBox,
    pub spins: Vec<Spin>,
}

impl SpinField {
    pub fn constant(omega: &DomainSpec, eps: Rational, spin: Spin) -> Result<Self> {
        let sites = omega.sites(&eps)?;
        let spins = vec![spin; sites.len()];
        Ok(Self { eps, omega: omega.clone(), sites, spins })
    }

    pub fn from_fn(omega: &DomainSpec, eps: Rational, f: impl Fn(&[i64]) -> Spin) -> Result<Self> {
        let sites = omega.sites(&eps)?;
        let spins = sites.iter().map(|k| f(&k)).collect();
        Ok(Self { eps, omega: omega.clone(), sites, spins })
    }

    pub fn get(&self, k: &[i64]) -> Option<Spin> {
        self.sites.index(k).map(|i| self.spins[i])
    }

    pub(crate) fn check(&self, model: &LatticeModel) -> Result<()> {
        if self.sites.dimension() != model.dimension() {
            return Err(Error::DomainMismatch(format!(
                "field has dimension {}, model has {}",
                self.sites.dimension(),
                model.dimension()
            )));
        }
        let expected = self.omega.sites(&self.eps)?;
        if expected != self.sites || self.spins.len() != expected.len() {
            return Err(Error::DomainMismatch("field sites do not match the scaled domain".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawField = serde_json::from_str(text).map_err(|e| Error::Schema {
            locus: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let eps = rational::parse(&raw.eps)?;
        let omega = parse_domain(&raw.omega)?;
        let sites = omega.sites(&eps)?;
        let mut spins = Vec::with_capacity(sites.len());
        for (count, value) in raw.spins {
            let s = Spin::from_value(value).ok_or_else(|| Error::Schema {
                locus: "spins".into(),
                message: format!("spin must be 1 or -1, got {value}"),
            })?;
            spins.extend(std::iter::repeat_n(s, count));
        }
        if spins.len() != sites.len() {
            return Err(Error::DomainMismatch(format!(
                "field has {} spins, the scaled domain has {} sites",
                spins.len(),
                sites.len()
            )));
        }
        Ok(Self { eps, omega, sites, spins })
    }

    pub fn to_json(&self) -> String {
        let mut runs: Vec<(usize, i64)> = Vec::new();
        for s in &self.spins {
            match runs.last_mut() {
                Some((n, v)) if *v == s.value() => *n += 1,
                _ => runs.push((1, s.value())),
            }
        }
        let raw = RawField {
            eps: rational::format(&self.eps),
            omega: RawDomain {
                lo: self.omega.lo.iter().map(rational::format).collect(),
                hi: self.omega.hi.iter().map(rational::format).collect(),
            },
            spins: runs,
        };
        serde_json::to_string(&raw).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawDomain {
    pub lo: Vec<String>,
    pub hi: Vec<String>,
}

pub(crate) fn parse_domain(raw: &RawDomain) -> Result<DomainSpec> {
    let lo = raw.lo.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?;
    let hi = raw.hi.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?;
    DomainSpec::new(lo, hi)
}

pub fn domain_from_json(text: &str) -> Result<DomainSpec> {
    let raw: RawDomain = serde_json::from_str(text)?;
    parse_domain(&raw)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    eps: String,
    omega: RawDomain,
    /// Run-length encoded `(count, spin)` pairs.
    spins: Vec<(usize, i64)>,
}

/// Model coefficients times a common integer scale.
pub(crate) struct ScaledModel {
    pub scale: BigInt,
    pub strong: Vec<Vec<(Vec<i64>, i128)>>,
    pub weak: Vec<Vec<(Vec<i64>, i128)>>,
    pub forcing: Vec<[i128; 2]>,
}

impl ScaledModel {
    pub fn new(model: &LatticeModel) -> Result<Self> {
        let n = model.num_residues();
        let mut values: Vec<&Rational> = Vec::new();
        for r in 0..n {
            values.extend(model.strong_bonds(r).iter().map(|b| &b.weight));
            values.extend(model.weak_bonds(r).iter().map(|b| &b.weight));
            values.extend(model.forcing_of_residue(r).iter());
        }
        let scale = rational::common_denominator(values);
        let sc = |r: &Rational| rational::scaled_i128(r, &scale);
        let mut strong = Vec::with_capacity(n);
        let mut weak = Vec::with_capacity(n);
        let mut forcing = Vec::with_capacity(n);
        for r in 0..n {
            strong.push(model.strong_bonds(r).iter().map(|b| Ok((b.offset.clone(), sc(&b.weight)?))).collect::<Result<Vec<_>>>()?);
            weak.push(model.weak_bonds(r).iter().map(|b| Ok((b.offset.clone(), sc(&b.weight)?))).collect::<Result<Vec<_>>>()?);
            let g = model.forcing_of_residue(r);
            forcing.push([sc(&g[0])?, sc(&g[1])?]);
        }
        Ok(Self { scale, strong, weak, forcing })
    }
}

/// The three sums of `F_ε`, unscaled by powers of `ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyParts {
    pub strong: Rational,
    pub weak: Rational,
    pub forcing: Rational,
}

pub fn energy_parts(model: &LatticeModel, field: &SpinField) -> Result<EnergyParts> {
    field.check(model)?;
    let sm = ScaledModel::new(model)?;
    let (mut s, mut w, mut g) = (0i128, 0i128, 0i128);
    for (i, k) in field.sites.iter().enumerate() {
        let r = model.residue_index(&k);
        let u = field.spins[i];
        g += sm.forcing[r][u.slot()];
        for (offset, a) in &sm.strong[r] {
            if let Some(v) = field.get(&add(&k, offset)) {
                if v != u {
                    s += 4 * a;
                }
            }
        }
        for (offset, a) in &sm.weak[r] {
            if let Some(v) = field.get(&add(&k, offset)) {
                if v != u {
                    w += 4 * a;
                }
            }
        }
    }
    let unscale = |x: i128| Rational::new(BigInt::from(x), sm.scale.clone());
    Ok(EnergyParts { strong: unscale(s), weak: unscale(w), forcing: unscale(g) })
}

/// `F_ε(u)` with the ordered-pair convention, exactly.
pub fn f_eps(model: &LatticeModel, field: &SpinField) -> Result<Rational> {
    let parts = energy_parts(model, field)?;
    let d = model.dimension() as i32;
    let e = &field.eps;
    Ok(parts.strong * pow(e, d - 1) + (parts.weak + parts.forcing) * pow(e, d))
}

fn pow(r: &Rational, n: i32) -> Rational {
    num_traits::pow(r.clone(), n.max(0) as usize)
}
