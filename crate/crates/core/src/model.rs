//! The T-periodic interaction system: labels, strong and weak bonds, and the
//! forcing term, all stored per residue class.
//!
//! Energies follow the ordered-pair convention: an unordered bond `{k, k'}`
//! appears once from each endpoint, so a jump across it costs `2 * 4 * a`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::connectivity::{self, Classification};
use crate::error::{Error, Result};
use crate::lattice::{add, neg, residue_coords, residue_index};
use crate::rational::{self, Rational};
use crate::spin::Spin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BondClass {
    Strong,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bond {
    pub offset: Vec<i64>,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeModel {
    dimension: usize,
    period: i64,
    num_phases: usize,
    labels: Vec<usize>,
    strong: Vec<Vec<Bond>>,
    weak: Vec<Vec<Bond>>,
    /// `[g(k, +1), g(k, -1)]` per residue.
    forcing: Vec<[Rational; 2]>,
    coercivity_floor: Option<Rational>,
}

impl LatticeModel {
    /// An empty model: every residue soft, no bonds, `g = 0`.
    pub fn new(dimension: usize, period: i64, num_phases: usize) -> Result<Self> {
        if dimension == 0 || period <= 0 || num_phases == 0 {
            return Err(Error::Schema {
                locus: "model".into(),
                message: "dimension, period and num_phases must be positive".into(),
            });
        }
        let n = (period as usize).pow(dimension as u32);
        Ok(Self {
            dimension,
            period,
            num_phases,
            labels: vec![0; n],
            strong: vec![Vec::new(); n],
            weak: vec![Vec::new(); n],
            forcing: vec![[Rational::zero(), Rational::zero()]; n],
            coercivity_floor: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn period(&self) -> i64 {
        self.period
    }

    pub fn num_phases(&self) -> usize {
        self.num_phases
    }

    pub fn num_residues(&self) -> usize {
        self.labels.len()
    }

    pub fn residue_index(&self, k: &[i64]) -> usize {
        residue_index(k, self.period)
    }

    pub fn residue_coords(&self, index: usize) -> Vec<i64> {
        residue_coords(index, self.dimension, self.period)
    }

    /// The label function `J`, extended periodically.
    pub fn label(&self, k: &[i64]) -> usize {
        self.labels[self.residue_index(k)]
    }

    pub fn label_of_residue(&self, r: usize) -> usize {
        self.labels[r]
    }

    pub fn set_label(&mut self, residue: &[i64], label: usize) {
        let r = self.residue_index(residue);
        self.labels[r] = label;
    }

    /// Strong bonds leaving residue `r` (the offsets of `P^j_k \ {0}`).
    pub fn strong_bonds(&self, r: usize) -> &[Bond] {
        &self.strong[r]
    }

    pub fn weak_bonds(&self, r: usize) -> &[Bond] {
        &self.weak[r]
    }

    pub fn add_bond(&mut self, class: BondClass, residue: &[i64], offset: Vec<i64>, weight: Rational) {
        let r = self.residue_index(residue);
        let list = match class {
            BondClass::Strong => &mut self.strong[r],
            BondClass::Weak => &mut self.weak[r],
        };
        list.push(Bond { offset, weight });
    }

    /// Adds `offset` at `residue` and `-offset` at the partner residue with
    /// the same weight.
    pub fn add_symmetric_bond(&mut self, class: BondClass, residue: &[i64], offset: Vec<i64>, weight: Rational) {
        let partner = add(residue, &offset);
        self.add_bond(class, residue, offset.clone(), weight.clone());
        self.add_bond(class, &partner, neg(&offset), weight);
    }

    pub fn set_forcing(&mut self, residue: &[i64], plus: Rational, minus: Rational) {
        let r = self.residue_index(residue);
        self.forcing[r] = [plus, minus];
    }

    pub fn set_coercivity_floor(&mut self, floor: Option<Rational>) {
        self.coercivity_floor = floor;
    }

    /// The declared coercivity floor, or the smallest strong weight when none
    /// is declared.
    pub fn coercivity_floor(&self) -> Rational {
        self.coercivity_floor.clone().unwrap_or_else(|| {
            self.strong
                .iter()
                .flatten()
                .map(|b| b.weight.clone())
                .min()
                .unwrap_or_else(Rational::zero)
        })
    }

    /// Bond from `k` to `k2`, if declared.
    pub fn bond(&self, k: &[i64], k2: &[i64]) -> Option<(BondClass, &Rational)> {
        let r = self.residue_index(k);
        let offset: Vec<i64> = k2.iter().zip(k).map(|(a, b)| a - b).collect();
        if let Some(b) = self.strong[r].iter().find(|b| b.offset == offset) {
            return Some((BondClass::Strong, &b.weight));
        }
        self.weak[r]
            .iter()
            .find(|b| b.offset == offset)
            .map(|b| (BondClass::Weak, &b.weight))
    }

    /// The coefficient `a_{k k2}`, or `None` when the pair is not a bond.
    pub fn pair_weight(&self, k: &[i64], k2: &[i64]) -> Option<Rational> {
        self.bond(k, k2).map(|(_, w)| w.clone())
    }

    pub fn forcing_value(&self, k: &[i64], z: Spin) -> Rational {
        self.forcing[self.residue_index(k)][z.slot()].clone()
    }

    pub fn forcing_of_residue(&self, r: usize) -> &[Rational; 2] {
        &self.forcing[r]
    }

    pub fn max_abs_forcing(&self) -> Rational {
        self.forcing
            .iter()
            .flatten()
            .map(|g| g.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Largest `|a|` over every declared bond, strong or weak.
    pub fn max_abs_weight(&self) -> Rational {
        self.strong
            .iter()
            .chain(&self.weak)
            .flatten()
            .map(|b| b.weight.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Largest number of weak offsets at a single residue.
    pub fn max_weak_degree(&self) -> usize {
        self.weak.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest `|offset|_inf` over all bonds.
    pub fn interaction_range(&self) -> i64 {
        self.strong
            .iter()
            .chain(&self.weak)
            .flatten()
            .flat_map(|b| b.offset.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn has_soft_sites(&self) -> bool {
        self.labels.contains(&0)
    }

    // ---- serialization ----

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::Schema {
            locus: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        raw.into_model()
    }

    pub fn to_json(&self) -> String {
        let key = |r: usize| {
            self.residue_coords(r)
                .iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let bonds = |lists: &[Vec<Bond>]| {
            let mut out = Vec::new();
            for (r, list) in lists.iter().enumerate() {
                for b in list {
                    out.push(serde_json::json!({
                        "from": key(r),
                        "offset": b.offset,
                        "weight": rational::format(&b.weight),
                    }));
                }
            }
            out
        };
        let labels: serde_json::Map<String, serde_json::Value> = (0..self.num_residues())
            .map(|r| (key(r), self.labels[r].into()))
            .collect();
        let forcing: serde_json::Map<String, serde_json::Value> = (0..self.num_residues())
            .map(|r| {
                let [p, m] = &self.forcing[r];
                (
                    key(r),
                    serde_json::json!({ "plus": rational::format(p), "minus": rational::format(m) }),
                )
            })
            .collect();
        let mut doc = serde_json::json!({
            "dimension": self.dimension,
            "period": self.period,
            "num_phases": self.num_phases,
            "labels": labels,
            "strong_bonds": bonds(&self.strong),
            "weak_bonds": bonds(&self.weak),
            "forcing": forcing,
        });
        if let Some(c) = &self.coercivity_floor {
            doc["coercivity_floor"] = rational::format(c).into();
        }
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    // ---- validation ----

    /// Checks every structural hypothesis and reports all failures.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.local_violations();
        if violations.iter().all(|v| v.rule != Rule::HardClosure && v.rule != Rule::LabelRange) {
            let summary = connectivity::classify(self);
            for (j, phase) in summary.phases.iter().enumerate() {
                let j = j + 1;
                if phase.components.is_empty() {
                    violations.push(Violation::new(
                        Rule::EmptyPhase,
                        format!("phase {j}"),
                        "no residue carries this label",
                    ));
                    continue;
                }
                let infinite: Vec<_> = phase
                    .components
                    .iter()
                    .filter(|c| c.classification != Classification::Finite)
                    .collect();
                let unique = infinite
                    .iter()
                    .filter(|c| c.classification == Classification::InfiniteUnique)
                    .count();
                if infinite.len() != 1 || unique != 1 {
                    let kinds: Vec<String> = infinite
                        .iter()
                        .map(|c| format!("{:?} (index {})", c.classification, c.displacement.describe()))
                        .collect();
                    violations.push(Violation::new(
                        Rule::UniqueInfiniteComponent,
                        format!("phase {j}"),
                        format!(
                            "expected exactly one infinite component with full displacement group, found [{}]",
                            kinds.join(", ")
                        ),
                    ));
                    continue;
                }
                // coerciveness only makes sense once C_j exists
                let floor = self.coercivity_floor();
                if !floor.is_positive() {
                    violations.push(Violation::new(
                        Rule::Coerciveness,
                        format!("phase {j}"),
                        format!("coercivity floor {} is not positive", rational::format(&floor)),
                    ));
                }
                for &r in &phase.infinite_residues {
                    for b in &self.strong[r] {
                        if b.weight < floor || !b.weight.is_positive() {
                            violations.push(Violation::new(
                                Rule::Coerciveness,
                                format!("residue {:?} offset {:?}", self.residue_coords(r), b.offset),
                                format!(
                                    "strong weight {} below coercivity floor {}",
                                    rational::format(&b.weight),
                                    rational::format(&floor)
                                ),
                            ));
                        }
                    }
                }
            }
        }
        ValidationReport::new(violations)
    }

    fn local_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for r in 0..self.num_residues() {
            let k = self.residue_coords(r);
            let j = self.labels[r];
            if j > self.num_phases {
                out.push(Violation::new(
                    Rule::LabelRange,
                    format!("residue {k:?}"),
                    format!("label {j} exceeds num_phases {}", self.num_phases),
                ));
            }
            for (class, list) in [(BondClass::Strong, &self.strong[r]), (BondClass::Weak, &self.weak[r])] {
                for b in list {
                    let witness = format!("residue {k:?} offset {:?}", b.offset);
                    if b.offset.iter().all(|&c| c == 0) {
                        out.push(Violation::new(Rule::ZeroOffset, witness.clone(), "zero offset"));
                        continue;
                    }
                    let target = add(&k, &b.offset);
                    let partner = self.residue_index(&target);
                    let back = neg(&b.offset);
                    let reverse = match class {
                        BondClass::Strong => self.strong[partner].iter().find(|x| x.offset == back),
                        BondClass::Weak => self.weak[partner].iter().find(|x| x.offset == back),
                    };
                    match reverse {
                        Some(rb) if rb.weight == b.weight => {}
                        Some(rb) => out.push(Violation::new(
                            Rule::Symmetry,
                            witness.clone(),
                            format!(
                                "weight {} differs from reverse weight {}",
                                rational::format(&b.weight),
                                rational::format(&rb.weight)
                            ),
                        )),
                        None => out.push(Violation::new(
                            Rule::Symmetry,
                            witness.clone(),
                            "reverse bond missing at partner residue",
                        )),
                    }
                    let jt = self.labels[partner];
                    match class {
                        BondClass::Strong => {
                            if j == 0 {
                                out.push(Violation::new(
                                    Rule::HardClosure,
                                    witness,
                                    "strong bond leaves a soft site",
                                ));
                            } else if jt != j {
                                out.push(Violation::new(
                                    Rule::HardClosure,
                                    witness,
                                    format!("strong bond joins phase {j} to phase {jt}"),
                                ));
                            }
                        }
                        BondClass::Weak => {
                            if !(j * jt == 0 || j != jt) {
                                out.push(Violation::new(
                                    Rule::WeakAdmissibility,
                                    witness,
                                    format!("weak bond inside hard phase {j}"),
                                ));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    LabelRange,
    ZeroOffset,
    Symmetry,
    HardClosure,
    WeakAdmissibility,
    Coerciveness,
    EmptyPhase,
    UniqueInfiniteComponent,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("rule serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub witness: String,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, witness: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            rule,
            witness: witness.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(violations: Vec<Violation>) -> Self {
        Self {
            passed: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

// ---- raw schema ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    dimension: usize,
    period: i64,
    num_phases: usize,
    #[serde(deserialize_with = "ordered_entries")]
    labels: Vec<(String, usize)>,
    #[serde(default)]
    strong_bonds: Vec<RawBond>,
    #[serde(default)]
    weak_bonds: Vec<RawBond>,
    #[serde(default, deserialize_with = "ordered_entries")]
    forcing: Vec<(String, RawForcing)>,
    #[serde(default)]
    coercivity_floor: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBond {
    from: String,
    offset: Vec<i64>,
    weight: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    plus: String,
    minus: String,
}

/// Deserializes a JSON object into its entries in document order, keeping
/// duplicates so they can be reported.
fn ordered_entries<'de, D, T>(d: D) -> std::result::Result<Vec<(String, T)>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    struct Entries<T>(std::marker::PhantomData<T>);

    impl<'de, T: Deserialize<'de>> Visitor<'de> for Entries<T> {
        type Value = Vec<(String, T)>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an object keyed by residue")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(entry) = map.next_entry::<String, T>()? {
                out.push(entry);
            }
            Ok(out)
        }
    }

    d.deserialize_map(Entries(std::marker::PhantomData))
}

impl RawModel {
    fn into_model(self) -> Result<LatticeModel> {
        let mut model = LatticeModel::new(self.dimension, self.period, self.num_phases)?;
        let d = self.dimension;
        let t = self.period;
        let residue = |key: &str, locus: &str| -> Result<Vec<i64>> {
            let coords: Vec<i64> = key
                .split(',')
                .map(|c| c.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Schema {
                    locus: locus.to_string(),
                    message: format!("residue key {key:?} is not a comma-separated integer list"),
                })?;
            if coords.len() != d {
                return Err(Error::Arity {
                    locus: locus.to_string(),
                    expected: d,
                    found: coords.len(),
                });
            }
            if coords.iter().any(|&c| c < 0 || c >= t) {
                return Err(Error::Schema {
                    locus: locus.to_string(),
                    message: format!("residue key {key:?} has a coordinate outside [0, {t})"),
                });
            }
            Ok(coords)
        };

        let mut seen = HashSet::new();
        for (key, label) in &self.labels {
            let locus = format!("labels[{key:?}]");
            let k = residue(key, &locus)?;
            if !seen.insert(k.clone()) {
                return Err(Error::DuplicateKey { locus, key: key.clone() });
            }
            model.set_label(&k, *label);
        }

        let mut bond_keys = HashSet::new();
        for (class, name, list) in [
            (BondClass::Strong, "strong_bonds", &self.strong_bonds),
            (BondClass::Weak, "weak_bonds", &self.weak_bonds),
        ] {
            for (i, b) in list.iter().enumerate() {
                let locus = format!("{name}[{i}]");
                let k = residue(&b.from, &format!("{locus}.from"))?;
                if b.offset.len() != d {
                    return Err(Error::Arity {
                        locus: format!("{locus}.offset"),
                        expected: d,
                        found: b.offset.len(),
                    });
                }
                if !bond_keys.insert((k.clone(), b.offset.clone())) {
                    return Err(Error::DuplicateKey {
                        locus,
                        key: format!("from {} offset {:?}", b.from, b.offset),
                    });
                }
                let w = rational::parse(&b.weight).map_err(|_| Error::Schema {
                    locus: format!("{locus}.weight"),
                    message: format!("{:?} is not a decimal or fraction", b.weight),
                })?;
                model.add_bond(class, &k, b.offset.clone(), w);
            }
        }

        let mut seen = HashSet::new();
        for (key, f) in &self.forcing {
            let locus = format!("forcing[{key:?}]");
            let k = residue(key, &locus)?;
            if !seen.insert(k.clone()) {
                return Err(Error::DuplicateKey { locus, key: key.clone() });
            }
            let parse = |s: &str, field: &str| {
                rational::parse(s).map_err(|_| Error::Schema {
                    locus: format!("{locus}.{field}"),
                    message: format!("{s:?} is not a decimal or fraction"),
                })
            };
            model.set_forcing(&k, parse(&f.plus, "plus")?, parse(&f.minus, "minus")?);
        }

        if let Some(c) = &self.coercivity_floor {
            model.set_coercivity_floor(Some(rational::parse(c).map_err(|_| Error::Schema {
                locus: "coercivity_floor".into(),
                message: format!("{c:?} is not a decimal or fraction"),
            })?));
        }
        Ok(model)
    }
}

/// Groups residues by label; handy for diagnostics.
pub fn residues_by_label(model: &LatticeModel) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in 0..model.num_residues() {
        out.entry(model.label_of_residue(r)).or_default().push(r);
    }
    out
}
