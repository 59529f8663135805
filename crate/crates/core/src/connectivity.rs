//! Periodic connectivity of the hard phases.
//!
//! Each phase is studied on the quotient torus `Z^d / T Z^d`. An edge of the
//! quotient graph carries the cell displacement it induces on lifts; the
//! net displacements of cycles generate a subgroup `H` of `Z^d`, and the
//! lifts of a quotient component are in bijection with `Z^d / H`. So a
//! component is finite iff `H = {0}` and lifts to a single infinite
//! component iff `H = Z^d`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{add, floor_div, norm_sq, sub, SiteBox};
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::smith;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    InfiniteUnique,
    InfiniteMultiple,
    Finite,
}

/// Subgroup of `Z^d` generated by cycle displacements, summarized by its
/// Smith invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisplacementGroup {
    pub dimension: usize,
    pub generators: Vec<Vec<i64>>,
    pub invariants: Vec<i128>,
}

impl DisplacementGroup {
    fn from_generators(dimension: usize, generators: Vec<Vec<i64>>) -> Self {
        let rows: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let invariants = smith::invariant_factors(&rows, dimension);
        Self {
            dimension,
            generators,
            invariants,
        }
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    /// `[Z^d : H]` when `H` has full rank.
    pub fn index(&self) -> Option<i128> {
        (self.rank() == self.dimension).then(|| self.invariants.iter().product())
    }

    pub fn is_full(&self) -> bool {
        self.index() == Some(1)
    }

    pub fn describe(&self) -> String {
        match self.index() {
            Some(i) => format!("full rank, index {i}"),
            None => format!("rank {} < {}", self.rank(), self.dimension),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicComponent {
    pub phase: usize,
    pub residues: Vec<usize>,
    pub displacement: DisplacementGroup,
    pub classification: Classification,
    /// Euclidean diameter of one lift (finite components only).
    pub lift_diameter: Option<f64>,
    #[serde(skip)]
    pub lift_diameter_sq: Option<i64>,
    /// Sites of one lift, in the order of `residues` (finite components only).
    #[serde(skip)]
    pub lift: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSummary {
    pub phase: usize,
    pub components: Vec<PeriodicComponent>,
    /// Residues of `C_j`; empty when the phase has no unique infinite
    /// component.
    pub infinite_residues: Vec<usize>,
    #[serde(serialize_with = "serialize_rational")]
    pub density: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectivitySummary {
    pub phases: Vec<PhaseSummary>,
    /// Squared island radius `R^2` (an integer).
    pub island_radius_sq: i64,
    pub island_radius: f64,
    /// `C_j` membership per residue: `Some(j)` if the residue lies in `C_j`.
    #[serde(skip)]
    pub in_infinite: Vec<Option<usize>>,
    /// For residues of finite components: `(phase index, component index)`.
    #[serde(skip)]
    island_of: Vec<Option<(usize, usize)>>,
    /// Position of each island residue inside its component's stored lift.
    #[serde(skip)]
    anchor: Vec<Option<Vec<i64>>>,
}

fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

impl ConnectivitySummary {
    pub fn phase(&self, j: usize) -> &PhaseSummary {
        &self.phases[j - 1]
    }

    /// Whether site `k` belongs to some `C_j`, and which.
    pub fn infinite_phase(&self, model: &LatticeModel, k: &[i64]) -> Option<usize> {
        self.in_infinite[model.residue_index(k)]
    }

    pub fn is_in(&self, model: &LatticeModel, j: usize, k: &[i64]) -> bool {
        self.infinite_phase(model, k) == Some(j)
    }

    pub fn has_infinite_component(&self, j: usize) -> bool {
        !self.phase(j).infinite_residues.is_empty()
    }

    /// Rational upper bound on the island radius `R` (exactly `R` when `R^2`
    /// is a perfect square).
    pub fn island_radius_upper(&self) -> Rational {
        sqrt_upper(self.island_radius_sq)
    }

    /// Sites of the island (finite component lift) containing `k`, or
    /// `None` when `k` is not on an island.
    pub fn island_containing(&self, model: &LatticeModel, k: &[i64]) -> Option<(usize, usize, Vec<i64>)> {
        let r = model.residue_index(k);
        let (p, c) = self.island_of[r]?;
        let anchor = self.anchor[r].as_ref()?;
        let t = model.period();
        let shift: Vec<i64> = sub(k, anchor).iter().map(|x| x / t).collect();
        Some((p, c, shift))
    }

    pub fn island_sites(&self, phase_index: usize, component: usize, shift: &[i64], period: i64) -> Vec<Vec<i64>> {
        let scaled: Vec<i64> = shift.iter().map(|x| x * period).collect();
        self.phases[phase_index].components[component]
            .lift
            .iter()
            .map(|s| add(s, &scaled))
            .collect()
    }
}

/// Smallest rational with six decimals that is `>= sqrt(n)`.
fn sqrt_upper(n: i64) -> Rational {
    let root = (n as f64).sqrt();
    let exact = root.round() as i64;
    if exact * exact == n {
        return rational::int(exact);
    }
    let scale = 1_000_000i64;
    let mut q = (root * scale as f64).ceil() as i64;
    while (q as i128) * (q as i128) < (n as i128) * (scale as i128) * (scale as i128) {
        q += 1;
    }
    rational::ratio(q, scale)
}

/// Quotient edges of phase `j` leaving residue `r`: `(target residue, cell displacement)`.
fn quotient_edges(model: &LatticeModel, j: usize, r: usize) -> Vec<(usize, Vec<i64>)> {
    let t = model.period();
    let base = model.residue_coords(r);
    model
        .strong_bonds(r)
        .iter()
        .filter_map(|b| {
            let target = add(&base, &b.offset);
            let rt = model.residue_index(&target);
            (model.label_of_residue(rt) == j).then(|| (rt, target.iter().map(|&c| floor_div(c, t)).collect()))
        })
        .collect()
}

pub fn classify(model: &LatticeModel) -> ConnectivitySummary {
    let d = model.dimension();
    let n = model.num_residues();
    let t = model.period();
    let mut phases = Vec::new();
    let mut in_infinite = vec![None; n];
    let mut island_of = vec![None; n];
    let mut anchor = vec![None; n];
    let mut island_radius_sq = 0i64;

    for j in 1..=model.num_phases() {
        let mut potential: Vec<Option<Vec<i64>>> = vec![None; n];
        let mut components = Vec::new();
        for root in 0..n {
            if model.label_of_residue(root) != j || potential[root].is_some() {
                continue;
            }
            potential[root] = Some(vec![0; d]);
            let mut residues = vec![root];
            let mut generators: HashSet<Vec<i64>> = HashSet::new();
            let mut queue = VecDeque::from([root]);
            while let Some(r) = queue.pop_front() {
                let pr = potential[r].clone().expect("visited");
                for (rt, disp) in quotient_edges(model, j, r) {
                    let reached = add(&pr, &disp);
                    match &potential[rt] {
                        None => {
                            potential[rt] = Some(reached);
                            residues.push(rt);
                            queue.push_back(rt);
                        }
                        Some(pt) => {
                            let g = sub(&reached, pt);
                            if g.iter().any(|&x| x != 0) {
                                let neg: Vec<i64> = g.iter().map(|x| -x).collect();
                                if !generators.contains(&neg) {
                                    generators.insert(g);
                                }
                            }
                        }
                    }
                }
            }
            residues.sort_unstable();
            let mut generators: Vec<Vec<i64>> = generators.into_iter().collect();
            generators.sort();
            let displacement = DisplacementGroup::from_generators(d, generators);
            let classification = if displacement.is_trivial() {
                Classification::Finite
            } else if displacement.is_full() {
                Classification::InfiniteUnique
            } else {
                Classification::InfiniteMultiple
            };
            let mut comp = PeriodicComponent {
                phase: j,
                residues,
                displacement,
                classification,
                lift_diameter: None,
                lift_diameter_sq: None,
                lift: Vec::new(),
            };
            if classification == Classification::Finite {
                // with H = {0} the lift visits each residue exactly once; the
                // potentials already are the cell offsets of that lift
                let lift: Vec<Vec<i64>> = comp
                    .residues
                    .iter()
                    .map(|&r| {
                        let cell = potential[r].as_ref().expect("visited");
                        let base = model.residue_coords(r);
                        base.iter().zip(cell).map(|(b, c)| b + t * c).collect()
                    })
                    .collect();
                let mut diam = 0;
                for a in &lift {
                    for b in &lift {
                        diam = diam.max(norm_sq(&sub(a, b)));
                    }
                }
                comp.lift_diameter_sq = Some(diam);
                comp.lift_diameter = Some((diam as f64).sqrt());
                island_radius_sq = island_radius_sq.max(diam);
                for (r, site) in comp.residues.iter().zip(&lift) {
                    island_of[*r] = Some((j - 1, components.len()));
                    anchor[*r] = Some(site.clone());
                }
                comp.lift = lift;
            }
            components.push(comp);
        }

        let infinite: Vec<&PeriodicComponent> = components
            .iter()
            .filter(|c| c.classification != Classification::Finite)
            .collect();
        let infinite_residues = match infinite.as_slice() {
            [only] if only.classification == Classification::InfiniteUnique => only.residues.clone(),
            _ => Vec::new(),
        };
        for &r in &infinite_residues {
            in_infinite[r] = Some(j);
        }
        let density = Rational::new(
            (infinite_residues.len() as i64).into(),
            (n as i64).into(),
        );
        phases.push(PhaseSummary {
            phase: j,
            components,
            infinite_residues,
            density,
        });
    }

    ConnectivitySummary {
        phases,
        island_radius_sq,
        island_radius: (island_radius_sq as f64).sqrt(),
        in_infinite,
        island_of,
        anchor,
    }
}

/// Whether the lattice point `k` lies in the real half-open cube
/// `Q_{m - R} = [-(m-R)/2, (m-R)/2)^d`, with `R = sqrt(r_sq)`.
fn in_shrunk_cube(k: &[i64], m: i64, r_sq: i64) -> bool {
    let m = m as i128;
    let r_sq = r_sq as i128;
    k.iter().all(|&x| {
        let x = x as i128;
        // -(m - R) <= 2x  <=>  2x + m >= R
        let low = 2 * x + m;
        // 2x < m - R  <=>  m - 2x > R
        let high = m - 2 * x;
        low >= 0 && low * low >= r_sq && high > 0 && high * high > r_sq
    })
}

/// `D_M ∩ Q_M`: the sites of islands that meet `Q_M` but not `Q_{M-R}`,
/// sorted.
pub fn excluded_set(model: &LatticeModel, summary: &ConnectivitySummary, m: i64) -> Vec<Vec<i64>> {
    let cube = SiteBox::centered_cube(model.dimension(), m);
    let t = model.period();
    let r_sq = summary.island_radius_sq;
    let mut decided: HashMap<(usize, usize, Vec<i64>), bool> = HashMap::new();
    let mut out = Vec::new();
    for k in cube.iter() {
        let Some((p, c, shift)) = summary.island_containing(model, &k) else {
            continue;
        };
        let key = (p, c, shift);
        let excluded = *decided.entry(key.clone()).or_insert_with(|| {
            summary
                .island_sites(key.0, key.1, &key.2, t)
                .iter()
                .all(|s| !in_shrunk_cube(s, m, r_sq))
        });
        if excluded {
            out.push(k);
        }
    }
    out.sort();
    out
}

/// Default cap on the coarsening-side search, in multiples of `T`.
pub const COARSENING_CAP_PERIODS: i64 = 64;

/// Smallest multiple `M0` of `T` such that any two `C_j` sites of a cube of
/// side `M0` are joined by a path of `C_j` inside the concentric cube of
/// side `3 M0`, for every translation class of cube.
pub fn coarsening_side(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, cap: Option<i64>) -> Result<i64> {
    if !summary.has_infinite_component(j) {
        return Err(Error::Precondition(format!("phase {j} has no unique infinite component")));
    }
    let t = model.period();
    let cap = cap.unwrap_or(COARSENING_CAP_PERIODS * t);
    let d = model.dimension();
    let mut m = t;
    while m <= cap {
        let offsets = SiteBox::new(vec![0; d], vec![t as usize; d]);
        let ok = offsets.iter().all(|o| cube_is_linked(model, summary, j, &o, m));
        if ok {
            return Ok(m);
        }
        m += t;
    }
    Err(Error::CoarseningCap { cap })
}

fn cube_is_linked(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, origin: &[i64], m: i64) -> bool {
    let d = model.dimension();
    let window = SiteBox::new(origin.iter().map(|o| o - m).collect(), vec![3 * m as usize; d]);
    let inner = SiteBox::new(origin.to_vec(), vec![m as usize; d]);
    let members: Vec<Vec<i64>> = inner.iter().filter(|k| summary.is_in(model, j, k)).collect();
    let Some(start) = members.first() else {
        return true;
    };
    let mut seen = vec![false; window.len()];
    let mut queue = VecDeque::new();
    let si = window.index(start).expect("inner inside window");
    seen[si] = true;
    queue.push_back(start.clone());
    while let Some(k) = queue.pop_front() {
        let r = model.residue_index(&k);
        for b in model.strong_bonds(r) {
            let next = add(&k, &b.offset);
            if let Some(ni) = window.index(&next) {
                if !seen[ni] && summary.is_in(model, j, &next) {
                    seen[ni] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    members.iter().all(|k| seen[window.index(k).expect("inside")])
}

/// The constant `2^d R (#P_0 max|a| + 2 max|g|)` bounding `M (φ̃_M - φ_M)`.
pub fn sandwich_constant(model: &LatticeModel, summary: &ConnectivitySummary) -> Rational {
    let two_d = rational::int(1i64 << model.dimension());
    let p0 = rational::int(model.max_weak_degree() as i64);
    let inner = p0 * model.max_abs_weight() + rational::int(2) * model.max_abs_forcing();
    two_d * summary.island_radius_upper() * inner
}
