//! Cell problems for the surface tension of each hard phase.
//!
//! `Q^ν_T` is realized as the lattice points `x` with `|<x, b>| <= T |b| / 2`
//! for every vector `b` of an orthogonal integer basis whose first vector is
//! the primitive direction of `ν`. All membership tests are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::connectivity::{coarsening_side, ConnectivitySummary};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ground_state::{minimize_cut, GroundStateInstance, Method};
use crate::lattice::{add, SiteBox};
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::spin::Spin;

/// The primitive integer vector pointing along `normal`.
pub fn primitive_direction(normal: &[Rational]) -> Result<Vec<i64>> {
    if normal.iter().all(Zero::is_zero) {
        return Err(Error::Precondition("normal must be nonzero".into()));
    }
    let scale = rational::common_denominator(normal);
    let ints: Vec<BigInt> = normal.iter().map(|x| (x * Rational::from_integer(scale.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| (x / &g).to_i64().ok_or_else(|| Error::Precondition("normal is too large".into())))
        .collect()
}

pub fn integer_normal(normal: &[i64]) -> Result<Vec<i64>> {
    let r: Vec<Rational> = normal.iter().map(|&x| rational::int(x)).collect();
    primitive_direction(&r)
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Orthogonal integer basis starting with `nu`.
fn orthogonal_basis(nu: &[i64]) -> Vec<Vec<i64>> {
    let d = nu.len();
    if d == 2 {
        return vec![nu.to_vec(), vec![-nu[1], nu[0]]];
    }
    let mut basis: Vec<Vec<Rational>> = vec![nu.iter().map(|&x| rational::int(x)).collect()];
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v: Vec<Rational> = (0..d).map(|i| rational::int((i == e) as i64)).collect();
        for b in &basis {
            let num: Rational = v.iter().zip(b).map(|(x, y)| x * y).sum();
            let den: Rational = b.iter().map(|y| y * y).sum();
            let c = num / den;
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= &c * bi;
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            basis.push(v);
        }
    }
    basis
        .iter()
        .map(|b| {
            let scale = rational::common_denominator(b);
            let ints: Vec<BigInt> = b.iter().map(|x| (x * Rational::from_integer(scale.clone())).to_integer()).collect();
            let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            ints.iter().map(|x| (x / &g).to_i64().expect("small basis")).collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RotatedCube {
    basis: Vec<(Vec<i64>, i128)>,
    side: i64,
    half_width: i64,
}

impl RotatedCube {
    pub fn new(nu: &[i64], side: i64) -> Self {
        let basis: Vec<(Vec<i64>, i128)> = orthogonal_basis(nu).into_iter().map(|b| { let n = dot(&b, &b); (b, n) }).collect();
        let d = nu.len() as i128;
        // every point has |x|^2 <= d T^2 / 4
        let bound = d * (side as i128) * (side as i128);
        let mut h: i64 = 0;
        while 4 * (h as i128) * (h as i128) < bound {
            h += 1;
        }
        Self { basis, side, half_width: h }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let t2 = (self.side as i128) * (self.side as i128);
        self.basis.iter().all(|(b, n)| {
            let p = dot(x, b);
            4 * p * p <= t2 * n
        })
    }

    pub fn sites(&self) -> Vec<Vec<i64>> {
        let d = self.basis.len();
        let h = self.half_width;
        SiteBox::new(vec![-h; d], vec![(2 * h + 1) as usize; d])
            .iter()
            .filter(|x| self.contains(x))
            .collect()
    }
}

/// `+1` where `<k, ν> > 0`, else `-1`.
pub fn boundary_spin(k: &[i64], nu: &[i64]) -> Spin {
    Spin::from_sign(dot(k, nu) > 0)
}

/// The cell instance and its free sites (`C_j ∩ Q^ν_T`).
pub fn cell_instance(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    j: usize,
    nu: &[i64],
    t_cell: i64,
) -> Result<(GroundStateInstance, Vec<Vec<i64>>)> {
    if nu.len() != model.dimension() {
        return Err(Error::Precondition(format!("normal has {} components, model dimension is {}", nu.len(), model.dimension())));
    }
    if j == 0 || j > model.num_phases() || !summary.has_infinite_component(j) {
        return Err(Error::Precondition(format!("phase {j} has no unique infinite component")));
    }
    if t_cell <= 0 {
        return Err(Error::Precondition("cell size must be positive".into()));
    }
    let cube = RotatedCube::new(nu, t_cell);
    let free: Vec<Vec<i64>> = cube.sites().into_iter().filter(|k| summary.is_in(model, j, k)).collect();
    let index: std::collections::HashMap<&[i64], usize> = free.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
    let mut g = GroundStateInstance::new(free.len());
    let mut outside: std::collections::HashMap<Vec<i64>, usize> = std::collections::HashMap::new();
    for (u, k) in free.iter().enumerate() {
        for b in model.strong_bonds(model.residue_index(k)) {
            let k2 = add(k, &b.offset);
            if let Some(&v) = index.get(k2.as_slice()) {
                g.add_pair(u, v, b.weight.clone());
                continue;
            }
            let v = *outside.entry(k2.clone()).or_insert_with(|| {
                let v = g.add_var();
                g.fix(v, boundary_spin(&k2, nu));
                v
            });
            g.add_pair(u, v, b.weight.clone());
            if let Some(w) = model.pair_weight(&k2, k) {
                g.add_pair(v, u, w);
            }
        }
    }
    Ok((g, free))
}

#[derive(Clone, Debug, Serialize)]
pub struct CellValue {
    pub t_cell: i64,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub value_f64: f64,
    pub free_sites: usize,
    /// The cell is smaller than the coarsening side of the phase.
    pub below_coarsening_side: bool,
    #[serde(skip)]
    pub method: Option<Method>,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

/// `min / T^{d-1}` for the cell problem of phase `j` with normal `ν`.
pub fn cell_value(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, normal: &[Rational], t_cell: i64) -> Result<CellValue> {
    let nu = primitive_direction(normal)?;
    cell_value_int(model, summary, j, &nu, t_cell)
}

fn cell_value_int(model: &LatticeModel, summary: &ConnectivitySummary, j: usize, nu: &[i64], t_cell: i64) -> Result<CellValue> {
    let (g, free) = cell_instance(model, summary, j, nu, t_cell)?;
    let sol = minimize_cut(&g).map_err(|e| match e {
        Error::NotSubmodular(..) => Error::Internal(format!("cell problem of phase {j} is not submodular: {e}")),
        other => other,
    })?;
    let area = Rational::from_integer(BigInt::from(t_cell).pow(model.dimension() as u32 - 1));
    let value = sol.energy / area;
    let below = coarsening_side(model, summary, j, None).map(|m0| t_cell < m0).unwrap_or(true);
    Ok(CellValue {
        t_cell,
        value_f64: rational::to_f64(&value),
        value,
        free_sites: free.len(),
        below_coarsening_side: below,
        method: Some(sol.method),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceRow {
    pub phase: usize,
    /// Primitive integer direction of the normal.
    pub normal: Vec<i64>,
    pub cells: Vec<CellValue>,
    #[serde(serialize_with = "ser_rational")]
    pub estimate: Rational,
    pub estimate_f64: f64,
    /// `|f_last - f_prev|`.
    pub increment: Option<f64>,
}

fn check_sizes(t_list: &[i64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(Error::Precondition("cell size list is empty".into()));
    }
    if t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("cell sizes must be strictly increasing".into()));
    }
    Ok(())
}

fn row_from_cells(phase: usize, normal: Vec<i64>, cells: Vec<CellValue>) -> SurfaceRow {
    let last = cells.last().expect("nonempty");
    let increment = (cells.len() >= 2).then(|| rational::to_f64(&(&last.value - &cells[cells.len() - 2].value).abs()));
    SurfaceRow {
        phase,
        normal,
        estimate: last.value.clone(),
        estimate_f64: last.value_f64,
        increment,
        cells,
    }
}

pub fn fhom_estimate(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    j: usize,
    normal: &[Rational],
    t_list: &[i64],
    execution: Execution,
) -> Result<SurfaceRow> {
    let nu = primitive_direction(normal)?;
    check_sizes(t_list)?;
    let cells: Result<Vec<CellValue>> = execution.map(t_list, |&t| cell_value_int(model, summary, j, &nu, t)).into_iter().collect();
    Ok(row_from_cells(j, nu, cells?))
}

/// Sum of the per-phase estimates over every phase with an infinite component.
pub fn fhom_total(
    model: &LatticeModel,
    summary: &ConnectivitySummary,
    normal: &[Rational],
    t_list: &[i64],
    execution: Execution,
) -> Result<(Rational, Vec<SurfaceRow>)> {
    let phases: Vec<usize> = (1..=model.num_phases()).filter(|&j| summary.has_infinite_component(j)).collect();
    let nu = primitive_direction(normal)?;
    let table = SurfaceTable::compute(model, summary, &phases, &[nu], t_list, execution)?;
    let total = table.rows.iter().map(|r| r.estimate.clone()).sum();
    Ok((total, table.rows))
}

/// Surface tension per `(phase, direction)`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SurfaceTable {
    pub rows: Vec<SurfaceRow>,
}

impl SurfaceTable {
    /// All `(phase, normal, T)` cell problems, solved as one parallel work list.
    pub fn compute(
        model: &LatticeModel,
        summary: &ConnectivitySummary,
        phases: &[usize],
        normals: &[Vec<i64>],
        t_list: &[i64],
        execution: Execution,
    ) -> Result<Self> {
        check_sizes(t_list)?;
        let normals: Vec<Vec<i64>> = normals.iter().map(|n| integer_normal(n)).collect::<Result<_>>()?;
        let mut work = Vec::new();
        for &j in phases {
            for (ni, _) in normals.iter().enumerate() {
                for &t in t_list {
                    work.push((j, ni, t));
                }
            }
        }
        let values = execution.map(&work, |&(j, ni, t)| cell_value_int(model, summary, j, &normals[ni], t));
        let mut values = values.into_iter();
        let mut rows = Vec::new();
        for &j in phases {
            for nu in &normals {
                let cells: Result<Vec<CellValue>> = values.by_ref().take(t_list.len()).collect();
                rows.push(row_from_cells(j, nu.clone(), cells?));
            }
        }
        Ok(Self { rows })
    }

    /// A table of known values, one per `(phase, direction)`.
    pub fn from_values(entries: impl IntoIterator<Item = (usize, Vec<i64>, Rational)>) -> Result<Self> {
        let mut rows = Vec::new();
        for (phase, normal, value) in entries {
            let normal = integer_normal(&normal)?;
            rows.push(SurfaceRow {
                phase,
                normal,
                cells: Vec::new(),
                estimate_f64: rational::to_f64(&value),
                estimate: value,
                increment: None,
            });
        }
        Ok(Self { rows })
    }

    pub fn get(&self, phase: usize, normal: &[i64]) -> Result<f64> {
        let nu = integer_normal(normal)?;
        self.rows
            .iter()
            .find(|r| r.phase == phase && r.normal == nu)
            .map(|r| r.estimate_f64)
            .ok_or_else(|| Error::MissingEntry(format!("surface tension of phase {phase} for normal {nu:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::classify;
    use crate::exec::Execution;
    use crate::fixtures;
    use crate::ground_state::{minimize_enum, DEFAULT_ENUMERATION_CAP};
    use crate::rational::{int, ratio};

    fn load(text: &str) -> (LatticeModel, ConnectivitySummary) {
        let m = LatticeModel::from_json(text).unwrap();
        let s = classify(&m);
        (m, s)
    }

    #[test]
    fn primitive_directions() {
        assert_eq!(primitive_direction(&[int(2), int(0)]).unwrap(), vec![1, 0]);
        assert_eq!(primitive_direction(&[ratio(1, 2), ratio(1, 3)]).unwrap(), vec![3, 2]);
        assert_eq!(primitive_direction(&[int(-4), int(6)]).unwrap(), vec![-2, 3]);
        assert!(primitive_direction(&[int(0), int(0)]).is_err());
    }

    #[test]
    fn basis_is_orthogonal() {
        for nu in [vec![1, 2, 3], vec![0, 0, 1], vec![2, -1, 0], vec![1, 1, 1, 1]] {
            let b = orthogonal_basis(&nu);
            assert_eq!(b.len(), nu.len());
            for i in 0..b.len() {
                for k in 0..i {
                    assert_eq!(dot(&b[i], &b[k]), 0);
                }
            }
        }
    }

    #[test]
    fn axis_cube_is_closed_box() {
        let c = RotatedCube::new(&[1, 0], 4);
        assert_eq!(c.sites().len(), 25);
        let c = RotatedCube::new(&[1, 1], 4);
        // |x+y| <= 2 sqrt2 and |x-y| <= 2 sqrt2, i.e. |x+y|, |x-y| <= 2
        assert_eq!(c.sites().len(), 13);
    }

    #[test]
    fn m1_cell_value_is_one_for_every_size() {
        let (m, s) = load(fixtures::M1);
        for t in [2, 3, 4, 8, 17] {
            assert_eq!(cell_value(&m, &s, 1, &[int(1)], t).unwrap().value, int(1), "T = {t}");
            assert_eq!(cell_value(&m, &s, 1, &[int(-3)], t).unwrap().value, int(1));
        }
        let row = fhom_estimate(&m, &s, 1, &[int(1)], &[2, 4, 8], Execution::Sequential).unwrap();
        assert_eq!(row.estimate, int(1));
        assert_eq!(row.increment, Some(0.0));
    }

    #[test]
    fn m3_cell_value_is_size_independent() {
        let (m, s) = load(fixtures::M3);
        let v: Vec<Rational> = [2, 5, 8, 13].iter().map(|&t| cell_value(&m, &s, 1, &[int(1)], t).unwrap().value).collect();
        assert!(v.iter().all(|x| *x == v[0]));
    }

    #[test]
    fn two_chains_add_up() {
        let (m, s) = load(fixtures::M2);
        let (total, rows) = fhom_total(&m, &s, &[int(1)], &[2, 4], Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(total, int(3));
    }

    #[test]
    fn errors() {
        let (m, s) = load(fixtures::M1);
        assert!(fhom_estimate(&m, &s, 1, &[int(0)], &[2, 4], Execution::Sequential).is_err());
        assert!(fhom_estimate(&m, &s, 1, &[int(1)], &[4, 2], Execution::Sequential).is_err());
        assert!(cell_value(&m, &s, 2, &[int(1)], 4).is_err());
        assert!(cell_value(&m, &s, 1, &[int(1), int(0)], 4).is_err());
    }

    #[test]
    fn symmetric_and_homogeneous_on_2d_fixtures() {
        for text in [fixtures::FIG8, fixtures::FIG9] {
            let (m, s) = load(text);
            for nu in [[1, 0], [0, 1], [1, 1], [2, 1]] {
                let a = cell_value(&m, &s, 1, &[int(nu[0]), int(nu[1])], 6).unwrap().value;
                let b = cell_value(&m, &s, 1, &[int(-nu[0]), int(-nu[1])], 6).unwrap().value;
                let c = cell_value(&m, &s, 1, &[ratio(3 * nu[0], 7), ratio(3 * nu[1], 7)], 6).unwrap().value;
                assert_eq!(a, b);
                assert_eq!(a, c);
                assert!(a > int(0));
            }
        }
    }

    #[test]
    fn cut_matches_enumeration_on_small_cells() {
        for text in [fixtures::FIG8, fixtures::FIG9] {
            let (m, s) = load(text);
            for nu in [[1, 0], [1, 1], [1, 2]] {
                for t in [2, 3, 4] {
                    let (g, free) = cell_instance(&m, &s, 1, &nu, t).unwrap();
                    if free.len() > 20 {
                        continue;
                    }
                    let e = minimize_enum(&g, DEFAULT_ENUMERATION_CAP, Execution::Sequential).unwrap();
                    let c = minimize_cut(&g).unwrap();
                    assert_eq!(e.energy, c.energy);
                }
            }
        }
    }

    #[test]
    fn table_lookup() {
        let t = SurfaceTable::from_values([(1, vec![2, 0], int(1))]).unwrap();
        assert_eq!(t.get(1, &[1, 0]).unwrap(), 1.0);
        assert!(matches!(t.get(1, &[0, 1]), Err(Error::MissingEntry(_))));
        assert!(t.get(2, &[1, 0]).is_err());
    }
}
