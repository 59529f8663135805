//! Piecewise-constant multiphase targets and the limit functional.
//!
//! Interfaces of box unions and axis-aligned slabs are read off a grid
//! built from every coordinate that appears; oblique slabs (planar only)
//! cut the grid cells into convex polygons.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{parse_domain, DomainSpec, RawDomain};
use crate::bulk_density::PhiTable;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::spin::Spin;
use crate::surface_tension::{primitive_direction, SurfaceTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl RealBox {
    fn contains(&self, x: &[Rational]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| a <= x && x < b)
    }

    fn contains_f64(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((&x, a), b)| rational::to_f64(a) <= x && x < rational::to_f64(b))
    }
}

/// One phase of a target: `+1` where the defining region holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhaseTarget {
    Constant(Spin),
    /// `+1` where `<x, normal> > offset`.
    Slab { normal: Vec<Rational>, offset: Rational },
    /// `+1` on the union of the half-open boxes.
    Boxes(Vec<RealBox>),
}

impl PhaseTarget {
    pub fn value_at(&self, x: &[Rational]) -> Spin {
        match self {
            PhaseTarget::Constant(s) => *s,
            PhaseTarget::Slab { normal, offset } => {
                let p: Rational = x.iter().zip(normal).map(|(a, b)| a * b).sum();
                Spin::from_sign(&p > offset)
            }
            PhaseTarget::Boxes(boxes) => Spin::from_sign(boxes.iter().any(|b| b.contains(x))),
        }
    }

    fn value_at_f64(&self, x: &[f64]) -> Spin {
        match self {
            PhaseTarget::Constant(s) => *s,
            PhaseTarget::Slab { normal, offset } => {
                let p: f64 = x.iter().zip(normal).map(|(a, b)| a * rational::to_f64(b)).sum();
                Spin::from_sign(p > rational::to_f64(offset))
            }
            PhaseTarget::Boxes(boxes) => Spin::from_sign(boxes.iter().any(|b| b.contains_f64(x))),
        }
    }

    /// The oblique normal of a slab that is not axis-aligned.
    fn oblique(&self) -> Option<(&[Rational], &Rational)> {
        match self {
            PhaseTarget::Slab { normal, offset } if normal.iter().filter(|c| !c.is_zero()).count() > 1 => {
                Some((normal, offset))
            }
            _ => None,
        }
    }

    fn grid_coordinates(&self, axis: usize) -> Vec<Rational> {
        match self {
            PhaseTarget::Constant(_) => Vec::new(),
            PhaseTarget::Slab { normal, offset } => {
                if self.oblique().is_none() && !normal[axis].is_zero() {
                    vec![offset / &normal[axis]]
                } else {
                    Vec::new()
                }
            }
            PhaseTarget::Boxes(boxes) => boxes.iter().flat_map(|b| [b.lo[axis].clone(), b.hi[axis].clone()]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiphaseField {
    pub phases: Vec<PhaseTarget>,
}

impl MultiphaseField {
    pub fn new(phases: Vec<PhaseTarget>) -> Self {
        Self { phases }
    }

    pub fn value_at(&self, x: &[Rational]) -> Vec<Spin> {
        self.phases.iter().map(|p| p.value_at(x)).collect()
    }

    pub fn validate(&self, d: usize, num_phases: usize) -> Result<()> {
        if self.phases.len() != num_phases {
            return Err(Error::DomainMismatch(format!("target has {} phases, model has {num_phases}", self.phases.len())));
        }
        for (j, p) in self.phases.iter().enumerate() {
            match p {
                PhaseTarget::Constant(_) => {}
                PhaseTarget::Slab { normal, .. } => {
                    if normal.len() != d {
                        return Err(Error::DomainMismatch(format!("slab normal of phase {} has wrong length", j + 1)));
                    }
                    if normal.iter().all(Zero::is_zero) {
                        return Err(Error::Precondition(format!("slab normal of phase {} is zero", j + 1)));
                    }
                    if p.oblique().is_some() && d != 2 {
                        return Err(Error::Precondition("oblique slabs are supported in dimension 2 only".into()));
                    }
                }
                PhaseTarget::Boxes(boxes) => {
                    if boxes.iter().any(|b| b.lo.len() != d || b.hi.len() != d) {
                        return Err(Error::DomainMismatch(format!("box of phase {} has wrong dimension", j + 1)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Directions whose surface tension `f_hom` may look up: the axes, and
    /// the primitive normal of every oblique slab.
    pub fn interface_normals(&self, d: usize) -> Result<Vec<Vec<i64>>> {
        let mut out: Vec<Vec<i64>> = (0..d)
            .map(|a| {
                let mut e = vec![0; d];
                e[a] = 1;
                e
            })
            .collect();
        for p in &self.phases {
            if let Some((n, _)) = p.oblique() {
                let prim = primitive_direction(n)?;
                if !out.contains(&prim) {
                    out.push(prim);
                }
            }
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<(Option<DomainSpec>, Self)> {
        let raw: RawTarget = serde_json::from_str(text).map_err(|e| Error::Schema {
            locus: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let omega = raw.omega.as_ref().map(parse_domain).transpose()?;
        let parse = |v: &[String]| v.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>();
        let mut phases = Vec::new();
        for p in raw.phases {
            phases.push(match p {
                RawPhase::Constant(v) => PhaseTarget::Constant(Spin::from_value(v).ok_or_else(|| Error::Schema {
                    locus: "constant".into(),
                    message: format!("spin must be 1 or -1, got {v}"),
                })?),
                RawPhase::Slab { normal, offset } => PhaseTarget::Slab { normal: parse(&normal)?, offset: rational::parse(&offset)? },
                RawPhase::Boxes(boxes) => PhaseTarget::Boxes(
                    boxes
                        .iter()
                        .map(|b| Ok(RealBox { lo: parse(&b.lo)?, hi: parse(&b.hi)? }))
                        .collect::<Result<_>>()?,
                ),
            });
        }
        Ok((omega, Self { phases }))
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    #[serde(default)]
    omega: Option<RawDomain>,
    phases: Vec<RawPhase>,
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawPhase {
    Constant(i64),
    Slab { normal: Vec<String>, offset: String },
    Boxes(Vec<RawDomain>),
}

type Polygon = Vec<[f64; 2]>;

fn polygon_area_centroid(p: &Polygon) -> (f64, [f64; 2]) {
    let mut a = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..p.len() {
        let [x0, y0] = p[i];
        let [x1, y1] = p[(i + 1) % p.len()];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let a = a / 2.0;
    if a.abs() < 1e-300 {
        return (0.0, p.first().copied().unwrap_or([0.0, 0.0]));
    }
    (a.abs(), [cx / (6.0 * a), cy / (6.0 * a)])
}

/// The part of `p` where `n . x - c` has the sign of `side`.
fn clip(p: &Polygon, n: [f64; 2], c: f64, side: f64) -> Polygon {
    let f = |q: [f64; 2]| side * (n[0] * q[0] + n[1] * q[1] - c);
    let mut out = Vec::new();
    for i in 0..p.len() {
        let a = p[i];
        let b = p[(i + 1) % p.len()];
        let (fa, fb) = (f(a), f(b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Length of `{n . x = c}` inside the rectangle.
fn line_length_in_rect(n: [f64; 2], c: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let norm2 = n[0] * n[0] + n[1] * n[1];
    let p0 = [c * n[0] / norm2, c * n[1] / norm2];
    let dir = [-n[1], n[0]];
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..2 {
        if dir[a] == 0.0 {
            if p0[a] <= lo[a] || p0[a] >= hi[a] {
                return 0.0;
            }
        } else {
            let (u, v) = ((lo[a] - p0[a]) / dir[a], (hi[a] - p0[a]) / dir[a]);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
    }
    if t1 > t0 {
        (t1 - t0) * norm2.sqrt()
    } else {
        0.0
    }
}

fn surface_value(surface: &SurfaceTable, phase: usize, normal: &[i64]) -> Result<f64> {
    surface.get(phase, normal).or_else(|e| {
        let flipped: Vec<i64> = normal.iter().map(|x| -x).collect();
        surface.get(phase, &flipped).map_err(|_| e)
    })
}

/// Breakdown of `F_hom`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FHomValue {
    pub surface: f64,
    pub bulk: f64,
    pub total: f64,
}

/// `sum_j ∫ f_j(ν) dH^{d-1} + ∫ φ(u) dx` on the box `Ω`.
pub fn f_hom(omega: &DomainSpec, target: &MultiphaseField, surface: &SurfaceTable, phi: &PhiTable) -> Result<FHomValue> {
    let d = omega.dimension();
    target.validate(d, target.phases.len())?;
    let mut grid: Vec<Vec<f64>> = Vec::with_capacity(d);
    for axis in 0..d {
        let (a, b) = (&omega.lo[axis], &omega.hi[axis]);
        let mut coords: Vec<Rational> = vec![a.clone(), b.clone()];
        for p in &target.phases {
            coords.extend(p.grid_coordinates(axis).into_iter().filter(|x| x > a && x < b));
        }
        coords.sort();
        coords.dedup();
        grid.push(coords.iter().map(rational::to_f64).collect());
    }
    let oblique: Vec<(usize, [f64; 2], f64, Vec<i64>)> = target
        .phases
        .iter()
        .enumerate()
        .filter_map(|(j, p)| p.oblique().map(|(n, c)| (j, n, c)))
        .map(|(j, n, c)| {
            let prim = primitive_direction(n)?;
            Ok((j, [rational::to_f64(&n[0]), rational::to_f64(&n[1])], rational::to_f64(c), prim))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<usize> = grid.iter().map(|g| g.len() - 1).collect();
    let ncells: usize = cells.iter().product();
    let cell_index = |mut i: usize| -> Vec<usize> {
        let mut out = vec![0; d];
        for a in (0..d).rev() {
            out[a] = i % cells[a];
            i /= cells[a];
        }
        out
    };
    let center = |idx: &[usize]| -> Vec<f64> { (0..d).map(|a| 0.5 * (grid[a][idx[a]] + grid[a][idx[a] + 1])).collect() };

    let mut bulk = 0.0;
    let mut surf = 0.0;
    for ci in 0..ncells {
        let idx = cell_index(ci);
        let lo: Vec<f64> = (0..d).map(|a| grid[a][idx[a]]).collect();
        let hi: Vec<f64> = (0..d).map(|a| grid[a][idx[a] + 1]).collect();

        // bulk over the pieces of this cell
        if oblique.is_empty() {
            let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
            let z: Vec<Spin> = target.phases.iter().map(|p| p.value_at_f64(&center(&idx))).collect();
            bulk += phi.get(&z)? * vol;
        } else {
            let mut pieces: Vec<Polygon> = vec![vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]];
            for (_, n, c, _) in &oblique {
                pieces = pieces
                    .iter()
                    .flat_map(|p| [clip(p, *n, *c, 1.0), clip(p, *n, *c, -1.0)])
                    .filter(|p| p.len() >= 3 && polygon_area_centroid(p).0 > 1e-14)
                    .collect();
            }
            for p in &pieces {
                let (area, cen) = polygon_area_centroid(p);
                let z: Vec<Spin> = target.phases.iter().map(|ph| ph.value_at_f64(&cen)).collect();
                bulk += phi.get(&z)? * area;
            }
        }

        // grid faces towards the next cell along each axis
        for a in 0..d {
            if idx[a] + 1 >= cells[a] {
                continue;
            }
            let mut next = idx.clone();
            next[a] += 1;
            let face: f64 = (0..d).filter(|&b| b != a).map(|b| hi[b] - lo[b]).product();
            let (x, y) = (center(&idx), center(&next));
            for (j, p) in target.phases.iter().enumerate() {
                if p.oblique().is_some() {
                    continue;
                }
                if p.value_at_f64(&x) != p.value_at_f64(&y) {
                    let mut e = vec![0i64; d];
                    e[a] = 1;
                    surf += surface_value(surface, j + 1, &e)? * face;
                }
            }
        }
    }
    for (j, n, c, prim) in &oblique {
        let lo = [rational::to_f64(&omega.lo[0]), rational::to_f64(&omega.lo[1])];
        let hi = [rational::to_f64(&omega.hi[0]), rational::to_f64(&omega.hi[1])];
        let len = line_length_in_rect(*n, *c, lo, hi);
        if len > 0.0 {
            surf += surface_value(surface, j + 1, prim)? * len;
        }
    }
    Ok(FHomValue { surface: surf, bulk, total: surf + bulk })
}
