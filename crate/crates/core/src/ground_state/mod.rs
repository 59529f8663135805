//! Exact minimization of finite binary quadratic energies
//! `sum w (x_u - x_v)^2 + sum h_u(x_u)` with fixed spins and equality groups.

mod anneal;
mod cut;
mod enumerate;
mod fold;
pub mod maxflow;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rational::{self, Rational};
use crate::spin::Spin;

pub use anneal::{minimize_anneal, AnnealSchedule};
pub use cut::{minimize_cut, minimize_cut_gauged};
pub use enumerate::minimize_enum;

pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Clone, Debug, Default)]
pub struct GroundStateInstance {
    fixed: Vec<Option<Spin>>,
    pairs: Vec<(usize, usize, Rational)>,
    unary: Vec<[Rational; 2]>,
    parent: Vec<usize>,
}

impl GroundStateInstance {
    pub fn new(num_vars: usize) -> Self {
        Self {
            fixed: vec![None; num_vars],
            pairs: Vec::new(),
            unary: vec![[Rational::zero(), Rational::zero()]; num_vars],
            parent: (0..num_vars).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.fixed.len()
    }

    pub fn add_var(&mut self) -> usize {
        let v = self.fixed.len();
        self.fixed.push(None);
        self.unary.push([Rational::zero(), Rational::zero()]);
        self.parent.push(v);
        v
    }

    pub fn fix(&mut self, v: usize, spin: Spin) {
        self.fixed[v] = Some(spin);
    }

    pub fn fixed(&self, v: usize) -> Option<Spin> {
        self.fixed[v]
    }

    /// Adds `w (x_u - x_v)^2`. Repeated pairs accumulate.
    pub fn add_pair(&mut self, u: usize, v: usize, w: Rational) {
        assert!(u < self.num_vars() && v < self.num_vars(), "pair ({u}, {v}) out of range");
        if u != v && !w.is_zero() {
            self.pairs.push((u, v, w));
        }
    }

    /// Adds `plus` to the energy when `x_v = +1` and `minus` when `x_v = -1`.
    pub fn add_unary(&mut self, v: usize, plus: Rational, minus: Rational) {
        self.unary[v][0] += plus;
        self.unary[v][1] += minus;
    }

    /// Forces `x_u = x_v`.
    pub fn join(&mut self, u: usize, v: usize) {
        let (a, b) = (self.root(u), self.root(v));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
        }
    }

    fn root(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// Representative (smallest member) of the equality group of each variable.
    pub fn group_ids(&self) -> Vec<usize> {
        (0..self.num_vars()).map(|v| self.root(v)).collect()
    }

    pub fn pairs(&self) -> &[(usize, usize, Rational)] {
        &self.pairs
    }

    pub fn unary(&self, v: usize) -> &[Rational; 2] {
        &self.unary[v]
    }

    /// Returns the flipped instance: fixed spins negated, unary entries swapped.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for f in out.fixed.iter_mut() {
            *f = f.map(|s| -s);
        }
        for u in out.unary.iter_mut() {
            u.swap(0, 1);
        }
        out
    }

    pub fn check_assignment(&self, x: &[Spin]) -> Result<()> {
        if x.len() != self.num_vars() {
            return Err(Error::Precondition(format!(
                "assignment has {} entries, instance has {} variables",
                x.len(),
                self.num_vars()
            )));
        }
        for (v, f) in self.fixed.iter().enumerate() {
            if let Some(s) = f {
                if x[v] != *s {
                    return Err(Error::Precondition(format!("variable {v} is fixed to {s}")));
                }
            }
        }
        for v in 0..self.num_vars() {
            let r = self.root(v);
            if x[v] != x[r] {
                return Err(Error::Precondition(format!("variables {r} and {v} must be equal")));
            }
        }
        Ok(())
    }

    pub fn energy(&self, x: &[Spin]) -> Result<Rational> {
        self.check_assignment(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[Spin]) -> Rational {
        let mut e = Rational::zero();
        for (u, v, w) in &self.pairs {
            if x[*u] != x[*v] {
                e += w * Rational::from_integer(4.into());
            }
        }
        for (v, h) in self.unary.iter().enumerate() {
            e += &h[x[v].slot()];
        }
        e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Nothing left to decide once fixed spins are propagated.
    Explicit,
    Enumeration,
    Mincut,
    Annealing,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub assignment: Vec<Spin>,
    pub energy: Rational,
    pub method: Method,
    pub exact: bool,
}

impl Solution {
    pub fn energy_f64(&self) -> f64 {
        rational::to_f64(&self.energy)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub enumeration_cap: usize,
    /// Fall back to annealing when no exact method applies.
    pub anneal: Option<(u64, AnnealSchedule)>,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            anneal: None,
            execution: Execution::default(),
        }
    }
}

/// Picks an exact solver: enumeration up to the cap, then min-cut, then
/// min-cut after a gauge flip, then annealing if allowed.
pub fn solve(instance: &GroundStateInstance, options: &SolveOptions) -> Result<Solution> {
    let folded = fold::fold(instance)?;
    if folded.num_free() == 0 {
        return Ok(folded.solution(instance, &[], Method::Explicit, true));
    }
    if folded.num_free() <= options.enumeration_cap {
        return enumerate::solve_folded(instance, &folded, options.execution);
    }
    if folded.is_submodular().is_ok() {
        return cut::solve_folded(instance, &folded);
    }
    if let Some(gauge) = folded.balancing_gauge() {
        return cut::solve_gauged(instance, &folded, &gauge);
    }
    match &options.anneal {
        Some((seed, schedule)) => Ok(anneal::solve_folded(instance, &folded, *seed, schedule)),
        None => Err(Error::Unsolvable),
    }
}
