//! Contraction of equality groups and fixed spins into a small integer
//! problem over free groups.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{GroundStateInstance, Method, Solution};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::spin::Spin;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Fixed(Spin),
    Free(usize),
}

/// Integer form of an instance: every quantity is the true value times
/// `scale`. Edge costs are paid when the two groups disagree.
#[derive(Clone, Debug)]
pub(crate) struct Folded {
    pub slots: Vec<Slot>,
    /// Smallest variable of each free group, in increasing order.
    pub representatives: Vec<usize>,
    pub scale: BigInt,
    pub constant: i128,
    pub unary: Vec<[i128; 2]>,
    pub edges: Vec<(usize, usize, i128)>,
}

pub(crate) fn fold(g: &GroundStateInstance) -> Result<Folded> {
    let n = g.num_vars();
    let roots = g.group_ids();

    let mut group_spin: BTreeMap<usize, Spin> = BTreeMap::new();
    for v in 0..n {
        if let Some(s) = g.fixed(v) {
            match group_spin.insert(roots[v], s) {
                Some(t) if t != s => {
                    return Err(Error::Precondition(format!(
                        "group of variable {v} contains fixed spins of both signs"
                    )))
                }
                _ => {}
            }
        }
    }

    let mut free_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut representatives = Vec::new();
    for v in 0..n {
        let r = roots[v];
        if r == v && !group_spin.contains_key(&r) {
            free_index.insert(r, representatives.len());
            representatives.push(r);
        }
    }
    let slots: Vec<Slot> = roots
        .iter()
        .map(|r| match group_spin.get(r) {
            Some(&s) => Slot::Fixed(s),
            None => Slot::Free(free_index[r]),
        })
        .collect();

    let scale = rational::common_denominator(
        g.pairs()
            .iter()
            .map(|p| &p.2)
            .chain((0..n).flat_map(|v| g.unary(v).iter())),
    );
    let sc = |r: &Rational| rational::scaled_i128(r, &scale);

    let mut constant: i128 = 0;
    let mut unary = vec![[0i128; 2]; representatives.len()];
    for v in 0..n {
        let h = g.unary(v);
        match slots[v] {
            Slot::Fixed(s) => constant += sc(&h[s.slot()])?,
            Slot::Free(i) => {
                unary[i][0] += sc(&h[0])?;
                unary[i][1] += sc(&h[1])?;
            }
        }
    }

    let mut merged: BTreeMap<(usize, usize), i128> = BTreeMap::new();
    for (u, v, w) in g.pairs() {
        let c = 4 * sc(w)?;
        match (slots[*u], slots[*v]) {
            (Slot::Fixed(a), Slot::Fixed(b)) => {
                if a != b {
                    constant += c;
                }
            }
            (Slot::Fixed(a), Slot::Free(i)) | (Slot::Free(i), Slot::Fixed(a)) => {
                // paid when the free group takes the other value
                unary[i][(-a).slot()] += c;
            }
            (Slot::Free(i), Slot::Free(k)) => {
                if i != k {
                    *merged.entry((i.min(k), i.max(k))).or_insert(0) += c;
                }
            }
        }
    }
    let edges = merged.into_iter().filter(|(_, c)| *c != 0).map(|((i, k), c)| (i, k, c)).collect();

    Ok(Folded { slots, representatives, scale, constant, unary, edges })
}

impl Folded {
    pub fn num_free(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_submodular(&self) -> Result<()> {
        match self.edges.iter().find(|e| e.2 < 0) {
            Some(&(i, k, _)) => Err(Error::NotSubmodular(self.representatives[i], self.representatives[k])),
            None => Ok(()),
        }
    }

    pub fn energy(&self, x: &[Spin]) -> i128 {
        let mut e = self.constant;
        for (i, h) in self.unary.iter().enumerate() {
            e += h[x[i].slot()];
        }
        for &(i, k, c) in &self.edges {
            if x[i] != x[k] {
                e += c;
            }
        }
        e
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, i128)>> {
        let mut adj = vec![Vec::new(); self.num_free()];
        for &(i, k, c) in &self.edges {
            adj[i].push((k, c));
            adj[k].push((i, c));
        }
        adj
    }

    /// A sign per free group turning every edge nonnegative after flipping
    /// the marked groups, if one exists.
    pub fn balancing_gauge(&self) -> Option<Vec<bool>> {
        let adj = self.adjacency();
        let mut flip: Vec<Option<bool>> = vec![None; self.num_free()];
        for start in 0..self.num_free() {
            if flip[start].is_some() {
                continue;
            }
            flip[start] = Some(false);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let fi = flip[i].unwrap();
                for &(k, c) in &adj[i] {
                    let want = fi ^ (c < 0);
                    match flip[k] {
                        None => {
                            flip[k] = Some(want);
                            stack.push(k);
                        }
                        Some(fk) if fk != want => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(flip.into_iter().map(|f| f.unwrap_or(false)).collect())
    }

    /// The same problem in variables `y_i = x_i` or `-x_i` as marked.
    pub fn gauged(&self, flip: &[bool]) -> Folded {
        let mut out = self.clone();
        for (i, h) in out.unary.iter_mut().enumerate() {
            if flip[i] {
                h.swap(0, 1);
            }
        }
        for e in out.edges.iter_mut() {
            if flip[e.0] != flip[e.1] {
                // c [x != x'] = c - c [y != y']
                out.constant += e.2;
                e.2 = -e.2;
            }
        }
        out
    }

    pub fn expand(&self, x: &[Spin]) -> Vec<Spin> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Fixed(z) => z,
                Slot::Free(i) => x[i],
            })
            .collect()
    }

    pub fn solution(&self, g: &GroundStateInstance, x: &[Spin], method: Method, exact: bool) -> Solution {
        let assignment = self.expand(x);
        let energy = g.energy_unchecked(&assignment);
        debug_assert_eq!(
            energy,
            Rational::new(self.energy(x).into(), self.scale.clone()),
            "folded energy disagrees with direct evaluation"
        );
        debug_assert!(!self.scale.is_zero());
        Solution { assignment, energy, method, exact }
    }
}
