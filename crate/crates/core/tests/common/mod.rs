#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use spinhom::ground_state::GroundStateInstance;
use spinhom::lattice::{add, residue_of};
use spinhom::model::BondClass;
use spinhom::rational::{int, ratio};
use spinhom::{LatticeModel, Rational, Spin};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeakSigns {
    /// Weak weights of either sign.
    Any,
    NonNegative,
}

fn all_offsets(d: usize, range: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-range..=range).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.retain(|o| o.iter().any(|&c| c != 0));
    out
}

fn residues(d: usize, t: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        out = out.into_iter().flat_map(|p| (0..t).map(move |c| [p.clone(), vec![c]].concat())).collect();
    }
    out
}

/// A random model for the given dimension and period, not necessarily valid:
/// phases may have islands or several infinite components.
pub fn raw_model(rng: &mut impl RngCore, d: usize, t: i64, n: usize, signs: WeakSigns) -> LatticeModel {
    let mut m = LatticeModel::new(d, t, n).unwrap();
    let res = residues(d, t);
    let mut labels: Vec<usize> = res.iter().map(|_| rng.random_range(0..=n)).collect();
    // every phase gets a residue
    for j in 1..=n {
        if !labels.contains(&j) {
            let i = rng.random_range(0..res.len());
            labels[i] = j;
        }
    }
    for (r, &l) in res.iter().zip(&labels) {
        m.set_label(r, l);
    }
    let strong_w = [ratio(1, 8), ratio(1, 4), ratio(1, 2)];
    let weak_w: Vec<Rational> = match signs {
        WeakSigns::Any => vec![ratio(-1, 4), ratio(-1, 8), ratio(1, 16), ratio(1, 8), ratio(1, 4)],
        WeakSigns::NonNegative => vec![ratio(1, 16), ratio(1, 8), ratio(1, 4)],
    };
    let mut seen: HashSet<(Vec<i64>, Vec<i64>)> = HashSet::new();
    let mut add_bond = |m: &mut LatticeModel, class: BondClass, r: &[i64], o: Vec<i64>, w: Rational| {
        let partner = residue_of(&add(r, &o), t);
        let back: Vec<i64> = o.iter().map(|c| -c).collect();
        if seen.contains(&(r.to_vec(), o.clone())) || seen.contains(&(partner.clone(), back.clone())) {
            return;
        }
        seen.insert((r.to_vec(), o.clone()));
        seen.insert((partner, back));
        m.add_symmetric_bond(class, r, o, w);
    };
    // a lattice of period-T strong bonds inside each labelled residue
    for (r, &l) in res.iter().zip(&labels) {
        if l == 0 {
            continue;
        }
        for a in 0..d {
            if rng.random_bool(0.15) {
                continue;
            }
            let mut o = vec![0; d];
            o[a] = t;
            add_bond(&mut m, BondClass::Strong, r, o, strong_w.choose(rng).unwrap().clone());
        }
    }
    let offsets = all_offsets(d, 2.min(t));
    for (i, r) in res.iter().enumerate() {
        for o in &offsets {
            let partner = residue_of(&add(r, o), t);
            let lp = labels[res.iter().position(|x| *x == partner).unwrap()];
            let l = labels[i];
            let same_phase = l != 0 && l == lp;
            if same_phase {
                if rng.random_bool(0.3) {
                    add_bond(&mut m, BondClass::Strong, r, o.clone(), strong_w.choose(rng).unwrap().clone());
                }
            } else if rng.random_bool(0.35) {
                add_bond(&mut m, BondClass::Weak, r, o.clone(), weak_w.choose(rng).unwrap().clone());
            }
        }
    }
    let g = [int(0), ratio(1, 2), int(1), int(2)];
    for r in &res {
        m.set_forcing(r, g.choose(rng).unwrap().clone(), g.choose(rng).unwrap().clone());
    }
    m
}

/// A random model that passes validation.
pub fn valid_model(rng: &mut impl RngCore, d: usize, signs: WeakSigns) -> LatticeModel {
    loop {
        let t = if d == 1 { rng.random_range(2..=4) } else { 2 };
        let n = if t >= 3 && rng.random_bool(0.5) { 2 } else { 1 };
        let m = raw_model(rng, d, t, n, signs);
        if m.validate().passed {
            return m;
        }
    }
}

/// A submodular instance: nonnegative pair weights, arbitrary unary terms,
/// some fixed spins and joined groups, at most `max_free` free variables.
pub fn submodular_instance(rng: &mut impl RngCore, max_free: usize) -> GroundStateInstance {
    let n = rng.random_range(2..=max_free);
    let mut g = GroundStateInstance::new(n + 2);
    g.fix(n, Spin::Up);
    g.fix(n + 1, Spin::Down);
    for v in 0..n {
        if rng.random_bool(0.6) {
            g.add_unary(v, ratio(rng.random_range(-8..=8), 4), ratio(rng.random_range(-8..=8), 4));
        }
        if rng.random_bool(0.15) {
            g.join(v, rng.random_range(0..n));
        }
    }
    let pairs = rng.random_range(n..=3 * n);
    for _ in 0..pairs {
        let u = rng.random_range(0..n + 2);
        let v = rng.random_range(0..n + 2);
        g.add_pair(u, v, ratio(rng.random_range(0..=12), 8));
    }
    g
}
