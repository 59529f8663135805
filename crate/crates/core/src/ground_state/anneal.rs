//! Seeded single-flip Metropolis annealing. Returns an upper bound.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fold::{fold, Folded};
use super::{GroundStateInstance, Method, Solution};
use crate::error::Result;
use crate::spin::Spin;

/// Geometric cooling from `t_hot` to `t_cold` (energy units) over `sweeps`
/// passes through the free groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub t_hot: f64,
    pub t_cold: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self { sweeps: 2000, t_hot: 4.0, t_cold: 0.01 }
    }
}

pub fn minimize_anneal(g: &GroundStateInstance, seed: u64, schedule: &AnnealSchedule) -> Result<Solution> {
    let f = fold(g)?;
    Ok(solve_folded(g, &f, seed, schedule))
}

pub(crate) fn solve_folded(g: &GroundStateInstance, f: &Folded, seed: u64, schedule: &AnnealSchedule) -> Solution {
    let n = f.num_free();
    if n == 0 {
        return f.solution(g, &[], Method::Annealing, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = f.adjacency();
    let unit = f.scale.to_f64().unwrap_or(1.0);
    let mut x: Vec<Spin> = (0..n).map(|_| Spin::from_sign(rng.random_bool(0.5))).collect();
    let mut energy = f.energy(&x);
    let mut best = (energy, x.clone());
    let sweeps = schedule.sweeps.max(1);
    let ratio = (schedule.t_cold / schedule.t_hot).max(1e-12);
    for sweep in 0..sweeps {
        let frac = if sweeps == 1 { 1.0 } else { sweep as f64 / (sweeps - 1) as f64 };
        let temp = schedule.t_hot * ratio.powf(frac) * unit;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let old = x[i];
            let new = -old;
            let mut delta = f.unary[i][new.slot()] - f.unary[i][old.slot()];
            for &(k, c) in &adj[i] {
                delta += if x[k] == old { c } else { -c };
            }
            if delta <= 0 || rng.random::<f64>() < (-(delta as f64) / temp).exp() {
                x[i] = new;
                energy += delta;
                if energy < best.0 {
                    best = (energy, x.clone());
                }
            }
        }
    }
    // greedy descent from the best state seen
    let mut x = best.1;
    loop {
        let mut improved = false;
        for i in 0..n {
            let old = x[i];
            let new = -old;
            let mut delta = f.unary[i][new.slot()] - f.unary[i][old.slot()];
            for &(k, c) in &adj[i] {
                delta += if x[k] == old { c } else { -c };
            }
            if delta < 0 {
                x[i] = new;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    f.solution(g, &x, Method::Annealing, false)
}
