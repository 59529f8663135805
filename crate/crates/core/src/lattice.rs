//! Integer lattice helpers: residues mod T and rectangular boxes of sites.

/// Componentwise floor division.
pub fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Reduces `k` into `[0, period)^d`.
pub fn residue_of(k: &[i64], period: i64) -> Vec<i64> {
    k.iter().map(|&c| c.rem_euclid(period)).collect()
}

/// Row-major index of a residue (last coordinate fastest).
pub fn residue_index(k: &[i64], period: i64) -> usize {
    k.iter()
        .fold(0usize, |acc, &c| acc * period as usize + c.rem_euclid(period) as usize)
}

pub fn residue_coords(mut index: usize, dimension: usize, period: i64) -> Vec<i64> {
    let mut out = vec![0; dimension];
    for slot in out.iter_mut().rev() {
        *slot = (index % period as usize) as i64;
        index /= period as usize;
    }
    out
}

pub fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

pub fn norm_sq(a: &[i64]) -> i64 {
    a.iter().map(|x| x * x).sum()
}

/// Integers `k` with `-m/2 <= k < m/2`, i.e. the lattice points of the
/// half-open centered cube `[-m/2, m/2)`.
pub fn centered_range(m: i64) -> (i64, i64) {
    // ceil(-m/2) ..= ceil(m/2) - 1
    let lo = -(m.div_euclid(2));
    (lo, lo + m - 1)
}

/// An axis-aligned box of lattice sites `lo + [0, shape)` stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteBox {
    pub lo: Vec<i64>,
    pub shape: Vec<usize>,
}

impl SiteBox {
    pub fn new(lo: Vec<i64>, shape: Vec<usize>) -> Self {
        assert_eq!(lo.len(), shape.len());
        Self { lo, shape }
    }

    /// The centered cube `Q_m = [-m/2, m/2)^d`.
    pub fn centered_cube(dimension: usize, m: i64) -> Self {
        let (lo, _) = centered_range(m);
        Self::new(vec![lo; dimension], vec![m as usize; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter()
            .zip(&self.lo)
            .zip(&self.shape)
            .all(|((&c, &lo), &n)| c >= lo && c < lo + n as i64)
    }

    pub fn index(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&c, &lo), &n) in k.iter().zip(&self.lo).zip(&self.shape) {
            let rel = c - lo;
            if rel < 0 || rel >= n as i64 {
                return None;
            }
            idx = idx * n + rel as usize;
        }
        Some(idx)
    }

    pub fn coords(&self, mut index: usize) -> Vec<i64> {
        let mut out = vec![0; self.lo.len()];
        for axis in (0..self.lo.len()).rev() {
            let n = self.shape[axis];
            out[axis] = self.lo[axis] + (index % n) as i64;
            index /= n;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.coords(i))
    }

    pub fn translated(&self, by: &[i64]) -> Self {
        Self::new(add(&self.lo, by), self.shape.clone())
    }

    pub fn contains_box(&self, other: &SiteBox) -> bool {
        other.is_empty()
            || (0..self.dimension()).all(|a| {
                other.lo[a] >= self.lo[a]
                    && other.lo[a] + other.shape[a] as i64 <= self.lo[a] + self.shape[a] as i64
            })
    }
}
