//! Johnson-Lindenstrauss sketch of incrementally built odd-set dual
//! variables. Stores one reduced vector per node; the sets themselves are
//! never kept. Projection columns are regenerated from a counter-based
//! seed, so the random matrix costs no memory.

use crate::config::JL_C;
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct NodeSketch {
    /// reduced dimension = ceil(C/eps^2 * ln n)
    pub k: usize,
    n: usize,
    seed: u64,
    /// number of sets absorbed
    pub t: u64,
    vectors: Vec<Vec<f64>>,
    /// upper clamp for pair-sum estimates (3 under the cardinality side
    /// constraint; callers with other caps may widen it)
    clamp_hi: f64,
}

/// Fresh projection column for set index `t`: k entries ~ N(0, 1/k),
/// reproducible from (seed, t) without storing the matrix.
fn column(seed: u64, t: u64, k: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t.wrapping_mul(0x9e3779b97f4a7c15));
    let scale = 1.0 / (k as f64).sqrt();
    (0..k)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect()
}

impl NodeSketch {
    pub fn new(n: usize, eps: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) || eps == 0.0 {
            return Err(Error::Argument(format!(
                "sketch eps must be in (0,1), got {eps}"
            )));
        }
        if n < 2 {
            return Err(Error::Argument("sketch needs n >= 2".into()));
        }
        let k = (JL_C / (eps * eps) * (n as f64).ln()).ceil() as usize;
        Ok(NodeSketch {
            k,
            n,
            seed,
            t: 0,
            vectors: vec![vec![0.0; k]; n],
            clamp_hi: 3.0,
        })
    }

    pub fn with_clamp(mut self, hi: f64) -> Self {
        self.clamp_hi = hi;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Words of state held (n vectors of dimension k).
    pub fn words(&self) -> i64 {
        (self.n * self.k) as i64
    }

    /// Absorb one set with weight z: S_i += sqrt(z) * a_t for i in U.
    pub fn add_set(&mut self, members: &[usize], z: f64) -> Result<()> {
        if z < 0.0 {
            return Err(Error::Argument(format!("negative set weight {z}")));
        }
        let col = column(self.seed, self.t, self.k);
        self.t += 1;
        if z > 0.0 {
            let s = z.sqrt();
            for &i in members {
                debug_assert!(i < self.n);
                let vi = &mut self.vectors[i];
                for (d, c) in col.iter().enumerate() {
                    vi[d] += s * c;
                }
            }
        }
        Ok(())
    }

    /// Scale the whole accumulated mass by `factor` (vectors scale by its
    /// square root); used when a framework blends its candidate.
    pub fn scale(&mut self, factor: f64) {
        assert!(factor >= 0.0);
        let s = factor.sqrt();
        for v in &mut self.vectors {
            for x in v.iter_mut() {
                *x *= s;
            }
        }
    }

    /// ||S_i||^2, estimating the total set weight touching node i.
    pub fn node_sum(&self, i: usize) -> f64 {
        self.vectors[i].iter().map(|x| x * x).sum()
    }

    /// (||S_i||^2 + ||S_j||^2 - ||S_i - S_j||^2) / 2, estimating the total
    /// weight of sets containing both i and j; clamped to [0, clamp_hi].
    pub fn pair_sum(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::Argument("pair_sum needs i != j".into()));
        }
        let (si, sj) = (&self.vectors[i], &self.vectors[j]);
        let mut ni = 0.0;
        let mut nj = 0.0;
        let mut nd = 0.0;
        for d in 0..self.k {
            ni += si[d] * si[d];
            nj += sj[d] * sj[d];
            let diff = si[d] - sj[d];
            nd += diff * diff;
        }
        let est = (ni + nj - nd) / 2.0;
        Ok(est.clamp(0.0, self.clamp_hi))
    }

    /// Pair-sum estimate additionally clamped by exact per-node totals
    /// maintained outside the sketch (both are legal O(n) state).
    pub fn pair_sum_clamped(&self, i: usize, j: usize, hi: f64) -> Result<f64> {
        let est = self.pair_sum(i, j)?;
        Ok(est.min(hi.max(0.0)))
    }
}
