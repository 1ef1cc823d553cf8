//! Deterministic low-discrepancy sampling in coefficient space.
//!
//! Degree multistart and boundary certification need point sets that are
//! reproducible across runs and platforms and that cover balls and spheres
//! evenly. A Kronecker sequence driven by the d-dimensional plastic constant
//! (the R_d sequence) gives both with no state beyond the index; the seed
//! enters as a Cranley-Patterson rotation so distinct seeds give distinct
//! but equally uniform point sets.


/// Default seed used across degree and continuation sampling.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Generator for the R_d Kronecker sequence in the unit cube [0,1)^d,
/// rotated by a seed-derived offset.
#[derive(Debug, Clone)]
pub struct UnitCubeSampler {
    alphas: Vec<f64>,
    offsets: Vec<f64>,
    index: u64,
}

/// Root of x^{d+1} = x + 1 (the d-dimensional plastic constant), by Newton.
fn harmonious(d: usize) -> f64 {
    let p = (d + 1) as f64;
    let mut x = 1.5f64;
    for _ in 0..64 {
        let f = x.powf(p) - x - 1.0;
        let df = p * x.powf(p - 1.0) - 1.0;
        x -= f / df;
    }
    x
}

/// SplitMix64 step; enough mixing to derive per-dimension rotations.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl UnitCubeSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        let g = harmonious(dim);
        let mut alphas = Vec::with_capacity(dim);
        let mut a = 1.0f64;
        for _ in 0..dim {
            a /= g;
            alphas.push(a);
        }
        let mut state = seed ^ 0xA076_1D64_78BD_642F;
        let offsets = (0..dim)
            .map(|_| (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64)
            .collect();
        UnitCubeSampler {
            alphas,
            offsets,
            index: 0,
        }
    }

    /// Next point in [0,1)^d.
    pub fn next_point(&mut self) -> Vec<f64> {
        self.index += 1;
        let n = self.index as f64;
        self.alphas
            .iter()
            .zip(&self.offsets)
            .map(|(&a, &off)| (n * a + off).fract())
            .collect()
    }
}

/// Maps a unit-cube point to the cube [-1,1]^d.
fn to_symmetric(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&t| 2.0 * t - 1.0).collect()
}

/// Deterministic sampler producing points in coefficient space, scaled so a
/// caller-supplied norm places them inside or on a ball.
#[derive(Debug, Clone)]
pub struct BallSampler {
    cube: UnitCubeSampler,
}

impl BallSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        BallSampler {
            cube: UnitCubeSampler::new(dim, seed),
        }
    }

    /// Next raw direction in [-1,1]^d; all-zero draws are skipped so the
    /// caller can always normalize.
    pub fn next_direction(&mut self) -> Vec<f64> {
        loop {
            let p = to_symmetric(&self.cube.next_point());
            if p.iter().any(|&x| x != 0.0) {
                return p;
            }
        }
    }

    /// Next interior point: direction scaled by radius * r^(1/d) with both
    /// drawn from the sequence, strictly inside the unit of the given norm.
    /// `norm` evaluates the caller's norm of a raw coefficient vector.
    pub fn next_in_ball(
        &mut self,
        center: &[f64],
        radius: f64,
        norm: &dyn Fn(&[f64]) -> f64,
    ) -> Vec<f64> {
        let dim = center.len() as f64;
        let dir = self.next_direction();
        let nrm = norm(&dir);
        let u = self.cube.next_point()[0];
        // r^(1/d) law makes the points volume-uniform; 0.999 keeps them
        // strictly interior so boundary admissibility is never at stake.
        let scale = radius * 0.999 * u.powf(1.0 / dim) / nrm;
        center
            .iter()
            .zip(&dir)
            .map(|(&c, &d)| c + scale * d)
            .collect()
    }

    /// Next point exactly on the sphere of the given norm.
    pub fn next_on_sphere(
        &mut self,
        center: &[f64],
        radius: f64,
        norm: &dyn Fn(&[f64]) -> f64,
    ) -> Vec<f64> {
        let dir = self.next_direction();
        let nrm = norm(&dir);
        let scale = radius / nrm;
        center
            .iter()
            .zip(&dir)
            .map(|(&c, &d)| c + scale * d)
            .collect()
    }
}
