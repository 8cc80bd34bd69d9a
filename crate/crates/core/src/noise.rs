//! Reproducible Gaussian increments.
//!
//! Each trajectory owns a [`NoiseStream`] keyed by `(seed, stream_id)`.
//! ChaCha is counter based, so distinct stream ids select disjoint
//! keystreams of the same cipher key and can be handed to parallel
//! workers in any order without affecting the results.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct NoiseStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derived stream for a sub-task, e.g. path `i` of an ensemble that is
    /// itself stream `s` of an experiment. Uses a splitmix-style mix so the
    /// ids of different levels do not collide.
    pub fn substream(&self, index: u64) -> Self {
        Self::new(self.seed, mix(self.stream_id, index))
    }

    pub fn standard_normal<T: Real>(&mut self) -> T {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        T::lit(z)
    }

    pub fn fill_normals<T: Real>(&mut self, out: &mut [T]) {
        for x in out {
            *x = self.standard_normal();
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn index_below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniformly distributed unit vector (normalized Gaussian).
    pub fn unit_vector<T: Real>(&mut self, dim: usize) -> Vec<T> {
        loop {
            let mut v = vec![T::zero(); dim];
            self.fill_normals(&mut v);
            let norm = v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt();
            if norm > T::zero() {
                v.iter_mut().for_each(|x| *x = *x / norm);
                return v;
            }
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Stream id for task `index` below `parent`.
pub fn mix(parent: u64, index: u64) -> u64 {
    let mut z = parent.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.wrapping_add(0x632b_e59b_d9b4_e019);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = NoiseStream::new(42, 3);
        let mut b = NoiseStream::new(42, 3);
        for _ in 0..1000 {
            assert_eq!(a.standard_normal::<f64>().to_bits(), b.standard_normal::<f64>().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = NoiseStream::new(42, 3);
        let mut b = NoiseStream::new(42, 4);
        let xa: Vec<f64> = (0..16).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.standard_normal()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn cross_stream_correlation_is_small() {
        let n = 100_000;
        let mut a = NoiseStream::new(1, 0);
        let mut b = NoiseStream::new(1, 1);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y): (f64, f64) = (a.standard_normal(), b.standard_normal());
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let rho = sab / (saa * sbb).sqrt();
        // 5 standard errors of a null correlation
        assert!(rho.abs() < 5.0 / (n as f64).sqrt(), "rho = {rho}");
        assert!((saa / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn unit_vectors_are_normalized() {
        let mut s = NoiseStream::new(9, 9);
        for _ in 0..100 {
            let v: Vec<f64> = s.unit_vector(6);
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
