//! Addressable random streams.
//!
//! Every stream is a ChaCha8 generator whose key is a pure function of
//! `(master_seed, tag, sample_index, role)`, so any sample of any experiment
//! can be regenerated on its own, in any order, on any worker.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_0F_CE11_5EED;

/// Means below this are drawn by inversion, the rest by transformed rejection.
pub const POISSON_INVERSION_LIMIT: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub tag: String,
}

impl SeedSpec {
    pub fn new(master_seed: u64, tag: impl Into<String>) -> Self {
        Self { master_seed, tag: tag.into() }
    }

    /// Same master seed, different experiment tag.
    pub fn with_tag(&self, tag: impl Into<String>) -> Self {
        Self { master_seed: self.master_seed, tag: tag.into() }
    }

    pub fn stream(&self, sample_index: u64, role: Role) -> Stream {
        derive_stream(self, sample_index, role)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Environment,
    Color,
    /// Numbered auxiliary streams (resampling trials, extra colourings, ...).
    Auxiliary(u32),
}

impl Role {
    fn code(self) -> u64 {
        match self {
            Role::Environment => 0,
            Role::Color => 1,
            Role::Auxiliary(k) => 2 + k as u64,
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn derive_stream(seed: &SeedSpec, sample_index: u64, role: Role) -> Stream {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(seed.tag.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&sample_index.to_le_bytes());
    key[24..32].copy_from_slice(&role.code().to_le_bytes());
    Stream { rng: ChaCha8Rng::from_seed(key) }
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`, `n > 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.rng.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Poisson variate with the given mean (`mean >= 0`).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(mean >= 0.0 && mean.is_finite(), "poisson mean {mean}");
        if mean == 0.0 {
            0
        } else if mean < POISSON_INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut pk = (-mean).exp();
        let mut cdf = pk;
        while u >= cdf {
            k += 1;
            pk *= mean / k as f64;
            let next = cdf + pk;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    }

    /// Hörmann's transformed rejection with squeeze (PTRS).
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}
