//! Initial conditions drawn from the two invariant measures.
//!
//! Randomness is counter based: sample `i` of a run with master seed `s`
//! reads the ChaCha8 keystream with key `expand(s)` and stream id `i`. The
//! key expansion is four rounds of SplitMix64. Every draw is therefore a pure
//! function of `(s, i)`, independent of how samples are spread over workers.
//! Uniform reals are the top 53 bits of one `u64` scaled by `2^-53`.

use std::f64::consts::{PI, TAU};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Lattice, ParticleState};
use crate::real::Real;

pub const MAX_REJECTIONS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("rejection sampling gave up after {0} draws inside scatterers")]
    RejectionOverflow(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Uniform position in the free region, uniform direction.
    Flow,
    /// Uniform point on a scatterer surface, cosine-law outgoing direction.
    Map,
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Flow => "flow",
            Measure::Map => "map",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeedPlan {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        SeedPlan { master_seed, sample_index }
    }

    pub fn rng(&self) -> SampleRng {
        SampleRng::new(self.master_seed, self.sample_index)
    }
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent master seed for a named sub-experiment.
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    let mut state = master_seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut state)
}

/// Random stream of one sample.
pub struct SampleRng {
    inner: ChaCha8Rng,
}

impl SampleRng {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        let mut state = master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        SampleRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn unit<const D: usize>(v: [f64; D]) -> [f64; D] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

/// Uniform direction on the unit circle/sphere.
fn isotropic<const D: usize>(rng: &mut SampleRng) -> [f64; D] {
    let mut v = [0.0; D];
    if D == 2 {
        let phi = TAU * rng.uniform();
        v[0] = phi.cos();
        v[1] = phi.sin();
    } else {
        let z = 2.0 * rng.uniform() - 1.0;
        let phi = TAU * rng.uniform();
        let s = (1.0 - z * z).max(0.0).sqrt();
        v[0] = s * phi.cos();
        v[1] = s * phi.sin();
        v[2] = z;
    }
    unit(v)
}

/// Orthonormal basis of the plane orthogonal to `n` (d = 3).
fn tangent_frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axis = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let an: f64 = (0..3).map(|k| axis[k] * n[k]).sum();
    let e1 = unit([axis[0] - an * n[0], axis[1] - an * n[1], axis[2] - an * n[2]]);
    let e2 = [n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
    (e1, e2)
}

/// Flow-measure sample together with the number of position draws it took.
pub fn sample_flow_state_with_attempts<const D: usize>(
    lattice: &Lattice<D>,
    plan: SeedPlan,
) -> Result<(ParticleState<D>, u64), SamplingError> {
    let mut rng = plan.rng();
    let r2 = lattice.radius() * lattice.radius();
    let mut attempts = 0;
    let frac = loop {
        if attempts >= MAX_REJECTIONS {
            return Err(SamplingError::RejectionOverflow(attempts));
        }
        attempts += 1;
        let mut frac = [0.0; D];
        for x in frac.iter_mut() {
            *x = rng.uniform();
        }
        if is_free(lattice, &frac, r2) {
            break frac;
        }
    };
    let velocity = isotropic::<D>(&mut rng);
    Ok((ParticleState { cell: [0; D], frac, velocity }, attempts))
}

/// Whether the in-cell point is at distance `>= r` from every cell corner.
pub(crate) fn is_free<const D: usize>(lattice: &Lattice<D>, frac: &[f64; D], r2: f64) -> bool {
    (0..(1usize << D)).all(|mask| {
        let mut delta = [0.0; D];
        for k in 0..D {
            delta[k] = frac[k] - ((mask >> k) & 1) as f64;
        }
        let x = lattice.to_physical(&delta);
        x.iter().map(|c| c * c).sum::<f64>() >= r2
    })
}

/// Position uniform on the free part of the fundamental cell, direction uniform.
pub fn sample_flow_state<const D: usize>(lattice: &Lattice<D>, plan: SeedPlan) -> Result<ParticleState<D>, SamplingError> {
    sample_flow_state_with_attempts(lattice, plan).map(|(s, _)| s)
}

/// Base point uniform on the scatterer at the origin (lifted off it by the
/// push distance), outgoing direction with density proportional to `v.n`.
pub fn sample_map_state<const D: usize>(lattice: &Lattice<D>, plan: SeedPlan) -> ParticleState<D> {
    let mut rng = plan.rng();
    let n = isotropic::<D>(&mut rng);
    let mut v = [0.0; D];
    if D == 2 {
        let theta = (2.0 * rng.uniform() - 1.0).asin();
        let (s, c) = theta.sin_cos();
        v[0] = c * n[0] - s * n[1];
        v[1] = c * n[1] + s * n[0];
    } else {
        let theta = rng.uniform().sqrt().asin();
        let phi = TAU * rng.uniform();
        let (s, c) = theta.sin_cos();
        let n3 = [n[0], n[1], n[2]];
        let (e1, e2) = tangent_frame(&n3);
        let (sp, cp) = phi.sin_cos();
        for k in 0..3 {
            v[k] = c * n3[k] + s * (cp * e1[k] + sp * e2[k]);
        }
    }
    let lift = lattice.radius() + f64::PUSH;
    lattice.state_near([0; D], &n.map(|x| x * lift), unit(v))
}

pub fn sample_state<const D: usize>(
    lattice: &Lattice<D>,
    measure: Measure,
    plan: SeedPlan,
) -> Result<ParticleState<D>, SamplingError> {
    match measure {
        Measure::Flow => sample_flow_state(lattice, plan),
        Measure::Map => Ok(sample_map_state(lattice, plan)),
    }
}

/// Cosine-law CDF of the angle from the normal in the plane.
pub fn cosine_law_cdf_2d(theta: f64) -> f64 {
    (1.0 + theta.sin()) / 2.0
}

/// Free-area fraction of a planar cell.
pub fn free_fraction_2d(covolume: f64, radius: f64) -> f64 {
    1.0 - PI * radius * radius / covolume
}
