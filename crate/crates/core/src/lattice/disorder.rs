use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// On-site fields `D_i` drawn uniformly from `[−W, W]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DisorderRealization {
    pub w: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl DisorderRealization {
    /// No disorder on `n` sites.
    pub fn clean(n: usize) -> Self {
        Self {
            w: 0.0,
            seed: 0,
            values: alloc::vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// True when every site carries the same field, so the reflection
    /// symmetry of a translation-invariant coupling matrix survives.
    pub fn is_uniform(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` in an ensemble keyed by `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Uniform `[0, 1)` draw for `site` of the stream keyed by `seed`.
///
/// The ChaCha block counter is positioned from the site index, so a site's
/// value does not depend on how many other sites are drawn.
fn unit_draw(rng: &mut ChaCha8Rng, site: usize) -> f64 {
    rng.set_word_pos(2 * site as u128);
    let bits = rng.next_u64() >> 11;
    bits as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_disorder(w: f64, seed: u64, n: usize) -> Result<DisorderRealization> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(invalid("disorder width must be nonnegative and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|site| {
            if w == 0.0 {
                0.0
            } else {
                w * (2.0 * unit_draw(&mut rng, site) - 1.0)
            }
        })
        .collect();
    Ok(DisorderRealization { w, seed, values })
}
