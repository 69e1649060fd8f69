//! The built-in verification corpus: five mixtures spanning the equality
//! case (the kernel), smooth single bumps, and genuinely multimodal
//! solutions, plus seeded sample-point generation.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::heat_model::{Component, GaussianMixture};

/// A named corpus mixture.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub mixture: GaussianMixture,
}

fn comp(weight: f64, center: f64, time_offset: f64) -> Component {
    Component {
        weight,
        center: DVector::from_row_slice(&[center]),
        time_offset,
    }
}

/// The five standard mixtures (all n = 1).
pub fn standard_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "kernel".into(),
            mixture: GaussianMixture::standard_kernel(1),
        },
        CorpusEntry {
            name: "offset_kernel".into(),
            mixture: GaussianMixture::new(1, vec![comp(1.0, 0.0, 1.0)]).unwrap(),
        },
        CorpusEntry {
            name: "twin_peaks".into(),
            mixture: GaussianMixture::new(1, vec![comp(0.5, -1.0, 0.0), comp(0.5, 1.0, 0.0)])
                .unwrap(),
        },
        CorpusEntry {
            name: "twin_offset".into(),
            mixture: GaussianMixture::new(1, vec![comp(0.5, -2.0, 0.1), comp(0.5, 2.0, 0.1)])
                .unwrap(),
        },
        CorpusEntry {
            name: "tri_cluster".into(),
            mixture: GaussianMixture::new(
                1,
                vec![
                    comp(0.5, -1.5, 0.3),
                    comp(0.3, 0.5, 0.7),
                    comp(0.2, 2.0, 0.2),
                ],
            )
            .unwrap(),
        },
    ]
}

/// The subset admissible for slicing and the elliptic target: every
/// component carries a positive time offset, so u(., 0) is a density.
pub fn slicing_corpus() -> Vec<CorpusEntry> {
    standard_corpus()
        .into_iter()
        .filter(|e| e.mixture.smooth_at_zero())
        .collect()
}

/// Seeded (x, τ) sample points for one mixture: x uniform on the mixture's
/// scale, τ uniform in [tau_min, tau_max]. ChaCha stream, so identical seeds
/// give identical points on every platform.
pub fn sample_points(
    mix: &GaussianMixture,
    count: usize,
    tau_min: f64,
    tau_max: f64,
    seed: u64,
) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = mix.support_half_width(tau_max, 1.5);
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..mix.dim()).map(|_| rng.gen_range(-half..half)).collect();
            let tau = rng.gen_range(tau_min..tau_max);
            (x, tau)
        })
        .collect()
}
