//! Deterministic synthetic multi-view datasets for tests, demos and
//! benchmarking dry runs.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::MultiViewDataset;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Two 2-D Gaussian-mixture views over three classes in which each view
/// separates a different class pair: view 0 places class 0 apart from
/// classes {1, 2}, view 1 places class 2 apart from classes {0, 1}. No
/// single view can tell all three classes apart, but the pair of views can.
///
/// With a small `noise` (e.g. 0.3) the fused problem is fully separable.
pub fn complementary_views(per_class: usize, noise: f64, seed: u64) -> MultiViewDataset {
    let n = 3 * per_class;
    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0 = DMatrix::zeros(n, 2);
    let mut v1 = DMatrix::zeros(n, 2);
    for i in 0..n {
        let c = labels[i];
        let center0 = if c == 0 { -2.0 } else { 2.0 };
        let center1 = if c == 2 { 2.0 } else { -2.0 };
        v0[(i, 0)] = center0 + noise * normal(&mut rng);
        v0[(i, 1)] = noise * normal(&mut rng);
        v1[(i, 0)] = center1 + noise * normal(&mut rng);
        v1[(i, 1)] = noise * normal(&mut rng);
    }
    MultiViewDataset::from_parts("complementary", vec![v0, v1], labels)
        .expect("generated dataset is valid")
}

/// Binary dataset whose first view carries the class signal and whose
/// second view is pure label-independent noise.
pub fn informative_plus_noise(per_class: usize, noise: f64, seed: u64) -> MultiViewDataset {
    let n = 2 * per_class;
    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0 = DMatrix::zeros(n, 2);
    let mut v1 = DMatrix::zeros(n, 2);
    for i in 0..n {
        let center = if labels[i] == 0 { -2.0 } else { 2.0 };
        v0[(i, 0)] = center + noise * normal(&mut rng);
        v0[(i, 1)] = noise * normal(&mut rng);
        v1[(i, 0)] = normal(&mut rng);
        v1[(i, 1)] = normal(&mut rng);
    }
    MultiViewDataset::from_parts("informative_plus_noise", vec![v0, v1], labels)
        .expect("generated dataset is valid")
}

/// Dataset with an arbitrary (samples, views, classes) shape and a mild
/// class structure: every (class, view) pair gets a random center and
/// samples scatter around it with unit noise. Classes are balanced up to
/// remainder.
pub fn random_shaped(
    name: &str,
    num_samples: usize,
    view_dims: &[usize],
    num_classes: usize,
    seed: u64,
) -> MultiViewDataset {
    assert!(num_classes >= 2 && num_samples >= 2 * num_classes);
    let labels: Vec<usize> = (0..num_samples).map(|i| i % num_classes).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut views = Vec::with_capacity(view_dims.len());
    for &dim in view_dims {
        let centers: Vec<Vec<f64>> = (0..num_classes)
            .map(|_| (0..dim).map(|_| 2.0 * normal(&mut rng)).collect())
            .collect();
        let mut m = DMatrix::zeros(num_samples, dim);
        for i in 0..num_samples {
            for j in 0..dim {
                m[(i, j)] = centers[labels[i]][j] + normal(&mut rng);
            }
        }
        views.push(m);
    }
    MultiViewDataset::from_parts(name, views, labels).expect("generated dataset is valid")
}
