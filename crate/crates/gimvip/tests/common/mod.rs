//! Shared fixtures for the integration suites.

use gimvip::model::{GSpec, OperatorSpec, ProblemInstance, SetSpec, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random affine d = 5 instance built as a small perturbation of the
/// worked 1-D example (F near 0.75 I, h near 0.5 I, random offsets), so it
/// passes the assumption check with margin while exercising genuine
/// matrix-valued operators and a shifted solution.
pub fn d5_instance() -> ProblemInstance {
    let d = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut perturbed = |base: f64| -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let e: f64 = rng.gen_range(-0.01..0.01);
                        if i == j {
                            base + e
                        } else {
                            e
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mf = perturbed(0.75);
    let mh = perturbed(0.5);
    let mut offset = |half: f64| -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-half..half)).collect()
    };
    let qf = offset(1.0);
    let qh = offset(1.0);
    ProblemInstance::new(
        d,
        OperatorSpec::Affine {
            matrix: mf,
            offset: qf,
        },
        OperatorSpec::Affine {
            matrix: mh,
            offset: qh,
        },
        GSpec::SeparableQuadratic {
            curvature: vec![1.0; d],
            slope: vec![2.0; d],
            constant: 1.0,
        },
        SetSpec::NonnegativeOrthant,
        1.0,
    )
    .expect("d5 fixture is valid")
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize, half: f64) -> Vector {
    (0..d)
        .map(|_| rng.gen_range(-half..half))
        .collect::<Vec<_>>()
        .into()
}
