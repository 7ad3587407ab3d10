use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcgeom::calibration::{calibrated_frame, compute_mu, mu_determinant_oracle};
use qcgeom::delta::{analyze, assemble_delta, classify, ClassifyOptions, Label};
use qcgeom::frame::{hat_structure, DEFAULT_TOL_SP1};
use qcgeom::linalg::AffineMap;
use qcgeom::surface::{parse_surface, sample_points, SurfaceSpec};

const MODELS: [(&str, Label); 3] = [
    ("dim = 2\nrho = normq(0) + re(1)", Label::Parabolic),
    ("dim = 2\nrho = normq(0) + normq(1) - 1", Label::Sphere),
    ("dim = 2\nrho = normq(0) - normq(1) + 1", Label::Hyperboloid),
];

fn image(model: usize, seed: u64) -> SurfaceSpec {
    let spec = parse_surface(MODELS[model].0).unwrap();
    let map = AffineMap::random(&mut ChaCha8Rng::seed_from_u64(seed), 2, 1e3);
    spec.affine_image(&map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn label_survives_affine_maps(model in 0usize..3, seed in any::<u64>()) {
        let opts = ClassifyOptions { samples: 16, rng_seed: seed ^ 0x5eed, ..Default::default() };
        let c = classify(&image(model, seed), &opts).unwrap();
        prop_assert_eq!(c.label, MODELS[model].1);
        prop_assert!(c.residual < 1e-6);
    }

    #[test]
    fn pfaffian_matches_determinant(model in 0usize..3, seed in any::<u64>()) {
        let spec = image(model, seed);
        for p in sample_points(&spec, 4, seed).unwrap() {
            let f = hat_structure(&spec, &p, DEFAULT_TOL_SP1).unwrap();
            let (a, b) = (compute_mu(&f).unwrap(), mu_determinant_oracle(&f).unwrap());
            prop_assert!(a > 0.0);
            prop_assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn delta_is_pointwise_constant(model in 0usize..3, seed in any::<u64>()) {
        let spec = image(model, seed);
        let pts = sample_points(&spec, 3, seed).unwrap();
        let d: Vec<_> = pts.iter().map(|p| assemble_delta(&calibrated_frame(&spec, p, DEFAULT_TOL_SP1).unwrap()).unwrap()).collect();
        let scale = d[0].amax();
        for m in &d[1..] {
            prop_assert!((m - &d[0]).amax() < 1e-6 * scale);
        }
    }

    #[test]
    fn seed_determines_analysis(seed in any::<u64>()) {
        let spec = parse_surface(MODELS[1].0).unwrap();
        let opts = ClassifyOptions { samples: 8, rng_seed: seed, ..Default::default() };
        let (a, b) = (analyze(&spec, &opts).unwrap(), analyze(&spec, &opts).unwrap());
        prop_assert_eq!(a.points, b.points);
        prop_assert_eq!(a.delta.matrix, b.delta.matrix);
    }
}
