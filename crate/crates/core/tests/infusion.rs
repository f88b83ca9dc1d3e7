use priorlab::infusion::{
    forward, forward_baseline, forward_with, grad_check, grad_check_scaled, infuse,
    visual_extract, ImagePair, InfusionSites, Matrix, PriorScalar, ToyModel, DEFAULT_SEED,
};
use proptest::prelude::*;

fn fixture() -> (ToyModel, ImagePair) {
    (ToyModel::new(DEFAULT_SEED), ImagePair::fixture(DEFAULT_SEED, 16))
}

fn bits(m: &Matrix<f64>) -> Vec<u64> {
    m.data.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn embedding_is_deterministic_and_view_ordered() {
    let (model, images) = fixture();
    let a = visual_extract(&images, &model).unwrap();
    let b = visual_extract(&images, &ToyModel::new(DEFAULT_SEED)).unwrap();
    assert_eq!(bits(&a.0), bits(&b.0));
    let swapped = visual_extract(&images.swapped(), &model).unwrap();
    assert_ne!(a, swapped);
}

#[test]
fn infuse_composes() {
    let (model, images) = fixture();
    let v = visual_extract(&images, &model).unwrap();
    let twice = infuse(&infuse(&v, PriorScalar(0.3)), PriorScalar(0.45));
    let once = infuse(&v, PriorScalar(0.75));
    for (x, y) in twice.0.data.iter().zip(&once.0.data) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn forward_is_deterministic() {
    let (model, images) = fixture();
    let a = forward(&images, PriorScalar(1.0), &model, 12).unwrap();
    let b = forward(&images, PriorScalar(1.0), &model, 12).unwrap();
    assert_eq!(a, b);
}

#[test]
fn prior_changes_latent_and_tokens() {
    let (model, images) = fixture();
    let off = forward(&images, PriorScalar(0.0), &model, 12).unwrap();
    let on = forward(&images, PriorScalar(1.0), &model, 12).unwrap();
    let differing = off
        .latent_new
        .0
        .data
        .iter()
        .zip(&on.latent_new.0.data)
        .filter(|(a, b)| a != b)
        .count();
    assert!(differing > 0);
    assert_ne!(off.tokens, on.tokens, "{:?}", off.tokens);
}

#[test]
fn zero_prior_matches_baseline_bitwise() {
    for seed in 0..5 {
        let model = ToyModel::new(seed);
        let images = ImagePair::fixture(seed + 100, 16);
        let with = forward(&images, PriorScalar(0.0), &model, 12).unwrap();
        let without = forward_baseline(&images, &model, 12).unwrap();
        assert_eq!(with.tokens, without.tokens);
        assert_eq!(bits(&with.latent_new.0), bits(&without.latent_new.0));
    }
}

#[test]
fn sites_do_not_add_weights() {
    let model = ToyModel::new(DEFAULT_SEED);
    let before = model.param_count();
    let images = ImagePair::fixture(1, 16);
    forward_with(&images, PriorScalar(1.0), &model, 4, InfusionSites::BOTH).unwrap();
    forward_with(&images, PriorScalar(1.0), &model, 4, InfusionSites::NONE).unwrap();
    assert_eq!(model.param_count(), before);
}

#[test]
fn errors() {
    let (model, images) = fixture();
    assert!(forward(&images, PriorScalar(1.0), &model, 0).is_err());
    assert!(forward(&images, PriorScalar(f64::NAN), &model, 3).is_err());
    let mut bad = images.clone();
    bad.lateral.data[5] = f64::INFINITY;
    assert!(forward(&bad, PriorScalar(1.0), &model, 3).is_err());
}

#[test]
fn zeroed_memory_has_no_prior_gradient() {
    let (model, images) = fixture();
    let report = grad_check(&model.with_zeroed_memory(), &images, PriorScalar(1.0)).unwrap();
    assert!(report.prior().analytic.abs() <= 1e-8);
    assert!(report.prior().numeric.abs() <= 1e-8);
}

#[test]
fn doubling_loss_doubles_gradient() {
    let (model, images) = fixture();
    let one = grad_check(&model, &images, PriorScalar(1.0)).unwrap();
    let two = grad_check_scaled(&model, &images, PriorScalar(1.0), 2.0).unwrap();
    for (a, b) in one.checks.iter().zip(&two.checks) {
        assert!((2.0 * a.analytic - b.analytic).abs() <= 1e-10);
    }
}

#[test]
fn gradients_on_seeded_fixtures() {
    for seed in [17, 1, 2, 3, 4] {
        let model = ToyModel::new(seed);
        let images = ImagePair::fixture(seed, 16);
        for prior in [0.0, 1.0] {
            let report = grad_check(&model, &images, PriorScalar(prior)).unwrap();
            assert!(report.max_rel_error < 1e-4, "seed {seed}: {report:#?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zero_prior_is_bitwise_identity(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in any::<u64>(),
    ) {
        let img = ImagePair::fixture(seed, rows.max(cols));
        let m = Matrix::from_fn(rows, cols, |r, c| (img.frontal.get(r, c) - 0.5) * 1e3);
        let mut with_neg_zero = m.clone();
        with_neg_zero.data[0] = -0.0;
        for t in [m, with_neg_zero] {
            let out = infuse(&t, PriorScalar(0.0));
            prop_assert_eq!(out.shape(), t.shape());
            prop_assert_eq!(bits(&out), bits(&t));
        }
    }

    #[test]
    fn output_never_exceeds_max_len(seed in 0u64..50, max_len in 1usize..8, prior in 0u8..2) {
        let model = ToyModel::new(seed);
        let out = forward(&ImagePair::fixture(seed, 16), PriorScalar(f64::from(prior)), &model, max_len).unwrap();
        prop_assert!(out.tokens.len() <= max_len);
    }
}
