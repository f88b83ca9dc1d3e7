// Add the prior to the visual embedding and latent representation of the
// toy model and watch the decoded tokens change.

use priorlab::infusion::{
    forward, forward_baseline, infuse, visual_extract, ImagePair, PriorScalar, ToyModel,
    DEFAULT_SEED,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ToyModel::new(DEFAULT_SEED);
    let images = ImagePair::fixture(DEFAULT_SEED, model.config.image_size);
    println!("parameters: {}", model.param_count());

    let v = visual_extract(&images, &model)?;
    let shifted = infuse(&v, PriorScalar(1.0));
    println!("v[0][0] = {:.4}, with prior = {:.4}", v.0.get(0, 0), shifted.0.get(0, 0));

    let max_len = model.config.max_len;
    let first = forward(&images, PriorScalar(0.0), &model, max_len)?;
    let follow_up = forward(&images, PriorScalar(1.0), &model, max_len)?;
    let baseline = forward_baseline(&images, &model, max_len)?;
    println!("P=0      {:?}", first.tokens);
    println!("P=1      {:?}", follow_up.tokens);
    println!("baseline {:?}", baseline.tokens);
    println!("P=0 matches baseline: {}", first == baseline);
    Ok(())
}
