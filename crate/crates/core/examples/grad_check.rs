// Forward-mode gradients against central finite differences.

use priorlab::infusion::{grad_check, ImagePair, PriorScalar, ToyModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for seed in [17, 1, 2] {
        let model = ToyModel::new(seed);
        let images = ImagePair::fixture(seed, model.config.image_size);
        let report = grad_check(&model, &images, PriorScalar(1.0))?;
        println!("seed {seed}: max relative error {:.2e}", report.max_rel_error);
        for c in &report.checks {
            println!(
                "  {:?}: analytic {:+.8} numeric {:+.8}",
                c.target, c.analytic, c.numeric
            );
        }
    }
    let model = ToyModel::new(17).with_zeroed_memory();
    let report = grad_check(&model, &ImagePair::fixture(17, 16), PriorScalar(1.0))?;
    println!("decoder blind to L: dL/dP = {}", report.prior().analytic);
    Ok(())
}
