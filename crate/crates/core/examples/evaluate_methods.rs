//! Repeated hold-out comparison of every sampler against no oversampling.
//!
//! `cargo run --release --example evaluate_methods -- 10` runs 10 repeats.

use synthsample::datasets::{ordinal_mixture, NODULE_CLASS_COUNTS};
use synthsample::evaluation::{compare_methods, SplitSpec};
use synthsample::forest::ForestParams;
use synthsample::oversample::{Method, SamplerConfig};

fn main() -> synthsample::Result<()> {
    let repeats = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let table = ordinal_mixture(&NODULE_CLASS_COUNTS, 8, 8, 0.5, 2024)?;
    let spec = SplitSpec {
        repeats,
        ..SplitSpec::new(7)
    };
    let methods: Vec<Option<Method>> = std::iter::once(None).chain(Method::ALL.map(Some)).collect();
    let cmp = compare_methods(
        &table,
        &spec,
        &methods,
        &SamplerConfig::new(Method::Smote, 7),
        &ForestParams::default().with_trees(50),
    )?;

    cmp.write_sensitivity_csv(std::io::stdout())?;
    println!();
    cmp.write_accuracy_csv(std::io::stdout())?;
    Ok(())
}
