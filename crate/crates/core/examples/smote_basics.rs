//! Balancing a table with SMOTE and inspecting where synthetic rows came from.

use synthsample::datasets::{ordinal_mixture, NODULE_CLASS_COUNTS};
use synthsample::oversample::{resample, smote_interpolate, LambdaMode, Method, SamplerConfig};
use synthsample::{partition, plan_balance};

fn main() -> synthsample::Result<()> {
    let table = ordinal_mixture(&NODULE_CLASS_COUNTS, 6, 6, 1.0, 1)?;
    let plan = plan_balance(&partition(&table)?);
    println!("majority class {} with {} rows", plan.majority_class(), plan.majority_count());
    for (class, quota) in plan.quotas() {
        println!("  class {class}: {quota} synthetic rows needed");
    }

    let cfg = SamplerConfig::new(Method::Smote, 42).with_k(5);
    let batch = resample(&table, &cfg)?;
    println!("generated {} rows", batch.len());

    let prov = &batch.provenance()[0];
    let neighbor = prov.neighbor.expect("SMOTE always interpolates");
    println!("first synthetic row: parent {} toward neighbor {neighbor}", prov.parent);
    let rebuilt = smote_interpolate(table.row(prov.parent), table.row(neighbor), prov.lambda.as_ref().unwrap())?;
    assert_eq!(rebuilt, batch.row(0));

    // one shared weight per instance puts it on the straight segment
    let per_sample = resample(&table, &cfg.clone().with_lambda_mode(LambdaMode::PerSample))?;
    let lambda = per_sample.provenance()[0].lambda.as_ref().unwrap();
    println!("per-sample weights: {:.3} (x{})", lambda[0], lambda.len());

    let balanced = batch.append_to(&table)?;
    println!("balanced counts: {:?}", partition(&balanced)?.counts());
    Ok(())
}
