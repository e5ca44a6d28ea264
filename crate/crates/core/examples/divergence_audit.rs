//! Comparing feature distributions before and after oversampling.

use synthsample::datasets::{inject_outliers, ordinal_mixture, NODULE_CLASS_COUNTS};
use synthsample::divergence::{audit, DEFAULT_BINS};
use synthsample::oversample::{resample, Method, SamplerConfig};

fn main() -> synthsample::Result<()> {
    let sep = 3.0;
    let mut table = ordinal_mixture(&NODULE_CLASS_COUNTS, 8, 8, sep, 1)?;
    for (class, host) in [(1, 4.0), (2, 4.0), (4, 0.0), (5, 0.0)] {
        table = inject_outliers(&table, class, 3, &[host * sep; 8], 1.0, 11)?;
    }

    println!("method  overall  per class");
    for method in Method::ALL {
        let batch = resample(&table, &SamplerConfig::new(method, 0))?;
        let report = audit(&table, &batch.append_to(&table)?, DEFAULT_BINS)?;
        let per_class: Vec<String> = report
            .classes
            .iter()
            .map(|c| format!("{}={:.3}", c.class, c.mean))
            .collect();
        println!("{method:<7} {:.4}   {}", report.overall_mean, per_class.join(" "));
    }

    let batch = resample(&table, &SamplerConfig::new(Method::Adasyn, 0))?;
    let report = audit(&table, &batch.append_to(&table)?, DEFAULT_BINS)?;
    let top = report.class(1).unwrap().ranking();
    println!("class 1 features by divergence: {:?}", top.iter().map(|f| &f.feature).collect::<Vec<_>>());
    Ok(())
}
