//! ADASYN density weights and how the quota is split across parents.

use synthsample::datasets::{inject_outliers, ordinal_mixture};
use synthsample::oversample::{adasyn_weights, allocate_counts, resample, Method, SamplerConfig};
use synthsample::{partition, NeighborIndex};

fn main() -> synthsample::Result<()> {
    let table = ordinal_mixture(&[12, 60], 2, 2, 2.0, 5)?;
    // two class-1 rows deep inside class 2
    let table = inject_outliers(&table, 1, 2, &[2.0, 2.0], 0.2, 1)?;
    let part = partition(&table)?;
    let rows = part.members(1);
    let index = NeighborIndex::build(&table, true);

    let weights = adasyn_weights(rows, &index, 5)?;
    let quota = part.majority_count() - rows.len();
    let alloc = allocate_counts(&weights, quota);
    println!("row  weight  synthetic");
    for ((row, w), n) in rows.iter().zip(&weights).zip(&alloc.counts) {
        println!("{row:>3}  {w:.3}   {n}");
    }

    let batch = resample(&table, &SamplerConfig::new(Method::Adasyn, 2))?;
    assert_eq!(batch.count(1), quota);
    println!("total {quota}, generated {}", batch.len());
    Ok(())
}
