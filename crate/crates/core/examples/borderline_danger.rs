//! Danger labels and the two Borderline-SMOTE variants.

use std::collections::BTreeMap;

use synthsample::datasets::{ordinal_mixture, NODULE_CLASS_COUNTS};
use synthsample::oversample::{assign_danger, resample, Method, SamplerConfig};
use synthsample::{partition, NeighborIndex};

fn main() -> synthsample::Result<()> {
    let k = 5;
    let table = ordinal_mixture(&NODULE_CLASS_COUNTS, 6, 6, 1.0, 3)?;
    let part = partition(&table)?;
    let index = NeighborIndex::build(&table, true);

    for class in part.present_classes().filter(|&c| c != part.majority_class()) {
        let mut tally = BTreeMap::new();
        for &row in part.members(class) {
            let label = assign_danger(&index.knn_all(row, k)?, k);
            *tally.entry(format!("{label:?}")).or_insert(0) += 1;
        }
        println!("class {class}: {tally:?}");
    }

    for method in [Method::Borderline1, Method::Borderline2] {
        let batch = resample(&table, &SamplerConfig::new(method, 7))?;
        let toward_other = batch
            .provenance()
            .iter()
            .filter(|p| p.neighbor.is_some_and(|n| table.label(n) != table.label(p.parent)))
            .count();
        println!("{method}: {} rows, {toward_other} interpolated toward another class", batch.len());
    }
    Ok(())
}
