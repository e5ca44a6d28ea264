//! Training and querying the random forest classifier directly.

use synthsample::datasets::{ordinal_mixture, NODULE_CLASS_COUNTS};
use synthsample::evaluation::{stratified_split, ConfusionMatrix, SplitSpec};
use synthsample::forest::{train_forest, ForestParams};

fn main() -> synthsample::Result<()> {
    let table = ordinal_mixture(&NODULE_CLASS_COUNTS, 8, 8, 1.0, 4)?;
    let split = stratified_split(&table, &SplitSpec::new(1), 0)?;
    let (train, test) = (table.subset(&split.train), table.subset(&split.test));

    let params = ForestParams::default();
    let forest = train_forest(&train, &params, 11)?;
    println!("{} trees, mtry {}", forest.n_trees(), forest.mtry());
    let depths: Vec<usize> = forest.trees().iter().map(|t| t.depth()).collect();
    println!("tree depth {}..{}", depths.iter().min().unwrap(), depths.iter().max().unwrap());

    let predicted = forest.predict_table(&test)?;
    let cm = ConfusionMatrix::from_predictions(table.n_classes(), test.labels(), &predicted);
    println!("accuracy {:.1}%", cm.accuracy());
    for row in cm.rows() {
        println!("  {row:?}");
    }
    println!("votes for first test row: {:?}", forest.votes(test.row(0)));
    Ok(())
}
