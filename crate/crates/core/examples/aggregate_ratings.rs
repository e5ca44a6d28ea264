//! Turning four radiologist ratings into one class label.

use synthsample::{aggregate_rating, RatingSet};

fn main() -> synthsample::Result<()> {
    let panels = [[1, 1, 1, 1], [4, 4, 5, 5], [2, 3, 3, 5], [1, 2, 4, 5], [2, 2, 4, 4]];
    for ratings in panels {
        let label = aggregate_rating(&RatingSet::new(ratings)?);
        println!("{ratings:?} -> {label}");
    }
    // out-of-range ratings are rejected
    assert!(RatingSet::new([0, 1, 2, 3]).is_err());
    Ok(())
}
