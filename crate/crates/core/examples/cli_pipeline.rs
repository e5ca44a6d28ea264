//! The command-line workflow driven from code: aggregate, resample, audit, evaluate.

use clap::Parser;
use synthsample::cli::{run, Cli};
use synthsample::data::write_csv;
use synthsample::datasets::{ordinal_mixture, NODULE_CLASS_COUNTS};

fn main() -> synthsample::Result<()> {
    let dir = std::env::temp_dir().join("synthsample-cli-pipeline");
    std::fs::create_dir_all(&dir).map_err(|e| synthsample::Error::Config(e.to_string()))?;
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();

    let ratings = "id,r1,r2,r3,r4\nn1,4,4,5,5\nn2,2,3,3,5\nn3,1,2,4,5\n";
    std::fs::write(path("ratings.csv"), ratings).map_err(|e| synthsample::Error::Config(e.to_string()))?;
    let table = ordinal_mixture(&NODULE_CLASS_COUNTS, 6, 6, 1.0, 1)?;
    let file = std::fs::File::create(path("features.csv")).map_err(|e| synthsample::Error::Config(e.to_string()))?;
    write_csv(&table, "label", file)?;

    let steps: [Vec<String>; 4] = [
        vec!["aggregate".into(), "--input".into(), path("ratings.csv"), "--out".into(), path("labels.csv")],
        vec![
            "resample".into(), "--input".into(), path("features.csv"), "--method".into(), "adasyn".into(),
            "--seed".into(), "3".into(), "--out".into(), path("resampled.csv"),
        ],
        vec![
            "audit".into(), "--original".into(), path("features.csv"), "--resampled".into(), path("resampled.csv"),
            "--out".into(), path("audit.json"),
        ],
        vec![
            "evaluate".into(), "--input".into(), path("features.csv"), "--methods".into(), "smote,adasyn".into(),
            "--repeats".into(), "3".into(), "--trees".into(), "30".into(), "--seed".into(), "3".into(),
            "--out".into(), path("evaluation.csv"),
        ],
    ];
    for args in steps {
        let cli = Cli::parse_from(std::iter::once("synthsample".to_string()).chain(args.iter().cloned()));
        run(&cli)?;
        println!("ran {}", args[0]);
    }
    for f in ["labels.csv", "evaluation.csv"] {
        println!("--- {f}");
        print!("{}", std::fs::read_to_string(path(f)).unwrap_or_default());
    }
    Ok(())
}
