//! Write the synthetic breast-cancer table (raw 1–10 scores, `y` = 1 for malignant).
//!
//! ```text
//! cargo run --example synthetic_data -- data/breast_cancer_synthetic.csv 683 1
//! ```

use restore_kit::target::{load_logistic_dataset, synthetic_breast_cancer_raw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "breast_cancer_synthetic.csv".to_string());
    let rows: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(683);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let (names, columns, responses) = synthetic_breast_cancer_raw(rows, seed);
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["y".to_string()];
    header.extend(names);
    w.write_record(&header)?;
    for (i, y) in responses.iter().enumerate() {
        let mut record = vec![format!("{y}")];
        record.extend(columns.iter().map(|c| format!("{}", c[i])));
        w.write_record(&record)?;
    }
    w.flush()?;

    let data = load_logistic_dataset(&path)?;
    let malignant = data.responses.iter().filter(|&&y| y > 0.0).count();
    println!("wrote {path}: {} rows, {} malignant, d = {}", data.rows(), malignant, data.dim());
    Ok(())
}
