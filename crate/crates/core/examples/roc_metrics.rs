//! Rank-based AUC, the ROC curve and fold aggregation.

use molcap::metrics::{aggregate_folds, auc_roc, roc_points};

fn main() {
    let scores = [0.9, 0.8, 0.8, 0.6, 0.55, 0.4, 0.3, 0.2];
    let labels = [1, 1, 0, 1, 0, 0, 1, 0];
    println!("AUC {:.4}", auc_roc(&scores, &labels).unwrap());
    let curve = roc_points(&scores, &labels).unwrap();
    curve.write_csv(std::io::stdout()).unwrap();
    let folds = aggregate_folds(&[0.7625, 0.7701, 0.7852, 0.7733, 0.7688]).unwrap();
    println!("{}", serde_json::to_string(&folds).unwrap());
}
