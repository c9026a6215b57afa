//! Drive `featurize`, `cv` and `report` in-process on a small synthetic CSV.

use molcap::cli::run;
use molcap::dataset::synthetic_oxygen_corpus;

fn main() {
    let dir = std::env::temp_dir().join(format!("molcap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("corpus.csv");
    let mut w = csv::Writer::from_path(&csv).unwrap();
    w.write_record(["smiles", "HIV_active"]).unwrap();
    for m in synthetic_oxygen_corpus(80, 2) {
        w.write_record([m.smiles, m.label.to_string()]).unwrap();
    }
    w.flush().unwrap();
    let p = |name: &str| dir.join(name).display().to_string();

    let code = run([
        "molcap",
        "featurize",
        "--in",
        &p("corpus.csv"),
        "--out",
        &p("corpus.cache"),
        "--image-side",
        "40",
    ]);
    assert_eq!(code, 0);
    let mut runs = Vec::new();
    for (name, fp, maccs) in [("all", "true", "true"), ("image", "false", "false")] {
        let code = run([
            "molcap",
            "cv",
            "--in",
            &p("corpus.cache"),
            "--out",
            &p(name),
            "--folds",
            "3",
            "--blocks",
            "1",
            "--filters",
            "2",
            "--max-epochs",
            "3",
            "--use-fp",
            fp,
            "--use-maccs",
            maccs,
            "--fast32",
        ]);
        assert_eq!(code, 0);
        runs.push(p(name));
    }
    let mut args = vec!["molcap".to_string(), "report".to_string()];
    args.extend(runs);
    assert_eq!(run(args), 0);
    std::fs::remove_dir_all(dir).ok();
}
