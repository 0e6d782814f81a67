//! The `generate -> train -> predict -> reference -> evaluate` pipeline
//! driven through the command-line entry point.
//!
//! ```bash
//! cargo run --release --example cli_pipeline
//! ```

use consflux::cli::run;

fn main() {
    let root = std::env::temp_dir().join("consflux-cli-example");
    let p = |s: &str| root.join(s).display().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["generate", "--preset", "burgers-caseI", "--n", "64", "--n-traj", "6", "--l", "5", "--m", "40", "--seed", "1", "--out", &p("data")]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["train", "--model", "cfn", "--data", &p("data"), "--epochs", "20", "--hidden-layers", "2", "--hidden-width", "16", "--lr", "1e-3", "--out", &p("run")]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["predict", "--checkpoint", &p("run/checkpoint.json"), "--ic", "burgers-figure", "--t-end", "1", "--out", &p("pred")]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["reference", "--ic", "burgers-figure", "--n", "256", "--t-end", "1", "--out", &p("ref")]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["evaluate", "--prediction", &p("pred"), "--reference", &p("ref"), "--out", &p("eval")]
            .into_iter()
            .map(String::from)
            .collect(),
    ];
    for args in steps {
        let code = run(std::iter::once("consflux".to_string()).chain(args.clone()));
        println!("consflux {} -> exit {code}", args[0]);
        if code != 0 {
            std::process::exit(code);
        }
    }
    println!("{}", std::fs::read_to_string(root.join("eval/metrics.json")).unwrap_or_default());
}
