//! The command-line workflow, driven in-process: plan, compare, report.

use std::path::Path;

use meta_evolve::cli::main_with_args;

pub fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::temp_dir().join(format!("meta-evolve-cli-{}", std::process::id()));
    let out_s = out.to_str().unwrap();
    let points = fixtures.join("points/clustered.json");
    let points = points.to_str().unwrap();

    let code = main_with_args(["meta-evolve", "plan", "--points", points, "--out", out_s]);
    println!("plan exited {code}");
    let code = main_with_args([
        "meta-evolve", "compare", "--points", points, "--set", "transfer.gradient_samples=0", "--out", out_s,
    ]);
    println!("compare exited {code}");
    print!("{}", std::fs::read_to_string(out.join("compare.csv")).unwrap());
    let report = out.join("report-meta.json");
    let code = main_with_args(["meta-evolve", "report", report.to_str().unwrap(), "--out", out_s]);
    println!("report exited {code}");
    print!("{}", std::fs::read_to_string(out.join("totals.csv")).unwrap());
    std::fs::remove_dir_all(&out).ok();
}
