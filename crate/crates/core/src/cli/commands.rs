use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::inputs::Inputs;
use super::output::{csv_bytes, num, write_atomic};
use super::settings::{RunSettings, TrainerKind};
use super::{CliError, Result, RunArgs};
use crate::evotree::evolution_tree;
use crate::geometry::{geometric_median, lp_distance, minimum_spanning_tree, Norm, Point};
use crate::trainers::{CostModelTrainer, ToyTrainer, Trainer};
use crate::transfer::{run_method, Method, Outcome, TransferReport, SCHEMA_VERSION};

/// One split of the walk from the source: where it happens and how the
/// targets divide.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitRecord {
    pub at: Point,
    pub groups: Vec<Vec<usize>>,
}

/// Follows the evolution tree from `source`, recording every split.
pub fn split_sequence(source: &Point, targets: &[Point], norm: Norm) -> Result<Vec<SplitRecord>> {
    let mut out = Vec::new();
    let mut stack = vec![(source.clone(), (0..targets.len()).collect::<Vec<_>>())];
    while let Some((mut alpha, subset)) = stack.pop() {
        if subset.len() < 2 {
            continue;
        }
        let pts: Vec<Point> = subset.iter().map(|&i| targets[i].clone()).collect();
        loop {
            let r = evolution_tree(&alpha, &pts, norm).map_err(crate::transfer::TransferError::from)?;
            if r.is_split() {
                let groups: Vec<Vec<usize>> =
                    r.partition.iter().map(|g| g.iter().map(|&i| subset[i]).collect()).collect();
                for g in groups.iter().rev() {
                    stack.push((alpha.clone(), g.clone()));
                }
                out.push(SplitRecord { at: alpha, groups });
                break;
            }
            alpha = r.beta_meta;
        }
    }
    Ok(out)
}

fn geometry<T>(r: crate::geometry::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::Transfer(e.into()))
}

pub fn plan(args: &RunArgs) -> Result<()> {
    let settings = args.settings()?;
    let inputs = args.inputs()?;
    let norm = settings.transfer.p_norm;
    let source = inputs.source();
    let targets = inputs.targets();
    let mut all = vec![source.clone()];
    all.extend(targets.iter().cloned());

    let evo = geometry(evolution_tree(source, targets, norm))?;
    let mst = geometry(minimum_spanning_tree(&all, norm))?;
    let median = geometry(geometric_median(&all, norm))?;
    let star: f64 = all.iter().map(|p| lp_distance(&median, p, norm).unwrap_or(f64::NAN)).sum();
    let independent: f64 = targets.iter().map(|t| lp_distance(source, t, norm).unwrap_or(f64::NAN)).sum();
    let splits = split_sequence(source, targets, norm)?;

    let space = match &inputs {
        Inputs::Robots { space, .. } => json!({
            "dim": space.dim(),
            "keys": space.keys,
            "units": space.units,
            "theta_lower": space.theta_lower,
            "theta_upper": space.theta_upper,
            "pinned": space.keys.iter().enumerate().filter(|(d, _)| space.is_pinned(*d)).map(|(_, k)| k).collect::<Vec<_>>(),
        }),
        Inputs::Points(p) => json!({ "dim": p.source.dim(), "keys": inputs.keys() }),
    };
    let robots: Vec<_> = inputs
        .names()
        .iter()
        .zip(&all)
        .enumerate()
        .map(|(i, (name, a))| json!({"name": name, "role": if i == 0 { "source" } else { "target" }, "alpha": a}))
        .collect();
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "norm": norm.to_string(),
        "space": space,
        "robots": robots,
        "tree": evo.tree,
        "first_partition": { "beta_meta": evo.beta_meta, "groups": evo.partition },
        "splits": splits,
        "mst_length": mst.length,
        "geometric_median": { "point": median, "star_length": star },
        "independent_length": independent,
    });
    let text = serde_json::to_string_pretty(&doc).expect("plan serializes");
    write_atomic(&args.out.join("plan.json"), text.as_bytes())?;
    println!(
        "plan: {} targets, tree length {:.6} (mst {:.6}, independent {:.6})",
        targets.len(),
        evo.tree.length,
        mst.length,
        independent
    );
    Ok(())
}

/// Runs `methods` with the configured trainer.
fn run_all(settings: &RunSettings, inputs: &Inputs, methods: &[Method]) -> Result<Vec<TransferReport>> {
    fn go<T: Trainer>(
        s: &RunSettings,
        inputs: &Inputs,
        methods: &[Method],
        trainer: &T,
        expert: &T::Policy,
    ) -> Result<Vec<TransferReport>> {
        methods
            .iter()
            .map(|&m| {
                let mut r = run_method(m, inputs.source(), inputs.targets(), expert, trainer, &s.transfer)?.report;
                r.keys = inputs.keys();
                Ok(r)
            })
            .collect()
    }
    match settings.trainer {
        TrainerKind::Cost => go(settings, inputs, methods, &CostModelTrainer::default(), &()),
        TrainerKind::ToyMdp => {
            let Inputs::Robots { space, .. } = inputs else {
                return Err(CliError::Input("the toymdp trainer needs --robots".into()));
            };
            let trainer = ToyTrainer::new(space.clone(), settings.toy.clone())
                .map_err(|e| CliError::Input(e.to_string()))?;
            let [kp, kd, ls] = settings.expert;
            go(settings, inputs, methods, &trainer, &ToyTrainer::expert(kp, kd, ls))
        }
    }
}

fn exhausted(reports: &[TransferReport]) -> Result<()> {
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.paths
                .iter()
                .filter(|p| p.outcome == Outcome::BudgetExhausted)
                .map(move |p| format!("{} target {}", r.method, p.target))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Budget(failed.join(", ")))
    }
}

fn phases_csv(r: &TransferReport) -> Result<Vec<u8>> {
    let mut header: Vec<String> = ["branch", "targets", "phase", "kind"].map(String::from).to_vec();
    header.extend(r.keys.iter().cloned());
    header.extend(["train_iterations", "sim_episodes", "success_rate"].map(String::from));
    let mut rows = Vec::new();
    for b in &r.branches {
        let targets = b.targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
        let finish = b.finish.iter().map(|f| ("final", f));
        for (i, (kind, p)) in b.phases.iter().map(|p| ("evolve", p)).chain(finish).enumerate() {
            let mut row = vec![b.id.to_string(), targets.clone(), i.to_string(), kind.to_string()];
            row.extend(p.alpha_to.iter().map(|v| num(*v)));
            row.extend([p.train_iterations.to_string(), p.sim_episodes.to_string(), num(p.final_success_rate)]);
            rows.push(row);
        }
    }
    csv_bytes(&header, &rows)
}

pub fn transfer(args: &RunArgs, method: Method) -> Result<()> {
    let settings = args.settings()?;
    let inputs = args.inputs()?;
    let reports = run_all(&settings, &inputs, &[method])?;
    let r = &reports[0];
    write_atomic(&args.out.join("report.json"), r.to_json().as_bytes())?;
    write_atomic(&args.out.join("phases.csv"), &phases_csv(r)?)?;
    println!(
        "{}: {} phases, {} train iterations, {} sim episodes, {:?}",
        r.method,
        r.phase_count(),
        r.totals.train_iterations,
        r.totals.sim_episodes,
        r.outcome
    );
    exhausted(&reports)
}

pub fn compare(args: &RunArgs, methods: &[Method]) -> Result<()> {
    let mut methods = methods.to_vec();
    methods.dedup();
    if methods.len() < 2 {
        return Err(CliError::Input("compare needs at least two methods".into()));
    }
    let settings = args.settings()?;
    let inputs = args.inputs()?;
    // Speedups are relative to independent transfers, so always run them.
    let mut run: Vec<Method> = methods.clone();
    if !run.contains(&Method::Herd) {
        run.push(Method::Herd);
    }
    let reports = run_all(&settings, &inputs, &run)?;
    let herd = reports.iter().find(|r| r.method == Method::Herd).expect("herd was run");
    let herd_total = herd.totals.sim_episodes as f64;
    let header = [
        "method",
        "train_iterations",
        "sim_episodes",
        "phases",
        "walked_length",
        "targets_reached",
        "outcome",
        "speedup",
    ]
    .map(String::from);
    let mut rows = Vec::new();
    for r in reports.iter().filter(|r| methods.contains(&r.method)) {
        let reached = r.paths.iter().filter(|p| p.outcome == Outcome::Success).count();
        let speedup = herd_total / r.totals.sim_episodes as f64;
        rows.push(vec![
            r.method.to_string(),
            r.totals.train_iterations.to_string(),
            r.totals.sim_episodes.to_string(),
            r.phase_count().to_string(),
            num(r.walked_length(settings.transfer.p_norm)),
            reached.to_string(),
            outcome_str(r.outcome).into(),
            num(speedup),
        ]);
        write_atomic(&args.out.join(format!("report-{}.json", r.method)), r.to_json().as_bytes())?;
        println!("{}: {} sim episodes, speedup {:.3}", r.method, r.totals.sim_episodes, speedup);
    }
    write_atomic(&args.out.join("compare.csv"), &csv_bytes(&header, &rows)?)?;
    exhausted(&reports)
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Success => "success",
        Outcome::BudgetExhausted => "budget-exhausted",
    }
}

/// The two dimensions along which `points` vary most, widest first.
pub fn projection_axes(points: &[&Point]) -> (usize, Option<usize>) {
    let dim = points.first().map_or(0, |p| p.dim());
    let n = points.len().max(1) as f64;
    let mut var: Vec<(usize, f64)> = (0..dim)
        .map(|d| {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
            (d, points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n)
        })
        .collect();
    // Stable sort keeps lower indices first among ties.
    var.sort_by(|a, b| b.1.total_cmp(&a.1));
    (var.first().map_or(0, |v| v.0), var.get(1).map(|v| v.0))
}

pub fn report(files: &[std::path::PathBuf], out: &Path) -> Result<()> {
    let mut reports = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| CliError::Io {
            path: f.clone(),
            source: e,
        })?;
        let r = TransferReport::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", f.display())))?;
        reports.push(r);
    }
    let dim = reports[0].source.dim();
    if reports.iter().any(|r| r.source.dim() != dim) {
        return Err(CliError::Input("reports live in different spaces".into()));
    }
    let mut pts: Vec<&Point> = Vec::new();
    for r in &reports {
        pts.push(&r.source);
        pts.extend(&r.targets);
        pts.extend(r.branches.iter().flat_map(|b| &b.phases).map(|p| &p.alpha_to));
    }
    let (x, y) = projection_axes(&pts);
    let keys = &reports[0].keys;
    let name = |d: usize| keys.get(d).cloned().unwrap_or_else(|| format!("alpha[{d}]"));
    let header = vec![
        "method".into(),
        "branch".into(),
        "parent".into(),
        "step".into(),
        "multiplicity".into(),
        format!("x:{}", name(x)),
        format!("y:{}", y.map_or("none".into(), name)),
    ];
    let mut rows = Vec::new();
    for r in &reports {
        for b in &r.branches {
            let points = std::iter::once(&b.start).chain(b.phases.iter().map(|p| &p.alpha_to));
            for (step, p) in points.enumerate() {
                rows.push(vec![
                    r.method.to_string(),
                    b.id.to_string(),
                    b.parent.map_or(String::new(), |p| p.to_string()),
                    step.to_string(),
                    b.targets.len().to_string(),
                    num(p[x]),
                    num(y.map_or(0.0, |y| p[y])),
                ]);
            }
        }
    }
    write_atomic(&out.join("paths.csv"), &csv_bytes(&header, &rows)?)?;
    let path_rows = rows.len();

    let header = ["method", "scope", "train_iterations", "sim_episodes", "phases", "outcome", "final_success_rate"]
        .map(String::from);
    let mut rows = Vec::new();
    for r in &reports {
        rows.push(vec![
            r.method.to_string(),
            "total".into(),
            r.totals.train_iterations.to_string(),
            r.totals.sim_episodes.to_string(),
            r.phase_count().to_string(),
            outcome_str(r.outcome).into(),
            String::new(),
        ]);
        for p in &r.paths {
            let c = r.path_cost(p.target);
            rows.push(vec![
                r.method.to_string(),
                format!("target{}", p.target),
                c.train_iterations.to_string(),
                c.sim_episodes.to_string(),
                r.path_phases(p.target).len().to_string(),
                outcome_str(p.outcome).into(),
                p.final_success_rate.map_or(String::new(), num),
            ]);
        }
    }
    write_atomic(&out.join("totals.csv"), &csv_bytes(&header, &rows)?)?;
    println!("report: {path_rows} path rows from {} reports", reports.len());
    Ok(())
}
