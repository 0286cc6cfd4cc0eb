use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use gchs_core::attacks::{self, AttackBudget, Poisoned};
use gchs_core::eval::{self, MetricsReport, Split};
use gchs_core::graph::{self, Graph, SbmConfig};
use gchs_core::io;
use gchs_core::seed;
use gchs_core::trainer::{self, TrainConfig, TrainedModel, DEFAULT_ETA_GRID};
use serde_json::json;

use crate::config::Resolver;
use crate::{
    AttackArgs, Common, DataArgs, EvalArgs, GenerateArgs, GradcheckArgs, ModelArgs, SbmArgs, SweepArgs,
    TrainArgs,
};

const KMEANS_RESTARTS: usize = 10;
const DEFAULT_MI_SAMPLES: usize = 64;

fn path_flag(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn start(common: &Common) -> Result<(Resolver, u64)> {
    let mut r = Resolver::load(common.config.as_deref())?;
    let seed = r.value("seed", common.seed, 0)?;
    Ok((r, seed))
}

fn out_dir(r: &mut Resolver, flag: Option<PathBuf>) -> Result<PathBuf> {
    Ok(PathBuf::from(r.required::<String>("out", path_flag(flag))?))
}

fn write(path: &Path, text: &str) -> Result<()> {
    io::write_text(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn echo_config(r: &Resolver, out: &Path) -> Result<()> {
    write(&out.join("resolved-config.txt"), &r.finish()?)
}

fn resolve_sbm(r: &mut Resolver, a: SbmArgs, seed: u64) -> Result<SbmConfig> {
    let d = SbmConfig::default();
    Ok(SbmConfig {
        n: r.value("n", a.n, d.n)?,
        k_blocks: r.value("k", a.k, d.k_blocks)?,
        p_intra: r.value("p_intra", a.p_intra, d.p_intra)?,
        p_inter: r.value("p_inter", a.p_inter, d.p_inter)?,
        feature_dim: r.value("feature_dim", a.feature_dim, d.feature_dim)?,
        mean_sep: r.value("mean_sep", a.mean_sep, d.mean_sep)?,
        seed: seed::derive(seed, "sbm"),
    })
}

fn load_dir(dir: &Path) -> Result<Graph> {
    let labels = dir.join("labels.txt");
    io::load_graph(
        &dir.join("edges.txt"),
        &dir.join("features.csv"),
        labels.exists().then_some(labels.as_path()),
    )
    .with_context(|| format!("loading dataset {}", dir.display()))
}

fn load_data(r: &mut Resolver, a: DataArgs, seed: u64) -> Result<Graph> {
    let dir = r.optional::<String>("data", path_flag(a.data))?;
    let sbm = r.value("sbm", a.sbm.then_some(true), false)?;
    match (dir, sbm) {
        (Some(dir), false) => load_dir(Path::new(&dir)),
        (None, true) => Ok(graph::generate_sbm(&resolve_sbm(r, a.sbm_args, seed)?)?),
        _ => bail!("give exactly one dataset source: --data DIR or --sbm"),
    }
}

fn resolve_model(r: &mut Resolver, a: ModelArgs, seed: u64) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        mode: r.value("mode", a.mode, d.mode)?,
        eta: r.value("eta", a.eta, d.eta)?,
        epochs: r.value("epochs", a.epochs, d.epochs)?,
        lr: r.value("lr", a.lr, d.lr)?,
        alpha: r.value("alpha", a.alpha, d.alpha)?,
        tau_info: r.value("tau_info", a.tau_info, d.tau_info)?,
        tau_g: r.value("tau_g", a.tau_g, d.tau_g)?,
        p_drop: r.value("p_drop", a.p_drop, d.p_drop)?,
        budget: r.optional("budget", a.budget)?,
        mask_law: r.value("mask_law", a.mask_law, d.mask_law)?,
        hidden_dim: r.value("hidden_dim", a.hidden_dim, d.hidden_dim)?,
        out_dim: r.value("out_dim", a.out_dim, d.out_dim)?,
        output: r.value("output", a.output, d.output)?,
        pnc_window: r.value("pnc_window", a.pnc_window, d.pnc_window)?,
        no_info_p_epochs: r.value("no_info_p_epochs", a.no_info_p_epochs, d.no_info_p_epochs)?,
        sanitizer_enabled: r.value("sanitizer", a.sanitizer, d.sanitizer_enabled)?,
        seed: seed::derive(seed, "train"),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn accuracy_of(h: &ndarray::Array2<f64>, y: &[usize], seed: u64) -> Result<f64> {
    let split = Split::random(h.nrows(), eval::DEFAULT_SPLIT, seed::derive(seed, "split"))?;
    Ok(eval::train_logreg(h, y, &split, seed::derive(seed, "logreg"))?)
}

fn nmi_of(h: &ndarray::Array2<f64>, y: &[usize], seed: u64) -> Result<f64> {
    let k = y.iter().max().map_or(0, |m| m + 1);
    Ok(eval::kmeans_nmi(h, y, k, KMEANS_RESTARTS, seed::derive(seed, "kmeans"))?)
}

fn label_homophily(g: &Graph) -> Result<Option<f64>> {
    if g.labels().is_none() || g.n_edges() == 0 {
        return Ok(None);
    }
    Ok(Some(graph::homophily_label(g)?))
}

/// Metrics of a trained model on its training graph. Evaluation seeds are
/// derived from the model's training seed so that `train` and `sweep`
/// agree on the same η.
fn model_report(g: &Graph, model: &TrainedModel, runtime_s: f64) -> Result<MetricsReport> {
    let s = model.config.seed;
    let (accuracy, nmi) = match g.labels() {
        Some(y) => (
            Some(accuracy_of(&model.embeddings, y, s)?),
            (g.n_classes().unwrap_or(0) >= 2)
                .then(|| nmi_of(&model.embeddings, y, s))
                .transpose()?,
        ),
        None => (None, None),
    };
    Ok(MetricsReport {
        accuracy,
        nmi,
        grv: None,
        h_y_before: label_homophily(g)?,
        h_y_after: label_homophily(&g.retain_edges(&model.retention)?)?,
        delta_x_before: Some(graph::homophily_feature(g, None)?),
        delta_x_after: Some(graph::homophily_feature(g, Some(&model.retention))?),
        best_epoch: Some(model.best_epoch),
        l_pnc: Some(model.best().l_pnc_smoothed),
        runtime_s,
    })
}

/// Everything but the history: embeddings, probabilities, retention at
/// `t*`, weights, and the report.
fn write_model(dir: &Path, g: &Graph, model: &TrainedModel, runtime_s: f64) -> Result<MetricsReport> {
    write(&dir.join("embeddings.txt"), &io::format_matrix(&model.embeddings))?;
    write(&dir.join("p.txt"), &io::format_vector(&model.p))?;
    write(&dir.join("retention.txt"), &io::format_vector(&model.retention))?;
    let (e, p) = (&model.encoder, &model.projection);
    write(
        &dir.join("weights.txt"),
        &io::format_named_matrices(&[
            ("W1", &e.w1),
            ("W2", &e.w2),
            ("U1", &p.u1),
            ("b1", &p.b1),
            ("U2", &p.u2),
            ("b2", &p.b2),
        ]),
    )?;
    let report = model_report(g, model, runtime_s)?;
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

pub fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let (mut r, seed) = start(&a.common)?;
    let out = out_dir(&mut r, a.out)?;
    let cfg = resolve_sbm(&mut r, a.sbm, seed)?;
    let g = graph::generate_sbm(&cfg)?;
    io::save_graph(&g, &out)?;
    echo_config(&r, &out)?;
    println!("wrote {} nodes, {} edges to {}", g.n_nodes(), g.n_edges(), out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn attack(a: AttackArgs) -> Result<ExitCode> {
    let (mut r, seed) = start(&a.common)?;
    let out = out_dir(&mut r, a.out)?;
    let g = load_data(&mut r, a.data, seed)?;
    let kind = r.value("kind", a.kind, "heterophily".to_string())?;
    let power = r.required::<f64>("power", a.power)?;
    let budget = AttackBudget::new(power, g.n_edges())?;
    let attack_seed = seed::derive(seed, "attack");
    let poisoned: Poisoned = match kind.as_str() {
        "heterophily" => attacks::inject_heterophily(&g, budget, attack_seed)?,
        "clga" => {
            let surrogate = resolve_model(&mut r, a.model, seed)?;
            attacks::clga_greedy(&g, budget, &surrogate, attack_seed)?
        }
        other => bail!("unknown attack kind {other:?} (heterophily | clga)"),
    };
    io::save_graph(&poisoned.graph, &out)?;
    write(&out.join("audit.txt"), &io::format_audit(&poisoned.inserted, &poisoned.removed))?;
    echo_config(&r, &out)?;
    println!(
        "{kind}: +{} -{} edges, {} edges written to {}",
        poisoned.inserted.len(),
        poisoned.removed.len(),
        poisoned.graph.n_edges(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn train(a: TrainArgs) -> Result<ExitCode> {
    let (mut r, seed) = start(&a.common)?;
    let out = out_dir(&mut r, a.out)?;
    let g = load_data(&mut r, a.data, seed)?;
    let cfg = resolve_model(&mut r, a.model, seed)?;
    echo_config(&r, &out)?;

    // History lines are written as they arrive so a failed run keeps them.
    let hist_path = out.join("history.jsonl");
    let mut hist = File::create(&hist_path).with_context(|| format!("creating {}", hist_path.display()))?;
    let mut write_err = None;
    let clock = Instant::now();
    let result = trainer::train_gchs_with(&g, &cfg, |rec| {
        if write_err.is_none() {
            if let Err(e) = hist.write_all(io::to_json_line(rec).as_bytes()) {
                write_err = Some(e);
            }
        }
    });
    let runtime = clock.elapsed().as_secs_f64();
    if let Some(e) = write_err {
        return Err(e).with_context(|| format!("writing {}", hist_path.display()));
    }
    let model = result.with_context(|| format!("training aborted; history so far is in {}", hist_path.display()))?;
    let report = write_model(&out, &g, &model, runtime)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad η value {t:?}")))
        .collect()
}

pub fn sweep(a: SweepArgs) -> Result<ExitCode> {
    let (mut r, seed) = start(&a.common)?;
    let out = out_dir(&mut r, a.out)?;
    let g = load_data(&mut r, a.data, seed)?;
    let default_grid = DEFAULT_ETA_GRID.map(|v| v.to_string()).join(",");
    let grid = parse_grid(&r.value("grid", a.grid, default_grid)?)?;
    let cfg = resolve_model(&mut r, a.model, seed)?;
    echo_config(&r, &out)?;

    let res = trainer::sweep_eta(&g, &grid, &cfg)?;
    let mut table = String::from("eta,l_pnc,best_epoch,accuracy\n");
    for (i, model) in res.models.iter().enumerate() {
        let dir = out.join(format!("eta-{i:02}-{}", grid[i]));
        let mut body = String::new();
        for rec in &model.history {
            body.push_str(&io::to_json_line(rec));
        }
        write(&dir.join("history.jsonl"), &body)?;
        write_model(&dir, &g, model, res.seconds[i])?;
        let acc = res
            .accuracy
            .as_ref()
            .map_or_else(String::new, |a| a[i].to_string());
        table.push_str(&format!("{},{},{},{acc}\n", grid[i], res.pnc[i], model.best_epoch));
    }
    write(&out.join("sweep.csv"), &table)?;

    let mut selection = json!({
        "best_index": res.best_index,
        "best_eta": res.best_eta(),
        "l_pnc": res.pnc[res.best_index],
        "runtime_s": res.seconds.iter().sum::<f64>(),
    });
    if res.accuracy.is_some() {
        selection["pearson"] = json!(res.pearson);
    }
    write_json(&out.join("selection.json"), &selection)?;
    println!("{selection}");
    Ok(ExitCode::SUCCESS)
}

pub fn eval(a: EvalArgs) -> Result<ExitCode> {
    let (mut r, seed) = start(&a.common)?;
    let out = r.optional::<String>("out", path_flag(a.out))?.map(PathBuf::from);
    let embeddings = r.optional::<String>("embeddings", path_flag(a.embeddings))?;
    let labels = r.optional::<String>("labels", path_flag(a.labels))?;
    let want_acc = r.value("accuracy", a.accuracy.then_some(true), false)?;
    let want_nmi = r.value("nmi", a.nmi.then_some(true), false)?;
    let data = r.optional::<String>("data", path_flag(a.data))?;
    let clean = r.optional::<String>("clean", path_flag(a.clean))?;
    let poisoned = r.optional::<String>("poisoned", path_flag(a.poisoned))?;

    let clock = Instant::now();
    let mut report = MetricsReport::default();
    let mut did_something = false;

    if want_acc || want_nmi {
        let Some(y_path) = labels else {
            bail!("--accuracy and --nmi need --labels");
        };
        let Some(h_path) = embeddings else {
            bail!("--accuracy and --nmi need --embeddings");
        };
        let y = io::read_labels(Path::new(&y_path))?;
        let h = io::read_matrix(Path::new(&h_path))?;
        if want_acc {
            report.accuracy = Some(accuracy_of(&h, &y, seed)?);
        }
        if want_nmi {
            report.nmi = Some(nmi_of(&h, &y, seed)?);
        }
        did_something = true;
    }
    if let Some(dir) = data {
        let g = load_dir(Path::new(&dir))?;
        report.h_y_before = label_homophily(&g)?;
        report.delta_x_before = Some(graph::homophily_feature(&g, None)?);
        did_something = true;
    }
    match (clean, poisoned) {
        (Some(c), Some(p)) => {
            let cfg = resolve_model(&mut r, a.model, seed)?;
            let samples = r.value("mi_samples", a.mi_samples, DEFAULT_MI_SAMPLES)?;
            let (gc, gp) = (load_dir(Path::new(&c))?, load_dir(Path::new(&p))?);
            report.grv = Some(eval::grv(&gc, &gp, &cfg, samples, seed::derive(seed, "grv"))?);
            did_something = true;
        }
        (None, None) => {}
        _ => bail!("GRV needs both --clean and --poisoned"),
    }
    if !did_something {
        bail!("nothing to evaluate: pass --accuracy/--nmi, --data, or --clean with --poisoned");
    }
    report.runtime_s = clock.elapsed().as_secs_f64();

    match out {
        Some(dir) => {
            write_json(&dir.join("report.json"), &report)?;
            echo_config(&r, &dir)?;
        }
        None => {
            r.finish()?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn gradcheck(a: GradcheckArgs) -> Result<ExitCode> {
    let reports = trainer::gradcheck_objective(a.seed, a.h)?;
    let mut ok = true;
    for (name, rep) in &reports {
        let pass = rep.max_rel_error < a.tol;
        ok &= pass;
        println!(
            "{name:<3} max relative error {:.3e} at {:?} {}",
            rep.max_rel_error,
            rep.worst_entry,
            if pass { "ok" } else { "FAILED" }
        );
    }
    println!("gradcheck {} (tolerance {:e}, h {:e})", if ok { "passed" } else { "failed" }, a.tol, a.h);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
