//! Acceptance suite. Each test checks one criterion at its pinned tolerance
//! and writes a single `PASS`/`FAIL` line to stderr (uncaptured) before
//! asserting, so the full table shows up in the test log either way.
//!
//! The desk-scale benchmark runs (criteria 5 to 10) are trained once and
//! shared through a cache; a criterion's reported runtime is the sum of the
//! training time of every run it consumes plus its own evaluation time.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use gchs_core::attacks::{inject_heterophily, AttackBudget, Poisoned};
use gchs_core::eval::{self, Split};
use gchs_core::graph::{self, ClusterAssignment, Graph, SbmConfig};
use gchs_core::sanitizer::{project_budget, MaskLaw, SanitizerState, DEFAULT_P_MIN, DEFAULT_XI};
use gchs_core::seed;
use gchs_core::trainer::{self, Mode, TrainConfig, TrainedModel, DEFAULT_ETA_GRID};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRADCHECK_H: f64 = 1e-5;
const GRADCHECK_TOL: f64 = 1e-4;
const GRADCHECK_SECONDS: f64 = 10.0;
const PROJECTION_INSTANCES: usize = 1000;
const PROJECTION_TOL: f64 = 1e-6;
const PROJECTION_SECONDS: f64 = 5.0;
const MASK_DRAWS: usize = 100_000;
const MASK_TOL: f64 = 0.01;
const METRIC_INSTANCES: usize = 20;
const METRIC_TOL: f64 = 1e-12;
const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const GRV_SECONDS: f64 = 5.0 * 60.0;
const ROBUSTNESS_SECONDS: f64 = 15.0 * 60.0;
const ROBUSTNESS_MARGIN: f64 = 5.0;
const PRECISION_FLOOR: f64 = 0.5;
const ABLATION_SLACK: f64 = 1.0;
const MI_SAMPLES: usize = 64;
const STRONG: u32 = 20;
const WEAK: u32 = 5;

fn report(id: u8, pass: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {id:>2}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn verdict(id: u8, pass: bool, detail: String) {
    report(id, pass, &detail);
    assert!(pass, "criterion {id}: {detail}");
}

// ---------------------------------------------------------------------------
// 1. gradient fidelity

#[test]
fn c01_gradient_fidelity() {
    let start = Instant::now();
    let reports = trainer::gradcheck_objective(1, GRADCHECK_H).unwrap();
    let mut worst: (f64, &str) = (0.0, "");
    let mut details = Vec::new();
    for (name, rep) in &reports {
        details.push(format!("{name}={:.2e}", rep.max_rel_error));
        if rep.max_rel_error >= worst.0 {
            worst = (rep.max_rel_error, name);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst.0 < GRADCHECK_TOL && secs < GRADCHECK_SECONDS;
    verdict(
        1,
        pass,
        format!(
            "max rel err {:.3e} at {} (< {GRADCHECK_TOL:e}); {}; {secs:.2}s (< {GRADCHECK_SECONDS}s)",
            worst.0,
            worst.1,
            details.join(" ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. projection oracle

/// Exact Euclidean projection onto `{lo ≤ x ≤ hi, Σx ≤ budget}`: the sum
/// `f(μ) = Σ clip(p - μ)` is piecewise linear and non-increasing in `μ`
/// with kinks at `p_i - hi` and `p_i - lo`, so the root is found by
/// walking the sorted kinks and interpolating inside one segment.
fn projection_oracle(p: &[f64], budget: f64, lo: f64, hi: f64) -> Vec<f64> {
    let clip = |mu: f64| -> Vec<f64> { p.iter().map(|&v| (v - mu).clamp(lo, hi)).collect() };
    let total = |mu: f64| -> f64 { clip(mu).iter().sum() };
    if total(0.0) <= budget {
        return clip(0.0);
    }
    let mut kinks: Vec<f64> = p
        .iter()
        .flat_map(|&v| [v - hi, v - lo])
        .filter(|&k| k > 0.0)
        .collect();
    kinks.push(0.0);
    kinks.sort_by(f64::total_cmp);
    for w in kinks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (total(a), total(b));
        if fa >= budget && fb <= budget {
            let mu = if fa == fb {
                a
            } else {
                a + (fa - budget) / (fa - fb) * (b - a)
            };
            return clip(mu);
        }
    }
    unreachable!("budget below the feasible minimum")
}

#[test]
fn c02_projection_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lo = DEFAULT_P_MIN;
    let mut max_err: f64 = 0.0;
    let mut max_idem: f64 = 0.0;
    let mut infeasible = 0usize;
    let mut active = 0usize;
    for case in 0..PROJECTION_INSTANCES {
        let n = rng.random_range(1..=20usize);
        let hi = if case % 2 == 0 { 1.0 } else { 1.0 - DEFAULT_P_MIN };
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..1.5)).collect();
        let budget = if case % 5 == 0 {
            n as f64
        } else {
            rng.random_range(n as f64 * lo..=n as f64 * 0.8)
        };
        let got = project_budget(&p, budget, lo, hi, DEFAULT_XI).unwrap();
        let want = projection_oracle(&p, budget, lo, hi);
        if want.iter().sum::<f64>() > budget - 1e-9 {
            active += 1;
        }
        for (a, b) in got.iter().zip(&want) {
            max_err = max_err.max((a - b).abs());
        }
        let sum: f64 = got.iter().sum();
        if got.iter().any(|&v| !(lo..=hi).contains(&v)) || sum > budget + 1e-9 {
            infeasible += 1;
        }
        let again = project_budget(&got, budget, lo, hi, DEFAULT_XI).unwrap();
        for (a, b) in again.iter().zip(&got) {
            max_idem = max_idem.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = max_err <= PROJECTION_TOL && infeasible == 0 && max_idem <= 1e-12 && secs < PROJECTION_SECONDS;
    verdict(
        2,
        pass,
        format!(
            "{PROJECTION_INSTANCES} instances ({active} with active budget): max |Δ| {max_err:.3e} (<= {PROJECTION_TOL:e}), \
             infeasible {infeasible}, idempotence drift {max_idem:.1e}; {secs:.2}s (< {PROJECTION_SECONDS}s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. mask law

#[test]
fn c03_mask_law() {
    let mut worst: f64 = 0.0;
    let mut tau_dependent = 0usize;
    let mut cells = Vec::new();
    for (pi, &p) in [0.01, 0.1, 0.5, 1.0].iter().enumerate() {
        let mut reference: Option<Vec<f64>> = None;
        for &tau in &[0.1, 0.5, 2.0] {
            let mut s = SanitizerState::new(MASK_DRAWS, MASK_DRAWS as f64, tau, 0.0, MaskLaw::Gumbel).unwrap();
            s.set_probabilities(vec![p; MASK_DRAWS]).unwrap();
            let noise = s.noise(seed::derive_at(31, "mask_law", pi as u64));
            let m = s.hard_mask(&noise).unwrap();
            let freq = m.iter().sum::<f64>() / MASK_DRAWS as f64;
            let dev = (freq - (1.0 - (-p).exp())).abs();
            worst = worst.max(dev);
            cells.push(format!("P={p},τ={tau}:{freq:.4}"));
            match &reference {
                None => reference = Some(m),
                Some(r) => tau_dependent += r.iter().zip(&m).filter(|(a, b)| a != b).count(),
            }
        }
    }
    let pass = worst <= MASK_TOL && tau_dependent == 0;
    verdict(
        3,
        pass,
        format!(
            "max |freq - (1-e^-P)| {worst:.4} (<= {MASK_TOL}); decisions changed by τ_g: {tau_dependent}; {}",
            cells.join(" ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. metric oracles

struct Instance {
    g: Graph,
    mask: Vec<f64>,
    h: Array2<f64>,
    k: usize,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(4..=30usize);
    let p = rng.random_range(1..=4usize);
    let k = rng.random_range(2..=4usize).min(n);
    let density = rng.random_range(0.05..0.5);
    let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0));
    // Every class is nonempty so that each cluster has positive volume.
    let mut y: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    y.rotate_left(rng.random_range(0..n));
    let mut edges = vec![(0, 1)];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::new(x, edges, Some(y)).unwrap();
    let mask = (0..g.n_edges()).map(|_| rng.random::<f64>()).collect();
    let h = Array2::from_shape_fn((n, rng.random_range(1..=5usize)), |_| rng.random_range(-3.0..3.0));
    Instance { g, mask, h, k }
}

/// Weighted degree with the self-loop: `1 + Σ_e w_e` over incident edges.
fn loop_degrees(g: &Graph, w: &[f64]) -> Vec<f64> {
    let mut d = vec![1.0; g.n_nodes()];
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        d[i] += w[e];
        d[j] += w[e];
    }
    d
}

/// `tr(Mᵀ L M)` as `Σ_e w_e Σ_c (M_ic/√d_i - M_jc/√d_j)²`, column `c` only
/// when `col` is given.
fn edge_quadratic(g: &Graph, w: &[f64], d: &[f64], m: &Array2<f64>, col: Option<usize>) -> f64 {
    let mut total = 0.0;
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        for c in 0..m.ncols() {
            if col.is_some_and(|k| k != c) {
                continue;
            }
            let diff = m[[i, c]] / d[i].sqrt() - m[[j, c]] / d[j].sqrt();
            total += w[e] * diff * diff;
        }
    }
    total
}

fn cut_oracle(g: &Graph, w: &[f64], c: &Array2<f64>) -> f64 {
    let d = loop_degrees(g, w);
    let mut total = 0.0;
    for k in 0..c.ncols() {
        let num = edge_quadratic(g, w, &d, c, Some(k));
        let mut den = 0.0;
        for i in 0..g.n_nodes() {
            den += c[[i, k]] * c[[i, k]] * d[i];
        }
        total += num / den;
    }
    total
}

fn nmi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let n = a.len() as f64;
    let mut table = vec![vec![0.0; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let h = |v: &[f64]| -> f64 {
        let mut s = 0.0;
        for &c in v {
            if c > 0.0 {
                s -= c / n * (c / n).ln();
            }
        }
        s
    };
    let (ha, hb) = (h(&rows), h(&cols));
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i][j];
            if c > 0.0 {
                mi += c / n * ((c / n) / ((rows[i] / n) * (cols[j] / n))).ln();
            }
        }
    }
    mi / (ha * hb).sqrt()
}

#[test]
fn c04_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: HashMap<&str, f64> = HashMap::new();
    let mut bump = |k: &'static str, a: f64, b: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max((a - b).abs());
    };
    for _ in 0..METRIC_INSTANCES {
        let inst = random_instance(&mut rng);
        let g = &inst.g;
        let y = g.labels().unwrap();
        let ones = vec![1.0; g.n_edges()];

        let intra = g.edges().iter().filter(|&&(i, j)| y[i] == y[j]).count();
        bump("h_y", graph::homophily_label(g).unwrap(), intra as f64 / g.n_edges() as f64);

        for w in [&ones, &inst.mask] {
            let d = loop_degrees(g, w);
            let want = edge_quadratic(g, w, &d, g.features(), None);
            bump("δ_x", graph::homophily_feature(g, Some(w)).unwrap(), want);
        }

        let c = ClusterAssignment::hard(y, inst.k);
        let want = cut_oracle(g, &ones, &c.0) / inst.k as f64;
        bump("L_nc", graph::normalized_cut(g, &c).unwrap(), want);

        let s = inst.h.mapv(|v| 1.0 / (1.0 + (-v).exp()));
        let want = cut_oracle(g, &inst.mask, &s);
        bump(
            "L_pnc",
            trainer::pseudo_normalized_cut_on(g, Some(&inst.mask), &inst.h).unwrap(),
            want,
        );

        let other: Vec<usize> = (0..g.n_nodes()).map(|_| rng.random_range(0..inst.k + 1)).collect();
        bump("NMI", eval::nmi(y, &other).unwrap(), nmi_oracle(y, &other));
        bump("NMI", eval::nmi(y, y).unwrap(), nmi_oracle(y, y));
    }
    let mut keys: Vec<_> = worst.iter().collect();
    keys.sort_by_key(|(k, _)| *k);
    let pass = worst.values().all(|&e| e <= METRIC_TOL);
    let detail = keys
        .iter()
        .map(|(k, e)| format!("{k}={e:.1e}"))
        .collect::<Vec<_>>()
        .join(" ");
    verdict(
        4,
        pass,
        format!("{METRIC_INSTANCES} instances, max |Δ| (<= {METRIC_TOL:e}): {detail}"),
    );
}

// ---------------------------------------------------------------------------
// Shared desk-scale benchmark: SBM(300, 3, 0.05, 0.002, mean_sep 1) with
// heterophily injection, logistic-regression accuracy on a 10/10/80 split.

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Data {
    Clean,
    Poisoned(u32),
}

struct Run {
    model: TrainedModel,
    accuracy: f64,
    secs: f64,
}

struct Selection {
    eta: f64,
    grid: Vec<f64>,
    pnc: Vec<f64>,
    accuracy: Vec<f64>,
    pearson: Option<f64>,
    secs: f64,
}

type RunKey = (String, Data, u64);

fn runs() -> &'static Mutex<HashMap<RunKey, Arc<Run>>> {
    static RUNS: OnceLock<Mutex<HashMap<RunKey, Arc<Run>>>> = OnceLock::new();
    RUNS.get_or_init(|| Mutex::new(HashMap::new()))
}

fn clean_graph(s: u64) -> Graph {
    graph::generate_sbm(&SbmConfig {
        seed: s,
        ..SbmConfig::default()
    })
    .unwrap()
}

fn poisoned(s: u64, pct: u32) -> Poisoned {
    let g = clean_graph(s);
    let budget = AttackBudget::new(pct as f64 / 100.0, g.n_edges()).unwrap();
    inject_heterophily(&g, budget, seed::derive(s, "inject")).unwrap()
}

fn graph_of(data: Data, s: u64) -> Graph {
    match data {
        Data::Clean => clean_graph(s),
        Data::Poisoned(pct) => poisoned(s, pct).graph,
    }
}

/// ε for a seed: the number of edges injected at the strong power, also
/// used for clean-graph runs that are compared against that pair.
fn sanitation_budget(data: Data, s: u64) -> f64 {
    let pct = match data {
        Data::Clean => STRONG,
        Data::Poisoned(p) => p,
    };
    poisoned(s, pct).inserted.len() as f64
}

fn accuracy(g: &Graph, model: &TrainedModel, s: u64) -> f64 {
    let split = Split::random(g.n_nodes(), eval::DEFAULT_SPLIT, seed::derive(s, "split")).unwrap();
    100.0 * eval::train_logreg(&model.embeddings, g.labels().unwrap(), &split, seed::derive(s, "logreg")).unwrap()
}

fn config(mode: Mode, data: Data, s: u64, eta: f64) -> TrainConfig {
    TrainConfig {
        mode,
        eta,
        budget: Some(sanitation_budget(data, s)),
        seed: s,
        ..TrainConfig::default()
    }
}

/// η chosen without labels: the default grid swept on the seed-0 strong
/// benchmark and the smallest smoothed `L_pnc` at `t*` selected.
fn selection() -> &'static Selection {
    static SELECTION: OnceLock<Selection> = OnceLock::new();
    SELECTION.get_or_init(|| {
        let start = Instant::now();
        let data = Data::Poisoned(STRONG);
        let g = graph_of(data, 0);
        let sweep = trainer::sweep_eta(&g, &DEFAULT_ETA_GRID, &config(Mode::Full, data, 0, 1.0)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let accuracy: Vec<f64> = sweep.accuracy.clone().unwrap().iter().map(|a| 100.0 * a).collect();
        let eta = sweep.best_eta();
        let model = sweep.models[sweep.best_index].clone();
        let run = Run {
            accuracy: accuracy[sweep.best_index],
            model,
            secs: 0.0,
        };
        runs()
            .lock()
            .unwrap()
            .insert((Mode::Full.to_string(), data, 0), Arc::new(run));
        Selection {
            eta,
            grid: sweep.grid.clone(),
            pnc: sweep.pnc.clone(),
            accuracy,
            pearson: sweep.pearson,
            secs,
        }
    })
}

fn eta_for(mode: Mode) -> f64 {
    match mode {
        Mode::Full | Mode::NoInfo => selection().eta,
        Mode::NoDelta | Mode::Baseline => 1.0,
    }
}

fn run(mode: Mode, data: Data, s: u64) -> Arc<Run> {
    let eta = eta_for(mode);
    let key = (mode.to_string(), data, s);
    let mut cache = runs().lock().unwrap();
    if let Some(r) = cache.get(&key) {
        return Arc::clone(r);
    }
    let g = graph_of(data, s);
    let start = Instant::now();
    let model = trainer::train_gchs(&g, &config(mode, data, s, eta)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let accuracy = accuracy(&g, &model, s);
    let r = Arc::new(Run { model, accuracy, secs });
    cache.insert(key, Arc::clone(&r));
    r
}

fn uses_selection(mode: Mode) -> bool {
    matches!(mode, Mode::Full | Mode::NoInfo)
}

/// Runs of `mode` over all seeds and the training time they cost, counting
/// the η sweep once when the mode depends on it.
fn runs_over_seeds(mode: Mode, data: Data) -> (Vec<Arc<Run>>, f64) {
    let rs: Vec<_> = SEEDS.iter().map(|&s| run(mode, data, s)).collect();
    let mut secs: f64 = rs.iter().map(|r| r.secs).sum();
    if uses_selection(mode) {
        secs += selection().secs;
    }
    (rs, secs)
}

fn mean_accuracy(rs: &[Arc<Run>]) -> f64 {
    eval::mean(&rs.iter().map(|r| r.accuracy).collect::<Vec<_>>())
}

fn fmt_list(v: &[f64], digits: usize) -> String {
    v.iter().map(|x| format!("{x:.digits$}")).collect::<Vec<_>>().join(",")
}

/// GRV of each seed's clean/strong pair under `mode` and the time spent.
fn grv_over_seeds(mode: Mode) -> (Vec<f64>, f64) {
    let (clean, t1) = runs_over_seeds(mode, Data::Clean);
    let (dirty, t2) = runs_over_seeds(mode, Data::Poisoned(STRONG));
    let start = Instant::now();
    let grv = SEEDS
        .iter()
        .zip(clean.iter().zip(&dirty))
        .map(|(&s, (c, d))| {
            eval::grv_from_models(
                &graph_of(Data::Clean, s),
                &graph_of(Data::Poisoned(STRONG), s),
                c.model.clone(),
                d.model.clone(),
                MI_SAMPLES,
                seed::derive(s, "grv"),
            )
            .unwrap()
            .grv
        })
        .collect();
    let shared = if uses_selection(mode) { selection().secs } else { 0.0 };
    (grv, t1 + t2 - shared + start.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------------------
// 5. vulnerability of the plain contrastive model

#[test]
fn c05_baseline_grv_positive() {
    let (grv, secs) = grv_over_seeds(Mode::Baseline);
    let pass = grv.iter().all(|&v| v > 0.0) && secs < GRV_SECONDS;
    verdict(
        5,
        pass,
        format!(
            "baseline GRV per seed [{}] (all > 0); {secs:.0}s (< {GRV_SECONDS}s)",
            fmt_list(&grv, 4)
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. robustness ordering

#[test]
fn c06_robustness_ordering() {
    let (base_strong, t1) = runs_over_seeds(Mode::Baseline, Data::Poisoned(STRONG));
    let (base_weak, t2) = runs_over_seeds(Mode::Baseline, Data::Poisoned(WEAK));
    let (full_strong, t3) = runs_over_seeds(Mode::Full, Data::Poisoned(STRONG));
    let (full_weak, t4) = runs_over_seeds(Mode::Full, Data::Poisoned(WEAK));
    let secs = t1 + t2 + t3 + t4 - selection().secs;
    let gap_strong = mean_accuracy(&full_strong) - mean_accuracy(&base_strong);
    let gap_weak = mean_accuracy(&full_weak) - mean_accuracy(&base_weak);
    let pass = gap_strong >= ROBUSTNESS_MARGIN && gap_strong >= gap_weak && secs < ROBUSTNESS_SECONDS;
    verdict(
        6,
        pass,
        format!(
            "η*={}; {STRONG}%: full {:.2} vs baseline {:.2}, gap {gap_strong:.2} (>= {ROBUSTNESS_MARGIN}); \
             {WEAK}%: full {:.2} vs baseline {:.2}, gap {gap_weak:.2} (<= strong gap); {secs:.0}s (< {ROBUSTNESS_SECONDS}s)",
            selection().eta,
            mean_accuracy(&full_strong),
            mean_accuracy(&base_strong),
            mean_accuracy(&full_weak),
            mean_accuracy(&base_weak),
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. sanitation precision

#[test]
fn c07_sanitation_precision() {
    let mut pass = true;
    let mut parts = Vec::new();
    for pct in [WEAK, STRONG] {
        for &s in &SEEDS {
            let r = run(Mode::Full, Data::Poisoned(pct), s);
            let injected = poisoned(s, pct).inserted_mask();
            let p = &r.model.p;
            let pick = |flag: bool| -> Vec<f64> {
                p.iter().zip(&injected).filter(|(_, &f)| f == flag).map(|(&v, _)| v).collect()
            };
            let (p_inj, p_orig) = (eval::mean(&pick(true)), eval::mean(&pick(false)));
            let eps = injected.iter().filter(|&&f| f).count();
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
            let hits = order[..eps].iter().filter(|&&e| injected[e]).count();
            let precision = hits as f64 / eps as f64;
            pass &= p_inj > p_orig && precision >= PRECISION_FLOOR;
            parts.push(format!(
                "{pct}%/s{s}: P̄inj {p_inj:.4} vs P̄orig {p_orig:.4}, top-ε precision {precision:.3}"
            ));
        }
    }
    verdict(
        7,
        pass,
        format!("(need P̄inj > P̄orig and precision >= {PRECISION_FLOOR}) {}", parts.join("; ")),
    );
}

// ---------------------------------------------------------------------------
// 8. unsupervised tuning sign

#[test]
fn c08_tuning_correlation_sign() {
    let sel = selection();
    let pass = sel.pearson.is_some_and(|r| r < 0.0);
    verdict(
        8,
        pass,
        format!(
            "pearson(L_pnc at t*, accuracy) = {:?} (< 0); η grid [{}], L_pnc [{}], accuracy [{}], selected η {}",
            sel.pearson,
            fmt_list(&sel.grid, 4),
            fmt_list(&sel.pnc, 4),
            fmt_list(&sel.accuracy, 2),
            sel.eta
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. ablation ordering

#[test]
fn c09_ablation_ordering() {
    let data = Data::Poisoned(STRONG);
    let acc = |mode| mean_accuracy(&runs_over_seeds(mode, data).0);
    let (full, no_info, no_delta, base) = (
        acc(Mode::Full),
        acc(Mode::NoInfo),
        acc(Mode::NoDelta),
        acc(Mode::Baseline),
    );
    let checks = [
        ("full >= no_info", full + ABLATION_SLACK >= no_info),
        ("full >= no_delta", full + ABLATION_SLACK >= no_delta),
        ("no_info >= baseline", no_info + ABLATION_SLACK >= base),
        ("no_delta >= baseline", no_delta + ABLATION_SLACK >= base),
    ];
    let failed: Vec<_> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        9,
        failed.is_empty(),
        format!(
            "mean accuracy full {full:.2}, no_info {no_info:.2}, no_delta {no_delta:.2}, baseline {base:.2} \
             (slack {ABLATION_SLACK}); violated: {failed:?}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. GRV robustness

#[test]
fn c10_grv_robustness() {
    let (base, _) = grv_over_seeds(Mode::Baseline);
    let (full, _) = grv_over_seeds(Mode::Full);
    let pass = full.iter().zip(&base).all(|(f, b)| f < b);
    verdict(
        10,
        pass,
        format!(
            "GRV per seed full [{}] vs baseline [{}] (full < baseline each seed)",
            fmt_list(&full, 4),
            fmt_list(&base, 4)
        ),
    );
}
