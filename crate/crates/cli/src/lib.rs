//! The `orthobox` command line.
//!
//! Exit codes: 0 success, 1 a check or assertion failed, 2 bad input.
//! `ORTHOBOX_COLOR=0|1` turns colour off or on; by default it follows
//! whether standard output is a terminal. All randomness comes from
//! `ChaCha8Rng::seed_from_u64(--seed)`, default seed 0.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use orthobox::behavior::{
    check_exclusivity, chsh, correlation_pattern, joint_feasibility, no_signalling_check, BehaviorTable,
};
use orthobox::io::{behavior_to_toml, bundled_scenario, load_scenario_file, ScenarioFile};
use orthobox::models::{
    bundled_plan, enumerate_histories, parse_plan, render_history, sample_histories, AnyModel, Model, Plan,
    SeerModel, BUNDLED_PLANS,
};
use orthobox::protocols::{
    assumption_matrix, realize_pr_box, render_matrix_text, simulate_fable, write_fable_csv, write_matrix_csv,
    Interpretation,
};
use orthobox::quantumref::{format_deviation, reference_checks, write_checks_csv, TOLERANCE};
use orthobox::rational::{format_rational, parse_rational, to_decimal, to_f64};
use orthobox::theorem::{sweep_gap, write_gap_csv, GridSpec};
use orthobox::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "orthobox",
    version,
    about = "Specker's principle, no-signalling and three toy models that break it",
    after_help = "Exit codes: 0 success, 1 check failed, 2 input error. \
                  ORTHOBOX_COLOR=0|1 forces plain or coloured text."
)]
struct Cli {
    /// Seed for ChaCha8 (`seed_from_u64`); every random draw comes from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print rationals as num/den in text output as well as CSV.
    #[arg(long, global = true)]
    exact: bool,
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Specker structure, exclusivity and joint feasibility of a scenario
    /// (a TOML file or one of: specker_triple, firefly, lsw).
    Check { scenario: String },
    /// Sweep the signalling gap over a grid of marginals; every gap must be
    /// positive.
    VerifyTheorem {
        /// Grid k/N for 0 < k < N.
        #[arg(long, default_value_t = 24)]
        grid: u32,
        /// Use every fraction with denominator at most N instead.
        #[arg(long)]
        farey: bool,
    },
    /// Run a plan many times on a model and compare with exact enumeration.
    Simulate {
        /// seer, firefly, lsw or firefly:<flavor>.
        model: String,
        /// Plan file, or a bundled plan: fable, lsw_sequence, firefly_ca_bc.
        #[arg(long)]
        plan: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Firefly flavor: mirror, alice_cuts_bob_local, alice_cuts_bob_mirror.
        #[arg(long)]
        flavor: Option<String>,
        /// Seer gem probabilities, e.g. 1/3,1/3,1/3.
        #[arg(long)]
        marginals: Option<String>,
    },
    /// Replay the two suitors' trials.
    Fable {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Verdicts on assumptions (a), (b), (c), with witnesses; all three
    /// models when none is named.
    Assumptions {
        model: Option<String>,
        #[arg(long)]
        flavor: Option<String>,
    },
    /// PR boxes from the 16 ways of reading each query through either box.
    PrBoxes {
        #[arg(long, default_value = "seer")]
        model: String,
        #[arg(long)]
        flavor: Option<String>,
        /// Read one opened box per side instead (suits lsw).
        #[arg(long)]
        single_box: bool,
        /// Save the first box as a TOML behavior table.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Floating-point checks of the quantum statements.
    QuantumRef {
        /// Random projector triples per dimension 2, 3, 4.
        #[arg(long, default_value_t = 100)]
        povm_trials: usize,
        /// Random states for the order test.
        #[arg(long, default_value_t = 50)]
        states: usize,
    },
}

/// What a subcommand produced: the report and whether its checks held.
struct Report {
    body: String,
    passed: bool,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, passed: true }
    }
}

struct Ctx {
    seed: u64,
    csv: bool,
    exact: bool,
    color: bool,
}

impl Ctx {
    fn num(&self, r: &Rational) -> String {
        if self.exact {
            format_rational(r)
        } else {
            to_decimal(r)
        }
    }
}

type Outcome = Result<Report, String>;

/// Runs with plain text unless `ORTHOBOX_COLOR=1`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, out, err, false)
}

/// `color_default` applies when `ORTHOBOX_COLOR` is unset.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color_default: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let color = match std::env::var("ORTHOBOX_COLOR").as_deref() {
        Ok("0") => false,
        Ok("1") => true,
        _ => color_default,
    };
    let ctx = Ctx {
        seed: cli.seed,
        csv: cli.format == Format::Csv,
        exact: cli.exact,
        color: color && cli.output.is_none(),
    };
    let result = match cli.command {
        Command::Check { scenario } => check(&ctx, &scenario),
        Command::VerifyTheorem { grid, farey } => verify_theorem(&ctx, grid, farey),
        Command::Simulate {
            model,
            plan,
            trials,
            flavor,
            marginals,
        } => simulate(&ctx, &model, flavor.as_deref(), marginals.as_deref(), &plan, trials),
        Command::Fable { trials } => fable(&ctx, trials),
        Command::Assumptions { model, flavor } => assumptions(&ctx, model.as_deref(), flavor.as_deref()),
        Command::PrBoxes {
            model,
            flavor,
            single_box,
            save,
        } => pr_boxes(&ctx, &model, flavor.as_deref(), single_box, save.as_deref()),
        Command::QuantumRef { povm_trials, states } => quantum_ref(&ctx, povm_trials, states),
    };
    let report = match result {
        Ok(r) => r,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INPUT;
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &report.body).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(report.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: cannot write report: {msg}");
        return EXIT_INPUT;
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> Result<String, String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn braces(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(", "))
}

fn load_scenario(name: &str) -> Result<ScenarioFile, String> {
    let path = Path::new(name);
    if path.exists() {
        return load_scenario_file(path).map_err(|e| format!("{name}: {e}"));
    }
    bundled_scenario(name.trim_end_matches(".toml"))
        .ok_or_else(|| format!("{name}: no such file or bundled scenario (specker_triple, firefly, lsw)"))
}

fn check(ctx: &Ctx, name: &str) -> Outcome {
    let file = load_scenario(name)?;
    let s = &file.scenario;
    let graph = s.orthogonality_graph();
    let specker = s.is_specker();
    let minimal = s.find_minimal_non_specker();
    let mut rows: Vec<(&str, bool, String)> = vec![(
        "specker",
        specker,
        minimal.as_deref().map(braces).unwrap_or_default(),
    )];
    let mut feasible = None;
    if let Some(m) = &file.marginals {
        let ex = check_exclusivity(m, &graph).map_err(|e| e.to_string())?;
        let detail = match &ex.violation {
            Some((clique, sum)) => format!("{} sums to {}", braces(clique), ctx.num(sum)),
            None => String::new(),
        };
        rows.push(("exclusivity", ex.holds, detail));
        let cert = joint_feasibility(&graph, m).map_err(|e| e.to_string())?;
        feasible = Some(cert.is_feasible());
        rows.push(("feasibility", cert.is_feasible(), cert.describe(&graph)));
    }
    let passed = rows.iter().all(|r| r.1);
    if ctx.csv {
        let body = csv_string(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            let run = |w: &mut csv::Writer<&mut Vec<u8>>| -> csv::Result<()> {
                w.write_record(["check", "result", "detail"])?;
                for (c, ok, d) in &rows {
                    w.write_record([*c, if *ok { "pass" } else { "fail" }, d.as_str()])?;
                }
                w.flush()?;
                Ok(())
            };
            run(&mut w).map_err(|e| e.to_string())
        })?;
        return Ok(Report { body, passed });
    }
    let mut body = format!(
        "scenario: {} propositions {}\nmaximal joint sets: {}\n",
        s.len(),
        braces(s.labels()),
        s.maximal_sets().iter().map(|m| braces(m)).collect::<Vec<_>>().join(" ")
    );
    for (c, ok, d) in &rows {
        let word = if *ok { "pass" } else { "fail" };
        if d.is_empty() {
            body.push_str(&format!("{c}: {word}\n"));
        } else {
            body.push_str(&format!("{c}: {word} ({d})\n"));
        }
    }
    let verdict = match (specker, feasible) {
        (true, _) => "Specker: every pairwise orthogonal set is jointly orthogonal",
        (false, Some(false)) => "non-Specker: infeasible joint distribution",
        (false, Some(true)) => "non-Specker: these marginals still admit a joint distribution",
        (false, None) => "non-Specker",
    };
    body.push_str(verdict);
    body.push('\n');
    Ok(Report { body, passed })
}

fn verify_theorem(ctx: &Ctx, n: u32, farey: bool) -> Outcome {
    if n < 2 {
        return Err("--grid must be at least 2".into());
    }
    if n > 200 {
        return Err("--grid above 200 is not supported".into());
    }
    let grid = if farey { GridSpec::Farey(n) } else { GridSpec::Uniform(n) };
    let rows = sweep_gap(&grid);
    let passed = rows.iter().all(|r| r.gap > Rational::from_integer(0));
    if ctx.csv {
        let body = csv_string(|buf| write_gap_csv(&rows, buf, true).map_err(|e| e.to_string()))?;
        return Ok(Report { body, passed });
    }
    let describe = if farey {
        format!("fractions with denominator at most {n}")
    } else {
        format!("k/{n} for 0 < k < {n}")
    };
    let mut body = format!("grid: {describe} ({} values)\nvalid points: {}\n", grid.values().len(), rows.len());
    let clamped = rows.iter().filter(|r| r.beta_worst == Rational::from_integer(1)).count();
    body.push_str(&format!("clamped (beta = 1): {clamped}\n"));
    let point = |r: &orthobox::theorem::GapRow| {
        let p = r.marginals.as_array();
        format!("({}, {}, {})", ctx.num(&p[0]), ctx.num(&p[1]), ctx.num(&p[2]))
    };
    if let Some(min) = rows.iter().min_by(|a, b| a.gap.cmp(&b.gap)) {
        body.push_str(&format!("min gap: {} at {}\n", ctx.num(&min.gap), point(min)));
    }
    if let Some(max) = rows.iter().max_by(|a, b| a.gap.cmp(&b.gap)) {
        body.push_str(&format!("max gap: {} at {}\n", ctx.num(&max.gap), point(max)));
    }
    body.push_str(if passed { "all gaps positive\n" } else { "some gap is not positive\n" });
    Ok(Report { body, passed })
}

fn parse_model(name: &str, flavor: Option<&str>, marginals: Option<&str>) -> Result<AnyModel, String> {
    let model = AnyModel::from_name(name, flavor).map_err(|e| e.to_string())?;
    match (marginals, model) {
        (None, m) => Ok(m),
        (Some(text), AnyModel::Seer(_)) => {
            let values = text
                .split(',')
                .map(|v| parse_rational(v.trim()).map_err(|e| format!("--marginals {v:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            let arr: [Rational; 3] = values
                .try_into()
                .map_err(|_| "--marginals needs three values".to_string())?;
            SeerModel::with_marginals(arr).map(AnyModel::Seer).map_err(|e| e.to_string())
        }
        (Some(_), _) => Err("--marginals applies to the seer model only".into()),
    }
}

fn load_plan(name: &str) -> Result<Plan, String> {
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        return parse_plan(&text).map_err(|e| format!("{name}: {e}"));
    }
    bundled_plan(name.trim_end_matches(".plan")).ok_or_else(|| {
        let names: Vec<&str> = BUNDLED_PLANS.iter().map(|(n, _)| *n).collect();
        format!("{name}: no such file or bundled plan ({})", names.join(", "))
    })
}

fn simulate(
    ctx: &Ctx,
    model: &str,
    flavor: Option<&str>,
    marginals: Option<&str>,
    plan: &str,
    trials: u64,
) -> Outcome {
    if trials == 0 {
        return Err("--trials must be positive".into());
    }
    let model = parse_model(model, flavor, marginals)?;
    let plan = load_plan(plan)?;
    let exact = enumerate_histories(&model, &plan).map_err(|e| e.to_string())?;
    let sample = sample_histories(&model, &plan, trials, ctx.seed).map_err(|e| e.to_string())?;
    let mut expected: BTreeMap<_, Rational> = BTreeMap::new();
    for e in exact.entries.iter().filter(|e| !e.forbidden) {
        *expected.entry(e.history.clone()).or_default() += e.probability;
    }
    for h in sample.counts.keys() {
        expected.entry(h.clone()).or_default();
    }
    let vocab = model.vocabulary();
    let mut rows: Vec<(String, u64, Rational)> = expected
        .iter()
        .map(|(h, p)| (render_history(h, vocab), sample.counts.get(h).copied().unwrap_or(0), *p))
        .collect();
    if exact.has_forbidden() {
        rows.push(("(inconsistent)".into(), sample.forbidden, exact.blocked_mass()));
    }
    let n = trials as f64;
    let z = |count: u64, p: &Rational| {
        let p = to_f64(p);
        let sd = (p * (1.0 - p) / n).sqrt();
        let diff = count as f64 / n - p;
        if sd == 0.0 {
            if diff == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            diff.abs() / sd
        }
    };
    if ctx.csv {
        let body = csv_string(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            let run = |w: &mut csv::Writer<&mut Vec<u8>>| -> csv::Result<()> {
                w.write_record(["history", "count", "frequency", "exact"])?;
                for (h, c, p) in &rows {
                    let freq = Rational::new(*c as i128, trials as i128);
                    w.write_record([h.clone(), c.to_string(), format_rational(&freq), format_rational(p)])?;
                }
                w.flush()?;
                Ok(())
            };
            run(&mut w).map_err(|e| e.to_string())
        })?;
        return Ok(Report::ok(body));
    }
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(7).max(7);
    let mut body = format!(
        "model: {}\nplan: {plan}\ntrials: {trials}  seed: {}\n\n{:<width$}  {:>8}  {:>14}  {:>14}\n",
        model.name(),
        ctx.seed,
        "history",
        "count",
        "frequency",
        "exact"
    );
    for (h, c, p) in &rows {
        let freq = Rational::new(*c as i128, trials as i128);
        body.push_str(&format!("{h:<width$}  {c:>8}  {:>14}  {:>14}\n", ctx.num(&freq), ctx.num(p)));
    }
    let worst = rows.iter().map(|(_, c, p)| z(*c, p)).fold(0.0, f64::max);
    body.push_str(&format!("\nlargest deviation: {worst:.2} standard deviations\n"));
    Ok(Report::ok(body))
}

fn fable(ctx: &Ctx, trials: u64) -> Outcome {
    if trials == 0 {
        return Err("--trials must be positive".into());
    }
    let stats = simulate_fable(trials, ctx.seed).map_err(|e| e.to_string())?;
    let passed = stats.daniel_successes == trials && stats.sandu_second_successes == trials;
    if ctx.csv {
        let body = csv_string(|buf| write_fable_csv(&stats, buf).map_err(|e| e.to_string()))?;
        return Ok(Report { body, passed });
    }
    let line = |what: &str, n: u64, rate: Rational| format!("{what}: {n} of {trials} (rate {})\n", ctx.num(&rate));
    let mut body = format!("trials: {trials}  seed: {}\n", ctx.seed);
    body.push_str(&line("Daniel's prophecy fulfilled", stats.daniel_successes, stats.daniel_rate()));
    body.push_str(&line("Sandu's first guess right", stats.sandu_first_successes, stats.sandu_first_rate()));
    body.push_str(&line(
        "Sandu's second prophecy right",
        stats.sandu_second_successes,
        stats.sandu_second_rate(),
    ));
    Ok(Report { body, passed })
}

fn assumptions(ctx: &Ctx, model: Option<&str>, flavor: Option<&str>) -> Outcome {
    let models: Vec<AnyModel> = match model {
        Some(name) => vec![parse_model(name, flavor, None)?],
        None if flavor.is_some() => return Err("--flavor needs a model".into()),
        None => AnyModel::canonical().to_vec(),
    };
    let reports = assumption_matrix(&models);
    let body = if ctx.csv {
        csv_string(|buf| write_matrix_csv(&reports, buf).map_err(|e| e.to_string()))?
    } else {
        render_matrix_text(&reports, ctx.color)
    };
    Ok(Report::ok(body))
}

fn sign(e: &Rational) -> String {
    if *e == Rational::from_integer(1) {
        "+1".into()
    } else if *e == Rational::from_integer(-1) {
        "-1".into()
    } else {
        to_decimal(e)
    }
}

fn pr_boxes(ctx: &Ctx, model: &str, flavor: Option<&str>, single: bool, save: Option<&Path>) -> Outcome {
    let model = parse_model(model, flavor, None)?;
    let interps = if single {
        vec![Interpretation::single_box()]
    } else {
        Interpretation::all_from(Interpretation::standard())
    };
    let mut tables: Vec<(Interpretation, BehaviorTable)> = Vec::new();
    for i in interps {
        let t = realize_pr_box(&model, &i).map_err(|e| format!("{}: {i}: {e}", model.name()))?;
        tables.push((i, t));
    }
    if let Some(path) = save {
        std::fs::write(path, behavior_to_toml(&tables[0].1)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let mut counts: BTreeMap<[[i8; 2]; 2], usize> = BTreeMap::new();
    let mut all_pr = true;
    let mut lines = Vec::new();
    for (i, t) in &tables {
        let pattern = correlation_pattern(t);
        let s = chsh(t).map_err(|e| e.to_string())?;
        let ns = no_signalling_check(t).holds;
        let is_pr = pattern.is_some() && ns && s.value == Rational::from_integer(4);
        all_pr &= is_pr;
        if let Some(p) = pattern {
            *counts.entry(p).or_default() += 1;
        }
        let es: Vec<Rational> = t.correlators().map_err(|e| e.to_string())?.into_iter().map(|c| c.2).collect();
        lines.push((i.to_string(), es, s.value, ns));
    }
    let passed = if single {
        all_pr
    } else {
        all_pr && counts.len() == 8 && counts.values().all(|&c| c == 2)
    };
    if ctx.csv {
        let body = csv_string(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            let run = |w: &mut csv::Writer<&mut Vec<u8>>| -> csv::Result<()> {
                w.write_record(["interpretation", "setting_a", "setting_b", "E"])?;
                for (i, t) in &tables {
                    for (a, b, e) in t.correlators().expect("two-party box") {
                        w.write_record([i.to_string(), a, b, format_rational(&e)])?;
                    }
                }
                w.flush()?;
                Ok(())
            };
            run(&mut w).map_err(|e| e.to_string())
        })?;
        return Ok(Report { body, passed });
    }
    let width = lines.iter().map(|l| l.0.len()).max().unwrap_or(0);
    let mut body = format!(
        "model: {}\n{:<width$}  E(a,b) E(a,b') E(a',b) E(a',b')  S  no-signalling\n",
        model.name(),
        "interpretation"
    );
    for (name, es, s, ns) in &lines {
        body.push_str(&format!(
            "{name:<width$}  {:>6} {:>7} {:>7} {:>8}  {}  {}\n",
            sign(&es[0]),
            sign(&es[1]),
            sign(&es[2]),
            sign(&es[3]),
            ctx.num(s),
            if *ns { "yes" } else { "no" }
        ));
    }
    if !single {
        let times: Vec<String> = counts.values().map(usize::to_string).collect();
        body.push_str(&format!(
            "distinct PR boxes: {} (realised {} times each)\n",
            counts.len(),
            if times.iter().all(|t| *t == times[0]) { times[0].clone() } else { times.join("/") }
        ));
    }
    Ok(Report { body, passed })
}

fn quantum_ref(ctx: &Ctx, povm_trials: usize, states: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let rows = reference_checks(povm_trials, states, &mut rng);
    let passed = rows.iter().all(|r| r.passed());
    if ctx.csv {
        let body = csv_string(|buf| write_checks_csv(&rows, buf).map_err(|e| e.to_string()))?;
        return Ok(Report { body, passed });
    }
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(5);
    let mut body = format!("tolerance: {TOLERANCE:e}  seed: {}\n{:<width$}  dim  deviation\n", ctx.seed, "check");
    for r in &rows {
        body.push_str(&format!(
            "{:<width$}  {:>3}  {}{}\n",
            r.check,
            r.dimension,
            format_deviation(r.deviation),
            if r.passed() { "" } else { "  FAIL" }
        ));
    }
    Ok(Report { body, passed })
}
