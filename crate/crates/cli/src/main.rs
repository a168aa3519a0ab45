//! Command-line front end: ingest problem files, run the
//! classify/check/reformulate/existence/solve/smoothness pipelines, and emit
//! tabular and certificate outputs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 unsupported case, 4 solver non-convergence.

mod csv_out;
mod problem_file;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracivp_core::corpus::{builtin, builtin_algebra_check, BuiltinId};
use fracivp_core::smoothness::{DEFAULT_EXPONENT_MARGIN, DEFAULT_WINDOW};
use fracivp_core::{
    certificate, check_hypotheses, classify, picard_solve, reconstruct_u, reformulate,
    reformulate_forced, residual, smoothness_report, solve_ivp, CaseTag, Grid, GridFunction,
    ProblemSpec, SolveError, Solution, SolverConfig, VolterraProblem,
};
use problem_file::{Overrides, ProblemFile};
use report::{
    CertificateDto, HypothesesDto, InputEcho, ReformulationDto, RunReport, SmoothnessDto,
    NO_GUARANTEE,
};

/// Replication tolerance for the bundled counterexamples.
const REPLICATION_TOL: f64 = 5e-3;
/// Expected singular exponent of the counterexample solutions' top
/// divided differences.
const EXPECTED_EXPONENT: f64 = -0.4;
const EXPONENT_SLACK: f64 = 0.05;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self { code: 2, message }
    }

    fn verification(message: String) -> Self {
        Self { code: 1, message }
    }

    fn unsupported(message: String) -> Self {
        Self { code: 3, message }
    }

    fn nonconvergence(message: String) -> Self {
        Self { code: 4, message }
    }

    fn from_solve(e: SolveError) -> Self {
        match &e {
            SolveError::Model(m) if m.is_unsupported() => Self::unsupported(format!(
                "{m}; pass --force to reformulate anyway (no equivalence guarantee)"
            )),
            SolveError::HypothesesViolated(_) => {
                Self::verification(format!("{e}; pass --force to proceed"))
            }
            SolveError::NodeDiverged { .. } => Self::nonconvergence(format!("{e}")),
            _ => Self::input(format!("{e}")),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fracivp",
    about = "Multi-term Caputo fractional IVP solver: classification, Volterra \
             reformulation, existence certificates, and smoothness diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy, Default)]
struct CommonOverrides {
    /// Grid intervals (overrides the file's [grid] n)
    #[arg(long)]
    grid_n: Option<usize>,
    /// Grid grading exponent r >= 1 (overrides [grid] grading)
    #[arg(long)]
    grid_r: Option<f64>,
    /// Solver stopping tolerance (overrides [solver] tolerance)
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap (overrides [solver] max_iterations)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Proceed outside the theorems' hypotheses (no equivalence guarantee)
    #[arg(long)]
    force: bool,
    /// Allow fractional reconstruction for equal-ceiling orders (forced runs)
    #[arg(long)]
    fractional_reconstruction: bool,
}

impl CommonOverrides {
    fn to_overrides(self) -> Overrides {
        Overrides {
            grid_n: self.grid_n,
            grid_r: self.grid_r,
            tol: self.tol,
            max_iter: self.max_iter,
            force: self.force,
            fractional_reconstruction: self.fractional_reconstruction,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a problem against the equivalence theorems
    Classify { file: PathBuf },
    /// Check the classified case's hypotheses
    Check { file: PathBuf },
    /// Print the Volterra reformulation
    Reformulate {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Compute the existence certificate (box, sup bound, interval)
    Existence {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Solve the problem and write a CSV table plus a run report
    Solve {
        /// Problem file; omit when using --batch
        file: Option<PathBuf>,
        /// CSV output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run-report path (stderr when omitted)
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory of problem files to solve concurrently
        #[arg(long)]
        batch: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Report regularity diagnostics for a solved problem
    Smoothness {
        file: PathBuf,
        /// Reuse a previously written solution CSV instead of solving
        #[arg(long)]
        from_csv: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Replicate the two bundled counterexamples and verify their closed forms
    VerifyCounterexamples {
        /// Grid intervals (default 2048)
        #[arg(long, default_value_t = 2048)]
        grid_n: usize,
        /// Grading exponent (default 2)
        #[arg(long, default_value_t = 2.0)]
        grid_r: f64,
    },
    /// Inspect and export the bundled reference problems
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List bundled problems
    List,
    /// Export a bundled problem in the problem-file format
    Export {
        id: String,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Classify { file } => cmd_classify(&file),
        Command::Check { file } => cmd_check(&file),
        Command::Reformulate { file, common } => cmd_reformulate(&file, common),
        Command::Existence { file, common } => cmd_existence(&file, common),
        Command::Solve { file, out, report, batch, common } => {
            if let Some(dir) = batch {
                cmd_solve_batch(&dir, out.as_deref(), common)
            } else {
                let file = file.ok_or_else(|| {
                    CliError::input("solve needs a problem file or --batch <dir>".into())
                })?;
                cmd_solve(&file, out.as_deref(), report.as_deref(), common)
            }
        }
        Command::Smoothness { file, from_csv, common } => {
            cmd_smoothness(&file, from_csv.as_deref(), common)
        }
        Command::VerifyCounterexamples { grid_n, grid_r } => {
            cmd_verify_counterexamples(grid_n, grid_r)
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => cmd_corpus_list(),
            CorpusAction::Export { id, out } => cmd_corpus_export(&id, out.as_deref()),
        },
    }
}

fn load(file: &Path, common: CommonOverrides) -> Result<(ProblemFile, ProblemSpec), CliError> {
    let mut pf = ProblemFile::load(file)?;
    pf.apply(&common.to_overrides());
    let spec = pf.to_spec()?;
    Ok((pf, spec))
}

fn cmd_classify(file: &Path) -> Result<(), CliError> {
    let (_, spec) = load(file, CommonOverrides::default())?;
    let tag = classify(&spec);
    println!("case = \"{}\"", tag.name());
    match &tag {
        CaseTag::Unsupported(why) => {
            println!("reason = \"{why}\"");
            Err(CliError::unsupported(why.clone()))
        }
        supported => {
            let report = check_hypotheses(&spec, supported, 1e-12)
                .map_err(|e| CliError::input(format!("{e}")))?;
            print!("{}", toml::to_string_pretty(&HypothesesDto::from(&report)).unwrap());
            Ok(())
        }
    }
}

fn cmd_check(file: &Path) -> Result<(), CliError> {
    let (_, spec) = load(file, CommonOverrides::default())?;
    let tag = classify(&spec);
    match &tag {
        CaseTag::Unsupported(why) => Err(CliError::unsupported(why.clone())),
        supported => {
            let report = check_hypotheses(&spec, supported, 1e-12)
                .map_err(|e| CliError::input(format!("{e}")))?;
            print!("{}", toml::to_string_pretty(&HypothesesDto::from(&report)).unwrap());
            if report.all_satisfied() {
                Ok(())
            } else {
                Err(CliError::verification("hypotheses violated".into()))
            }
        }
    }
}

/// Reformulate, honoring force flags; mirrors the solve pipeline's gating.
fn make_volterra(
    spec: &ProblemSpec,
    pf: &ProblemFile,
) -> Result<(CaseTag, VolterraProblem), CliError> {
    let tag = classify(spec);
    match &tag {
        CaseTag::Unsupported(why) => {
            if !pf.flags.force {
                return Err(CliError::unsupported(format!(
                    "{why}; pass --force to reformulate anyway (no equivalence guarantee)"
                )));
            }
            let vp = reformulate_forced(spec, pf.flags.fractional_reconstruction)
                .map_err(|e| CliError::input(format!("{e}")))?;
            Ok((tag, vp))
        }
        supported => {
            let report = check_hypotheses(spec, supported, 1e-12)
                .map_err(|e| CliError::input(format!("{e}")))?;
            if !report.all_satisfied() && !pf.flags.force {
                return Err(CliError::verification(
                    "hypotheses violated; pass --force to proceed".into(),
                ));
            }
            let vp = reformulate(spec, supported).map_err(|e| CliError::input(format!("{e}")))?;
            Ok((tag, vp))
        }
    }
}

fn cmd_reformulate(file: &Path, common: CommonOverrides) -> Result<(), CliError> {
    let (pf, spec) = load(file, common)?;
    let (tag, vp) = make_volterra(&spec, &pf)?;
    println!("case = \"{}\"", tag.name());
    print!("{}", toml::to_string_pretty(&ReformulationDto::from(&vp)).unwrap());
    Ok(())
}

fn cmd_existence(file: &Path, common: CommonOverrides) -> Result<(), CliError> {
    let (pf, spec) = load(file, common)?;
    pf.validate_existence()?;
    let (_, vp) = make_volterra(&spec, &pf)?;
    let cert = certificate(&spec, &vp, pf.existence.k, pf.existence.samples)
        .map_err(|e| CliError::input(format!("{e}")))?;
    print!("{}", toml::to_string_pretty(&CertificateDto::from(&cert)).unwrap());
    Ok(())
}

fn input_echo(pf: &ProblemFile) -> InputEcho {
    InputEcho {
        orders: pf.orders.clone(),
        initial_values: pf.initial_values.clone(),
        horizon: pf.horizon,
        rhs: pf.rhs.clone(),
        grid_n: pf.grid.n,
        grid_grading: pf.grid.grading,
        solver_mode: pf.solver.mode.clone(),
        tolerance: pf.solver.tolerance,
        max_iterations: pf.solver.max_iterations,
        damping: pf.solver.damping,
        force: pf.flags.force,
        fractional_reconstruction: pf.flags.fractional_reconstruction,
    }
}

fn run_solve(pf: &ProblemFile, spec: &ProblemSpec) -> Result<(Solution, Grid), CliError> {
    let grid = pf.to_grid()?;
    let cfg = pf.to_solver_config()?;
    let opts = pf.to_solve_options();
    let sol = solve_ivp(spec, &grid, &cfg, &opts).map_err(CliError::from_solve)?;
    if !sol.log.converged {
        return Err(CliError::nonconvergence(format!(
            "solver did not converge within {} iterations (last update {:e})",
            sol.log.iterations,
            sol.log.sup_updates.last().copied().unwrap_or(f64::NAN)
        )));
    }
    Ok((sol, grid))
}

fn cmd_solve(
    file: &Path,
    out: Option<&Path>,
    report_path: Option<&Path>,
    common: CommonOverrides,
) -> Result<(), CliError> {
    let (pf, spec) = load(file, common)?;
    let (sol, grid) = run_solve(&pf, &spec)?;

    let eps = grid.nodes()[1];
    let res =
        residual(&sol.u, &spec, eps).map_err(|e| CliError::input(format!("residual: {e}")))?;
    let csv = csv_out::solution_csv(&sol.v, &sol.u, Some(&res));

    let mut report = RunReport::new(input_echo(&pf), &sol);
    match pf.validate_existence() {
        Ok(()) => match certificate(&spec, &sol.vp, pf.existence.k, pf.existence.samples) {
            Ok(cert) => report.certificate = Some(CertificateDto::from(&cert)),
            Err(e) => report.certificate_note = Some(format!("certificate unavailable: {e}")),
        },
        Err(e) => report.certificate_note = Some(format!("certificate skipped: {}", e.message)),
    }
    match smoothness_report(&sol.u, &spec, DEFAULT_WINDOW, DEFAULT_EXPONENT_MARGIN) {
        Ok(sr) => report.smoothness = Some(SmoothnessDto::from(&sr)),
        Err(e) => {
            report
                .certificate_note
                .get_or_insert_with(String::new)
                .push_str(&format!(" smoothness unavailable: {e}"));
        }
    }

    match out {
        Some(path) => {
            std::fs::write(path, &csv)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            report.output_csv = Some(path.display().to_string());
        }
        None => print!("{csv}"),
    }
    let report_text = report.to_toml();
    match report_path {
        Some(path) => std::fs::write(path, &report_text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => eprint!("{report_text}"),
    }
    Ok(())
}

fn cmd_solve_batch(
    dir: &Path,
    out_dir: Option<&Path>,
    common: CommonOverrides,
) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::input(format!("no .toml files in {}", dir.display())));
    }
    let target_dir = out_dir.unwrap_or(dir);
    std::fs::create_dir_all(target_dir)
        .map_err(|e| CliError::input(format!("{}: {e}", target_dir.display())))?;

    let results: Vec<(&PathBuf, Result<(), CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|file| {
                let stem = file.file_stem().unwrap().to_string_lossy().into_owned();
                let csv_path = target_dir.join(format!("{stem}.csv"));
                let report_path = target_dir.join(format!("{stem}.report.toml"));
                scope.spawn(move || {
                    cmd_solve(file, Some(&csv_path), Some(&report_path), common)
                })
            })
            .collect();
        files
            .iter()
            .zip(handles.into_iter().map(|h| h.join().expect("batch worker panicked")))
            .collect()
    });

    let mut worst: u8 = 0;
    for (file, result) in &results {
        match result {
            Ok(()) => println!("ok   {}", file.display()),
            Err(e) => {
                println!("fail {} ({})", file.display(), e.message);
                worst = worst.max(e.code);
            }
        }
    }
    if worst == 0 {
        Ok(())
    } else {
        Err(CliError { code: worst, message: "batch had failures".into() })
    }
}

fn cmd_smoothness(
    file: &Path,
    from_csv: Option<&Path>,
    common: CommonOverrides,
) -> Result<(), CliError> {
    let (pf, spec) = load(file, common)?;
    let u = match from_csv {
        Some(csv_path) => {
            let text = std::fs::read_to_string(csv_path)
                .map_err(|e| CliError::input(format!("{}: {e}", csv_path.display())))?;
            let (t, u) = csv_out::read_solution_csv(&text).map_err(CliError::input)?;
            let grid =
                Grid::from_nodes(t, 1.0).map_err(|e| CliError::input(format!("CSV grid: {e}")))?;
            GridFunction::new(grid, u).map_err(|e| CliError::input(format!("CSV values: {e}")))?
        }
        None => run_solve(&pf, &spec)?.0.u,
    };
    let sr = smoothness_report(&u, &spec, DEFAULT_WINDOW, DEFAULT_EXPONENT_MARGIN)
        .map_err(|e| CliError::input(format!("{e}")))?;
    print!("{}", toml::to_string_pretty(&SmoothnessDto::from(&sr)).unwrap());
    Ok(())
}

fn cmd_verify_counterexamples(grid_n: usize, grid_r: f64) -> Result<(), CliError> {
    let mut all_ok = true;
    let check = |name: &str, ok: bool, detail: String| {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        ok
    };

    for id in BuiltinId::ALL {
        let p = builtin(id);

        let algebra = builtin_algebra_check(id);
        all_ok &= check(
            &p.name,
            algebra <= 1e-12,
            format!("closed-form algebra self-check (deviation {algebra:.2e})"),
        );

        let vp = reformulate_forced(&p.spec, p.fractional_reconstruction)
            .map_err(|e| CliError::input(format!("{e}")))?;
        let grid = Grid::graded(p.spec.horizon(), grid_n, grid_r)
            .map_err(|e| CliError::input(format!("{e}")))?;
        let (v, log) = picard_solve(&vp, &grid, &SolverConfig::default())
            .map_err(|e| CliError::input(format!("{e}")))?;
        all_ok &= check(
            &p.name,
            log.converged,
            format!("picard converged in {} iterations", log.iterations),
        );

        let ev = sup_against(&v, |t| p.exact_v.eval(t));
        all_ok &= check(
            &p.name,
            ev <= REPLICATION_TOL,
            format!("|v - closed form| = {ev:.2e} (tolerance {REPLICATION_TOL:.0e})"),
        );

        let u = reconstruct_u(&v, &vp).map_err(|e| CliError::input(format!("{e}")))?;
        let eu = sup_against(&u, |t| p.exact_u.eval(t));
        all_ok &= check(
            &p.name,
            eu <= REPLICATION_TOL,
            format!("|u - closed form| = {eu:.2e} (tolerance {REPLICATION_TOL:.0e})"),
        );

        match smoothness_report(&u, &p.spec, DEFAULT_WINDOW, DEFAULT_EXPONENT_MARGIN) {
            Ok(sr) => {
                let (m, want) = p.expected_smoothness;
                all_ok &= check(
                    &p.name,
                    sr.target_order == m && sr.cm_verdict == want,
                    format!(
                        "smoothness verdict for C^{m} is {} (expected {})",
                        sr.cm_verdict, want
                    ),
                );
                let e_ok = (sr.singular_exponent - EXPECTED_EXPONENT).abs() <= EXPONENT_SLACK;
                all_ok &= check(
                    &p.name,
                    e_ok,
                    format!(
                        "singular exponent {:.4} within {EXPECTED_EXPONENT} +/- {EXPONENT_SLACK}",
                        sr.singular_exponent
                    ),
                );
            }
            Err(e) => {
                all_ok &= check(&p.name, false, format!("smoothness report failed: {e}"));
            }
        }
    }

    if all_ok {
        println!("verify-counterexamples: all checks passed");
        Ok(())
    } else {
        Err(CliError::verification("counterexample replication failed".into()))
    }
}

fn sup_against(f: &GridFunction, reference: impl Fn(f64) -> f64) -> f64 {
    f.grid()
        .nodes()
        .iter()
        .zip(f.values())
        .fold(0.0f64, |a, (&t, &v)| a.max((v - reference(t)).abs()))
}

fn cmd_corpus_list() -> Result<(), CliError> {
    for id in BuiltinId::ALL {
        let p = builtin(id);
        println!(
            "{}  orders = {:?}  forced = {}  expected: not C^{}",
            p.name,
            p.spec.orders(),
            p.forced,
            p.expected_smoothness.0
        );
    }
    Ok(())
}

fn cmd_corpus_export(id: &str, out: Option<&Path>) -> Result<(), CliError> {
    let id = BuiltinId::from_name(id).ok_or_else(|| {
        CliError::input(format!(
            "unknown corpus id '{id}' (try: {})",
            BuiltinId::ALL.map(|i| i.name()).join(", ")
        ))
    })?;
    let p = builtin(id);
    let pf = ProblemFile {
        orders: p.spec.orders().to_vec(),
        initial_values: p.spec.initial_values().to_vec(),
        horizon: p.spec.horizon(),
        rhs: p.spec.rhs().canonical(),
        grid: problem_file::GridSection { n: 2048, grading: 2.0 },
        solver: Default::default(),
        existence: Default::default(),
        flags: problem_file::FlagsSection {
            force: p.forced,
            fractional_reconstruction: p.fractional_reconstruction,
        },
    };
    let text = toml::to_string_pretty(&pf).expect("problem file serializes");
    let text = format!("# {} ({})\n{text}", p.name, NO_GUARANTEE);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
