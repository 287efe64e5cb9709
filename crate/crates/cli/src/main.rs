mod input;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use circlereg::circle::{cost_orig, project_signal};
use circlereg::io::{
    read_lifted, write_lifted, write_phase_image, write_report, write_signal, ConfigEcho,
    ImageFormat, PhaseImage, RunReport,
};
use circlereg::lifting::{cost_conv, relative_gap, tightness_certificate};
use circlereg::oracle::{dp_min_chain, exhaustive_min};
use circlereg::solvers::{
    circular_mean_filter, solve_baseline, solve_relaxation, SolveReport, SolverConfig, TraceEntry,
};
use circlereg::synth::{gen_1d, gen_2d, GaussianStream, SyntheticSpec1D, SyntheticSpec2D};
use circlereg::{Graph, NodeWeight, ProblemInstance};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use input::{InstanceArgs, Shape};

#[derive(Debug, Parser)]
#[command(
    name = "circlereg",
    version,
    about = "Regularization of circle-valued signals on graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic ground truth and its noisy observation.
    Synth(SynthArgs),
    /// Denoise a signal or phase image.
    Denoise(DenoiseArgs),
    /// Fill in missing samples between pinned values.
    Interpolate(InterpolateArgs),
    /// Re-evaluate a saved lifted solution against an instance.
    Certify(CertifyArgs),
    /// Compare the relaxation with exact discrete solvers on small trees.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Sdp,
    Baseline,
    Meanfilter,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Sdp => "sdp",
            Method::Baseline => "baseline",
            Method::Meanfilter => "meanfilter",
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("dim").required(true).args(["d1", "d2"])))]
struct SynthArgs {
    /// One-dimensional random-walk phase.
    #[arg(long)]
    d1: bool,
    /// Two-dimensional smooth phase image.
    #[arg(long)]
    d2: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples of the 1-D signal.
    #[arg(long)]
    n: Option<usize>,
    /// Standard deviation of 1-D phase increments.
    #[arg(long)]
    increment_std: Option<f64>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Standard deviation of the 2-D control phases.
    #[arg(long)]
    control_std: Option<f64>,
    /// Standard deviation of the additive complex noise.
    #[arg(long)]
    noise_std: Option<f64>,
    /// Ground-truth output. Signal text for 1-D, image for 2-D.
    #[arg(long)]
    truth: PathBuf,
    /// Noisy output, same layout as the ground truth.
    #[arg(long)]
    noisy: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    /// Stop when the relative step change falls below this.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Tolerance of the rank-one certificate.
    #[arg(long, default_value_t = 1e-6)]
    tight_tol: f64,
}

impl SolverArgs {
    fn config(&self, record_trace: bool) -> SolverConfig {
        SolverConfig {
            tau: self.tau,
            max_iters: self.max_iters,
            tol: self.tol,
            tight_tol: self.tight_tol,
            record_trace,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Result in the layout of the input.
    #[arg(short, long)]
    output: PathBuf,
    /// JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Lifted solution as JSON (sdp only).
    #[arg(long)]
    lifted_out: Option<PathBuf>,
    /// Per-iteration CSV trace (sdp only).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Seed echoed into the report.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_enum, default_value_t = Method::Sdp)]
    method: Method,
    /// Gaussian kernel standard deviation in samples (meanfilter only).
    #[arg(long, default_value_t = 1.0)]
    kernel_std: f64,
}

#[derive(Debug, Args)]
struct InterpolateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Pinned values `n angle` (0-based); the input then acts as soft data.
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Sdp)]
    method: Method,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Lifted solution JSON written by `--lifted-out`.
    #[arg(long)]
    lifted: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tight_tol: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random instances.
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Nodes per instance; up to 4 also runs exhaustive search.
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    /// Angle levels of the dynamic program.
    #[arg(long, default_value_t = 1024)]
    levels: usize,
}

fn config_echo(
    method: Method,
    cfg: SolverConfig,
    args: &InstanceArgs,
    loaded: &input::Loaded,
) -> ConfigEcho {
    ConfigEcho {
        method: method.name().into(),
        solver: cfg,
        lambda: (!loaded.lambda_from_file).then_some(args.lambda),
        node_weight: args.weights.is_none().then_some(args.node_weight),
        kernel_std: None,
    }
}

fn write_trace(path: &Path, trace: &[TraceEntry]) -> Result<()> {
    let mut csv = String::from("iteration,psi_conv,step_change\n");
    for t in trace {
        writeln!(
            csv,
            "{},{:.17e},{:.17e}",
            t.iteration, t.psi_conv, t.step_change
        )?;
    }
    fs::write(path, csv)?;
    Ok(())
}

fn emit_sdp_extras(out: &OutputArgs, r: &SolveReport) -> Result<()> {
    if let Some(path) = &out.lifted_out {
        write_lifted(path, &r.s_star)?;
    }
    if let Some(path) = &out.trace_out {
        write_trace(path, &r.trace)?;
    }
    Ok(())
}

fn check_sdp_only(method: Method, out: &OutputArgs) -> Result<()> {
    if method != Method::Sdp && (out.lifted_out.is_some() || out.trace_out.is_some()) {
        bail!(circlereg::Error::InvalidInput(
            "--lifted-out and --trace-out need --method sdp".into()
        ));
    }
    Ok(())
}

fn sdp_summary(command: &str, r: &SolveReport) -> String {
    let gap = r
        .relative_gap
        .map_or_else(|| "undefined".to_string(), |g| format!("{g:.3e}"));
    format!(
        "{command} sdp: psi_conv={:.6} psi_approx={:.6} tight={} gap={gap} iterations={} converged={}",
        r.psi_conv_star, r.psi_approx, r.certificate.tight, r.iterations_run, r.converged
    )
}

/// Baseline cost used as the reference in every report, if the baseline
/// system is solvable.
fn baseline_reference(inst: &ProblemInstance) -> Option<f64> {
    solve_baseline(inst).ok().map(|b| b.psi_orig)
}

/// What to run and where to put the results.
struct Job<'a> {
    command: &'static str,
    method: Method,
    solver: &'a SolverArgs,
    out: &'a OutputArgs,
    kernel_std: f64,
}

fn solve_and_write(
    job: Job,
    inst: &ProblemInstance,
    shape: Shape,
    mut echo: ConfigEcho,
) -> Result<String> {
    let Job {
        command,
        method,
        solver,
        out,
        kernel_std,
    } = job;
    check_sdp_only(method, out)?;
    let (angles, report, summary) = match method {
        Method::Sdp => {
            let r = solve_relaxation(inst, &solver.config(out.trace_out.is_some()))?;
            emit_sdp_extras(out, &r)?;
            let mut report = RunReport::from_solve(&r, echo, out.seed);
            report.psi_orig_baseline = baseline_reference(inst);
            (
                r.rounded_signal().angles(),
                report,
                sdp_summary(command, &r),
            )
        }
        Method::Baseline => {
            let b = solve_baseline(inst)?;
            let mut report = RunReport::from_cost(b.psi_orig, echo, out.seed);
            report.psi_orig_baseline = Some(b.psi_orig);
            let summary = format!(
                "{command} baseline: psi_orig={:.6} cg_iterations={} degenerate={}",
                b.psi_orig, b.cg_iterations, b.degenerate_nodes
            );
            (b.x_rounded.angles(), report, summary)
        }
        Method::Meanfilter => {
            // missing samples carry zero weight, so they must not vote
            let y: Vec<Complex64> = inst
                .y()
                .iter()
                .zip(inst.w())
                .map(|(&y, w)| {
                    if w.finite_or_zero() > 0.0 || w.is_hard() {
                        y
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            let f = circular_mean_filter(inst.graph(), &y, kernel_std)?;
            let psi = cost_orig(inst, &f.x)?;
            echo.kernel_std = Some(kernel_std);
            let mut report = RunReport::from_cost(psi, echo, out.seed);
            report.psi_orig_baseline = baseline_reference(inst);
            let degenerate = f.degenerate.iter().filter(|&&d| d).count();
            let summary =
                format!("{command} meanfilter: psi_orig={psi:.6} degenerate={degenerate}");
            (f.x.angles(), report, summary)
        }
    };
    input::write_like(&out.output, shape, angles)?;
    if let Some(path) = &out.report {
        write_report(path, &report)?;
    }
    Ok(format!("{summary} -> {}", out.output.display()))
}

fn cmd_synth(args: &SynthArgs) -> Result<String> {
    if args.d1 {
        let d = SyntheticSpec1D::default();
        let spec = SyntheticSpec1D {
            n: args.n.unwrap_or(d.n),
            seed: args.seed,
            increment_std: args.increment_std.unwrap_or(d.increment_std),
            noise_std: args.noise_std.unwrap_or(d.noise_std),
            ..d
        };
        let (truth, noisy) = gen_1d(&spec)?;
        write_signal(&args.truth, &truth.angles())?;
        write_signal(&args.noisy, &noisy.angles())?;
        Ok(format!(
            "synth 1-D: n={} seed={} noise_std={} -> {}, {}",
            spec.n,
            spec.seed,
            spec.noise_std,
            args.truth.display(),
            args.noisy.display()
        ))
    } else {
        let d = SyntheticSpec2D::default();
        let spec = SyntheticSpec2D {
            height: args.height.unwrap_or(d.height),
            width: args.width.unwrap_or(d.width),
            seed: args.seed,
            control_std: args.control_std.unwrap_or(d.control_std),
            noise_std: args.noise_std.unwrap_or(d.noise_std),
            ..d
        };
        let (truth, noisy) = gen_2d(&spec)?;
        for (path, sig) in [(&args.truth, truth), (&args.noisy, noisy)] {
            let img = PhaseImage::new(spec.height, spec.width, sig.angles())?;
            write_phase_image(path, &img, ImageFormat::from_path(path))?;
        }
        Ok(format!(
            "synth 2-D: {}x{} seed={} noise_std={} -> {}, {}",
            spec.height,
            spec.width,
            spec.seed,
            spec.noise_std,
            args.truth.display(),
            args.noisy.display()
        ))
    }
}

fn cmd_denoise(args: &DenoiseArgs) -> Result<String> {
    let loaded = input::load(&args.instance)?;
    let inst = input::denoise_instance(&args.instance, &loaded)?;
    let echo = config_echo(
        args.method,
        args.solver.config(false),
        &args.instance,
        &loaded,
    );
    let job = Job {
        command: "denoise",
        method: args.method,
        solver: &args.solver,
        out: &args.output,
        kernel_std: args.kernel_std,
    };
    solve_and_write(job, &inst, loaded.shape, echo)
}

fn cmd_interpolate(args: &InterpolateArgs) -> Result<String> {
    if args.method == Method::Meanfilter {
        bail!(circlereg::Error::InvalidInput(
            "interpolate supports --method sdp or baseline".into()
        ));
    }
    let loaded = input::load(&args.instance)?;
    let inst = input::interpolation_instance(&args.instance, &loaded, args.constraints.as_deref())?;
    let echo = config_echo(
        args.method,
        args.solver.config(false),
        &args.instance,
        &loaded,
    );
    let job = Job {
        command: "interpolate",
        method: args.method,
        solver: &args.solver,
        out: &args.output,
        kernel_std: 0.0,
    };
    solve_and_write(job, &inst, loaded.shape, echo)
}

fn cmd_certify(args: &CertifyArgs) -> Result<String> {
    let loaded = input::load(&args.instance)?;
    let inst = input::denoise_instance(&args.instance, &loaded)?;
    let s = read_lifted(&args.lifted)?;
    let psi_conv = cost_conv(&inst, &s)?;
    let rounded = project_signal(&s.x);
    let psi_approx = cost_orig(&inst, &rounded)?;
    let cert = tightness_certificate(inst.graph(), &s, args.tight_tol)?;
    let gap = relative_gap(psi_approx, psi_conv).ok();
    if let Some(path) = &args.report {
        let echo = ConfigEcho {
            method: "certify".into(),
            solver: SolverConfig {
                tight_tol: args.tight_tol,
                ..Default::default()
            },
            lambda: (!loaded.lambda_from_file).then_some(args.instance.lambda),
            node_weight: args
                .instance
                .weights
                .is_none()
                .then_some(args.instance.node_weight),
            kernel_std: None,
        };
        let report = RunReport {
            psi_conv_star: Some(psi_conv),
            relative_gap: gap,
            tight: Some(cert.tight),
            max_modulus_deviation: Some(cert.max_modulus_deviation),
            max_rank1_residual: Some(cert.max_rank1_residual),
            psi_orig_baseline: baseline_reference(&inst),
            ..RunReport::from_cost(psi_approx, echo, None)
        };
        write_report(path, &report)?;
    }
    let gap = gap.map_or_else(|| "undefined".to_string(), |g| format!("{g:.3e}"));
    Ok(format!(
        "certify: psi_conv={psi_conv:.6} psi_approx={psi_approx:.6} tight={} modulus_dev={:.3e} rank1_res={:.3e} gap={gap}",
        cert.tight, cert.max_modulus_deviation, cert.max_rank1_residual
    ))
}

fn random_tree_instance(stream: &mut GaussianStream, n: usize) -> Result<ProblemInstance> {
    let edges: Vec<(usize, usize)> = (1..n)
        .map(|v| (((stream.uniform() * v as f64) as usize).min(v - 1), v))
        .collect();
    let g = Graph::from_edges(n, &edges)?;
    let base = stream.uniform() * 6.0 - 3.0;
    let y = (0..n)
        .map(|k| Complex64::from_polar(1.0, base + 0.3 * k as f64 + 0.6 * stream.next_normal()))
        .collect();
    let w = (0..n)
        .map(|_| NodeWeight::Finite(0.5 + 1.5 * stream.uniform()))
        .collect();
    let lambda = (1..n).map(|_| 0.5 + 4.5 * stream.uniform()).collect();
    Ok(ProblemInstance::new(g, y, w, lambda)?)
}

fn cmd_oracle(args: &OracleArgs) -> Result<String> {
    if args.nodes < 2 {
        bail!(circlereg::Error::InvalidSize(format!(
            "oracle needs at least 2 nodes, got {}",
            args.nodes
        )));
    }
    let mut stream = GaussianStream::new(args.seed);
    println!(
        "{:>4} {:>5} {:>14} {:>14} {:>14} {:>14} {:>10} {:>6}",
        "case", "nodes", "psi_conv", "psi_approx", "dp", "exhaustive", "rel_diff", "tight"
    );
    let mut worst = 0.0f64;
    for case in 0..args.count {
        let inst = random_tree_instance(&mut stream, args.nodes)?;
        let r = solve_relaxation(&inst, &SolverConfig::default())?;
        let dp = dp_min_chain(&inst, args.levels)?;
        let exhaustive = if args.nodes <= 4 {
            format!("{:.8}", exhaustive_min(&inst, args.levels.min(64))?.psi)
        } else {
            "-".into()
        };
        let rel = (dp.psi - r.psi_conv_star).abs() / r.psi_conv_star.abs().max(1e-12);
        worst = worst.max(rel);
        println!(
            "{case:>4} {:>5} {:>14.8} {:>14.8} {:>14.8} {exhaustive:>14} {rel:>10.2e} {:>6}",
            args.nodes, r.psi_conv_star, r.psi_approx, dp.psi, r.certificate.tight
        );
    }
    Ok(format!(
        "oracle: {} instances, {} levels, worst relative difference {worst:.2e}",
        args.count, args.levels
    ))
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Denoise(a) => cmd_denoise(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn category(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<circlereg::Error>() {
            return e.category();
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "invalid-input"
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error[usage]: {}", e.kind());
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e:#}", category(&e));
            ExitCode::FAILURE
        }
    }
}
