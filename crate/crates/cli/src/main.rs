//! Command-line front end: graph ingestion and analysis pipelines, flow
//! experiments with CSV output, fixture generation.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on malformed input or
//! invalid arguments.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use rand::SeedableRng;
use separatrix_core::chains::{find_approximation_chain, verify_chain};
use separatrix_core::cs::{
    h_bound_diagnostic, reciprocity_report, residual_report, separatrix_witnesses,
    strong_separatrix_count_check,
};
use separatrix_core::definiteness::leading_minors;
use separatrix_core::fixtures::{
    random_consistent_decoration, random_off_axis_start, random_saddle_spec,
};
use separatrix_core::flow::{
    crossing_point, integrate, monotonicity_check, nodal_separator_residual, saddle_node_approach,
    saturation_coverage, FlowSpec, GridSpec, SnOutcome, StepControl, TransversalSpec,
};
use separatrix_core::graph::DecoratedGraph;
use separatrix_core::numeric::{parse_complex, parse_real, Complex64};
use separatrix_core::report::{analyze, AnalyzeOptions};
use separatrix_core::tree::{compute_h, root_order, verify_h_negative};

#[derive(Parser)]
#[command(
    name = "separatrix",
    version,
    about = "Certify decorated resolution graphs of foliation singularities and verify local flow dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphInput {
    /// Path to the JSON graph description.
    file: PathBuf,
    /// Absolute tolerance for index checks (reciprocity, residuals).
    #[arg(long, default_value_t = separatrix_core::DEFAULT_TOLERANCE)]
    tolerance: f64,
}

impl GraphInput {
    fn load(&self) -> Result<DecoratedGraph> {
        let raw = fs::read_to_string(&self.file)
            .with_context(|| format!("cannot read {}", self.file.display()))?;
        DecoratedGraph::from_json(&raw, self.tolerance).map_err(|e| anyhow!(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and emit one JSON report.
    Analyze {
        #[command(flatten)]
        input: GraphInput,
        /// Relax residual equality to the one-sided bound for decorations
        /// that list only part of the singularities.
        #[arg(long)]
        partial: bool,
    },
    /// Print the exact leading principal minors and the definiteness verdict.
    CheckDefinite {
        #[command(flatten)]
        input: GraphInput,
    },
    /// Print the exact h-values for the given root.
    ComputeH {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        root: String,
    },
    /// Residual report per invariant component, optionally with the
    /// per-vertex h-bound diagnostic.
    VerifyCs {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        partial: bool,
        /// Also print the h-bound diagnostic rooted at --root.
        #[arg(long)]
        bounds: bool,
        #[arg(long, requires = "bounds")]
        root: Option<String>,
    },
    /// Separatrix witnesses, one per piece of the deleted divisor, as JSON.
    Witnesses {
        #[command(flatten)]
        input: GraphInput,
    },
    /// Separatrix census and the count inequality.
    Census {
        #[command(flatten)]
        input: GraphInput,
    },
    /// Approximation chains as JSON, from one start or from all of them.
    Chains {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, conflicts_with = "all")]
        start: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Flow experiments on local normal forms; CSV output.
    Flow {
        #[command(subcommand)]
        experiment: FlowCommand,
    },
    /// Emit a random consistent decoration as JSON.
    GenFixture {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pretty: bool,
    },
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn real_arg(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

#[derive(Args, Clone, Copy)]
struct FlowCommon {
    /// Integrator relative tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl FlowCommon {
    fn control(&self) -> StepControl {
        StepControl {
            rtol: self.tol,
            ..StepControl::default()
        }
    }
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Integrate a saddle model and check the monotone moduli property.
    /// With --seed, run a batch of random certified perturbed saddles
    /// instead of one explicit model.
    Monotone {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, required_unless_present = "seed")]
        lambda1: Option<Complex64>,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, required_unless_present = "seed")]
        lambda2: Option<Complex64>,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, required_unless_present = "seed")]
        x0: Option<Complex64>,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, required_unless_present = "seed")]
        y0: Option<Complex64>,
        #[arg(long, default_value_t = 1.0)]
        box_a: f64,
        #[arg(long, default_value_t = 1.0)]
        box_b: f64,
        #[arg(long, default_value_t = 50.0)]
        tmax: f64,
        /// Batch mode: seed for the random spec generator.
        #[arg(long, conflicts_with_all = ["lambda1", "lambda2", "x0", "y0"])]
        seed: Option<u64>,
        /// Number of random specs in batch mode.
        #[arg(long, default_value_t = 20)]
        batch: usize,
        /// Random starts per spec in batch mode.
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[command(flatten)]
        common: FlowCommon,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the crossing of a saddle trajectory with {|x| = a}.
    Crossing {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        lambda1: Complex64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        lambda2: Complex64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        x0: Complex64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        y0: Complex64,
        /// Crossing level for |x|.
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        a: f64,
        #[command(flatten)]
        common: FlowCommon,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the conservation of |y| = c |x|^lambda along a node flow.
    Separator {
        /// Node eigenvalue ratio (decimal or sqrt:N).
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        x0: Complex64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        y0: Complex64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        tmin: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        tmax: f64,
        /// Largest admissible drift before the check fails.
        #[arg(long, default_value_t = 1e-6)]
        max_drift: f64,
        #[command(flatten)]
        common: FlowCommon,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow the saddle-node normal form to {|y| = b} for each start height.
    SaddleNode {
        /// Real negative x start.
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        x0: f64,
        /// One or more start heights, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = real_arg, allow_hyphen_values = true)]
        y0: Vec<f64>,
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        b: f64,
        #[command(flatten)]
        common: FlowCommon,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leafwise coverage of a grid through a transversal disc.
    Saturate {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        delta: f64,
        /// Monodromy branch bound K.
        #[arg(long, default_value_t = 50)]
        branches: i32,
        #[arg(long, default_value_t = 0.01)]
        grid_min: f64,
        #[arg(long, default_value_t = 0.3)]
        grid_max: f64,
        #[arg(long, default_value_t = 6)]
        grid_steps: usize,
        #[arg(long, default_value_t = 8)]
        grid_phases: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

/// Ok(exit code); Err means malformed input or invalid arguments (exit 2).
fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { input, partial } => {
            let graph = input.load()?;
            let report = analyze(
                &graph,
                AnalyzeOptions {
                    tolerance: input.tolerance,
                    partial,
                },
            );
            println!("{}", report.to_json());
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::CheckDefinite { input } => {
            let graph = input.load()?;
            let matrix = graph.intersection_matrix();
            let minors = leading_minors(&matrix);
            let definite = minors.alternates_strictly();
            let rendered: Vec<String> = minors.0.iter().map(|d| d.to_string()).collect();
            println!("minors: [{}]", rendered.join(", "));
            println!(
                "verdict: {}",
                if definite {
                    "negative definite"
                } else {
                    "not negative definite"
                }
            );
            Ok(if definite { 0 } else { 1 })
        }
        Command::ComputeH { input, root } => {
            let graph = input.load()?;
            let order = root_order(&graph, &root).map_err(|e| anyhow!(e.to_string()))?;
            let h = compute_h(&graph, &order).map_err(|e| anyhow!(e.to_string()))?;
            for (v, value) in h.iter() {
                println!("{v}\t{value}");
            }
            let negativity = verify_h_negative(&h);
            if negativity.all_negative {
                Ok(0)
            } else {
                eprintln!("h >= 0 at: {}", negativity.violations.join(", "));
                Ok(1)
            }
        }
        Command::VerifyCs {
            input,
            partial,
            bounds,
            root,
        } => {
            let graph = input.load()?;
            let residuals = residual_report(&graph, input.tolerance, partial);
            let mut failed = false;
            for entry in &residuals {
                if !entry.pass {
                    failed = true;
                }
                println!(
                    "{}\tresidual = {:+.12e} {:+.12e}i\t{}",
                    entry.component,
                    entry.residual_re,
                    entry.residual_im,
                    if entry.pass { "ok" } else { "FAIL" }
                );
            }
            for entry in reciprocity_report(&graph, input.tolerance) {
                if !entry.pass {
                    failed = true;
                }
                println!(
                    "{}\t{} deviation = {:.3e}\t{}",
                    entry.corner,
                    if entry.saddle_node {
                        "strong-side"
                    } else {
                        "reciprocity"
                    },
                    entry.deviation,
                    if entry.pass { "ok" } else { "FAIL" }
                );
            }
            if bounds {
                let root = root.expect("clap enforces --root with --bounds");
                let order = root_order(&graph, &root).map_err(|e| anyhow!(e.to_string()))?;
                let h = compute_h(&graph, &order).map_err(|e| anyhow!(e.to_string()))?;
                let report = h_bound_diagnostic(&graph, &order, &h, input.tolerance)
                    .map_err(|e| anyhow!(e.to_string()))?;
                for entry in &report.entries {
                    println!(
                        "bound\t{}\t{}\tRe cs = {:+.6}\th = {:+.6}\t{}",
                        entry.component,
                        entry.outgoing_corner,
                        entry.re_cs_out,
                        entry.h_bound,
                        if entry.flagged { "flagged" } else { "ok" }
                    );
                }
                println!(
                    "root\t{}\tincoming = {:+.6}\tw-h = {:+.6}",
                    report.root.component, report.root.incoming_re_sum, report.root.w_minus_h
                );
            }
            Ok(if failed { 1 } else { 0 })
        }
        Command::Witnesses { input } => {
            let graph = input.load()?;
            match separatrix_witnesses(&graph, input.tolerance) {
                Ok(witnesses) => {
                    println!("{}", serde_json::to_string_pretty(&witnesses)?);
                    Ok(0)
                }
                Err(err) => {
                    eprintln!("witness search failed: {err}");
                    Ok(1)
                }
            }
        }
        Command::Census { input } => {
            let graph = input.load()?;
            let (census, ok) = strong_separatrix_count_check(&graph);
            let mut value = serde_json::to_value(&census)?;
            value["verdict"] = serde_json::json!(if ok { "pass" } else { "fail" });
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Chains { input, start, all } => {
            let graph = input.load()?;
            let starts: Vec<String> = if all {
                graph
                    .components()
                    .iter()
                    .filter(|c| c.invariant)
                    .map(|c| c.id.clone())
                    .collect()
            } else {
                vec![start.ok_or_else(|| anyhow!("pass --start <id> or --all"))?]
            };
            let mut rows = Vec::new();
            let mut failed = false;
            for s in starts {
                match find_approximation_chain(&graph, &s) {
                    Ok(chain) => {
                        let check =
                            verify_chain(&graph, &chain).map_err(|e| anyhow!(e.to_string()))?;
                        if !check.ok {
                            failed = true;
                        }
                        rows.push(serde_json::json!({
                            "start": s,
                            "components": chain.components,
                            "corners": chain.corners,
                            "terminal": chain.terminal,
                            "verified": check.ok,
                            "violation": check.violation.map(|v| v.label()),
                        }));
                    }
                    Err(err) => {
                        failed = true;
                        rows.push(serde_json::json!({ "start": s, "error": err.to_string() }));
                    }
                }
            }
            let output = if all || rows.len() > 1 {
                serde_json::to_string_pretty(&rows)?
            } else {
                serde_json::to_string_pretty(&rows[0])?
            };
            println!("{output}");
            Ok(if failed { 1 } else { 0 })
        }
        Command::Flow { experiment } => run_flow(experiment),
        Command::GenFixture { seed, pretty } => {
            let graph = random_consistent_decoration(seed);
            if pretty {
                println!("{}", graph.to_json_pretty());
            } else {
                println!("{}", graph.to_json());
            }
            Ok(0)
        }
    }
}

fn run_flow(experiment: FlowCommand) -> Result<u8> {
    match experiment {
        FlowCommand::Monotone {
            lambda1,
            lambda2,
            x0,
            y0,
            box_a,
            box_b,
            tmax,
            seed,
            batch,
            starts,
            common,
            out,
        } => {
            if let Some(seed) = seed {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut csv = String::from("spec,start,max_x_backstep,max_y_forward_step,pass\n");
                let mut all_pass = true;
                for spec_index in 0..batch {
                    let spec = random_saddle_spec(&mut rng);
                    for start_index in 0..starts {
                        let p0 = random_off_axis_start(&mut rng, 0.05, 0.45);
                        let traj = integrate(&spec, p0, (0.0, tmax), common.control())
                            .map_err(|e| anyhow!(e.to_string()))?;
                        let report =
                            monotonicity_check(&traj).map_err(|e| anyhow!(e.to_string()))?;
                        all_pass &= report.pass;
                        csv.push_str(&format!(
                            "{spec_index},{start_index},{:e},{:e},{}\n",
                            report.max_x_backward_step, report.max_y_forward_step, report.pass
                        ));
                    }
                }
                emit(&out, &csv)?;
                eprintln!(
                    "{} specs x {} starts: {}",
                    batch,
                    starts,
                    if all_pass { "pass" } else { "FAIL" }
                );
                return Ok(if all_pass { 0 } else { 1 });
            }
            let (lambda1, lambda2, x0, y0) = (
                lambda1.expect("clap enforces"),
                lambda2.expect("clap enforces"),
                x0.expect("clap enforces"),
                y0.expect("clap enforces"),
            );
            let spec = FlowSpec::saddle(lambda1, lambda2, box_a, box_b)
                .map_err(|e| anyhow!(e.to_string()))?;
            let traj = integrate(&spec, (x0, y0), (0.0, tmax), common.control())
                .map_err(|e| anyhow!(e.to_string()))?;
            let report = monotonicity_check(&traj).map_err(|e| anyhow!(e.to_string()))?;
            let mut csv = String::from("t,re_x,im_x,re_y,im_y,abs_x,abs_y\n");
            for (t, (x, y)) in traj.times.iter().zip(&traj.points) {
                csv.push_str(&format!(
                    "{t},{},{},{},{},{},{}\n",
                    x.re,
                    x.im,
                    y.re,
                    y.im,
                    x.norm(),
                    y.norm()
                ));
            }
            emit(&out, &csv)?;
            eprintln!(
                "max |x| backstep = {:e}, max |y| forward step = {:e}: {}",
                report.max_x_backward_step,
                report.max_y_forward_step,
                if report.pass { "pass" } else { "FAIL" }
            );
            Ok(if report.pass { 0 } else { 1 })
        }
        FlowCommand::Crossing {
            lambda1,
            lambda2,
            x0,
            y0,
            a,
            common,
            out,
        } => {
            let box_a = a * 1.05;
            let box_b = y0.norm().max(1e-6) * 1.5;
            let spec = FlowSpec::saddle(lambda1, lambda2, box_a, box_b)
                .map_err(|e| anyhow!(e.to_string()))?;
            let crossing = crossing_point(&spec, (x0, y0), a, common.control())
                .map_err(|e| anyhow!(e.to_string()))?;
            let mut csv = String::from("t,re_x,im_x,re_y,im_y,abs_x,abs_y\n");
            for (t, (x, y)) in crossing
                .trajectory
                .times
                .iter()
                .zip(&crossing.trajectory.points)
            {
                csv.push_str(&format!(
                    "{t},{},{},{},{},{},{}\n",
                    x.re,
                    x.im,
                    y.re,
                    y.im,
                    x.norm(),
                    y.norm()
                ));
            }
            emit(&out, &csv)?;
            eprintln!(
                "crossing at t = {}, x = {}+{}i, |y| = {}",
                crossing.t,
                crossing.point.0.re,
                crossing.point.0.im,
                crossing.point.1.norm()
            );
            Ok(0)
        }
        FlowCommand::Separator {
            lambda,
            x0,
            y0,
            tmin,
            tmax,
            max_drift,
            common,
            out,
        } => {
            let report = nodal_separator_residual(lambda, (x0, y0), (tmin, tmax), common.control())
                .map_err(|e| anyhow!(e.to_string()))?;
            let mut csv = String::from("t,abs_x,abs_y,expected_abs_y,drift\n");
            for s in &report.samples {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.t, s.abs_x, s.abs_y, s.expected_abs_y, s.drift
                ));
            }
            emit(&out, &csv)?;
            let pass = report.max_drift <= max_drift;
            eprintln!(
                "c = {}, max drift = {:e}: {}",
                report.c,
                report.max_drift,
                if pass { "pass" } else { "FAIL" }
            );
            Ok(if pass { 0 } else { 1 })
        }
        FlowCommand::SaddleNode {
            x0,
            y0,
            b,
            common,
            out,
        } => {
            let mut csv = String::from("x0,y0,b,t_cross,abs_x_cross\n");
            for &height in &y0 {
                match saddle_node_approach(
                    (Complex64::new(x0, 0.0), Complex64::new(height, 0.0)),
                    b,
                    common.control(),
                )
                .map_err(|e| anyhow!(e.to_string()))?
                {
                    SnOutcome::Crossing { t, abs_x, .. } => {
                        csv.push_str(&format!("{x0},{height},{b},{t},{abs_x}\n"));
                    }
                    SnOutcome::CentralManifold => {
                        csv.push_str(&format!("{x0},{height},{b},,central-manifold\n"));
                    }
                }
            }
            emit(&out, &csv)?;
            Ok(0)
        }
        FlowCommand::Saturate {
            lambda,
            a,
            delta,
            branches,
            grid_min,
            grid_max,
            grid_steps,
            grid_phases,
            out,
        } => {
            let transversal =
                TransversalSpec::new(a, delta, branches).map_err(|e| anyhow!(e.to_string()))?;
            let grid = GridSpec::new(grid_min, grid_max, grid_steps, grid_phases)
                .map_err(|e| anyhow!(e.to_string()))?;
            let report = saturation_coverage(lambda, transversal, grid)
                .map_err(|e| anyhow!(e.to_string()))?;
            let mut csv =
                String::from("abs_x0,arg_x0,abs_y0,min_transported,witness_branch,covered\n");
            for p in &report.points {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.abs_x0,
                    p.arg_x0,
                    p.abs_y0,
                    p.min_transported,
                    p.witness_branch.map_or(String::new(), |k| k.to_string()),
                    p.covered
                ));
            }
            emit(&out, &csv)?;
            eprintln!(
                "coverage = {} ({}/{} points)",
                report.coverage, report.covered, report.total
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
