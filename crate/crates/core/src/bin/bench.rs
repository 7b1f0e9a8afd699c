//! Benchmark CLI.
//!
//! Runs one solver configuration (default) or a named variant suite
//! (`--variants`) on a benchmark problem and prints the metric table.
//!
//! Examples:
//!   bench --problem rosenbrock
//!   bench --problem curve --seed 1 --width 4 --polyfit-order 3
//!   bench --problem curve --variants baseline-legacy,W4,W4-polyfit,W8,W8-polyfit
//!   bench --problem expectation --variants coupled-interface,split-interface

use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use batchbfgs::bench::{
    self, BenchConfig, BenchTable, OutputFormat, ProblemId, Variant,
};
use batchbfgs::solver::{LsCondition, LsStyle};

#[derive(Parser, Debug)]
#[command(name = "bench", about = "Quasi-Newton line search benchmark runner")]
struct Args {
    /// Problem id: curve, expectation, rosenbrock
    #[arg(long, default_value = "rosenbrock")]
    problem: String,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Batch width W (1, 4 or 8)
    #[arg(long)]
    width: Option<usize>,

    /// Polynomial fit order; 0 disables fitting
    #[arg(long)]
    polyfit_order: Option<usize>,

    /// Finite-difference stencil points (0, 2, 4, 6, 8); 0 disables
    #[arg(long)]
    dg_points: Option<usize>,

    /// Finite-difference step size
    #[arg(long)]
    h: Option<f64>,

    #[arg(long)]
    eps_rel: Option<f64>,

    #[arg(long)]
    eps_abs: Option<f64>,

    /// Maximum outer iterations; 0 = unlimited
    #[arg(long)]
    max_iter: Option<usize>,

    /// backtracking-armijo, backtracking-wolfe, backtracking-strong-wolfe,
    /// bracketing-wolfe
    #[arg(long)]
    linesearch: Option<String>,

    /// Use the coupled value+gradient interface (the unmodified baseline)
    #[arg(long)]
    legacy_interface: Option<bool>,

    /// csv or markdown
    #[arg(long, default_value = "csv")]
    format: String,

    #[arg(long, default_value_t = 1)]
    repetitions: usize,

    /// Comma-separated variant suite (overrides the per-run flags), e.g.
    /// baseline-legacy,W4-polyfit. Ratio report is printed against the
    /// first variant.
    #[arg(long)]
    variants: Option<String>,
}

fn parse_linesearch(s: &str) -> Result<(LsCondition, LsStyle), String> {
    match s {
        "backtracking-armijo" => Ok((LsCondition::Armijo, LsStyle::Backtracking)),
        "backtracking-wolfe" => Ok((LsCondition::Wolfe, LsStyle::Backtracking)),
        "backtracking-strong-wolfe" => Ok((LsCondition::StrongWolfe, LsStyle::Backtracking)),
        "bracketing-wolfe" => Ok((LsCondition::Wolfe, LsStyle::Bracketing)),
        other => Err(format!(
            "unknown line search {other:?}; expected backtracking-armijo, \
             backtracking-wolfe, backtracking-strong-wolfe or bracketing-wolfe"
        )),
    }
}

fn run(args: &Args) -> Result<BenchTable, String> {
    let problem = ProblemId::from_str(&args.problem).map_err(|e| e.to_string())?;

    if let Some(list) = &args.variants {
        let variants: Vec<Variant> = list
            .split(',')
            .map(|v| Variant::from_str(v.trim()).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        if variants.is_empty() {
            return Err("empty variant list".into());
        }
        return bench::run_variants(problem, args.seed, &variants).map_err(|e| e.to_string());
    }

    let mut params = bench::default_params_for(problem);
    if let Some(w) = args.width {
        params.width = w;
    }
    if let Some(o) = args.polyfit_order {
        params.polyfit_order = o;
    }
    if let Some(d) = args.dg_points {
        params.dg_points = d;
    }
    if args.h.is_some() {
        params.h = args.h;
    }
    if let Some(e) = args.eps_rel {
        params.eps_rel = e;
    }
    if let Some(e) = args.eps_abs {
        params.eps_abs = e;
    }
    if let Some(m) = args.max_iter {
        params.max_iterations = m;
    }
    if let Some(ls) = &args.linesearch {
        let (cond, style) = parse_linesearch(ls)?;
        params.ls_condition = cond;
        params.ls_style = style;
    }
    if let Some(l) = args.legacy_interface {
        params.legacy_interface = l;
        if l {
            params.width = 1;
        }
    }

    let config = BenchConfig {
        problem,
        seed: args.seed,
        label: format!(
            "{}-w{}{}",
            problem,
            params.width,
            if params.polyfit_order > 0 { "-polyfit" } else { "" }
        ),
        params,
        repetitions: args.repetitions,
        format: OutputFormat::from_str(&args.format).map_err(|e| e.to_string())?,
    };
    bench::run_bench(&config).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let format = match OutputFormat::from_str(&args.format) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let table = match run(&args) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match format {
        OutputFormat::Csv => print!("{}", bench::to_csv(&table.rows)),
        OutputFormat::Markdown => print!("{}", bench::to_markdown(&table.rows)),
    }

    if args.variants.is_some() && table.rows.len() > 1 {
        let baseline = table.rows[0].label.clone();
        for row in &table.rows[1..] {
            match bench::compare(&table, &baseline, &table, &row.label) {
                Ok(rep) => println!("{rep}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    }

    if table.rows.iter().any(|r| !r.converged) {
        eprintln!("error: solver failed (line search found no acceptable step)");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
