//! Benchmark harness: runs labeled solver configurations on the registered
//! problems and emits the metric table (label, time, iterations, value,
//! forward, reverse, ls_iterations) as CSV or markdown, plus baseline /
//! variant ratio reports.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::problems::{make_curve_problem, make_expectation_problem, RosenbrockProblem};
use crate::solver::{
    minimize, HessianMode, LsCondition, LsStyle, SolverParams, TerminationReason,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    Curve,
    Expectation,
    Rosenbrock,
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curve" => Ok(ProblemId::Curve),
            "expectation" => Ok(ProblemId::Expectation),
            "rosenbrock" => Ok(ProblemId::Rosenbrock),
            other => Err(Error::UnknownProblem(other.into())),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemId::Curve => "curve",
            ProblemId::Expectation => "expectation",
            ProblemId::Rosenbrock => "rosenbrock",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" => Ok(OutputFormat::Markdown),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// One benchmark invocation: a problem, a labeled solver configuration, and
/// how many times to repeat it.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problem: ProblemId,
    pub seed: u64,
    pub label: String,
    pub params: SolverParams,
    pub repetitions: usize,
    pub format: OutputFormat,
}

/// One emitted table row. Everything except `time_ms` is deterministic for
/// a fixed problem, seed, and configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub time_ms: f64,
    pub iterations: u64,
    pub value: f64,
    pub forward: u64,
    pub reverse: u64,
    pub ls_iterations: u64,
    pub converged: bool,
}

/// Rows plus their provenance; comparisons are only meaningful within the
/// same problem and seed.
#[derive(Debug, Clone)]
pub struct BenchTable {
    pub problem: ProblemId,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

/// Solver defaults per problem, mirroring the experiment setups: the curve
/// calibration runs at eps_rel = 3e-4 with backtracking Wolfe; the
/// expectation loss at eps_rel = 1e-6, bracketing Wolfe, c2 = 0.1,
/// h = 1e-5.
pub fn default_params_for(problem: ProblemId) -> SolverParams {
    let mut p = SolverParams {
        mode: HessianMode::LimitedMemory,
        ..Default::default()
    };
    match problem {
        ProblemId::Curve => {
            p.eps_rel = 3e-4;
            p.eps_abs = 1e-10;
            p.ls_condition = LsCondition::Wolfe;
            p.ls_style = LsStyle::Backtracking;
        }
        ProblemId::Expectation => {
            p.eps_rel = 1e-6;
            p.eps_abs = 1e-10;
            p.ls_condition = LsCondition::Wolfe;
            p.ls_style = LsStyle::Bracketing;
            p.c2 = 0.1;
            p.h = Some(1e-5);
        }
        ProblemId::Rosenbrock => {
            p.eps_rel = 0.0;
            p.eps_abs = 1e-9;
            p.max_iterations = 200;
        }
    }
    p
}

/// The named configuration variants of the comparison tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Unmodified interface: W = 1, coupled value+gradient evaluations.
    BaselineLegacy,
    W4,
    W4Polyfit,
    W8,
    W8Polyfit,
    /// Split value / dg / gradient interface, scalar line search.
    SplitInterface,
    /// Alias of [`Variant::BaselineLegacy`] for the interface comparison.
    CoupledInterface,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::BaselineLegacy => "baseline-legacy",
            Variant::W4 => "W4",
            Variant::W4Polyfit => "W4-polyfit",
            Variant::W8 => "W8",
            Variant::W8Polyfit => "W8-polyfit",
            Variant::SplitInterface => "split-interface",
            Variant::CoupledInterface => "coupled-interface",
        }
    }

    pub fn apply(&self, base: &SolverParams) -> SolverParams {
        let mut p = base.clone();
        match self {
            Variant::BaselineLegacy | Variant::CoupledInterface => {
                p.legacy_interface = true;
                p.width = 1;
                p.polyfit_order = 0;
                p.dg_points = 0;
            }
            Variant::W4 => {
                p.width = 4;
                p.polyfit_order = 0;
                p.dg_points = 4;
            }
            Variant::W4Polyfit => {
                p.width = 4;
                p.polyfit_order = 3;
                p.dg_points = 4;
            }
            Variant::W8 => {
                p.width = 8;
                p.polyfit_order = 0;
                p.dg_points = 8;
            }
            Variant::W8Polyfit => {
                p.width = 8;
                p.polyfit_order = 7;
                p.dg_points = 8;
            }
            Variant::SplitInterface => {
                p.legacy_interface = false;
                p.width = 1;
                p.polyfit_order = 0;
                p.dg_points = 4;
            }
        }
        p
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline-legacy" => Ok(Variant::BaselineLegacy),
            "w4" | "W4" => Ok(Variant::W4),
            "w4-polyfit" | "W4-polyfit" => Ok(Variant::W4Polyfit),
            "w8" | "W8" => Ok(Variant::W8),
            "w8-polyfit" | "W8-polyfit" => Ok(Variant::W8Polyfit),
            "split-interface" => Ok(Variant::SplitInterface),
            "coupled-interface" => Ok(Variant::CoupledInterface),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

/// Build the problem instance and its starting point.
pub fn build_problem(problem: ProblemId, seed: u64) -> Result<(Box<dyn Objective>, Vec<f64>)> {
    match problem {
        ProblemId::Curve => {
            let p = make_curve_problem(seed);
            let x0 = p.x0().to_vec();
            Ok((Box::new(p), x0))
        }
        ProblemId::Expectation => {
            let p = make_expectation_problem(seed, 8, 6, 1000)?;
            let x0 = p.x0().to_vec();
            Ok((Box::new(p), x0))
        }
        ProblemId::Rosenbrock => {
            let p = RosenbrockProblem::new(2)?;
            let x0 = p.x0();
            Ok((Box::new(p), x0))
        }
    }
}

/// Run one configuration; one row per repetition. Rows agree in every
/// column except the time.
pub fn run_bench(config: &BenchConfig) -> Result<BenchTable> {
    if config.repetitions < 1 {
        return Err(Error::InvalidParams("repetitions must be >= 1".into()));
    }
    config.params.validate()?;
    let (objective, x0) = build_problem(config.problem, config.seed)?;
    let mut rows = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let (_, metrics) = minimize(objective.as_ref(), &x0, &config.params)?;
        rows.push(BenchRow {
            label: config.label.clone(),
            time_ms: metrics.wall_time.as_secs_f64() * 1e3,
            iterations: metrics.iterations,
            value: metrics.final_value,
            forward: metrics.counters.forward_calls,
            reverse: metrics.counters.reverse_calls,
            ls_iterations: metrics.counters.ls_iterations,
            converged: metrics.termination != TerminationReason::LineSearchFailed,
        });
    }
    Ok(BenchTable {
        problem: config.problem,
        seed: config.seed,
        rows,
    })
}

/// Run a set of named variants on top of the problem's default parameters.
pub fn run_variants(problem: ProblemId, seed: u64, variants: &[Variant]) -> Result<BenchTable> {
    let base = default_params_for(problem);
    let mut rows = Vec::new();
    for v in variants {
        let cfg = BenchConfig {
            problem,
            seed,
            label: v.label().to_string(),
            params: v.apply(&base),
            repetitions: 1,
            format: OutputFormat::Csv,
        };
        rows.extend(run_bench(&cfg)?.rows);
    }
    Ok(BenchTable {
        problem,
        seed,
        rows,
    })
}

/// Baseline / variant ratio report.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub baseline: String,
    pub variant: String,
    pub iterations_ratio: f64,
    pub forward_ratio: f64,
    pub reverse_ratio: f64,
    pub ls_iterations_ratio: f64,
    pub time_ratio: f64,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} vs {}:", self.baseline, self.variant)?;
        writeln!(f, "  iterations ratio:    {:.3}", self.iterations_ratio)?;
        writeln!(f, "  forward ratio:       {:.3}", self.forward_ratio)?;
        writeln!(f, "  reverse ratio:       {:.3}", self.reverse_ratio)?;
        writeln!(f, "  ls iterations ratio: {:.3}", self.ls_iterations_ratio)?;
        write!(f, "  time ratio:          {:.3}", self.time_ratio)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    a as f64 / b as f64
}

/// Ratios baseline / variant for two rows of tables from the same problem
/// and seed; refuses cross-problem or cross-seed comparisons.
pub fn compare(
    baseline_table: &BenchTable,
    baseline_label: &str,
    variant_table: &BenchTable,
    variant_label: &str,
) -> Result<CompareReport> {
    if baseline_table.problem != variant_table.problem || baseline_table.seed != variant_table.seed
    {
        return Err(Error::ComparisonMismatch);
    }
    let find = |t: &BenchTable, label: &str| -> Result<BenchRow> {
        t.rows
            .iter()
            .find(|r| r.label == label)
            .cloned()
            .ok_or_else(|| Error::Config(format!("no row labeled {label:?}")))
    };
    let b = find(baseline_table, baseline_label)?;
    let v = find(variant_table, variant_label)?;
    Ok(CompareReport {
        baseline: b.label.clone(),
        variant: v.label.clone(),
        iterations_ratio: ratio(b.iterations, v.iterations),
        forward_ratio: ratio(b.forward, v.forward),
        reverse_ratio: ratio(b.reverse, v.reverse),
        ls_iterations_ratio: ratio(b.ls_iterations, v.ls_iterations),
        time_ratio: b.time_ms / v.time_ms,
    })
}

pub const CSV_HEADER: &str = "label,time,iterations,value,forward,reverse,ls_iterations";

/// CSV with full-precision values; [`parse_csv`] round-trips exactly.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.label, r.time_ms, r.iterations, r.value, r.forward, r.reverse, r.ls_iterations
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!("bad CSV header: {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Config(format!("bad CSV row: {line:?}")));
        }
        let parse_f =
            |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Config(format!("bad number {s:?}"))) };
        let parse_u =
            |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Config(format!("bad count {s:?}"))) };
        rows.push(BenchRow {
            label: fields[0].to_string(),
            time_ms: parse_f(fields[1])?,
            iterations: parse_u(fields[2])?,
            value: parse_f(fields[3])?,
            forward: parse_u(fields[4])?,
            reverse: parse_u(fields[5])?,
            ls_iterations: parse_u(fields[6])?,
            converged: true,
        });
    }
    Ok(rows)
}

pub fn to_markdown(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str("| label | time (ms) | iterations | value | forward | reverse | LS it. |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {:.1} | {} | {:.3e} | {} | {} | {} |\n",
            r.label, r.time_ms, r.iterations, r.value, r.forward, r.reverse, r.ls_iterations
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(label: &str) -> BenchConfig {
        BenchConfig {
            problem: ProblemId::Rosenbrock,
            seed: 1,
            label: label.into(),
            params: default_params_for(ProblemId::Rosenbrock),
            repetitions: 1,
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn repetitions_deterministic_except_time() {
        let mut cfg = quick_config("r");
        cfg.repetitions = 3;
        let table = run_bench(&cfg).unwrap();
        assert_eq!(table.rows.len(), 3);
        for r in &table.rows[1..] {
            assert_eq!(r.iterations, table.rows[0].iterations);
            assert_eq!(r.value, table.rows[0].value);
            assert_eq!(r.forward, table.rows[0].forward);
            assert_eq!(r.reverse, table.rows[0].reverse);
        }
    }

    #[test]
    fn csv_round_trip_exact() {
        let cfg = quick_config("rosen");
        let table = run_bench(&cfg).unwrap();
        let text = to_csv(&table.rows);
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), table.rows.len());
        for (a, b) in parsed.iter().zip(&table.rows) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.time_ms, b.time_ms);
            assert_eq!(a.iterations, b.iterations);
            assert_eq!(a.value, b.value);
            assert_eq!(a.forward, b.forward);
            assert_eq!(a.reverse, b.reverse);
            assert_eq!(a.ls_iterations, b.ls_iterations);
        }
    }

    #[test]
    fn compare_identical_rows_unit_ratios() {
        let cfg = quick_config("same");
        let table = run_bench(&cfg).unwrap();
        let rep = compare(&table, "same", &table, "same").unwrap();
        assert_eq!(rep.iterations_ratio, 1.0);
        assert_eq!(rep.forward_ratio, 1.0);
        assert_eq!(rep.reverse_ratio, 1.0);
    }

    #[test]
    fn compare_refuses_mismatched_provenance() {
        let t1 = run_bench(&quick_config("a")).unwrap();
        let mut cfg2 = quick_config("a");
        cfg2.seed = 2;
        let t2 = run_bench(&cfg2).unwrap();
        assert!(matches!(
            compare(&t1, "a", &t2, "a"),
            Err(Error::ComparisonMismatch)
        ));
    }

    #[test]
    fn ratio_examples() {
        // iteration counts 65 -> 18 and reverse counts 1134 -> 266
        assert!((ratio(65, 18) - 3.611).abs() < 1e-3);
        assert!((ratio(1134, 266) - 4.263).abs() < 1e-3);
    }

    #[test]
    fn unknown_problem_is_usage_error() {
        assert!(matches!(
            "quintic".parse::<ProblemId>(),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn legacy_trajectory_independent_of_width() {
        // The legacy variant never batches; requesting a different width
        // must not change anything.
        let base = default_params_for(ProblemId::Rosenbrock);
        let mut p1 = Variant::BaselineLegacy.apply(&base);
        let mut p2 = Variant::BaselineLegacy.apply(&base);
        p1.width = 1;
        p2.width = 4;
        p2.polyfit_order = 0;
        let (obj, x0) = build_problem(ProblemId::Rosenbrock, 1).unwrap();
        let (xa, ma) = minimize(obj.as_ref(), &x0, &p1).unwrap();
        let (xb, mb) = minimize(obj.as_ref(), &x0, &p2).unwrap();
        assert_eq!(xa.as_slice(), xb.as_slice());
        assert_eq!(ma.counters.forward_calls, mb.counters.forward_calls);
    }
}
