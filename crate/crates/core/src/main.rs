//! Command-line front end: ingest a metric (catalog name or definition
//! file), run the curvature pipeline and detector suite, and emit reports.
//!
//! Exit codes: 0 ok, 2 usage (including unreadable files), 3 parse,
//! 4 degenerate metric, 5 empty grid. `verify` additionally exits 1 when a
//! claim fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pseudosym::catalog::{self, CatalogEntry};
use pseudosym::claims::{self, ClaimStatus};
use pseudosym::classify::sample_over;
use pseudosym::curvature::{compute, TENSOR_NAMES};
use pseudosym::metric::{MetricError, MetricSpec, SampleGrid, Tolerances};
use pseudosym::metric_file;
use pseudosym::report::{build_report, ENGINE};
use pseudosym::tensor::indices;
use pseudosym::textfmt::{Document, Item};

#[derive(Parser)]
#[command(name = "pseudosym", version, about = "Curvature classification for closed-form metrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full detector suite over a sample grid and print the report.
    Classify(ClassifyArgs),
    /// Print nonzero tensor components at one point.
    Components(ComponentsArgs),
    /// Recheck every reference claim about the built-in families.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Catalog metric: `melvin`, `melvin_type(<expr>)` or `base_3metric(<expr>)`.
    #[arg(long, conflicts_with = "metric_file")]
    metric: Option<String>,
    /// Metric definition file.
    #[arg(long)]
    metric_file: Option<PathBuf>,
    /// Override a declared parameter, e.g. `B0=2` (repeatable).
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// Relative tolerance for verdicts.
    #[arg(long)]
    tol: Option<f64>,
    /// Absolute floor below which values count as zero.
    #[arg(long)]
    abs_floor: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Grid axis `coord=v` or `coord=start:stop:count` (repeatable);
    /// unlisted coordinates use the default candidates.
    #[arg(long = "grid", value_name = "COORD=SPEC")]
    grids: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ComponentsArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Tensor to print (g, Gamma, R, S, S2, kappa, C, P, W, K, G, nablaR, ...).
    #[arg(long)]
    tensor: String,
    /// Coordinate value `coord=v` for the sample point (repeatable);
    /// unlisted coordinates default to the first admissible value.
    #[arg(long = "at", value_name = "COORD=V")]
    at: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Relative tolerance; loosening beyond the default only widens the
    /// comparison gates and never flips a passing claim.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    abs_floor: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Text,
    Machine,
}

enum CliError {
    Usage(String),
    Parse(String),
    Degenerate(String),
    EmptyGrid(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::EmptyGrid(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Parse(m)
            | CliError::Degenerate(m)
            | CliError::EmptyGrid(m) => m,
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> CliError {
        match e {
            MetricError::EmptyGrid => CliError::EmptyGrid(e.to_string()),
            MetricError::DegenerateSymbolic
            | MetricError::DegeneratePoint { .. }
            | MetricError::SignatureMismatch { .. } => CliError::Degenerate(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Classify(args) => run_classify(args),
        Cmd::Components(args) => run_components(args),
        Cmd::Verify(args) => run_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn split_kv<'a>(raw: &'a str, what: &str) -> Result<(String, &'a str), CliError> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim()))
        .ok_or_else(|| CliError::Usage(format!("{what} '{raw}' is not of the form key=value")))
}

fn parse_f64(raw: &str, what: &str) -> Result<f64, CliError> {
    raw.parse()
        .map_err(|_| CliError::Usage(format!("{what} '{raw}' is not a number")))
}

fn tolerances(tol: Option<f64>, abs_floor: Option<f64>) -> Tolerances {
    let mut t = Tolerances::default();
    if let Some(rel) = tol {
        t.rel = rel;
    }
    if let Some(floor) = abs_floor {
        t.abs_floor = floor;
    }
    t
}

/// Loads the metric source and applies `--param` overrides. Catalog metrics
/// keep their entry so reference tables and the field strength stay attached.
fn load_source(src: &SourceArgs) -> Result<(MetricSpec, Option<CatalogEntry>), CliError> {
    let mut entry: Option<CatalogEntry> = None;
    let mut spec = if let Some(path) = &src.metric_file {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        metric_file::parse_metric(&text).map_err(|e| CliError::Parse(e.to_string()))?
    } else {
        let name = src.metric.as_deref().unwrap_or("melvin");
        let found = catalog::lookup(name).map_err(CliError::Parse)?;
        let spec = found.metric.clone();
        entry = Some(found);
        spec
    };
    for raw in &src.params {
        let (key, val) = split_kv(raw, "--param")?;
        if !spec.params.contains_key(&key) {
            return Err(CliError::Usage(format!(
                "unknown parameter '{key}'; declared: {}",
                spec.params.keys().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        spec.params.insert(key, parse_f64(val, "--param value")?);
    }
    if let Some(entry) = &mut entry {
        entry.metric = spec.clone();
    }
    Ok((spec, entry))
}

fn parse_grid_axis(raw: &str) -> Result<(String, Vec<f64>), CliError> {
    let (coord, spec) = split_kv(raw, "--grid")?;
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [v] => vec![parse_f64(v, "--grid value")?],
        [start, stop, count] => {
            let start = parse_f64(start, "--grid start")?;
            let stop = parse_f64(stop, "--grid stop")?;
            let count: usize = count
                .parse()
                .map_err(|_| CliError::Usage(format!("--grid count '{count}' is not a count")))?;
            if count == 0 {
                return Err(CliError::Usage("--grid count must be positive".to_string()));
            }
            if count == 1 {
                vec![start]
            } else {
                let step = (stop - start) / (count as f64 - 1.0);
                (0..count).map(|i| start + step * i as f64).collect()
            }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "--grid '{raw}' must be coord=v or coord=start:stop:count"
            )))
        }
    };
    Ok((coord, values))
}

fn check_coords(spec: &MetricSpec, axes: &[(String, Vec<f64>)]) -> Result<(), CliError> {
    for (coord, _) in axes {
        if !spec.chart.coords.contains(coord) {
            return Err(CliError::Usage(format!(
                "unknown coordinate '{coord}'; chart: {}",
                spec.chart.coords.join(" ")
            )));
        }
    }
    Ok(())
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_classify(args: ClassifyArgs) -> Result<ExitCode, CliError> {
    let (spec, entry) = load_source(&args.source)?;
    let tol = tolerances(args.source.tol, args.source.abs_floor);
    let axes = args
        .grids
        .iter()
        .map(|raw| parse_grid_axis(raw))
        .collect::<Result<Vec<_>, _>>()?;
    check_coords(&spec, &axes)?;
    let data = compute(spec.clone())?;
    let grid = if axes.is_empty() {
        spec.default_grid(tol)?
    } else {
        spec.explicit_grid(&axes, tol)?
    };
    let report = build_report(&data, &grid, entry.as_ref())?;
    let text = match args.out.format {
        Format::Text => report.to_human(),
        Format::Machine => report.to_text(),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn sample_point(
    spec: &MetricSpec,
    at: &[String],
    tol: Tolerances,
) -> Result<Vec<f64>, CliError> {
    let axes = at
        .iter()
        .map(|raw| {
            let (coord, val) = split_kv(raw, "--at")?;
            Ok((coord, vec![parse_f64(val, "--at value")?]))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    check_coords(spec, &axes)?;
    let grid = spec.explicit_grid(&axes, tol)?;
    Ok(grid.points[0].clone())
}

fn run_components(args: ComponentsArgs) -> Result<ExitCode, CliError> {
    let (spec, entry) = load_source(&args.source)?;
    let tol = tolerances(args.source.tol, args.source.abs_floor);
    let point = sample_point(&spec, &args.at, tol)?;
    let data = compute(spec.clone())?;
    let maxwell = entry.as_ref().and_then(|e| e.maxwell.clone());
    let field = data
        .tensor_by_name(&args.tensor, maxwell.as_ref())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown tensor '{}'; available: {}",
                args.tensor,
                TENSOR_NAMES.join(", ")
            ))
        })?;
    let grid = SampleGrid {
        points: vec![point.clone()],
        tol,
    };
    let sampled = sample_over(&field, &data, &grid)?;
    let vals = &sampled[0].vals;
    let n = spec.n();
    let scope = spec.scope_at(&point);
    let reference = |idx: &[usize]| -> Option<f64> {
        let golden = &entry.as_ref()?.golden;
        let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        let row = golden
            .iter()
            .find(|g| g.tensor == args.tensor && g.idx == one_based)?;
        row.expr.eval(&scope).ok()
    };

    let at_label = spec
        .chart
        .coords
        .iter()
        .zip(&point)
        .map(|(c, v)| format!("{c}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for (idx, v) in indices(n, field.rank).zip(vals) {
        if field.rank > 0 && v.abs() <= tol.abs_floor {
            continue;
        }
        // Scalars always print; below the floor they print as zero.
        let v = if v.abs() <= tol.abs_floor { 0.0 } else { *v };
        let v = &v;
        let tuple = idx
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(",");
        let reference = reference(&idx);
        let label = if field.rank == 0 {
            args.tensor.clone()
        } else {
            format!("{}[{tuple}]", args.tensor)
        };
        match reference {
            Some(r) => lines.push(format!("{label} = {v}  (reference {r})")),
            None => lines.push(format!("{label} = {v}")),
        }
        let mut machine = format!("{tuple} {v:e}");
        if let Some(r) = reference {
            machine.push_str(&format!(" {r:e}"));
        }
        entries.push(machine);
    }

    let text = match args.out.format {
        Format::Text => {
            let mut out = format!("{} at {at_label}\n", args.tensor);
            if lines.is_empty() {
                out.push_str("  (no components above the floor)\n");
            }
            for l in &lines {
                out.push_str("  ");
                out.push_str(l);
                out.push('\n');
            }
            out
        }
        Format::Machine => {
            let mut items = vec![
                Item::field("metric", &spec.name),
                Item::field("tensor", &args.tensor),
                Item::field(
                    "point",
                    point
                        .iter()
                        .map(|v| format!("{v:e}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
            ];
            for e in &entries {
                items.push(Item::field("entry", e));
            }
            Document {
                items: vec![Item::block("components", items)],
            }
            .to_text()
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let tol = tolerances(args.tol, args.abs_floor);
    let reports = claims::verify_reference_claims(tol)?;
    let pass = reports.iter().filter(|r| r.status == ClaimStatus::Pass).count();
    let disputed = reports
        .iter()
        .filter(|r| r.status == ClaimStatus::Disputed)
        .count();
    let fail = reports.iter().filter(|r| r.status == ClaimStatus::Fail).count();

    let text = match args.out.format {
        Format::Text => {
            let mut out = String::new();
            for r in &reports {
                out.push_str(&format!("{:<9} {}  {}\n", r.status.as_str(), r.id, r.detail));
            }
            out.push_str(&format!(
                "\n{} claims: {pass} pass, {disputed} disputed, {fail} fail\n",
                reports.len()
            ));
            out
        }
        Format::Machine => {
            let mut items = vec![
                Item::field("engine", ENGINE),
                Item::block(
                    "tolerances",
                    vec![
                        Item::field("rel", format!("{:e}", tol.rel)),
                        Item::field("abs_floor", format!("{:e}", tol.abs_floor)),
                    ],
                ),
            ];
            for r in &reports {
                items.push(Item::block(
                    "claim",
                    vec![
                        Item::field("id", r.id),
                        Item::field("status", r.status.as_str()),
                        Item::field("detail", &r.detail),
                    ],
                ));
            }
            items.push(Item::block(
                "summary",
                vec![
                    Item::field("pass", pass),
                    Item::field("disputed", disputed),
                    Item::field("fail", fail),
                ],
            ));
            Document {
                items: vec![Item::block("verify", items)],
            }
            .to_text()
        }
    };
    emit(&args.out, &text)?;
    Ok(if fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
