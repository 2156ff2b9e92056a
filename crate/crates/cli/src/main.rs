//! Command-line front end for the predator-prey analysis toolkit.
//!
//! Exit codes: 0 success, 2 invalid input (a one-line diagnostic names the
//! violated invariant), 3 degenerate or infeasible analysis, 1 internal
//! error. Output is deterministic: identical invocations produce
//! byte-identical output on stdout or in the file named by --out.

mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgallee_core::bifurcation::{
    bt_chain_self_check, bt_phase_census, bt_unfold, first_lyapunov, hopf_critical,
    saddle_node_check, simulate_hopf_side, uniform_eta_grid, BtCensusCell, DiagonalRoot,
    HopfDirection, HopfSideOutcome,
};
use lgallee_core::classification::{classify, Classification};
use lgallee_core::dynamics::{portrait, Direction, IntegratorConfig, PortraitSpec, Termination};
use lgallee_core::equilibria::{all_equilibria, solve_allee_line, solve_boundary, solve_diagonal};
use lgallee_core::io::{self, fmt_f64};
use lgallee_core::{Error, ModelParams};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lgallee",
    about = "Equilibria, stability, and bifurcations of a harvested Leslie-Gower predator-prey model with a predator Allee effect",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct ParamArgs {
    /// Predation rate q > 0.
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// Harvest intensity h > 0.
    #[arg(long, allow_negative_numbers = true)]
    h: f64,
    /// Predator growth rate s > 0.
    #[arg(long, allow_negative_numbers = true)]
    s: f64,
    /// Allee threshold m in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParams, Error> {
        ModelParams::new(self.q, self.h, self.s, self.m)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Destination path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List all equilibria with their classification.
    Equilibria {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Threshold constants organizing the parameter space.
    Thresholds {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fold transversality report at the boundary double point (h = 1/4).
    SaddleNode {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Critical growth rate and first Lyapunov coefficient at the larger
    /// diagonal equilibrium.
    Hopf {
        /// Predation rate q > 0.
        #[arg(long)]
        q: f64,
        /// Harvest intensity h > 0.
        #[arg(long)]
        h: f64,
        /// Allee threshold m in (0, 1).
        #[arg(long)]
        m: f64,
        /// Confirm the predicted cycle side by a return-map experiment.
        #[arg(long)]
        simulate: bool,
        /// Growth-rate offset for the experiment; the sign predicted by
        /// the Lyapunov coefficient is used when omitted.
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cusp unfolding report, or a perturbation census with --grid.
    Bt {
        /// Predation rate q > 0.
        #[arg(long)]
        q: f64,
        /// Allee threshold m in (0, 1).
        #[arg(long)]
        m: f64,
        /// Harvest perturbation within +/-1e-3.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eta1: f64,
        /// Growth-rate perturbation within +/-1e-3.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eta2: f64,
        /// Run an N x N census over the perturbation box instead.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Phase portrait from a grid of seeds.
    Portrait {
        #[command(flatten)]
        params: ParamArgs,
        /// Window x0:x1:y0:y1.
        #[arg(long)]
        window: String,
        /// Seed grid ROWSxCOLS (rows over y, columns over x).
        #[arg(long, default_value = "10x10")]
        grid: String,
        /// Integration horizon.
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long, value_enum, default_value = "forward")]
        direction: DirectionArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// 1-D or 2-D parameter scan of equilibrium counts and kinds.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Axis spec param:lo:hi:steps over one of q, h, s, m; repeat for
        /// a 2-D scan (at most twice).
        #[arg(long)]
        axis: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Both => Direction::Both,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli.command));
}

fn run(command: Command) -> i32 {
    match dispatch(command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{err}");
            match err {
                Error::Domain(_) => 2,
                Error::Degenerate(_) | Error::Infeasible(_) | Error::Escape(_) => 3,
            }
        }
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require(output: &OutputArgs, allowed: &[Format], what: &str) -> Result<(), Error> {
    if allowed.contains(&output.format) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "format not supported for {what} output"
        )))
    }
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "q": p.q, "h": p.h, "s": p.s, "m": p.m })
}

fn classification_json(c: &Classification) -> Value {
    json!({
        "kind": c.kind.code(),
        "trace": c.eigen.trace,
        "det": c.eigen.det,
        "lambda1_re": c.eigen.lambda1_re,
        "lambda1_im": c.eigen.lambda1_im,
        "lambda2_re": c.eigen.lambda2_re,
        "lambda2_im": c.eigen.lambda2_im,
        "evidence": c.evidence,
        "borderline": c.borderline,
    })
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Equilibria { params, output } => {
            require(&output, &[Format::Csv, Format::Json], "equilibria")?;
            let p = params.build()?;
            let rows: Result<Vec<_>, Error> = all_equilibria(&p)
                .into_iter()
                .map(|e| classify(&p, &e).map(|c| (e, c)))
                .collect();
            let rows = rows?;
            let text = match output.format {
                Format::Csv => io::eq_class_to_csv(&rows),
                Format::Json => {
                    let list: Vec<Value> = rows
                        .iter()
                        .map(|(e, c)| {
                            json!({
                                "labels": e.labels,
                                "branch": e.branch.to_string(),
                                "x": e.x(),
                                "y": e.y(),
                                "multiplicity": e.multiplicity,
                                "classification": classification_json(c),
                            })
                        })
                        .collect();
                    let doc = json!({ "params": params_json(&p), "equilibria": list });
                    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                }
                Format::Svg => unreachable!(),
            };
            emit(&output, &text)
        }
        Command::Thresholds { params, output } => {
            require(&output, &[Format::Csv, Format::Json], "thresholds")?;
            let p = params.build()?;
            let t = lgallee_core::equilibria::thresholds(&p);
            let text = match output.format {
                Format::Csv => io::thresholds_to_csv(&t),
                Format::Json => {
                    let doc = json!({ "params": params_json(&p), "thresholds": t });
                    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                }
                Format::Svg => unreachable!(),
            };
            emit(&output, &text)
        }
        Command::SaddleNode { params, output } => {
            require(&output, &[Format::Csv, Format::Json], "saddle-node")?;
            let p = params.build()?;
            let report = saddle_node_check(&p)?;
            let text = match output.format {
                Format::Csv => {
                    let mut out = String::from("name,value\n");
                    for (name, v) in [
                        ("critical_h", report.critical_h),
                        ("x", report.equilibrium.x),
                        ("y", report.equilibrium.y),
                        ("right_null_x", report.right_null[0]),
                        ("right_null_y", report.right_null[1]),
                        ("left_null_x", report.left_null[0]),
                        ("left_null_y", report.left_null[1]),
                        ("t1", report.t1),
                        ("t2", report.t2),
                    ] {
                        out.push_str(&format!("{name},{}\n", fmt_f64(v)));
                    }
                    out
                }
                Format::Json => {
                    let doc = json!({ "params": params_json(&p), "saddle_node": report });
                    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                }
                Format::Svg => unreachable!(),
            };
            emit(&output, &text)
        }
        Command::Hopf {
            q,
            h,
            m,
            simulate,
            offset,
            output,
        } => {
            require(&output, &[Format::Csv, Format::Json], "hopf")?;
            // The growth rate is the unknown here; any placeholder passes
            // the invariant check and is ignored by the critical-value
            // computation.
            let p = ModelParams::new(q, h, 1.0, m)?;
            let critical = hopf_critical(&p, DiagonalRoot::Larger)?;
            let at_critical = p.with_s(critical.critical_s)?;
            let mut report = first_lyapunov(&at_critical, &critical.equilibrium)?;
            if simulate {
                // The cycle lives where the equilibrium is stable for a
                // subcritical point (growth above critical) and where it is
                // unstable for a supercritical one; probe 4% off critical.
                let side = offset.unwrap_or(match report.direction {
                    HopfDirection::Subcritical => 0.04 * critical.critical_s,
                    _ => -0.04 * critical.critical_s,
                });
                match simulate_hopf_side(
                    &at_critical,
                    &critical.equilibrium,
                    critical.critical_s,
                    side,
                )? {
                    HopfSideOutcome::Cycle(ev) => report.evidence = Some(ev),
                    HopfSideOutcome::NoCycle(_) => {}
                }
            }
            let text = match output.format {
                Format::Csv => {
                    let mut out = String::from("name,value\n");
                    out.push_str(&format!("critical_s,{}\n", fmt_f64(report.critical_s)));
                    out.push_str(&format!(
                        "trace_derivative,{}\n",
                        fmt_f64(report.trace_derivative)
                    ));
                    out.push_str(&format!(
                        "det_at_critical,{}\n",
                        fmt_f64(report.det_at_critical)
                    ));
                    out.push_str(&format!("m_coeff,{}\n", fmt_f64(report.m_coeff)));
                    for (i, phi) in report.phi.iter().enumerate() {
                        out.push_str(&format!("phi{},{}\n", i + 1, fmt_f64(*phi)));
                    }
                    out.push_str(&format!("sigma,{}\n", fmt_f64(report.sigma)));
                    out.push_str(&format!(
                        "sigma_listing,{}\n",
                        fmt_f64(report.sigma_listing)
                    ));
                    out.push_str(&format!("direction,{:?}\n", report.direction));
                    if let Some(ev) = &report.evidence {
                        out.push_str(&format!("cycle_s,{}\n", fmt_f64(ev.s_value)));
                        out.push_str(&format!("cycle_fixed_point,{}\n", fmt_f64(ev.fixed_point)));
                        out.push_str(&format!("cycle_period,{}\n", fmt_f64(ev.period)));
                        out.push_str(&format!("cycle_residual,{}\n", fmt_f64(ev.residual)));
                        out.push_str(&format!("cycle_attracting,{}\n", ev.attracting));
                    }
                    out
                }
                Format::Json => {
                    let doc = json!({
                        "params": { "q": q, "h": h, "m": m },
                        "hopf": report,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                }
                Format::Svg => unreachable!(),
            };
            emit(&output, &text)
        }
        Command::Bt {
            q,
            m,
            eta1,
            eta2,
            grid,
            output,
        } => {
            if let Some(n) = grid {
                require(&output, &[Format::Csv, Format::Svg], "bt census")?;
                if n == 0 {
                    return Err(Error::domain("census grid must have at least one cell"));
                }
                let cells = bt_phase_census(q, m, &uniform_eta_grid(n))?;
                let text = match output.format {
                    Format::Csv => io::census_to_csv(&cells),
                    Format::Svg => census_svg(&cells, n),
                    Format::Json => unreachable!(),
                };
                emit(&output, &text)
            } else {
                require(&output, &[Format::Csv, Format::Json], "bt report")?;
                let report = bt_unfold(q, m, eta1, eta2)?;
                let self_check = bt_chain_self_check(q, m, eta1, eta2, 1e-3, 20)?;
                let text = match output.format {
                    Format::Csv => {
                        let mut out = String::from("name,value\n");
                        for (name, v) in [
                            ("h3", report.center.h3),
                            ("s1", report.center.s1),
                            ("cusp_x", report.center.cusp.x),
                            ("cusp_y", report.center.cusp.y),
                            ("eta1", report.eta1),
                            ("eta2", report.eta2),
                            ("l00", report.l00),
                            ("l01", report.l01),
                            ("f20", report.stage24.f20),
                            ("h11", report.stage26.h11),
                            ("unfold_determinant", report.unfold_determinant),
                            ("chain_self_check", self_check),
                        ] {
                            out.push_str(&format!("{name},{}\n", fmt_f64(v)));
                        }
                        out
                    }
                    Format::Json => {
                        let doc = json!({
                            "bt": report,
                            "chain_self_check": self_check,
                        });
                        format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                    }
                    Format::Svg => unreachable!(),
                };
                emit(&output, &text)
            }
        }
        Command::Portrait {
            params,
            window,
            grid,
            horizon,
            direction,
            output,
        } => {
            require(&output, &[Format::Csv, Format::Svg], "portrait")?;
            let p = params.build()?;
            let w = parse_window(&window)?;
            let (ny, nx) = parse_grid(&grid)?;
            let spec = PortraitSpec {
                window: w,
                nx,
                ny,
                horizon,
                direction: direction.into(),
            };
            let runs = portrait(&p, &spec, &IntegratorConfig::default())?;
            let text = match output.format {
                Format::Csv => io::portrait_to_csv(&runs),
                Format::Svg => {
                    let frame = svg::Frame::new(w[0], w[1], w[2], w[3]);
                    let mut doc = svg::Document::new(frame);
                    for pr in &runs {
                        let pts: Vec<(f64, f64)> = pr
                            .trajectory
                            .samples
                            .iter()
                            .map(|(_, z)| (z.x, z.y))
                            .collect();
                        let color = match pr.trajectory.reason {
                            Termination::Escaped => "firebrick",
                            _ if pr.trajectory.backward => "steelblue",
                            _ => "black",
                        };
                        doc.polyline(&pts, color);
                    }
                    for e in all_equilibria(&p) {
                        doc.circle(e.x(), e.y(), 3.0, "darkorange");
                    }
                    doc.render()
                }
                Format::Json => unreachable!(),
            };
            emit(&output, &text)
        }
        Command::Sweep {
            params,
            axis,
            output,
        } => {
            require(&output, &[Format::Csv, Format::Svg], "sweep")?;
            let base = params.build()?;
            if axis.is_empty() || axis.len() > 2 {
                return Err(Error::domain("sweep needs one or two --axis specs"));
            }
            let axes: Result<Vec<AxisSpec>, Error> =
                axis.iter().map(|a| parse_axis(a)).collect();
            let axes = axes?;
            let rows = run_sweep(&base, &axes)?;
            let text = match output.format {
                Format::Csv => io::sweep_to_csv(&to_records(&rows)),
                Format::Svg => sweep_svg(&rows, &axes)?,
                Format::Json => unreachable!(),
            };
            emit(&output, &text)
        }
    }
}

struct AxisSpec {
    param: char,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Result<AxisSpec, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::domain(format!(
            "axis spec must be param:lo:hi:steps, got {spec:?}"
        )));
    }
    let param = match parts[0] {
        "q" => 'q',
        "h" => 'h',
        "s" => 's',
        "m" => 'm',
        other => {
            return Err(Error::domain(format!(
                "axis parameter must be one of q, h, s, m, got {other:?}"
            )))
        }
    };
    let lo: f64 = parts[1]
        .parse()
        .map_err(|_| Error::domain("invalid axis lower bound"))?;
    let hi: f64 = parts[2]
        .parse()
        .map_err(|_| Error::domain("invalid axis upper bound"))?;
    let steps: usize = parts[3]
        .parse()
        .map_err(|_| Error::domain("invalid axis step count"))?;
    if steps == 0 {
        return Err(Error::domain("axis step count must be at least 1"));
    }
    let values = if steps == 1 {
        vec![lo]
    } else {
        (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    Ok(AxisSpec { param, values })
}

fn parse_window(spec: &str) -> Result<[f64; 4], Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::domain("window must be x0:x1:y0:y1"));
    }
    let mut w = [0.0; 4];
    for (i, part) in parts.iter().enumerate() {
        w[i] = part
            .parse()
            .map_err(|_| Error::domain("invalid window bound"))?;
    }
    Ok(w)
}

fn parse_grid(spec: &str) -> Result<(usize, usize), Error> {
    let (rows, cols) = spec
        .split_once('x')
        .ok_or_else(|| Error::domain("grid must be ROWSxCOLS"))?;
    let r: usize = rows
        .parse()
        .map_err(|_| Error::domain("invalid grid rows"))?;
    let c: usize = cols
        .parse()
        .map_err(|_| Error::domain("invalid grid cols"))?;
    if r == 0 || c == 0 {
        return Err(Error::domain("grid dimensions must be at least 1"));
    }
    Ok((r, c))
}

struct SweepRow {
    p: ModelParams,
    boundary: usize,
    allee: usize,
    diagonal: usize,
    kinds: String,
}

fn with_param(base: &ModelParams, param: char, value: f64) -> Result<ModelParams, Error> {
    match param {
        'q' => ModelParams::new(value, base.h, base.s, base.m),
        'h' => ModelParams::new(base.q, value, base.s, base.m),
        's' => ModelParams::new(base.q, base.h, value, base.m),
        'm' => ModelParams::new(base.q, base.h, base.s, value),
        _ => unreachable!(),
    }
}

fn run_sweep(base: &ModelParams, axes: &[AxisSpec]) -> Result<Vec<SweepRow>, Error> {
    let mut points: Vec<ModelParams> = Vec::new();
    match axes {
        [a] => {
            for &v in &a.values {
                points.push(with_param(base, a.param, v)?);
            }
        }
        [a, b] => {
            for &va in &a.values {
                let pa = with_param(base, a.param, va)?;
                for &vb in &b.values {
                    points.push(with_param(&pa, b.param, vb)?);
                }
            }
        }
        _ => unreachable!(),
    }
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let mut kinds = Vec::new();
        for e in all_equilibria(&p) {
            let c = classify(&p, &e)?;
            let label = e
                .labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join("+");
            kinds.push(format!("{label}:{}", c.kind.code()));
        }
        rows.push(SweepRow {
            p,
            boundary: solve_boundary(&p).len(),
            allee: solve_allee_line(&p).len(),
            diagonal: solve_diagonal(&p).len(),
            kinds: kinds.join(";"),
        });
    }
    Ok(rows)
}

fn to_records(rows: &[SweepRow]) -> Vec<io::SweepRecord> {
    rows.iter()
        .map(|r| io::SweepRecord {
            params: r.p,
            boundary_count: r.boundary,
            allee_count: r.allee,
            diagonal_count: r.diagonal,
            kinds: r.kinds.clone(),
        })
        .collect()
}

fn sweep_svg(rows: &[SweepRow], axes: &[AxisSpec]) -> Result<String, Error> {
    let palette = [
        "#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#3182bd", "#08519c",
    ];
    match axes {
        [a] => {
            let lo = a.values.first().copied().unwrap_or(0.0);
            let hi = a.values.last().copied().unwrap_or(1.0);
            let max_count = rows
                .iter()
                .map(|r| r.boundary + r.allee + r.diagonal)
                .max()
                .unwrap_or(1)
                .max(1);
            let frame = svg::Frame::new(lo, hi, 0.0, max_count as f64);
            let mut doc = svg::Document::new(frame);
            let pts: Vec<(f64, f64)> = a
                .values
                .iter()
                .zip(rows)
                .map(|(&v, r)| (v, (r.boundary + r.allee + r.diagonal) as f64))
                .collect();
            doc.polyline(&pts, "black");
            Ok(doc.render())
        }
        [a, b] => {
            let (a0, a1) = (a.values[0], *a.values.last().unwrap());
            let (b0, b1) = (b.values[0], *b.values.last().unwrap());
            let da = if a.values.len() > 1 {
                (a1 - a0) / (a.values.len() - 1) as f64
            } else {
                1.0
            };
            let db = if b.values.len() > 1 {
                (b1 - b0) / (b.values.len() - 1) as f64
            } else {
                1.0
            };
            let frame = svg::Frame::new(a0 - 0.5 * da, a1 + 0.5 * da, b0 - 0.5 * db, b1 + 0.5 * db);
            let mut doc = svg::Document::new(frame);
            for (i, &va) in a.values.iter().enumerate() {
                for (j, &vb) in b.values.iter().enumerate() {
                    let r = &rows[i * b.values.len() + j];
                    let count = (r.boundary + r.allee + r.diagonal).min(palette.len() - 1);
                    doc.rect(va - 0.5 * da, vb - 0.5 * db, da, db, palette[count]);
                }
            }
            Ok(doc.render())
        }
        _ => unreachable!(),
    }
}

fn census_svg(cells: &[BtCensusCell], n: usize) -> String {
    let box_r = 1e-3;
    let cell = if n > 1 {
        2.0 * box_r / (n - 1) as f64
    } else {
        2.0 * box_r
    };
    let frame = svg::Frame::new(
        -box_r - 0.5 * cell,
        box_r + 0.5 * cell,
        -box_r - 0.5 * cell,
        box_r + 0.5 * cell,
    );
    let mut doc = svg::Document::new(frame);
    for c in cells {
        let fill = match (c.cycle_found, c.equilibrium_count) {
            (true, _) => "gold",
            (false, 0) => "#f0f0f0",
            (false, 1) => "#9e9e9e",
            _ => "#4292c6",
        };
        doc.rect(
            c.eta1 - 0.5 * cell,
            c.eta2 - 0.5 * cell,
            cell,
            cell,
            fill,
        );
    }
    doc.render()
}
