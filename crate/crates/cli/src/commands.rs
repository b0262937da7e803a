use std::fs::File;
use std::io::{BufWriter, Write};

use quasim::bipartite::bias_report;
use quasim::decomp::decompose_minimal;
use quasim::feas::{
    separability, stochastic_map_exists, support_zero_pattern, zero_pattern_certificate, FeasibilityResult,
};
use quasim::io::{format_rational, write_events_csv, DecompositionJson};
use quasim::mcsim::{post_select, run_trials_sharded, SimOutcome};
use quasim::qcore::{hull_member, in_region, region_violation, Dist, PERIOD};
use quasim::sampling::generate_trials;
use quasim::{RDist, RMatrix, RModel, Rational, RngSpec};

use crate::{
    inputs, BipartiteArgs, CheckCommand, CliError, Command, DecomposeArgs, Format, RegionArgs, RunArgs, SimulateArgs,
    EXIT_FAILURE, EXIT_OK,
};

type CmdResult = Result<i32, CliError>;

pub(crate) fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Decompose(args) => decompose(args, out),
        Command::Simulate(args) => simulate(args, out, err),
        Command::Bipartite(args) => bipartite(args, out, err),
        Command::Check(CheckCommand::Map { pairs }) => check_map(&pairs, out),
        Command::Check(CheckCommand::Sep { state }) => check_sep(&state, out),
        Command::Region(args) => region(args, out, err),
    }
}

/// Machine output goes to `--output` when given, else to stdout.
fn emit(path: Option<&std::path::Path>, out: &mut dyn Write, body: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(body)?;
            f.flush()?;
        }
        None => out.write_all(body)?,
    }
    Ok(())
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut body = serde_json::to_vec_pretty(value).expect("plain data serializes");
    body.push(b'\n');
    body
}

fn rng_spec(run: &RunArgs, err: &mut dyn Write) -> Result<RngSpec, CliError> {
    let seed = match run.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            writeln!(err, "seed: {s}")?;
            s
        }
    };
    Ok(RngSpec::new(seed, run.stream))
}

fn with_threads<R: Send>(threads: u64, job: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build()?;
    Ok(pool.install(job))
}

fn decimals(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")
}

fn decompose(args: DecomposeArgs, out: &mut dyn Write) -> CmdResult {
    let m = inputs::matrix(&args.matrix)?;
    let d = decompose_minimal(&m);
    let body = match args.format {
        Format::Json => json_bytes(&DecompositionJson::from_decomposition(&d)),
        Format::Text => format!(
            "q+ = {}\nq- = {}\nr = {}\nS+ =\n{}S- =\n{}",
            d.q_plus, d.q_minus, d.r, d.s_plus, d.s_minus
        )
        .into_bytes(),
        Format::Csv => return Err(CliError::Input("decompose supports --format json or text".into())),
    };
    emit(args.output.as_deref(), out, &body)?;
    Ok(EXIT_OK)
}

/// A `d×d` matrix applied to a `d²`-level state acts as `𝟙 ⊗ S`.
fn fit_matrix(state: &RDist, m: RMatrix) -> RMatrix {
    let d = m.dim();
    if state.dim() == d * d && d > 1 {
        RMatrix::identity(d).tensor(&m)
    } else {
        m
    }
}

fn simulate(args: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = inputs::state(&args.state)?;
    let s = fit_matrix(&p, inputs::matrix(&args.matrix)?);
    if s.dim() != p.dim() {
        return Err(quasim::Error::DimensionMismatch {
            expected: s.dim(),
            found: p.dim(),
        }
        .into());
    }
    let rng = rng_spec(&args.run, err)?;
    let d = decompose_minimal(&s);
    let n = args.run.trials;
    let table = with_threads(args.run.threads, || {
        run_trials_sharded(&p, &d, n, rng, args.run.threads as usize)
    })??;
    let outcome = post_select(&table);
    let body = match args.run.format {
        Format::Json => json_bytes(&outcome),
        Format::Csv => {
            let mut buf = Vec::new();
            write_events_csv(&table.events, &mut buf)?;
            buf
        }
        Format::Text => simulate_text(&outcome).into_bytes(),
    };
    emit(args.run.output.as_deref(), out, &body)?;
    Ok(if outcome.is_success() { EXIT_OK } else { EXIT_FAILURE })
}

fn simulate_text(o: &SimOutcome) -> String {
    let mut s = format!(
        "status: {}\nN: {}  N': {}  removed pairs: {}\n",
        if o.is_success() { "success" } else { "failure" },
        o.n,
        o.n_prime,
        o.removed_pairs
    );
    if let Some(est) = &o.estimate {
        s += &format!("estimate: {}\n", decimals(est));
    }
    for (x, c) in &o.unmatched {
        s += &format!("unmatched b=1 at x={x}: {c}\n");
    }
    s
}

fn bipartite(args: BipartiteArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let run = &args.run;
    let rng = rng_spec(run, err)?;
    let report = with_threads(run.threads, || bias_report(run.trials, rng, run.threads as usize))??;
    let body = match run.format {
        Format::Json => json_bytes(&report),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for cell in &report.cells {
                w.serialize(cell).map_err(|e| CliError::Input(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))?
        }
        Format::Text => {
            let mut s = format!(
                "TV(blind, target) = {:.4}\nTV(comm, target) = {:.4}\nTV(blind, oracle) = {:.4}\n",
                report.tv_blind, report.tv_comm, report.tv_blind_vs_oracle
            );
            s += "y x   target  oracle  blind   comm\n";
            for c in &report.cells {
                s += &format!(
                    "{} {}   {:.4}  {:.4}  {:.4}  {:.4}\n",
                    c.y, c.x, c.target, c.oracle, c.blind, c.comm
                );
            }
            s.into_bytes()
        }
    };
    emit(run.output.as_deref(), out, &body)?;
    Ok(EXIT_OK)
}

fn check_map(pairs: &str, out: &mut dyn Write) -> CmdResult {
    let model = RModel::new();
    let idx = inputs::pairs(pairs)?;
    let pairs: Vec<(RDist, RDist)> = idx
        .iter()
        .map(|&(a, b)| (model.extreme(a).clone(), model.extreme(b).clone()))
        .collect();
    match stochastic_map_exists(&pairs)? {
        FeasibilityResult::Feasible(m) => {
            writeln!(out, "FEASIBLE")?;
            write!(out, "witness (columns are inputs):\n{m}")?;
        }
        FeasibilityResult::Infeasible => {
            writeln!(out, "INFEASIBLE")?;
            let zeros: Vec<String> = support_zero_pattern(&pairs)?
                .iter()
                .map(|(r, c)| format!("({r},{c})"))
                .collect();
            writeln!(out, "entries forced to zero by support (row,col): {}", zeros.join(" "))?;
        }
    }
    Ok(EXIT_OK)
}

fn check_sep(state: &str, out: &mut dyn Write) -> CmdResult {
    let model = RModel::new();
    let p = inputs::state(state)?;
    match separability(&p, &model.extremes)? {
        FeasibilityResult::Feasible(weights) => {
            writeln!(out, "FEASIBLE")?;
            for ((i, j), w) in weights {
                writeln!(out, "  {} * e{i} x e{j}", format_rational(&w))?;
            }
        }
        FeasibilityResult::Infeasible => {
            writeln!(out, "INFEASIBLE")?;
            if let Some(cert) = zero_pattern_certificate(&p, &model.extremes) {
                writeln!(out, "{cert}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn region(args: RegionArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let model = RModel::new();
    let quiet = args.verify || args.sample.is_some() || args.point.is_some();
    if !quiet {
        for (i, e) in model.extremes.iter().enumerate() {
            writeln!(out, "e{i} = {e}")?;
        }
    }
    if args.verify {
        let orbit = (0..PERIOD).all(|i| {
            model
                .s
                .apply(model.extreme(i))
                .is_ok_and(|q| q.to_dist().is_ok_and(|d| &d == model.extreme(i + 1)))
        });
        let period = model.s.power(PERIOD as u64).is_identity();
        writeln!(
            out,
            "orbit {}, period {}",
            if orbit { "OK" } else { "FAILED" },
            if period { "OK" } else { "FAILED" }
        )?;
        if !(orbit && period) {
            return Ok(EXIT_FAILURE);
        }
    }
    if let Some(k) = args.sample {
        let seed = match args.seed {
            Some(s) => s,
            None => {
                let s = rand::random::<u64>();
                writeln!(err, "seed: {s}")?;
                s
            }
        };
        let points = sample_points(k, seed)?;
        let mut agree = 0u64;
        for p in &points {
            if in_region(p, &model.s, PERIOD)? == hull_member(p, &model.extremes)? {
                agree += 1;
            }
        }
        writeln!(out, "agreement {agree}/{k}")?;
        if agree != k {
            return Ok(EXIT_FAILURE);
        }
    }
    if let Some(point) = &args.point {
        let p = inputs::state(point)?;
        match region_violation(&p, &model.s, PERIOD)? {
            None => writeln!(out, "inside")?,
            Some(v) => {
                let op = match v.power {
                    1 => "S·p".to_string(),
                    k => format!("S^{k}·p"),
                };
                writeln!(out, "outside ({op} has negative entry at index {})", v.index)?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Random rational points of the simplex with denominators up to 36.
fn sample_points(k: u64, seed: u64) -> Result<Vec<RDist>, CliError> {
    let weights = generate_trials(k, RngSpec::new(seed, 0), 1, |draws| {
        [draws.next_u64() % 13, draws.next_u64() % 13, draws.next_u64() % 13]
    });
    weights
        .into_iter()
        .map(|w| {
            let w = if w == [0, 0, 0] { [1, 1, 1] } else { w };
            let w: Vec<i64> = w.iter().map(|&v| v as i64).collect();
            Ok(Dist::<Rational>::from_weights(&w)?)
        })
        .collect()
}
