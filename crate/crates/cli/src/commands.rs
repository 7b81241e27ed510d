use std::time::Instant;

use chainproof::analysis::{
    certify_ae_until, expected_cost_until, until_prob_is_zero, until_probability, UntilQuery,
};
use chainproof::crowds::{conditional_joint_closed, crowds_report};
use chainproof::model::ModelFile;
use chainproof::report::{Provenance, RunReport};
use chainproof::simulate::{estimate_cost, estimate_joint_first_last, estimate_until, SimConfig};
use chainproof::zeroconf::zeroconf_report;
use chainproof::{Mode, Rational, Scalar};

use crate::error::{CliError, CliResult, ExitKind};
use crate::output::{emit, emit_sweep, Format};
use crate::source::{
    crowds_params, label_set, read_text, sweep_grid, until_spec, zeroconf_params, Settings, Source,
};
use crate::{Cli, Command, CrowdsArgs, SimulateArgs, SolveArgs, ValidateArgs, ZeroconfArgs};

struct Ctx {
    argv: Vec<String>,
    format: Format,
    timing: bool,
    started: Instant,
}

impl Ctx {
    fn report<S: Scalar>(&self) -> RunReport {
        RunReport::new(self.argv.clone(), S::MODE)
    }

    fn finish(&self, mut report: RunReport) -> CliResult<()> {
        if self.timing {
            report.timing_ms = Some(self.started.elapsed().as_secs_f64() * 1e3);
        }
        emit(&report, self.format)
    }
}

pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<()> {
    let ctx = Ctx { argv, format: cli.global.format(), timing: cli.global.timing, started: Instant::now() };
    let mode = cli.global.mode()?;
    macro_rules! dispatch {
        ($f:ident, $args:expr) => {
            match mode {
                Mode::Exact => $f::<Rational>(&ctx, $args),
                Mode::Float => $f::<f64>(&ctx, $args),
            }
        };
    }
    match &cli.command {
        Command::Solve(a) => dispatch!(solve, a),
        Command::Zeroconf(a) => dispatch!(zeroconf, a),
        Command::Crowds(a) => dispatch!(crowds, a),
        Command::Simulate(a) => dispatch!(simulate, a),
        Command::Validate(a) => dispatch!(validate, a),
        Command::Export(a) => export(&a.preset),
    }
}

fn solve<S: Scalar>(ctx: &Ctx, args: &SolveArgs) -> CliResult<()> {
    let source = Source::<S>::resolve(&args.model)?;
    let chain = source.chain();
    let (phi_text, psi_text) = until_spec(&args.until)?;
    let query = UntilQuery::new(label_set(chain, phi_text)?, label_set(chain, psi_text)?, chain.state(&args.start)?);

    let mut report = ctx.report::<S>();
    report.param("model", &args.model).param("until", &args.until).param("start", &args.start);
    report.count("states", chain.len() as u64, Provenance::Solver);
    report.scalar("until.probability", &until_probability(chain, &query)?, Provenance::Solver);
    report.verdict("until.zero", until_prob_is_zero(chain, &query)?, None);
    report.verdict("until.ae_certified", certify_ae_until(chain, &query)?, None);

    if let Some(target) = &args.cost {
        let rewards = source
            .rewards()
            .ok_or_else(|| CliError::usage(format!("--cost given but `{}` has no rewards", args.model)))?;
        let target_set = label_set(chain, target)?;
        report.param("cost", target);
        let cost = expected_cost_until(rewards, &target_set, query.start)?;
        report.ext("cost.expected", &cost, Provenance::Solver);
    }
    ctx.finish(report)
}

fn zeroconf_settings(args: &ZeroconfArgs) -> Settings {
    [
        ("probes", &args.probes),
        ("p", &args.p),
        ("q", &args.q),
        ("hosts", &args.hosts),
        ("r", &args.r),
        ("E", &args.e),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
    .collect()
}

fn zeroconf<S: Scalar>(ctx: &Ctx, args: &ZeroconfArgs) -> CliResult<()> {
    let sim = if args.simulate { Some(SimConfig::with_samples(args.seed, args.samples)?) } else { None };
    let base = zeroconf_settings(args);
    let one = |settings: &[(String, String)]| -> CliResult<RunReport> {
        let params = zeroconf_params::<S>(settings)?;
        let mut report = ctx.report::<S>();
        zeroconf_report(&params, sim.as_ref())?.append_to(&mut report);
        Ok(report)
    };
    match &args.sweep {
        None => ctx.finish(one(&base)?),
        Some(spec) => {
            let rows = sweep_grid(spec)?
                .into_iter()
                .map(|point| {
                    let settings: Settings = base.iter().cloned().chain(point).collect();
                    let report = one(&settings)?;
                    // Per-probe columns depend on N; sweep rows keep a fixed set.
                    let columns =
                        report.columns().into_iter().filter(|(k, _)| !k.starts_with("p_err_probe")).collect();
                    Ok((report, columns))
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit_sweep(&rows, ctx.format)
        }
    }
}

fn crowds<S: Scalar>(ctx: &Ctx, args: &CrowdsArgs) -> CliResult<()> {
    let base: Settings = [("jondos", &args.jondos), ("colls", &args.colls), ("pf", &args.pf)]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
    let one = |settings: &[(String, String)]| -> CliResult<RunReport> {
        let params = crowds_params::<S>(settings, args.init.as_deref())?;
        let mut report = ctx.report::<S>();
        crowds_report(&params)?.append_to(&mut report);
        Ok(report)
    };
    match &args.sweep {
        None => ctx.finish(one(&base)?),
        Some(spec) => {
            let rows = sweep_grid(spec)?
                .into_iter()
                .map(|point| {
                    let settings: Settings = base.iter().cloned().chain(point).collect();
                    let report = one(&settings)?;
                    let columns = report.columns();
                    Ok((report, columns))
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit_sweep(&rows, ctx.format)
        }
    }
}

const SIM_SIGMAS: f64 = 3.0;

fn simulate<S: Scalar>(ctx: &Ctx, args: &SimulateArgs) -> CliResult<()> {
    let cfg = SimConfig::new(args.seed, args.samples, args.max_steps)?;
    let source = Source::<S>::resolve(&args.model)?;
    let chain = source.chain();
    let mut report = ctx.report::<S>();
    report
        .param("model", &args.model)
        .param("event", &args.event)
        .param("seed", args.seed)
        .param("samples", args.samples)
        .param("max_steps", args.max_steps);

    if let Some(spec) = args.event.strip_prefix("until:") {
        let (phi, psi) = until_spec(spec)?;
        let query = UntilQuery::new(label_set(chain, phi)?, label_set(chain, psi)?, chain.state(&args.start)?);
        report.param("start", &args.start);
        let est = estimate_until(chain, &query, &cfg)?;
        let exact = until_probability(chain, &query)?;
        report.estimate("until", &est);
        report.scalar("until.solver", &exact, Provenance::Solver);
        report.verdict("until.sim_within_3se", est.within(exact.to_f64(), SIM_SIGMAS), None);
    } else if let Some(target) = args.event.strip_prefix("cost:") {
        let rewards = source
            .rewards()
            .ok_or_else(|| CliError::usage(format!("cost event but `{}` has no rewards", args.model)))?;
        let target = label_set(chain, target)?;
        let start = chain.state(&args.start)?;
        report.param("start", &args.start);
        let est = estimate_cost(rewards, &target, start, &cfg)?;
        let exact = expected_cost_until(rewards, &target, start)?;
        report.estimate("cost", &est);
        report.ext("cost.solver", &exact, Provenance::Solver);
        if let Some(v) = exact.finite() {
            report.verdict("cost.sim_within_3se", est.within(v.to_f64(), SIM_SIGMAS), None);
        }
    } else if args.event == "routes" {
        let Source::Crowds(crowds) = &source else {
            return Err(CliError::usage("the routes event needs a crowds:... preset"));
        };
        let counts = estimate_joint_first_last(crowds, &cfg)?;
        counts.append_to(&mut report);
        let closed = conditional_joint_closed(crowds.params())?;
        let mut all_within = counts.shape_violations == 0 && !counts.is_empty();
        for ((i, l), v) in closed.cells() {
            let p = v.to_f64();
            let freq = counts.frequency(i, l);
            report.scalar(&format!("routes.closed.first={i},last_ncoll={l}"), v, Provenance::ClosedForm);
            report.float(&format!("routes.freq.first={i},last_ncoll={l}"), freq, Provenance::Simulation);
            let sigma = (p * (1.0 - p) / counts.hits.max(1) as f64).sqrt();
            all_within &= (freq - p).abs() <= SIM_SIGMAS * sigma;
        }
        report.verdict("routes.sim_within_3sigma", all_within, None);
    } else {
        return Err(CliError::usage(format!(
            "--event `{}` is not until:PHI=>PSI, cost:PHI or routes",
            args.event
        )));
    }
    ctx.finish(report)
}

fn validate<S: Scalar>(ctx: &Ctx, args: &ValidateArgs) -> CliResult<()> {
    let text = read_text(&args.model)?;
    let model = ModelFile::from_json(&text).map_err(CliError::from_model)?;
    let mut report = ctx.report::<S>();
    report.param("model", args.model.display());
    report.count("states", model.states.len() as u64, Provenance::Solver);
    report.count("transitions", model.transitions.len() as u64, Provenance::Solver);
    report.count("rewards", model.rewards.len() as u64, Provenance::Solver);
    match model.to_reward_chain::<S>() {
        Ok(_) => {
            report.verdict("valid", true, None);
            ctx.finish(report)
        }
        Err(err) => {
            let failure = CliError::from_model(err);
            for (state, sum) in row_sums::<S>(&model) {
                if !sum.is_unit_sum() {
                    report.scalar(&format!("row_sum.{state}"), &sum, Provenance::Solver);
                }
            }
            report.verdict("valid", false, Some(failure.message.clone()));
            ctx.finish(report)?;
            Err(failure)
        }
    }
}

/// Row sums of the parseable transition entries, in state order.
fn row_sums<S: Scalar>(model: &ModelFile) -> Vec<(String, S)> {
    model
        .states
        .iter()
        .map(|s| {
            let sum = model
                .transitions
                .iter()
                .filter(|t| &t.from == s)
                .filter_map(|t| t.prob.parse::<S>().ok())
                .fold(S::zero(), |acc, v| acc + v);
            (s.clone(), sum)
        })
        .collect()
}

fn export(preset: &str) -> CliResult<()> {
    if !preset.starts_with("zeroconf:") && !preset.starts_with("crowds:") {
        return Err(CliError::usage(format!("`{preset}` is not a preset")));
    }
    let file = match Source::<Rational>::resolve(preset)? {
        Source::Zeroconf(z) => ModelFile::from_reward_chain(z.reward_chain()),
        Source::Crowds(c) => ModelFile::from_chain(c.chain()),
        Source::File { .. } => return Err(CliError::new(ExitKind::Internal, "preset resolved to a file")),
    };
    crate::output::emit_text(&(file.to_json() + "\n"))
}
