//! The subcommands. Each writes its artifacts under the run directory and
//! its wall-clock timings to `<subcommand>.timings.json` beside them, so
//! the artifacts themselves are byte-identical across reruns.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use isogep::estimate::{estimate_parameters, EstimationReport};
use isogep::experiments::{
    binding_report, capacity_plan, compare_plans, drop_nonbinding_and_resolve, run_ablations, write_binding_rows,
    write_capacity_plan, write_plan_comparison, ExperimentError, ReferencePlan, Timing,
};
use isogep::ingest::{merge_records, parse_hourly, read_holidays, Rejection, Schema};
use isogep::model::{build_conventional, build_model, closed_form_size, IsoGep, LPModel, RowTag, SizeReport};
use isogep::params_io::{read_parameters, write_parameters};
use isogep::solve::{read_external_solution, solve_with, write_mps, LpSource, ModelSource, Solution, Status};
use isogep::types::{IndexSets, ModelFamily, ParameterSet};
use isogep::validate::validate;
use log::{info, warn};
use serde::Serialize;

use crate::config::{require, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Estimate,
    Build,
    Solve,
    Ablate,
    Duals,
    Compare,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Estimate => "estimate",
            Subcommand::Build => "build",
            Subcommand::Solve => "solve",
            Subcommand::Ablate => "ablate",
            Subcommand::Duals => "duals",
            Subcommand::Compare => "compare",
        }
    }
}

/// Writes artifacts into the run directory and collects step timings.
struct Run<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    timings: Vec<Timing>,
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        let dir = cfg.run_dir();
        fs::create_dir_all(&dir).map_err(|e| output_err(&dir, e))?;
        Ok(Run {
            cfg,
            dir,
            timings: Vec::new(),
        })
    }

    fn timed<T>(&mut self, step: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.record(step, start);
        out
    }

    fn record(&mut self, step: &str, start: Instant) {
        let seconds = start.elapsed().as_secs_f64();
        info!("{step}: {seconds:.3} s");
        self.timings.push(Timing {
            step: step.to_string(),
            seconds,
        });
    }

    /// Streams into `name` through a buffered writer.
    fn write_with<E: std::fmt::Display>(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> Result<(), E>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| output_err(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| output_err(&path, e))?;
        w.flush().map_err(|e| output_err(&path, e))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n").map_err(serde_json::Error::io)
        })
    }

    fn finish(self, cmd: Subcommand) -> Result<(), CliError> {
        self.write_json(&format!("{}.timings.json", cmd.name()), &self.timings)
    }
}

pub fn run(cmd: Subcommand, cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::new(cfg)?;
    match cmd {
        Subcommand::Estimate => estimate(&mut run)?,
        Subcommand::Build => build(&mut run)?,
        Subcommand::Solve => solve(&mut run)?,
        Subcommand::Ablate => ablate(&mut run)?,
        Subcommand::Duals => duals(&mut run)?,
        Subcommand::Compare => compare(&mut run)?,
    }
    run.finish(cmd)
}

#[derive(Serialize)]
struct FileSummary {
    rows_read: usize,
    rejections: Vec<Rejection>,
}

#[derive(Serialize)]
struct IngestSummary {
    demand: FileSummary,
    generation: FileSummary,
    holidays: usize,
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    ingest: IngestSummary,
    estimation: &'a EstimationReport,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
}

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::InputData(format!("{}: {e}", path.display()))
}

fn experiment_err(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Reference { .. } | ExperimentError::Csv(_) => CliError::InputData(e.to_string()),
        _ => CliError::Model(e.to_string()),
    }
}

fn estimation(run: &mut Run) -> Result<(isogep::estimate::Estimation, IngestSummary), CliError> {
    let cfg = run.cfg;
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| CliError::Config("estimation needs a [study] section".into()))?;
    let demand_path = require(&cfg.paths.demand, "demand")?;
    let generation_path = require(&cfg.paths.generation, "generation")?;
    let holidays_path = require(&cfg.paths.holidays, "holidays")?;
    let (demand, generation, holidays) = run.timed("ingest", || -> Result<_, CliError> {
        let demand = parse_hourly(open(demand_path)?, &Schema::demand()).map_err(|e| data_err(demand_path, e))?;
        let generation =
            parse_hourly(open(generation_path)?, &Schema::generation()).map_err(|e| data_err(generation_path, e))?;
        let holidays = read_holidays(open(holidays_path)?).map_err(|e| data_err(holidays_path, e))?;
        Ok((demand, generation, holidays))
    })?;
    for (path, rejected) in [(demand_path, &demand.rejections), (generation_path, &generation.rejections)] {
        if !rejected.is_empty() {
            warn!("{}: {} rows rejected", path.display(), rejected.len());
        }
    }
    let summary = IngestSummary {
        demand: FileSummary {
            rows_read: demand.rows_read,
            rejections: demand.rejections,
        },
        generation: FileSummary {
            rows_read: generation.rows_read,
            rejections: generation.rejections,
        },
        holidays: holidays.len(),
    };
    let records = merge_records([demand.records, generation.records]);
    let est = run
        .timed("estimate", || estimate_parameters(&records, &holidays, &study.inputs()))
        .map_err(|e| CliError::InputData(e.to_string()))?;
    check_valid(&est.params, &est.sets)?;
    Ok((est, summary))
}

fn check_valid(params: &ParameterSet, sets: &IndexSets) -> Result<(), CliError> {
    let report = validate(params, sets);
    if report.is_empty() {
        return Ok(());
    }
    let first: Vec<String> = report.violations.iter().take(5).map(|v| v.to_string()).collect();
    Err(CliError::InputData(format!(
        "parameter set fails validation ({} violations): {}",
        report.len(),
        first.join("; ")
    )))
}

/// Reads the parameter file when one is configured, else estimates.
fn parameters(run: &mut Run) -> Result<(ParameterSet, IndexSets), CliError> {
    if run.cfg.paths.parameters.is_some() {
        let path = require(&run.cfg.paths.parameters, "parameters")?;
        let (params, sets) = read_parameters(open(path)?).map_err(|e| data_err(path, e))?;
        check_valid(&params, &sets)?;
        return Ok((params, sets));
    }
    estimation(run).map(|(est, _)| (est.params, est.sets))
}

fn estimate(run: &mut Run) -> Result<(), CliError> {
    let (est, ingest) = estimation(run)?;
    run.write_with("parameters.json", |w| write_parameters(&est.params, &est.sets, w))?;
    run.write_json(
        "estimation_report.json",
        &EstimateOutput {
            ingest,
            estimation: &est.report,
        },
    )
}

fn export(run: &mut Run, source: &dyn ModelSource) -> Result<(), CliError> {
    if run.cfg.build.mps {
        let start = Instant::now();
        run.write_with("model.mps", |w| write_mps(source, w))?;
        run.record("export", start);
    }
    Ok(())
}

#[derive(Serialize)]
struct SizeOutput {
    family: ModelFamily,
    /// Counts by arithmetic on the index sets; absent for the conventional family.
    closed_form: Option<SizeReport>,
    /// Counts from walking the generated rows.
    enumerated_rows: BTreeMap<RowTag, usize>,
    enumerated_total_rows: usize,
    columns: usize,
    matches_closed_form: Option<bool>,
}

fn build(run: &mut Run) -> Result<(), CliError> {
    let (params, sets) = parameters(run)?;
    let variant = run.cfg.model.variant();
    let model_err = |e: isogep::model::ModelError| CliError::Model(e.to_string());
    let size = match variant.family {
        ModelFamily::IsoGep => {
            let gen = IsoGep::new(&params, &sets, &variant).map_err(model_err)?;
            let mut enumerated = run.timed("enumerate", || gen.enumerate_row_counts());
            enumerated.retain(|_, n| *n > 0);
            let closed = closed_form_size(&sets, &variant);
            let columns = gen.column_count();
            export(run, &gen)?;
            SizeOutput {
                family: variant.family,
                matches_closed_form: Some(closed.rows == enumerated && closed.total_columns == columns),
                enumerated_total_rows: enumerated.values().sum(),
                enumerated_rows: enumerated,
                closed_form: Some(closed),
                columns,
            }
        }
        ModelFamily::Conventional => {
            let model = run.timed("build", || build_conventional(&params, &sets, &variant)).map_err(model_err)?;
            export(run, &LpSource::new(&model))?;
            SizeOutput {
                family: variant.family,
                closed_form: None,
                enumerated_rows: model.rows_by_tag(),
                enumerated_total_rows: model.rows.len(),
                columns: model.columns.len(),
                matches_closed_form: None,
            }
        }
    };
    if size.matches_closed_form == Some(false) {
        warn!("enumerated row counts differ from the closed form");
    }
    run.write_json("size_report.json", &size)
}

#[derive(Serialize)]
struct NamedColumn {
    name: String,
    value: f64,
    reduced_cost: f64,
}

#[derive(Serialize)]
struct NamedRow {
    name: String,
    activity: f64,
    dual: f64,
}

#[derive(Serialize)]
struct CertificateOutput {
    margin: f64,
    verified: bool,
    rows: Vec<String>,
}

#[derive(Serialize)]
struct SolutionOutput {
    status: Status,
    /// Present only at an optimum.
    objective: Option<f64>,
    iterations: usize,
    columns: Vec<NamedColumn>,
    rows: Vec<NamedRow>,
    certificate: Option<CertificateOutput>,
    /// Nonzero entries of the improving direction when unbounded.
    ray: Option<BTreeMap<String, f64>>,
}

fn solution_output(model: &LPModel, sol: &Solution) -> SolutionOutput {
    let optimal = sol.is_optimal();
    let columns = if optimal {
        model
            .columns
            .iter()
            .zip(&sol.primal)
            .zip(&sol.reduced_costs)
            .map(|((c, &value), &reduced_cost)| NamedColumn {
                name: c.key.name(),
                value,
                reduced_cost,
            })
            .collect()
    } else {
        Vec::new()
    };
    let rows = if optimal {
        model
            .rows
            .iter()
            .zip(&sol.dual)
            .map(|(r, &dual)| NamedRow {
                name: r.key.name(),
                activity: r.activity(&sol.primal),
                dual,
            })
            .collect()
    } else {
        Vec::new()
    };
    SolutionOutput {
        status: sol.status,
        objective: optimal.then_some(sol.objective),
        iterations: sol.iterations,
        columns,
        rows,
        certificate: sol.certificate.as_ref().map(|c| CertificateOutput {
            margin: c.margin,
            verified: c.verified(),
            rows: c.rows(model).iter().map(|k| k.name()).collect(),
        }),
        ray: sol.ray.as_ref().map(|ray| {
            model
                .columns
                .iter()
                .zip(ray)
                .filter(|(_, &v)| v != 0.0)
                .map(|(c, &v)| (c.key.name(), v))
                .collect()
        }),
    }
}

fn desk_solve(run: &mut Run, model: &LPModel) -> Result<Solution, CliError> {
    let opts = run.cfg.solver.options();
    let sol = run
        .timed("solve", || solve_with(model, &opts))
        .map_err(|e| CliError::Model(e.to_string()))?;
    info!("solve ended {:?} after {} iterations", sol.status, sol.iterations);
    Ok(sol)
}

/// An optimal solution, from the external solver file when configured.
fn optimal_solution(run: &mut Run, model: &LPModel) -> Result<Solution, CliError> {
    let sol = if run.cfg.paths.external_solution.is_some() {
        let path = require(&run.cfg.paths.external_solution, "external_solution")?;
        read_external_solution(open(path)?, model).map_err(|e| data_err(path, e))?
    } else {
        desk_solve(run, model)?
    };
    if !sol.is_optimal() {
        return Err(CliError::Model(format!(
            "solve ended {:?}; an optimal solution is needed",
            sol.status
        )));
    }
    Ok(sol)
}

fn built_model(run: &mut Run, params: &ParameterSet, sets: &IndexSets) -> Result<LPModel, CliError> {
    let variant = run.cfg.model.variant();
    run.timed("build", || build_model(params, sets, &variant))
        .map_err(|e| CliError::Model(e.to_string()))
}

fn solve(run: &mut Run) -> Result<(), CliError> {
    let (params, sets) = parameters(run)?;
    let model = built_model(run, &params, &sets)?;
    let sol = desk_solve(run, &model)?;
    run.write_json("solution.json", &solution_output(&model, &sol))?;
    if sol.is_optimal() {
        let plan = capacity_plan(&model, &sol, &params, &sets);
        run.write_with("capacities.csv", |w| write_capacity_plan(&plan, w))?;
    } else {
        warn!("solve ended {:?}; no capacity plan written", sol.status);
    }
    Ok(())
}

fn ablate(run: &mut Run) -> Result<(), CliError> {
    let (params, sets) = parameters(run)?;
    let variant = run.cfg.model.variant();
    let opts = run.cfg.solver.options();
    let report = run_ablations(&params, &sets, &variant, &opts).map_err(experiment_err)?;
    run.timings.extend(report.timings.iter().cloned());
    run.write_json("ablation_report.json", &report)?;
    run.write_json("ablation_summary.json", &report.summary())
}

fn duals(run: &mut Run) -> Result<(), CliError> {
    let (params, sets) = parameters(run)?;
    let model = built_model(run, &params, &sets)?;
    let sol = optimal_solution(run, &model)?;
    let opts = run.cfg.binding.options();
    let report = binding_report(&model, &sol, &sets, &opts);
    info!("{} of {} variation rows binding", report.rows.len(), report.variation_rows);
    run.write_json("binding_report.json", &report)?;
    run.write_with("binding_rows.csv", |w| write_binding_rows(&report, w))?;
    if run.cfg.binding.drop_nonbinding {
        let variant = run.cfg.model.variant();
        let solver = run.cfg.solver.options();
        let drop = drop_nonbinding_and_resolve(&params, &sets, &variant, &solver, &opts).map_err(experiment_err)?;
        if !drop.agree {
            warn!("reduced objective diverges from the full objective by {:?}", drop.divergence);
        }
        run.timings.extend(drop.timings.iter().cloned());
        run.write_json("drop_report.json", &drop)?;
    }
    Ok(())
}

fn compare(run: &mut Run) -> Result<(), CliError> {
    let first_year = run.cfg.first_year()?;
    let reference_path = require(&run.cfg.paths.reference_plan, "reference_plan")?;
    let reference = ReferencePlan::read_csv(open(reference_path)?).map_err(|e| data_err(reference_path, e))?;
    let (params, sets) = parameters(run)?;
    let model = built_model(run, &params, &sets)?;
    let sol = optimal_solution(run, &model)?;
    let plan = capacity_plan(&model, &sol, &params, &sets);
    let gaps = compare_plans(&plan, first_year, &reference);
    run.write_with("plan_comparison.csv", |w| write_plan_comparison(&gaps, w))
}
