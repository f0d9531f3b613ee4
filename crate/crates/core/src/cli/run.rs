//! Command dispatch for single instances and instance directories.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    default_probe_grid, equivalence_harness, qualification_check, sequential_witnesses,
    CheckParams, EquivalenceReport, Qualification, WitnessTable,
};
use crate::error::Error;
use crate::ext_real::ExtReal;
use crate::funcrep::{
    inf_convolution_piecewise, AffinePiece, ConvexPolyhedralFunction, Function, GridFunction,
    GridTransform, PiecewiseMinFunction,
};
use crate::polyhedron::{Halfspace, VRep};
use crate::relax::{relax_and_compare, MinProblem, RelaxationReport};
use crate::subdiff::{brondsted_rockafellar, eps_subdiff_set, eps_threshold, is_subgradient, BRWitness};

use super::instance::{Instance, ParamsSpec, SchemaError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Transform,
    Subdiff,
    Verify,
    Witnesses,
    Relax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Mismatch,
    /// The instance lacks what the command needs (e.g. no `g` for `verify`).
    NotApplicable,
    SchemaError,
    Error,
}

impl Status {
    /// Exit code of a single-instance run.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Mismatch => 1,
            Status::NotApplicable | Status::SchemaError => 2,
            Status::Error => 3,
        }
    }
}

/// Parameters as used, so a report can be reproduced on its own.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamEcho {
    pub splits: usize,
    pub box_radius: f64,
    pub directions: usize,
    pub tolerance: f64,
    pub abs_tolerance: f64,
}

impl ParamEcho {
    fn new(p: &CheckParams, dim: usize) -> ParamEcho {
        ParamEcho {
            splits: p.splits,
            box_radius: p.box_radius,
            directions: p.directions_for(dim),
            tolerance: p.tolerance,
            abs_tolerance: p.abs_tol(),
        }
    }
}

/// An expected verdict next to the computed one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: bool,
    pub actual: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub name: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub file: String,
    pub command: Command,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamEcho>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<CommandResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CommandResult {
    Transform(TransformResult),
    Subdiff(SubdiffResult),
    Verify(VerifyResult),
    Witnesses(WitnessResult),
    Relax(RelaxationReport),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum TransformResult {
    Polyhedral {
        conjugate: ConvexPolyhedralFunction,
        envelope: ConvexPolyhedralFunction,
        affine_minorant: Option<AffinePiece>,
        /// Closed hull of `f□g`, when `g` is given.
        inf_convolution: Option<PiecewiseMinFunction>,
    },
    Grid {
        conjugate: GridTransform,
        envelope: GridTransform,
        lsc_hull: GridFunction,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubdiffProbe {
    pub point: Vec<f64>,
    pub epsilon: f64,
    pub value: ExtReal,
    /// Smallest `ε` with a nonempty `ε`-subdifferential.
    pub threshold: ExtReal,
    pub nonempty: bool,
    pub halfspaces: Vec<Halfspace>,
    pub vrep: Option<VRep>,
    pub witness: Option<BRWitness>,
    pub witness_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubdiffResult {
    pub xstar: Option<Vec<f64>>,
    pub probes: Vec<SubdiffProbe>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyResult {
    /// Present when both functions are convex polyhedral.
    pub qualification: Option<Qualification>,
    pub equivalence: EquivalenceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessResult {
    pub point: Vec<f64>,
    pub xstar: Vec<f64>,
    pub all_within_bound: bool,
    pub final_max_column: f64,
    pub table: WitnessTable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub total: usize,
    pub passed: usize,
    pub mismatched: usize,
    pub not_applicable: usize,
    pub schema_errors: usize,
    pub errors: usize,
    /// `verify` reports whose four verdicts disagree.
    pub inconsistent: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusReport {
    pub command: Command,
    pub summary: CorpusSummary,
    pub instances: Vec<RunReport>,
}

impl CorpusReport {
    /// `0` iff every applicable instance passed; otherwise the largest
    /// per-instance code.
    pub fn exit_code(&self) -> i32 {
        self.instances
            .iter()
            .map(|r| if r.status == Status::NotApplicable { 0 } else { r.status.exit_code() })
            .max()
            .unwrap_or(2)
    }
}

enum Outcome {
    Done(CommandResult, Vec<Check>),
    NotApplicable(String),
}

type Run = std::result::Result<Outcome, Error>;

/// Runs one command on one instance file.
pub fn run_instance(path: &Path, command: Command, overrides: &ParamsSpec, timing: bool) -> RunReport {
    let start = Instant::now();
    let file = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut report = RunReport {
        instance: stem,
        file,
        command,
        status: Status::SchemaError,
        params: None,
        checks: Vec::new(),
        error: None,
        result: None,
        wall_time_ms: None,
    };
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| SchemaError { line: 0, column: 0, message: format!("cannot read {}: {e}", path.display()) })
        .and_then(|text| Instance::parse(&text));
    let inst = match parsed {
        Ok(i) => i,
        Err(e) => {
            report.error = Some(ErrorInfo { name: "SchemaError".into(), message: e.to_string() });
            return report;
        }
    };
    report.instance = inst.name.clone();
    run_parsed(&inst, command, overrides, &mut report);
    if timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

/// Runs one command on an already parsed instance, filling `report`.
pub fn run_parsed(inst: &Instance, command: Command, overrides: &ParamsSpec, report: &mut RunReport) {
    let params = match inst.params.merged(overrides).resolve() {
        Ok(p) => p,
        Err(e) => {
            report.status = Status::SchemaError;
            report.error = Some(ErrorInfo { name: "SchemaError".into(), message: format!("params: {e}") });
            return;
        }
    };
    report.params = Some(ParamEcho::new(&params, inst.dim()));
    let outcome = match command {
        Command::Transform => transform(inst),
        Command::Subdiff => subdiff(inst),
        Command::Verify => verify(inst, &params),
        Command::Witnesses => witnesses(inst),
        Command::Relax => relax(inst, &params),
    };
    match outcome {
        Ok(Outcome::Done(result, checks)) => {
            report.status =
                if checks.iter().all(|c| c.expected == c.actual) { Status::Pass } else { Status::Mismatch };
            report.checks = checks;
            report.result = Some(result);
        }
        Ok(Outcome::NotApplicable(why)) => {
            report.status = Status::NotApplicable;
            report.error = Some(ErrorInfo { name: "NotApplicable".into(), message: why });
        }
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(ErrorInfo { name: e.name().into(), message: e.to_string() });
        }
    }
}

fn check(name: &str, expected: bool, actual: bool) -> Check {
    Check { name: name.into(), expected, actual }
}

fn built(spec: &super::instance::FunctionSpec) -> Function {
    spec.build().expect("validated at parse time")
}

/// The single convex branch of a polyhedral representation.
fn convex(f: &Function) -> Option<ConvexPolyhedralFunction> {
    match f {
        Function::Polyhedral(c) => Some(c.clone()),
        Function::PiecewiseMin(p) if p.branches().len() == 1 => Some(p.branches()[0].clone()),
        _ => None,
    }
}

fn transform(inst: &Instance) -> Run {
    let f = built(&inst.f);
    let result = match &f {
        Function::Grid(gf) => {
            let Some(dual) = &inst.dual_grid else {
                return Ok(Outcome::NotApplicable("grid transforms need a declared dual_grid".into()));
            };
            TransformResult::Grid {
                conjugate: gf.conjugate(dual)?,
                envelope: gf.envelope(dual)?,
                lsc_hull: gf.lsc_hull()?,
            }
        }
        other => {
            let pw = other.as_piecewise().expect("polyhedral");
            let inf_convolution = match inst.g.as_ref().map(built) {
                Some(g) => match g.as_piecewise() {
                    Some(gp) => Some(inf_convolution_piecewise(&pw, &gp)?),
                    None => None,
                },
                None => None,
            };
            TransformResult::Polyhedral {
                conjugate: pw.conjugate()?,
                envelope: pw.envelope()?,
                affine_minorant: pw.affine_minorant()?,
                inf_convolution,
            }
        }
    };
    Ok(Outcome::Done(CommandResult::Transform(result), Vec::new()))
}

fn subdiff(inst: &Instance) -> Run {
    let f = built(&inst.f);
    let Some(pw) = f.as_piecewise() else {
        return Ok(Outcome::NotApplicable("subdiff needs a polyhedral or piecewise_min f".into()));
    };
    if inst.probes.is_empty() {
        return Ok(Outcome::NotApplicable("subdiff needs at least one probe".into()));
    }
    let cpf = convex(&f);
    let mut probes = Vec::with_capacity(inst.probes.len());
    let mut witnesses_ok = true;
    let mut any_witness = false;
    for p in inst.probes() {
        let value = pw.eval(&p.point)?;
        let threshold = if value.is_finite() {
            match eps_threshold(&pw, &p.point) {
                Ok(t) => t,
                Err(Error::Domain(_)) => ExtReal::INFINITY,
                Err(e) => return Err(e),
            }
        } else {
            ExtReal::INFINITY
        };
        let set = eps_subdiff_set(&pw, &p.point, p.epsilon)?;
        let nonempty = !set.is_empty();
        let vrep = nonempty.then(|| set.vrep().clone());
        let (mut witness, mut witness_error) = (None, None);
        if let (Some(_), Some(_), false) = (&cpf, &inst.xstar, p.epsilon > 0.0) {
            witness_error = Some("a witness needs epsilon > 0".into());
        } else if let (Some(c), Some(xs)) = (&cpf, &inst.xstar) {
            match brondsted_rockafellar(c, &p.point, xs, p.epsilon) {
                Ok(w) => {
                    let r = p.epsilon.sqrt() * (1.0 + 1e-9) + 1e-12;
                    any_witness = true;
                    witnesses_ok &= w.norm_primal <= r
                        && w.norm_dual <= r
                        && is_subgradient(c, &w.z, &w.zstar, 1e-9)?;
                    witness = Some(w);
                }
                Err(e @ (Error::NotEpsSubgradient { .. } | Error::Domain(_))) => {
                    witness_error = Some(e.to_string())
                }
                Err(e) => return Err(e),
            }
        }
        probes.push(SubdiffProbe {
            point: p.point,
            epsilon: p.epsilon,
            value,
            threshold,
            nonempty,
            halfspaces: set.halfspaces().to_vec(),
            vrep,
            witness,
            witness_error,
        });
    }
    let checks = if any_witness { vec![check("witness_valid", true, witnesses_ok)] } else { Vec::new() };
    Ok(Outcome::Done(CommandResult::Subdiff(SubdiffResult { xstar: inst.xstar.clone(), probes }), checks))
}

fn verify(inst: &Instance, params: &CheckParams) -> Run {
    let Some(gs) = &inst.g else {
        return Ok(Outcome::NotApplicable("verify needs g".into()));
    };
    let (f, g) = (built(&inst.f), built(gs));
    let (Some(fp), Some(gp)) = (f.as_piecewise(), g.as_piecewise()) else {
        return Ok(Outcome::NotApplicable("verify needs polyhedral or piecewise_min functions".into()));
    };
    let d = inst.dim();
    let probe_grid = match &inst.probe_grid {
        Some(gr) => gr.clone(),
        None => default_probe_grid(d, params.box_radius)?,
    };
    let dual_grid = match &inst.dual_grid {
        Some(gr) => gr.clone(),
        None => default_probe_grid(d, params.box_radius)?,
    };
    let qualification = match (convex(&f), convex(&g)) {
        (Some(a), Some(b)) => Some(qualification_check(&a, &b)?),
        _ => None,
    };
    let rep = equivalence_harness(&fp, &gp, &inst.probes(), &probe_grid, &dual_grid, params)?;
    let equality = rep.statuses[0].holds;
    let mut checks = vec![
        check("consistent", inst.expected.consistent.unwrap_or(true), rep.consistent),
        check("conj_identity_agrees", true, rep.conj_identity.holds == equality),
    ];
    if let Some(e) = inst.expected.equality {
        checks.push(check("equality", e, equality));
    }
    Ok(Outcome::Done(CommandResult::Verify(VerifyResult { qualification, equivalence: rep }), checks))
}

fn witnesses(inst: &Instance) -> Run {
    let Some(gs) = &inst.g else {
        return Ok(Outcome::NotApplicable("witnesses needs g".into()));
    };
    let (Some(f), Some(g)) = (convex(&built(&inst.f)), convex(&built(gs))) else {
        return Ok(Outcome::NotApplicable("witnesses needs convex polyhedral f and g".into()));
    };
    let (Some(p), Some(xstar)) = (inst.probes.first(), &inst.xstar) else {
        return Ok(Outcome::NotApplicable("witnesses needs a probe point and xstar".into()));
    };
    let table = sequential_witnesses(&f, &g, &p.point, xstar, inst.witness_steps.unwrap_or(12))?;
    let all_within_bound = table.rows.iter().all(|r| r.within_bound());
    let final_max_column = table.rows.last().map(|r| r.max_column()).unwrap_or(0.0);
    let checks = vec![check("within_bound", true, all_within_bound)];
    let result = WitnessResult { point: p.point.clone(), xstar: xstar.clone(), all_within_bound, final_max_column, table };
    Ok(Outcome::Done(CommandResult::Witnesses(result), checks))
}

fn relax(inst: &Instance, params: &CheckParams) -> Run {
    let Some(feasible) = inst.feasible_set() else {
        return Ok(Outcome::NotApplicable("relax needs a feasible set".into()));
    };
    let problem = MinProblem { name: inst.name.clone(), objective: built(&inst.f), feasible: feasible? };
    let probe_grid = match &inst.probe_grid {
        Some(gr) => gr.clone(),
        None => default_probe_grid(inst.dim(), params.box_radius)?,
    };
    let rep = relax_and_compare(&problem, &probe_grid, inst.dual_grid.as_ref(), params)?;
    let mut checks = vec![check("value_identity", inst.expected.value_identity.unwrap_or(true), rep.value_identity)];
    if let Some(e) = inst.expected.decomposition {
        checks.push(check("decomposition", e, rep.decomposition_holds));
    }
    Ok(Outcome::Done(CommandResult::Relax(rep), checks))
}

/// Worker count: `FENCHEL_LAB_THREADS` when set to a positive integer,
/// otherwise the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("FENCHEL_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Sorted `*.json` files directly inside `dir`.
pub fn instance_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs `command` on every instance file in `dir`, concurrently, with the
/// reports ordered by instance name (file name breaks ties).
pub fn corpus_run(
    dir: &Path,
    command: Command,
    overrides: &ParamsSpec,
    timing: bool,
) -> std::result::Result<CorpusReport, String> {
    let files = instance_files(dir).map_err(|e| format!("cannot list {}: {e}", dir.display()))?;
    if files.is_empty() {
        return Err(format!("no instance files in {}", dir.display()));
    }
    let slots: Vec<Mutex<Option<RunReport>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = thread_count().min(files.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= files.len() {
                    break;
                }
                let r = run_instance(&files[i], command, overrides, timing);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    let mut instances: Vec<RunReport> =
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every file ran")).collect();
    instances.sort_by(|a, b| a.instance.cmp(&b.instance).then_with(|| a.file.cmp(&b.file)));
    let count = |s: Status| instances.iter().filter(|r| r.status == s).count();
    let inconsistent = instances
        .iter()
        .filter(|r| matches!(&r.result, Some(CommandResult::Verify(v)) if !v.equivalence.consistent))
        .count();
    let summary = CorpusSummary {
        total: instances.len(),
        passed: count(Status::Pass),
        mismatched: count(Status::Mismatch),
        not_applicable: count(Status::NotApplicable),
        schema_errors: count(Status::SchemaError),
        errors: count(Status::Error),
        inconsistent,
    };
    Ok(CorpusReport { command, summary, instances })
}
