use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::funcrep::{Grid, PiecewiseMinFunction};

use super::rules::{
    check_conjugate_identity, check_regularization_equality, check_sum1d, check_sum_rules,
    CheckParams, RuleDetail, RuleKind, RuleStatus, SumContext, SumRuleReport,
};

/// One `(x, ε)` probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub point: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Evaluated(SumRuleReport),
    /// `x ∉ dom f ∩ dom g`: only SUM1D applies, and it holds vacuously.
    OutsideDomain { point: Vec<f64>, epsilon: f64, sum1d: RuleStatus },
}

/// Verdicts for the four statements that should agree: the envelope sum
/// identity and the three ε-sum rules.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// In order: EQUALITY, SUMM1, SUM1B, SUM1D.
    pub statuses: Vec<RuleStatus>,
    pub consistent: bool,
    /// The conjugate identity, equivalent to EQUALITY.
    pub conj_identity: RuleStatus,
    pub probes: Vec<ProbeOutcome>,
    /// Set when the verdicts disagree: the residual trail then points at a
    /// discretization or tolerance artifact.
    pub note: Option<String>,
}

/// Probe grid `[−R, R]^d` with 41, 21 or 11 nodes per axis for `d` = 1, 2, 3.
pub fn default_probe_grid(dim: usize, box_radius: f64) -> Result<Grid> {
    let n = match dim {
        1 => 41,
        2 => 21,
        _ => 11,
    };
    Grid::uniform(dim, -box_radius, box_radius, n)
}

/// Evaluates EQUALITY over `probe_grid` and the three sum rules at every probe; a
/// statement holds iff it holds at every probe where it applies. SUMM1 is
/// skipped at probes with `ε ≤ ε_{f+g}(x)`.
pub fn equivalence_harness(
    f: &PiecewiseMinFunction,
    g: &PiecewiseMinFunction,
    probes: &[Probe],
    probe_grid: &Grid,
    dual_grid: &Grid,
    params: &CheckParams,
) -> Result<EquivalenceReport> {
    let ctx = SumContext::new(f, g)?;
    let equality = check_regularization_equality(&ctx, probe_grid, params)?;
    let conj_identity = check_conjugate_identity(&ctx, dual_grid, params)?;
    let tol = params.abs_tol();

    let mut outcomes = Vec::with_capacity(probes.len());
    let mut summ1 = Vec::new();
    let mut sum1b = Vec::new();
    let mut sum1d = Vec::new();
    for p in probes {
        check_dim(ctx.dim(), p.point.len())?;
        if ctx.values_at(&p.point)?.is_none() {
            let s = check_sum1d(&ctx, &p.point, p.epsilon, params)?;
            sum1d.push(s.clone());
            outcomes.push(ProbeOutcome::OutsideDomain { point: p.point.clone(), epsilon: p.epsilon, sum1d: s });
            continue;
        }
        let rep = check_sum_rules(&ctx, &p.point, p.epsilon, params)?;
        if let Some(s) = &rep.summ1 {
            summ1.push(s.clone());
        }
        sum1b.push(rep.sum1b.clone());
        sum1d.push(rep.sum1d.clone());
        outcomes.push(ProbeOutcome::Evaluated(rep));
    }

    let statuses = vec![
        equality,
        aggregate(RuleKind::Summ1, &summ1, tol),
        aggregate(RuleKind::Sum1b, &sum1b, tol),
        aggregate(RuleKind::Sum1d, &sum1d, tol),
    ];
    let consistent = statuses.iter().all(|s| s.holds == statuses[0].holds);
    let note = (!consistent).then(|| {
        let parts: Vec<String> = statuses
            .iter()
            .map(|s| format!("{:?}: holds={} residual={:e}", s.rule, s.holds, s.residual))
            .collect();
        format!("verdicts disagree ({}); check tolerance and box radius", parts.join(", "))
    });
    Ok(EquivalenceReport { statuses, consistent, conj_identity, probes: outcomes, note })
}

/// Worst probe for a rule; holds vacuously when no probe applies.
fn aggregate(rule: RuleKind, list: &[RuleStatus], tol: f64) -> RuleStatus {
    let worst = list
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .cloned();
    match worst {
        Some(mut s) => {
            s.holds = list.iter().all(|s| s.holds);
            s
        }
        None => RuleStatus {
            rule,
            holds: true,
            residual: 0.0,
            tolerance: tol,
            detail: RuleDetail::Vacuous,
        },
    }
}
