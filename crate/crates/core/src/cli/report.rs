//! Human-readable rendering. The machine format is the serde form of the
//! same report types, pretty-printed.

use std::fmt::Write as _;

use crate::calculus::{RuleStatus, WitnessTable};
use crate::funcrep::ConvexPolyhedralFunction;

use super::run::{CommandResult, CorpusReport, RunReport, TransformResult};

fn sci(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.3e}")
    }
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn yes(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

fn rule_name(s: &RuleStatus) -> String {
    serde_json::to_value(s.rule).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn status_name<T: serde::Serialize>(s: &T) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn write_cpf(out: &mut String, label: &str, f: &ConvexPolyhedralFunction) {
    let _ = writeln!(out, "{label}: max of {} piece(s)", f.pieces().len());
    for p in f.pieces() {
        let _ = writeln!(out, "  slope {} intercept {}", vec_str(&p.slope), p.intercept);
    }
    if f.domain().halfspaces().is_empty() {
        let _ = writeln!(out, "  domain: whole space");
    } else {
        let _ = writeln!(out, "  domain:");
        for h in f.domain().halfspaces() {
            let _ = writeln!(out, "    {} . x <= {}", vec_str(&h.normal), h.offset);
        }
    }
}

fn write_witnesses(out: &mut String, t: &WitnessTable) {
    let _ = writeln!(
        out,
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "eps_n", "dual_res", "bound", "pair_f", "pair_g", "gap_f", "gap_g"
    );
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            r.n,
            sci(r.eps_n),
            sci(r.dual_residual),
            sci(r.bound),
            sci(r.pairing_f),
            sci(r.pairing_g),
            sci(r.value_gap_f),
            sci(r.value_gap_g)
        );
    }
}

/// Single-instance report. Grid transforms render as the conjugate's CSV.
pub fn human(r: &RunReport) -> String {
    if let Some(CommandResult::Transform(TransformResult::Grid { conjugate, .. })) = &r.result {
        return conjugate.function.to_csv();
    }
    let mut out = String::new();
    let _ = writeln!(out, "instance  {} ({})", r.instance, r.file);
    let _ = writeln!(out, "command   {}", status_name(&r.command));
    let _ = writeln!(out, "status    {}", status_name(&r.status));
    if let Some(p) = &r.params {
        let _ = writeln!(
            out,
            "params    splits={} box_radius={} directions={} tolerance={:e}",
            p.splits, p.box_radius, p.directions, p.tolerance
        );
    }
    if let Some(e) = &r.error {
        let _ = writeln!(out, "error     {}: {}", e.name, e.message);
    }
    if let Some(t) = r.wall_time_ms {
        let _ = writeln!(out, "time      {t:.1} ms");
    }
    match &r.result {
        Some(CommandResult::Transform(TransformResult::Polyhedral {
            conjugate,
            envelope,
            affine_minorant,
            inf_convolution,
        })) => {
            out.push('\n');
            write_cpf(&mut out, "conjugate", conjugate);
            write_cpf(&mut out, "envelope", envelope);
            match affine_minorant {
                Some(a) => {
                    let _ = writeln!(out, "affine minorant: slope {} intercept {}", vec_str(&a.slope), a.intercept);
                }
                None => {
                    let _ = writeln!(out, "affine minorant: none");
                }
            }
            if let Some(ic) = inf_convolution {
                let _ = writeln!(out, "inf-convolution with g: {} branch(es)", ic.branches().len());
                for b in ic.branches() {
                    write_cpf(&mut out, "  branch", b);
                }
            }
        }
        Some(CommandResult::Subdiff(s)) => {
            out.push('\n');
            let _ = writeln!(
                out,
                "{:<20} {:>8} {:>10} {:>10} {:>8} {:>9}",
                "point", "epsilon", "f(x)", "threshold", "nonempty", "vertices"
            );
            for p in &s.probes {
                let nv = p.vrep.as_ref().map(|v| v.vertices.len()).unwrap_or(0);
                let _ = writeln!(
                    out,
                    "{:<20} {:>8} {:>10} {:>10} {:>8} {:>9}",
                    vec_str(&p.point),
                    p.epsilon,
                    p.value.to_string(),
                    p.threshold.to_string(),
                    yes(p.nonempty),
                    nv
                );
                if let Some(w) = &p.witness {
                    let _ = writeln!(
                        out,
                        "  witness z={} z*={} |z-x|_1={} |z*-x*|_inf={}",
                        vec_str(&w.z),
                        vec_str(&w.zstar),
                        sci(w.norm_primal),
                        sci(w.norm_dual)
                    );
                }
                if let Some(e) = &p.witness_error {
                    let _ = writeln!(out, "  witness: {e}");
                }
            }
        }
        Some(CommandResult::Verify(v)) => {
            out.push('\n');
            if let Some(q) = v.qualification {
                let _ = writeln!(out, "qualification  {}", status_name(&q));
            }
            let _ = writeln!(out, "{:<14} {:>5} {:>10} {:>10}", "rule", "holds", "residual", "tolerance");
            for s in v.equivalence.statuses.iter().chain(std::iter::once(&v.equivalence.conj_identity)) {
                let _ = writeln!(
                    out,
                    "{:<14} {:>5} {:>10} {:>10}",
                    rule_name(s),
                    yes(s.holds),
                    sci(s.residual),
                    sci(s.tolerance)
                );
            }
            let _ = writeln!(out, "consistent     {}", yes(v.equivalence.consistent));
            let _ = writeln!(out, "probes         {}", v.equivalence.probes.len());
            if let Some(n) = &v.equivalence.note {
                let _ = writeln!(out, "note           {n}");
            }
        }
        Some(CommandResult::Witnesses(w)) => {
            out.push('\n');
            let _ = writeln!(out, "x = {}  x* = {}", vec_str(&w.point), vec_str(&w.xstar));
            write_witnesses(&mut out, &w.table);
            let _ = writeln!(out, "all rows within bound: {}", yes(w.all_within_bound));
            let _ = writeln!(out, "largest final column: {}", sci(w.final_max_column));
        }
        Some(CommandResult::Relax(rr)) => {
            out.push('\n');
            let _ = writeln!(out, "v_original      {}", rr.v_original);
            let _ = writeln!(out, "v_relaxed       {}", rr.v_relaxed);
            let _ = writeln!(out, "gap             {}", sci(rr.gap));
            let _ = writeln!(out, "value identity  {}", yes(rr.value_identity));
            let _ = writeln!(
                out,
                "decomposition   {} (residual {})",
                yes(rr.decomposition_holds),
                sci(rr.decomposition_residual)
            );
            if let Some(n) = &rr.decomposition_note {
                let _ = writeln!(out, "note            {n}");
            }
        }
        Some(CommandResult::Transform(TransformResult::Grid { .. })) | None => {}
    }
    if !r.checks.is_empty() {
        let _ = writeln!(out, "\nchecks");
        for c in &r.checks {
            let mark = if c.expected == c.actual { "ok" } else { "MISMATCH" };
            let _ = writeln!(out, "  {:<22} expected={:<5} actual={:<5} {mark}", c.name, c.expected, c.actual);
        }
    }
    out
}

fn brief(r: &RunReport) -> String {
    match &r.result {
        Some(CommandResult::Verify(v)) => {
            let verdicts: Vec<String> =
                v.equivalence.statuses.iter().map(|s| format!("{}={}", rule_name(s), yes(s.holds))).collect();
            let worst = v.equivalence.statuses.iter().map(|s| s.residual).fold(0.0, f64::max);
            format!("{} max_residual={}", verdicts.join(" "), sci(worst))
        }
        Some(CommandResult::Relax(rr)) => format!(
            "v={} v_relaxed={} value_identity={} decomposition={}",
            rr.v_original,
            rr.v_relaxed,
            yes(rr.value_identity),
            yes(rr.decomposition_holds)
        ),
        Some(CommandResult::Witnesses(w)) => format!(
            "rows={} within_bound={} final={}",
            w.table.rows.len(),
            yes(w.all_within_bound),
            sci(w.final_max_column)
        ),
        Some(CommandResult::Subdiff(s)) => {
            let th: Vec<String> = s.probes.iter().map(|p| p.threshold.to_string()).collect();
            format!("thresholds=[{}]", th.join(", "))
        }
        Some(CommandResult::Transform(TransformResult::Polyhedral { conjugate, envelope, .. })) => format!(
            "conjugate_pieces={} envelope_pieces={}",
            conjugate.pieces().len(),
            envelope.pieces().len()
        ),
        Some(CommandResult::Transform(TransformResult::Grid { conjugate, .. })) => {
            let finite = conjugate.function.values().iter().filter(|v| v.is_finite()).count();
            format!("conjugate_nodes={finite} warnings={}", conjugate.warnings.len())
        }
        None => r.error.as_ref().map(|e| format!("{}: {}", e.name, e.message)).unwrap_or_default(),
    }
}

/// Corpus summary table: one row per instance, then the totals.
pub fn human_corpus(c: &CorpusReport) -> String {
    let mut out = String::new();
    let width = c.instances.iter().map(|r| r.instance.len()).max().unwrap_or(8).max(8);
    let _ = writeln!(out, "{:<width$}  {:<14}  detail", "instance", "status");
    for r in &c.instances {
        let _ = writeln!(out, "{:<width$}  {:<14}  {}", r.instance, status_name(&r.status), brief(r));
    }
    let s = &c.summary;
    let _ = writeln!(
        out,
        "\n{} instance(s): {} passed, {} mismatched, {} not applicable, {} schema errors, {} errors, {} inconsistent",
        s.total, s.passed, s.mismatched, s.not_applicable, s.schema_errors, s.errors, s.inconsistent
    );
    out
}
