//! Human-readable bound-check table.

use loopid::{BoundCheck, ExperimentConfig, SweepRow};

/// Renders one sweep row's header plus its five inequality lines.
pub fn render_row_summary(row: &SweepRow, checks: &[BoundCheck]) -> String {
    let s = &row.stats;
    let mut out = format!(
        "grid value {:+.4}: {}/{} runs usable ({} diverged), rate {:.6} bits/step\n",
        row.grid_value,
        s.runs_used,
        s.total_runs,
        s.diverged_runs,
        s.rate_bits_per_step
    );
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let slack = match c.slack {
            Some(v) => format!("{v:.3e}"),
            None => "n/a".to_string(),
        };
        let margin = c.slack.map(|v| c.rhs + v - c.lhs);
        let margin_text = match margin {
            Some(m) => format!("{m:+.3e}"),
            None => "n/a".to_string(),
        };
        let note = if c.enforced { "" } else { " (informational)" };
        out.push_str(&format!(
            "  [{status}] {:<52} lhs {:.6e}  rhs {:.6e}  slack {slack}  margin {margin_text}{note}\n",
            c.name, c.lhs, c.rhs
        ));
    }
    out
}

/// Renders the optional cost-budget annotation line.
pub fn render_budget_line(config: &ExperimentConfig, rows: &[(f64, f64)]) -> Option<String> {
    let budget = config.constraint_budget?;
    let mut out = format!("declared cost budget {budget:.6}:\n");
    for (grid_value, mean_cost) in rows {
        let verdict = if *mean_cost <= budget {
            "within"
        } else {
            "exceeds"
        };
        out.push_str(&format!(
            "  grid value {grid_value:+.4}: mean cost {mean_cost:.6} ({verdict} budget)\n"
        ));
    }
    Some(out)
}
