//! Deterministic artifact formatting: 12-significant-digit decimals, CSV
//! writers and the plain-text run report.

use crate::flux::FluxModel;
use crate::fronttrack::{FrontKind, FtSolution};
use crate::functionals::VariationReport;
use crate::junction::Control;
use crate::step::StepFunction;
use std::fmt::Write as _;

/// Plain decimal rendering with a fixed number of significant digits.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return format!("{:.*}", sig - 1, 0.0);
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Default rendering used in every artifact.
pub fn num(x: f64) -> String {
    fmt_sig(x, 12)
}

/// Front segments: `front_id,kind,t_start,x_start,t_end,x_end,u_left,u_right,speed`.
pub fn fronts_csv(solutions: &[&FtSolution]) -> String {
    let mut out = String::from("front_id,kind,t_start,x_start,t_end,x_end,u_left,u_right,speed\n");
    let mut offset = 0usize;
    for sol in solutions {
        for f in &sol.fronts {
            let (te, xe) = f.end.unwrap_or((sol.horizon, f.position(sol.horizon)));
            let kind = match f.kind {
                FrontKind::Shock => "shock",
                FrontKind::FanFront => "fan",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                f.id + offset,
                kind,
                num(f.t_birth),
                num(f.x_birth),
                num(te),
                num(xe),
                num(f.left),
                num(f.right),
                num(f.speed)
            );
        }
        offset += sol.fronts.len();
    }
    out
}

/// Trace rows: `t_break,value,flux_value`, one row per piece.
pub fn trace_csv(model: &FluxModel, trace: &StepFunction) -> String {
    let mut out = String::from("t_break,value,flux_value\n");
    let mut start = 0.0;
    for (i, &v) in trace.values().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", num(start), num(v), num(model.f(v)));
        if i < trace.breaks().len() {
            start = trace.breaks()[i];
        }
    }
    out
}

/// Control rows on the common refinement: `t_break,gamma,k1,k2`.
pub fn control_csv(control: &Control, horizon: f64) -> String {
    let mut out = String::from("t_break,gamma,k1,k2\n");
    let mut cuts: Vec<f64> = vec![0.0];
    for b in control
        .gamma
        .breaks()
        .iter()
        .chain(control.k1.breaks())
        .chain(control.k2.breaks())
    {
        if *b > 0.0 && *b < horizon {
            cuts.push(*b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    for t in cuts {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(t),
            num(control.gamma.value_at(t)),
            num(control.k1.value_at(t)),
            num(control.k2.value_at(t))
        );
    }
    out
}

/// Search trajectory rows: `iteration,f_value,j_value`.
pub fn trajectory_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("iteration,f_value,j_value\n");
    for (i, f, j) in rows {
        let _ = writeln!(out, "{},{},{}", i, num(*f), num(*j));
    }
    out
}

/// Key/value report builder.
#[derive(Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn kv(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.lines.push(format!("{key}={}", value.as_ref()));
        self
    }

    pub fn kv_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, num(value))
    }

    pub fn variation(&mut self, prefix: &str, rep: &VariationReport) -> &mut Self {
        self.kv_num(&format!("{prefix}J"), rep.j_value);
        self.kv_num(&format!("{prefix}F"), rep.total);
        self.kv_num(&format!("{prefix}tv_interior"), rep.tv_interior);
        self.kv_num(&format!("{prefix}term_initial_left"), rep.boundary_terms[0]);
        self.kv_num(&format!("{prefix}term_terminal_left"), rep.boundary_terms[1]);
        self.kv_num(&format!("{prefix}term_initial_right"), rep.boundary_terms[2]);
        self.kv_num(&format!("{prefix}term_terminal_right"), rep.boundary_terms[3]);
        self
    }

    pub fn claim(&mut self, name: &str, passed: bool, margin: f64) -> &mut Self {
        self.kv(
            &format!("claim.{}", name.replace([' ', ','], "_")),
            format!("{} margin={}", if passed { "pass" } else { "FAIL" }, num(margin)),
        )
    }

    pub fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}
