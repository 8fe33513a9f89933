//! Command drivers shared by the binary and the integration tests.

use super::config::{RunConfig, ScenarioKind};
use super::report::{self, Report};
use crate::fronttrack::Side;
use crate::functionals::variation_functional;
use crate::junction::{self, JunctionError};
use crate::scenarios::{fractal_datum, search, shock_rarefaction, straddling_jumps, suites, Claim};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Internal = 1,
    ClaimFailure = 2,
    ConfigError = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

fn write(out_dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(name), content)
}

fn common_header(rep: &mut Report, cfg: &RunConfig) {
    rep.kv("scenario", cfg.scenario.name());
    rep.kv_num("horizon", cfg.horizon);
    rep.kv_num("delta", cfg.delta);
    rep.kv("seed", cfg.seed.to_string());
    rep.kv_num("eps_match", cfg.eps_match.unwrap_or_else(|| junction::default_eps_match(&cfg.model)));
    rep.kv_num(
        "eps_j",
        cfg.eps_j.unwrap_or_else(|| junction::default_eps_j(&cfg.model, cfg.horizon, cfg.delta)),
    );
    rep.kv_num("eps_f", cfg.eps_f.unwrap_or_else(|| (4.0 * cfg.delta).max(1e-6)));
}

fn emit_claims(rep: &mut Report, claims: &[Claim]) -> bool {
    let mut ok = true;
    for c in claims {
        rep.claim(&c.name, c.passed, c.margin);
        ok &= c.passed;
    }
    ok
}

pub fn cmd_run(cfg: &RunConfig) -> ExitCode {
    match run_inner(cfg) {
        Ok(all_claims_pass) => {
            if all_claims_pass {
                ExitCode::Ok
            } else {
                ExitCode::ClaimFailure
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::Internal
        }
    }
}

fn run_inner(cfg: &RunConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let out = &cfg.out_dir;
    let mut rep = Report::new();
    common_header(&mut rep, cfg);
    let model = &cfg.model;

    let ok = match cfg.scenario {
        ScenarioKind::ShockRarefaction => {
            let params = shock_rarefaction::Params {
                left_state: cfg.param("a1", 0.1),
                mid_state: cfg.param("a2", 0.4),
                right_state: cfg.param("a3", 0.3),
                x_first: cfg.param("x1", -0.5),
                x_second: cfg.param("x2", -0.1),
                ctrl_flux: cfg.param("ctrl_flux", 0.21),
                horizon: cfg.horizon,
                delta: cfg.delta,
            };
            let outc = shock_rarefaction::run(model, &params)?;
            rep.kv_num("tau", outc.tau);
            rep.variation("F_entropy_", &outc.f_entropy);
            rep.kv_num("F_entropy", outc.f_entropy.total);
            rep.kv_num("J_entropy", outc.f_entropy.j_value);
            rep.variation("F_constructed_", &outc.f_constructed);
            rep.kv_num("F_constructed", outc.f_constructed.total);
            rep.kv_num("J_constructed", outc.f_constructed.j_value);
            rep.kv_num("mismatch", outc.constructed.control.max_mismatch);
            if let Some(s) = outc.min_node_shock_speed {
                rep.kv_num("min_node_shock_speed", s);
            }
            let ok = emit_claims(&mut rep, &outc.claims);
            write(out, "fronts.csv", &report::fronts_csv(&[&outc.constructed.incoming, &outc.constructed.outgoing]))?;
            write(out, "trace_left.csv", &report::trace_csv(model, &outc.constructed.incoming.trace(0.0, Side::Left)))?;
            write(out, "trace_right.csv", &report::trace_csv(model, &outc.constructed.outgoing.trace(0.0, Side::Right)))?;
            write(out, "control.csv", &report::control_csv(&outc.constructed.control, cfg.horizon))?;
            ok
        }
        ScenarioKind::StraddlingJumps => {
            let params = straddling_jumps::Params {
                left_state: cfg.param("a1", 0.2),
                mid_state: cfg.param("a2", 0.7),
                right_state: cfg.param("a3", 0.6),
                x_first: cfg.param("x1", -1.0),
                x_second: cfg.param("x2", 0.5),
                ctrl_flux: cfg.params.get("ctrl_flux").copied(),
                horizon: cfg.horizon,
                delta: cfg.delta,
            };
            let outc = straddling_jumps::run(model, &params)?;
            rep.kv_num("t1", outc.times.t1);
            rep.kv_num("t2", outc.times.t2);
            rep.kv_num("t3", outc.times.t3);
            rep.kv_num("t4", outc.times.t4);
            rep.kv_num("t6", outc.times.t6);
            rep.kv_num("t3_engine", outc.t3_engine);
            rep.kv_num("t6_engine", outc.t6_engine);
            rep.kv_num("ctrl_flux", outc.ctrl_flux);
            rep.kv_num("family_optimal_flux", outc.family_optimal_flux);
            rep.kv_num("family_optimal_F", outc.family_optimal_variation);
            rep.variation("F_entropy_", &outc.f_entropy);
            rep.kv_num("F_entropy", outc.f_entropy.total);
            rep.kv_num("J_entropy", outc.f_entropy.j_value);
            rep.variation("F_constructed_", &outc.f_constructed);
            rep.kv_num("F_constructed", outc.f_constructed.total);
            rep.kv_num("J_constructed", outc.f_constructed.j_value);
            rep.kv_num("mismatch", outc.constructed.control.max_mismatch);
            let ok = emit_claims(&mut rep, &outc.claims);
            write(out, "fronts.csv", &report::fronts_csv(&[&outc.constructed.incoming, &outc.constructed.outgoing]))?;
            write(out, "trace_left.csv", &report::trace_csv(model, &outc.constructed.incoming.trace(0.0, Side::Left)))?;
            write(out, "trace_right.csv", &report::trace_csv(model, &outc.constructed.outgoing.trace(0.0, Side::Right)))?;
            write(out, "control.csv", &report::control_csv(&outc.constructed.control, cfg.horizon))?;
            ok
        }
        ScenarioKind::FractalDatum => {
            let depth = cfg.param("depth", 6.0) as usize;
            let outc = fractal_datum::run(depth, cfg.delta)?;
            rep.kv("depth", depth.to_string());
            rep.kv_num("tv_trace", outc.tv_trace);
            rep.kv_num("tv_flux_trace", outc.tv_flux_trace);
            rep.kv_num("J", outc.solution.flux_trace(0.0, Side::Right).integral(0.0, outc.solution.horizon));
            rep.kv_num("F", outc.tv_flux_trace);
            let ok = outc.tv_flux_trace >= 0.375 * depth as f64 - 10.0 * cfg.delta;
            rep.claim("per-level variation growth", ok, outc.tv_flux_trace - 0.375 * depth as f64);
            write(out, "fronts.csv", &report::fronts_csv(&[&outc.solution]))?;
            write(out, "trace_right.csv", &report::trace_csv(&fractal_datum::model(), &outc.solution.trace(0.0, Side::Right)))?;
            ok
        }
        ScenarioKind::Custom => {
            let u0 = cfg
                .initial
                .clone()
                .ok_or("custom scenario needs an [initial_data] section")?;
            match (&cfg.k1, &cfg.k2) {
                (Some(k1), Some(k2)) => {
                    let eps = cfg.eps_match.unwrap_or_else(|| junction::default_eps_match(model));
                    match junction::make_control(model, &u0, k1, k2, cfg.horizon, cfg.delta, eps) {
                        Ok(pair) => {
                            let (ti, to) = pair.terminal_node_states();
                            let f = variation_functional(model, &pair.control.gamma, &u0, ti, to, cfg.horizon);
                            rep.variation("F_", &f);
                            rep.kv_num("F", f.total);
                            rep.kv_num("J", f.j_value);
                            rep.kv_num("mismatch", pair.control.max_mismatch);
                            write(out, "fronts.csv", &report::fronts_csv(&[&pair.incoming, &pair.outgoing]))?;
                            write(out, "trace_left.csv", &report::trace_csv(model, &pair.incoming.trace(0.0, Side::Left)))?;
                            write(out, "trace_right.csv", &report::trace_csv(model, &pair.outgoing.trace(0.0, Side::Right)))?;
                            write(out, "control.csv", &report::control_csv(&pair.control, cfg.horizon))?;
                            true
                        }
                        Err(JunctionError::NotAdmissible { max_mismatch, worst_time }) => {
                            rep.kv("admissible", "no");
                            rep.kv_num("mismatch", max_mismatch);
                            rep.kv_num("mismatch_from", worst_time);
                            false
                        }
                        Err(JunctionError::Engine(e)) => return Err(e.into()),
                    }
                }
                _ => {
                    let (ctrl, full) = junction::entropy_control(model, &u0, cfg.horizon, cfg.delta)?;
                    let f = variation_functional(
                        model,
                        &ctrl.gamma,
                        &u0,
                        full.terminal_node_state(Side::Left),
                        full.terminal_node_state(Side::Right),
                        cfg.horizon,
                    );
                    rep.variation("F_", &f);
                    rep.kv_num("F", f.total);
                    rep.kv_num("J", f.j_value);
                    write(out, "fronts.csv", &report::fronts_csv(&[&full]))?;
                    write(out, "trace_left.csv", &report::trace_csv(model, &full.trace(0.0, Side::Left)))?;
                    write(out, "trace_right.csv", &report::trace_csv(model, &full.trace(0.0, Side::Right)))?;
                    write(out, "control.csv", &report::control_csv(&ctrl, cfg.horizon))?;
                    true
                }
            }
        }
    };

    write(&cfg.out_dir, "report.txt", &rep.render())?;
    println!("{}", rep.render());
    Ok(ok)
}

pub fn cmd_suite(name: &str, seed: u64, count: usize) -> ExitCode {
    let outcome = match name {
        "maximality" => suites::maximality(seed, count).map(|r| vec![r]),
        "monotone" => suites::monotone(seed, count.div_euclid(2).max(1)).map(|o| vec![o.minimality, o.trace_monotone]),
        "bvbound" => suites::bv_bound(seed, count).map(|r| vec![r]),
        "conservation" => suites::conservation(seed, count).map(|r| vec![r]),
        other => {
            eprintln!("unknown suite '{other}' (expected maximality, monotone, bvbound, conservation)");
            return ExitCode::ConfigError;
        }
    };
    match outcome {
        Ok(reports) => {
            let mut ok = true;
            println!("suite            seed   checks  failures  worst_margin");
            for r in &reports {
                println!(
                    "{:<16} {:<6} {:<7} {:<9} {}",
                    r.name,
                    r.seed,
                    r.checks,
                    r.failures,
                    report::num(r.worst_margin)
                );
                for n in &r.notes {
                    println!("  note: {n}");
                }
                ok &= r.failures == 0;
            }
            if ok {
                ExitCode::Ok
            } else {
                ExitCode::ClaimFailure
            }
        }
        Err(e) => {
            eprintln!("suite failed: {e}");
            ExitCode::Internal
        }
    }
}

pub fn cmd_search(cfg: &RunConfig) -> ExitCode {
    let Some(spec) = cfg.search.clone() else {
        eprintln!("config has no [search] section");
        return ExitCode::ConfigError;
    };
    if spec.levels == 0 || spec.pieces == 0 {
        eprintln!("empty search grid");
        return ExitCode::ConfigError;
    }
    let u0 = match cfg.scenario {
        ScenarioKind::ShockRarefaction => shock_rarefaction::Params {
            left_state: cfg.param("a1", 0.1),
            mid_state: cfg.param("a2", 0.4),
            right_state: cfg.param("a3", 0.3),
            x_first: cfg.param("x1", -0.5),
            x_second: cfg.param("x2", -0.1),
            ctrl_flux: cfg.param("ctrl_flux", 0.21),
            horizon: cfg.horizon,
            delta: cfg.delta,
        }
        .initial_datum(),
        ScenarioKind::StraddlingJumps => straddling_jumps::Params {
            left_state: cfg.param("a1", 0.2),
            mid_state: cfg.param("a2", 0.7),
            right_state: cfg.param("a3", 0.6),
            x_first: cfg.param("x1", -1.0),
            x_second: cfg.param("x2", 0.5),
            ctrl_flux: cfg.params.get("ctrl_flux").copied(),
            horizon: cfg.horizon,
            delta: cfg.delta,
        }
        .initial_datum(),
        _ => match cfg.initial.clone() {
            Some(u0) => u0,
            None => {
                eprintln!("search needs an [initial_data] section or a datum scenario");
                return ExitCode::ConfigError;
            }
        },
    };

    match search::run(&cfg.model, &u0, cfg.horizon, cfg.delta, &spec) {
        Ok(outc) => {
            let mut rep = Report::new();
            common_header(&mut rep, cfg);
            rep.kv("method", format!("{:?}", spec.method));
            rep.kv("evaluated", outc.evaluated.to_string());
            rep.kv("feasible", outc.feasible.to_string());
            rep.kv_num("F_entropy", outc.reference_variation);
            rep.kv_num("J_entropy", outc.reference_j);
            rep.kv_num("F_best", outc.best_variation);
            rep.kv_num("J_best", outc.best_j);
            rep.kv(
                "best_profile",
                outc.best_profile.iter().map(|q| report::num(*q)).collect::<Vec<_>>().join(" "),
            );
            rep.kv("tangential_shock", if outc.tangential_shock { "yes" } else { "no" });
            let io1 = write(&cfg.out_dir, "search_trace.csv", &report::trajectory_csv(&outc.trajectory));
            let io2 = match &outc.best_pair {
                Some(pair) => write(&cfg.out_dir, "best_control.csv", &report::control_csv(&pair.control, cfg.horizon)),
                None => Ok(()),
            };
            let io3 = write(&cfg.out_dir, "report.txt", &rep.render());
            println!("{}", rep.render());
            if io1.and(io2).and(io3).is_err() {
                return ExitCode::Internal;
            }
            if outc.best_pair.is_some() {
                ExitCode::Ok
            } else {
                ExitCode::ClaimFailure
            }
        }
        Err(e) => {
            eprintln!("search failed: {e}");
            ExitCode::Internal
        }
    }
}
