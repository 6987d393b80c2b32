//! Subcommand drivers.

use crate::config::{RunConfig, Suite};
use crate::error::CliError;
use higgslab_core::bundle::random_connection;
use higgslab_core::flow::{cross_check_residuals, etd_step, read_checkpoint, run_flow_observed, run_metric_flow, write_checkpoint};
use higgslab_core::functionals::{chern_numbers, energy_report, he_residual};
use higgslab_core::spectral::{calibrate_constant, cutoff_norms, eigen_continuity_check, least_eigenvalue, weitzenbock_check, ContinuityReport};
use higgslab_core::{Connection, HiggsState, MetricFlowConfig, MetricState, TorusGeometry};
use serde::Serialize;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.ymhf";
pub const EIGEN_FILE: &str = "eigen.json";
pub const SWEEP_FILE: &str = "sweep.jsonl";
pub const VERIFY_FILE: &str = "verify.json";

/// Flags shared by every subcommand.
pub struct Context {
    pub cfg: RunConfig,
    pub checkpoint: Option<PathBuf>,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    fn say(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            println!("{msg}");
        }
    }

    fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Config(format!("output directory {}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }

    /// Geometry and state from `--checkpoint` if given, else from the bundle block.
    fn load_state(&self) -> Result<(TorusGeometry, HiggsState), CliError> {
        match &self.checkpoint {
            Some(path) => load_checkpoint(path),
            None => {
                let geom = self.cfg.torus()?;
                let (a, theta) = self.cfg.initial_data(&geom)?;
                Ok((geom, HiggsState::new(a, theta)))
            }
        }
    }
}

fn load_checkpoint(path: &Path) -> Result<(TorusGeometry, HiggsState), CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("checkpoint {}: {e}", path.display())))?;
    let ck = read_checkpoint(std::io::BufReader::new(file)).map_err(|e| CliError::Config(format!("checkpoint {}: {e}", path.display())))?;
    let geom = ck.geometry()?;
    let state = ck.into_state(&geom)?;
    Ok((geom, state))
}

/// Writes through a temporary file so a crash never leaves a torn checkpoint.
fn save_checkpoint(path: &Path, geom: &TorusGeometry, state: &HiggsState) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_checkpoint(&mut w, geom, state)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn flow(ctx: &Context) -> Result<(), CliError> {
    let (geom, state) = ctx.load_state()?;
    integrate(ctx, &geom, state, false)
}

pub fn resume(ctx: &Context) -> Result<(), CliError> {
    let path = ctx.checkpoint.as_ref().ok_or_else(|| CliError::Config("resume requires --checkpoint".into()))?;
    let (geom, state) = load_checkpoint(path)?;
    integrate(ctx, &geom, state, true)
}

fn integrate(ctx: &Context, geom: &TorusGeometry, state: HiggsState, append: bool) -> Result<(), CliError> {
    let diag_path = ctx.out_path(DIAGNOSTICS_FILE)?;
    let ck_path = ctx.out_path(CHECKPOINT_FILE)?;
    let file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(&diag_path)?;
    let mut diag = BufWriter::new(file);
    let out = &ctx.cfg.output;
    let mut accepted = 0usize;
    let mut pending: Option<String> = None;
    let result = run_flow_observed(geom, state, &ctx.cfg.flow, |rec, st| {
        let line = serde_json::to_string(rec)?;
        if !rec.accepted {
            writeln!(diag, "{line}")?;
            return Ok(());
        }
        if accepted % out.emit_every == 0 {
            writeln!(diag, "{line}")?;
            pending = None;
        } else {
            pending = Some(line);
        }
        if out.checkpoint_every > 0 && accepted > 0 && accepted % out.checkpoint_every == 0 {
            diag.flush()?;
            save_checkpoint(&ck_path, geom, st).map_err(|e| higgslab_core::Error::Checkpoint(e.to_string()))?;
        }
        accepted += 1;
        Ok(())
    });
    if let Some(line) = pending.take() {
        writeln!(diag, "{line}")?;
    }
    diag.flush()?;
    let run = result?;
    save_checkpoint(&ck_path, geom, &run.state)?;
    let last = run.records.last().expect("initial record");
    ctx.say(format!(
        "flow finished at t = {} after {} accepted steps: ymh {:.6e}, sup|Theta| {:.3e}, dbar drift {:.2e}, wedge drift {:.2e}",
        last.t,
        accepted.saturating_sub(1),
        last.ymh,
        last.theta_sup_residual,
        last.dbar_drift,
        last.wedge_drift
    ));
    ctx.say(format!("diagnostics: {}; checkpoint: {}", diag_path.display(), ck_path.display()));
    Ok(())
}

#[derive(Serialize)]
struct EigenSummary<'a> {
    lambda_hat: f64,
    wedge_feasibility: f64,
    penalty_trace: &'a [(f64, f64)],
    iterations: usize,
    converged: bool,
}

pub fn eigen(ctx: &Context) -> Result<(), CliError> {
    let (geom, state) = ctx.load_state()?;
    let opts = &ctx.cfg.eigen.options;
    let res = least_eigenvalue(&geom, &state.a, opts);
    let path = ctx.out_path(EIGEN_FILE)?;
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer(&mut w, &res)?;
    w.flush()?;
    let summary = EigenSummary {
        lambda_hat: res.lambda_hat,
        wedge_feasibility: res.wedge_feasibility,
        penalty_trace: &res.penalty_trace,
        iterations: res.iterations,
        converged: res.converged,
    };
    ctx.say(serde_json::to_string(&summary)?);
    if let Some(sweep) = &ctx.cfg.eigen.sweep {
        continuity_sweep(ctx, &geom, &state.a, sweep)?;
    }
    if !res.converged {
        return Err(CliError::Numerical(format!("eigen iteration did not converge in {} iterations", res.iterations)));
    }
    Ok(())
}

fn continuity_sweep(ctx: &Context, geom: &TorusGeometry, a0: &Connection, sweep: &crate::config::SweepSpec) -> Result<(), CliError> {
    let opts = &ctx.cfg.eigen.options;
    let rank = a0.rank();
    let largest = sweep.amplitudes.iter().cloned().fold(0.0, f64::max);
    let mut samples = Vec::new();
    for &seed in &sweep.calibration_seeds {
        let r = eigen_continuity_check(geom, a0, &random_connection(geom, rank, seed, largest, sweep.roughness), 0.0, opts)?;
        samples.push((r.lambda0, r.lambda, r.a_norm));
    }
    let c = calibrate_constant(&samples, sweep.safety);
    let path = ctx.out_path(SWEEP_FILE)?;
    let mut w = BufWriter::new(File::create(&path)?);
    ctx.say(format!("calibrated constant c = {c:.6e}"));
    ctx.say(format!("{:>12} {:>8} {:>14} {:>14} {:>6} {:>6}", "amplitude", "seed", "|a|_Lp", "dlambda", "lower", "upper"));
    let mut violations = Vec::new();
    for &amp in &sweep.amplitudes {
        for &seed in &sweep.seeds {
            let r: ContinuityReport = eigen_continuity_check(geom, a0, &random_connection(geom, rank, seed, amp, sweep.roughness), c, opts)?;
            writeln!(w, "{}", serde_json::to_string(&r)?)?;
            ctx.say(format!("{amp:>12.4e} {seed:>8} {:>14.6e} {:>14.6e} {:>6} {:>6}", r.a_norm, r.lambda - r.lambda0, r.lower_holds, r.upper_holds));
            if !(r.lower_holds && r.upper_holds) {
                violations.push(format!("amplitude {amp}, seed {seed}: lambda {} outside [{}, {}]", r.lambda, r.lower, r.upper));
            }
        }
    }
    w.flush()?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(violations.join("; ")))
    }
}

#[derive(Serialize)]
struct CheckLine {
    check: &'static str,
    pass: bool,
    value: f64,
    threshold: f64,
    note: String,
}

pub fn verify(ctx: &Context) -> Result<(), CliError> {
    let (geom, state) = ctx.load_state()?;
    let v = &ctx.cfg.verify;
    let (a, theta) = (&state.a, &state.theta);
    let mut lines = Vec::new();
    for suite in &v.suites {
        match suite {
            Suite::Weitzenbock => {
                let w = weitzenbock_check(&geom, a, theta, v.tolerance);
                let threshold = v.tolerance * w.rhs_term.abs().max(1.0);
                let note = format!(
                    "grad {:.6e}, ricci {:.6e}, bracket {:.6e}, rhs {:.6e}{}",
                    w.grad_term,
                    w.ricci_term,
                    w.bracket_term,
                    w.rhs_term,
                    w.warning.map(|m| format!("; warning: {m}")).unwrap_or_default()
                );
                lines.push(CheckLine { check: "weitzenbock", pass: w.residual <= threshold, value: w.residual, threshold, note });
            }
            Suite::Energy => {
                let r = energy_report(&geom, a, theta);
                let note = format!("ymh {:.6e}, residual term {:.6e}, topological term {:.6e}", r.ymh, r.residual_term, r.topological_term);
                lines.push(CheckLine { check: "energy_identity", pass: r.identity_gap.abs() <= v.tolerance, value: r.identity_gap.abs(), threshold: v.tolerance, note });
            }
            Suite::Chern => {
                let c = chern_numbers(&geom, a);
                let value = c.c1_integral.abs().max(c.c2_combination_integral.abs());
                let note = format!("c1 {:.3e}, 2c2-c1^2 {:.3e}", c.c1_integral, c.c2_combination_integral);
                lines.push(CheckLine { check: "chern_weil", pass: value <= v.tolerance, value, threshold: v.tolerance, note });
            }
            Suite::Cutoff => {
                let norms = v.cutoff_ratios.iter().map(|&n| cutoff_norms(n, v.cutoff_radius)).collect::<Result<Vec<_>, _>>()?;
                let scaled: Vec<f64> = norms.iter().map(|c| c.scaled_sum).collect();
                let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
                let monotone = norms.windows(2).all(|w| w[1].sum < w[0].sum);
                let table: Vec<String> = norms.iter().map(|c| format!("N={}: |grad|_L4 {:.4}, |hess|_L2 {:.4}, sum {:.4}, scaled {:.4}", c.n_ratio, c.grad_l4, c.hess_l2, c.sum, c.scaled_sum)).collect();
                let note = format!("{}; raw sums decreasing: {monotone}", table.join("; "));
                lines.push(CheckLine { check: "cutoff", pass: monotone && spread <= 2.0, value: spread, threshold: 2.0, note });
            }
            Suite::CrossCheck => {
                let steps = (v.cross_check_t / v.cross_check_dt).round() as usize;
                let dt = if steps > 0 { v.cross_check_t / steps as f64 } else { v.cross_check_dt };
                let mut s = HiggsState::new(a.clone(), theta.clone());
                for _ in 0..steps {
                    s = etd_step(&geom, &s, dt);
                }
                s.t = v.cross_check_t;
                let mcfg = MetricFlowConfig { dt, t_max: v.cross_check_t, ..Default::default() };
                let ms = run_metric_flow(&geom, MetricState::new(&geom, a.clone(), theta.clone()), &mcfg)?;
                let gap = cross_check_residuals(&geom, &s, &ms)?;
                let note = format!("t {}, connection |Theta|_L2 {:.6e}, metric |Theta|_L2 {:.6e}, sup gap {:.3e}", gap.t, gap.connection_l2, gap.metric_l2, gap.sup_gap);
                lines.push(CheckLine { check: "cross_check", pass: gap.l2_gap <= v.cross_check_tolerance, value: gap.l2_gap, threshold: v.cross_check_tolerance, note });
            }
        }
    }
    let sup = he_residual(&geom, a, theta).sup_norm;
    for l in &lines {
        ctx.say(format!("{:<16} {}  {:.3e} (threshold {:.1e})  {}", l.check, if l.pass { "PASS" } else { "FAIL" }, l.value, l.threshold, l.note));
    }
    ctx.say(format!("sup|Theta| of the verified data: {sup:.3e}"));
    let path = ctx.out_path(VERIFY_FILE)?;
    fs::write(&path, serde_json::to_string_pretty(&lines)?)?;
    let failed: Vec<String> = lines.iter().filter(|l| !l.pass).map(|l| format!("{} = {:.3e} > {:.1e}", l.check, l.value, l.threshold)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}
