//! Subcommand bodies. Computations run in parallel inside the core scans;
//! every file is written from the calling thread once its contents are
//! complete.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fbpanel_core::diagnostics::{
    check_linear_independence, jacobian_range_test, sign_moment, verify_feedback_robust_moment, MomentFunction,
};
use fbpanel_core::estimators::{conditional_logit, exponential_estimate, weighted_conditional_logit};
use fbpanel_core::identified::{
    build_program, compute_ape_bounds, compute_theta_set, with_ape_objective, ExogeneityMode, SetOptions, SetResult,
};
use fbpanel_core::lp::{export_lp_text, Sense};
use fbpanel_core::{sample_panel, Link, ModelConfig, OutcomeVector, PanelDataset};
use log::info;

use crate::config::{ExportObjective, RunConfig};
use crate::error::CliError;

pub struct Context {
    pub cfg: RunConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Context {
    fn options(&self) -> SetOptions {
        SetOptions { backend: self.cfg.backend.into(), ..SetOptions::default() }
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    fn model(&self, theta: f64) -> Result<(ModelConfig, OutcomeVector), CliError> {
        let model = self.cfg.model_config(theta)?;
        let q = model.outcome_vector()?;
        Ok((model, q))
    }

    fn theta_set(&self, theta: f64, mode: ExogeneityMode) -> Result<(ModelConfig, OutcomeVector, SetResult), CliError> {
        let (model, q) = self.model(theta)?;
        let scan = self.cfg.scan.spec(theta);
        let set = compute_theta_set(&q, model.link, &model.grid, mode, &scan, &self.options()).map_err(|e| {
            eprintln!("fbpanel: scan at theta = {theta} ({mode}) over [{}, {}]: {e}", scan.theta_min, scan.theta_max);
            e
        })?;
        if set.truncated_below || set.truncated_above {
            log::warn!("identified set at theta = {theta} ({mode}) reaches the edge of the scan window");
        }
        Ok((model, q, set))
    }
}

fn trace_name(prefix: &str, theta: f64, mode: ExogeneityMode) -> String {
    format!("{prefix}_theta{theta}_{mode}.csv")
}

fn trace_bytes(set: &SetResult) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    set.write_trace_csv(&mut buf)?;
    Ok(buf)
}

pub fn set(ctx: &Context) -> Result<(), CliError> {
    let mut summary = String::from("theta_true,mode,lo,hi,width\n");
    for theta in ctx.cfg.thetas() {
        for mode in ctx.cfg.mode.modes() {
            let (_, _, set) = ctx.theta_set(theta, mode)?;
            ctx.write(&trace_name("trace", theta, mode), &trace_bytes(&set)?)?;
            let _ = writeln!(summary, "{theta},{mode},{},{},{}", set.lo, set.hi, set.width());
            println!("theta = {theta:<6} {mode:<13} [{:.4}, {:.4}]", set.lo, set.hi);
        }
    }
    ctx.write("set_summary.csv", summary.as_bytes())?;
    Ok(())
}

pub fn ape(ctx: &Context) -> Result<(), CliError> {
    let mut summary = String::from("theta_true,delta_true,mode,delta_lo,delta_hi\n");
    for theta in ctx.cfg.thetas() {
        for mode in ctx.cfg.mode.modes() {
            let (model, q, mut set) = ctx.theta_set(theta, mode)?;
            let bounds = compute_ape_bounds(&q, model.link, &model.grid, mode, &mut set, &ctx.options())?;
            let delta = model.average_partial_effect()?;
            ctx.write(&trace_name("ape_trace", theta, mode), &trace_bytes(&set)?)?;
            let _ = writeln!(summary, "{theta},{delta},{mode},{},{}", bounds.lo, bounds.hi);
            println!("theta = {theta:<6} {mode:<13} delta = {delta:.4} in [{:.4}, {:.4}]", bounds.lo, bounds.hi);
        }
    }
    ctx.write("ape_summary.csv", summary.as_bytes())?;
    Ok(())
}

pub fn diagnose(ctx: &Context) -> Result<(), CliError> {
    let opts = &ctx.cfg.diagnose;
    let mut csv = String::from("theta,diagnostic,x1,value\n");
    let mut report = String::new();
    for theta in ctx.cfg.thetas() {
        let (model, q) = ctx.model(theta)?;
        let periods = model.periods();
        let _ = writeln!(report, "theta = {theta}, link = {}, T = {periods}, K = {}", model.link, model.grid.len());

        let ind = check_linear_independence(model.link, theta, &model.grid, opts.independence_tol)?;
        let _ = writeln!(csv, "{theta},independent,,{}", ind.independent as u8);
        let _ = writeln!(csv, "{theta},smallest_singular_value,,{}", ind.smallest_singular_value);
        let _ = writeln!(
            report,
            "  independence of 1, F(alpha), F(theta + alpha): {} (singular values {:.3e} to {:.3e})",
            if ind.independent { "independent" } else { "dependent" },
            ind.smallest_singular_value,
            ind.largest_singular_value
        );
        if let Some(c) = ind.certificate {
            let _ = writeln!(report, "    certificate A = {:.6}, B = {:.6}, C = {:.6}", c.a, c.b, c.c);
        }

        // Adding zero turns a negative zero into a positive one.
        let (m0, m1) = sign_moment(&q);
        let (m0, m1) = (m0 + 0.0, m1 + 0.0);
        let _ = writeln!(csv, "{theta},sign_moment,0,{m0}");
        let _ = writeln!(csv, "{theta},sign_moment,1,{m1}");
        let _ = writeln!(report, "  sign moments: x1 = 0 -> {m0:.6}, x1 = 1 -> {m1:.6}");

        if periods == 2 {
            let phi = MomentFunction::exponential(theta)?;
            let r = verify_feedback_robust_moment(&phi, theta, model.link, &model.grid, periods)?;
            let _ = writeln!(csv, "{theta},exponential_moment_eq1,,{}", r.max_residual_eq1);
            let _ = writeln!(csv, "{theta},exponential_moment_eq2,,{}", r.max_residual_eq2);
            let _ = writeln!(
                report,
                "  exponential moment residuals: {:.3e} (continuations), {:.3e} (full)",
                r.max_residual_eq1, r.max_residual_eq2
            );
        } else {
            let _ = writeln!(report, "  exponential moment residuals: skipped (defined for T = 2)");
        }

        if model.pi.is_interior() && model.feedback.is_interior() {
            let j = jacobian_range_test(theta, model.link, &model.grid, &model.pi, &model.feedback, opts.fd_step)?;
            for x1 in 0..2 {
                let _ = writeln!(csv, "{theta},jacobian_residual,{x1},{}", j.residual[x1]);
                let _ = writeln!(csv, "{theta},jacobian_rank,{x1},{}", j.rank[x1]);
                let _ = writeln!(
                    report,
                    "  Jacobian, x1 = {x1}: residual {:.3e}, rank {} of {} nuisance directions{}",
                    j.residual[x1],
                    j.rank[x1],
                    j.n_nuisance[x1],
                    if j.singular_projection[x1] { " (rank deficient)" } else { "" }
                );
            }
        } else {
            let _ = writeln!(report, "  Jacobian: skipped (needs interior weights and feedback probabilities)");
        }
    }
    print!("{report}");
    ctx.write("diagnostics.csv", csv.as_bytes())?;
    ctx.write("diagnostics.txt", report.as_bytes())?;
    Ok(())
}

pub fn estimate(ctx: &Context, data: Option<&Path>) -> Result<(), CliError> {
    let path = data
        .or(ctx.cfg.estimate.dataset.as_deref())
        .ok_or_else(|| CliError::Config("estimate needs --data or estimate.dataset".into()))?;
    let file =
        fs::File::open(path).map_err(|e| CliError::Config(format!("cannot open dataset {}: {e}", path.display())))?;
    let dataset = PanelDataset::read_csv(file)?;
    if dataset.periods() != 2 {
        return Err(CliError::Config(format!("estimators use two periods; the dataset has {}", dataset.periods())));
    }
    let est = &ctx.cfg.estimate;
    let mut csv = String::from("estimator,x1,theta_hat\n");
    let mut report = format!("dataset {} with {} units\n", path.display(), dataset.len());
    match ctx.cfg.model.link {
        Link::Exponential => {
            for x1 in [0u8, 1] {
                let theta = exponential_estimate(&dataset, x1, (est.bracket[0], est.bracket[1]), est.tol)?;
                let _ = writeln!(csv, "exponential_moment,{x1},{theta}");
                let _ = writeln!(report, "  exponential moment, x1 = {x1}: theta_hat = {theta:.6}");
            }
        }
        Link::Logit => {
            let weighted = weighted_conditional_logit(&dataset, est.tol)?;
            let plain = conditional_logit(&dataset, est.tol)?;
            let _ = writeln!(csv, "weighted_conditional_logit,,{}", weighted.theta);
            let _ = writeln!(csv, "conditional_logit,,{}", plain.theta);
            let _ = writeln!(
                report,
                "  weighted conditional logit: theta_hat = {:.6} ({} switchers)",
                weighted.theta, weighted.n_switchers
            );
            if let Some(g) = weighted.feedback {
                let _ = writeln!(
                    report,
                    "    feedback frequencies G[y1][x1]: [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
                    g[0][0], g[0][1], g[1][0], g[1][1]
                );
            }
            let _ = writeln!(report, "  conditional logit: theta_hat = {:.6}", plain.theta);
        }
        Link::Probit => {
            return Err(CliError::Config("no point estimator is available for the probit link".into()));
        }
    }
    print!("{report}");
    ctx.write("estimates.csv", csv.as_bytes())?;
    Ok(())
}

pub fn simulate(ctx: &Context, n: Option<usize>) -> Result<(), CliError> {
    let n = n.or(ctx.cfg.simulate.n).ok_or_else(|| CliError::Config("simulate needs --n or simulate.n".into()))?;
    if n == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    for theta in ctx.cfg.thetas() {
        let model = ctx.cfg.model_config(theta)?;
        let data = sample_panel(&model, n, ctx.seed)?;
        let mut buf = Vec::new();
        data.write_csv(&mut buf)?;
        let path = ctx.write(&format!("panel_theta{theta}.csv"), &buf)?;
        println!("{}", path.display());
    }
    Ok(())
}

pub fn export_lp(ctx: &Context, theta_tilde: Option<f64>) -> Result<(), CliError> {
    let block = ctx.cfg.export_lp.as_ref();
    let theta_tilde = theta_tilde
        .or(block.map(|b| b.theta_tilde))
        .ok_or_else(|| CliError::Config("export-lp needs --theta-tilde or export_lp.theta_tilde".into()))?;
    if !theta_tilde.is_finite() {
        return Err(CliError::Config("--theta-tilde must be finite".into()));
    }
    let objective = block.map(|b| b.objective).unwrap_or_default();
    for theta in ctx.cfg.thetas() {
        let (model, q) = ctx.model(theta)?;
        for mode in ctx.cfg.mode.modes() {
            let mut program = build_program(theta_tilde, &q, model.link, &model.grid, mode)?;
            let sense = match objective {
                ExportObjective::None => None,
                ExportObjective::ApeMin => Some(Sense::Minimize),
                ExportObjective::ApeMax => Some(Sense::Maximize),
            };
            if let Some(sense) = sense {
                program = with_ape_objective(program, theta_tilde, model.link, &model.grid, q.marginals(), sense)?;
            }
            let name = format!("psi_theta{theta}_candidate{theta_tilde}_{mode}.lp");
            let path = ctx.write(&name, export_lp_text(&program.lp).as_bytes())?;
            println!("{}", path.display());
        }
    }
    Ok(())
}
