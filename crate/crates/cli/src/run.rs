//! Subcommand pipelines.

use std::fs;
use std::path::{Path, PathBuf};

use eks_core::diagnostics::{
    check_lambda_table, fit_decay, verify_estimates, verify_pair, verify_scf, DecayKind, EstimateReport,
};
use eks_core::hypothesis::{check_gga, check_lda};
use eks_core::pair::{solve_pair, PairState};
use eks_core::radial::{GridSpec, RadialGrid};
use eks_core::scf::{run_scf, scan_lambda, solve_at_infinity, LambdaPoint, LambdaRow, ScfResult};
use eks_core::xc::Functional;
use serde_json::Value;

use crate::config::{RunConfig, Subcommand};
use crate::output::{
    compact, dump_state, pass_word, sig10, write_document, Document, NamedEstimate, PairOutput, ResultBody, ScanOutput,
    VerifyOutput, Versions, SCHEMA_VERSION,
};

/// Exit status of a run that got as far as numerics.
pub enum Status {
    Ok,
    NotConverged,
}

pub type RunResult = Result<Status, String>;

pub fn dispatch(config: &RunConfig, input: Option<&Path>) -> RunResult {
    let grid = config.grid.build().map_err(|e| e.to_string())?;
    let mut warnings = Vec::new();
    let mut status = Status::Ok;
    let mut dumps = Vec::new();
    let result = match config.subcommand {
        Subcommand::CheckXc => ResultBody::CheckXc(Box::new(check_xc(config)?)),
        Subcommand::SolveAtom | Subcommand::SolveInfinity => {
            let atom = config.subcommand == Subcommand::SolveAtom;
            let r = if atom { run_scf(&grid, &config.scf) } else { solve_at_infinity(&grid, &config.scf) }
                .map_err(|e| e.to_string())?;
            if !r.converged {
                status = Status::NotConverged;
                warnings.push(format!("not converged after {} iterations", r.iterations));
            }
            if atom && r.flags.regime.anion_warning {
                warnings.push(format!("Z = {} < 2 lambda = {}: anionic regime", config.z, 2.0 * config.lambda));
            }
            if r.flags.no_binding_without_xc {
                warnings.push("no exchange-correlation: nothing binds the density at infinity".into());
            }
            if config.dump_orbitals {
                dumps = dump_state(config, &grid, &r.state).map_err(|e| e.to_string())?;
            }
            print_scf(&r);
            if atom {
                ResultBody::SolveAtom(Box::new(r))
            } else {
                ResultBody::SolveInfinity(Box::new(r))
            }
        }
        Subcommand::ScanLambda => {
            let out = scan(config, &grid, &mut warnings)?;
            if out.rows.iter().any(|r| !(r.converged && r.converged_infinity)) {
                status = Status::NotConverged;
            }
            ResultBody::ScanLambda(out)
        }
        Subcommand::SolveTwoElectron => {
            let state = solve_pair(&grid, &config.pair).map_err(|e| e.to_string())?;
            if !state.converged {
                status = Status::NotConverged;
                warnings.push(format!("not converged after {} iterations", state.iterations));
            }
            let decay = match fit_decay(&grid, &orbital(&grid, &state), DecayKind::Orbital) {
                Ok(d) => Some(d),
                Err(e) => {
                    warnings.push(format!("decay fit: {e}"));
                    None
                }
            };
            if config.dump_orbitals {
                dumps = dump_state(config, &grid, &state.as_state()).map_err(|e| e.to_string())?;
            }
            print_pair(&state, decay.as_ref().map(|d| d.gamma));
            ResultBody::SolveTwoElectron(Box::new(PairOutput { state, decay }))
        }
        Subcommand::Verify => {
            let path = input.ok_or("verify needs a result file")?;
            ResultBody::Verify(verify(config, path, &mut warnings)?)
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        versions: Versions::current(),
        config: config.clone(),
        warnings,
        result,
    };
    write_document(&config.out, &doc).map_err(|e| format!("cannot write {}: {e}", config.out.display()))?;
    println!("wrote {}", config.out.display());
    for d in dumps {
        println!("wrote {}", d.display());
    }
    Ok(status)
}

fn orbital(grid: &RadialGrid, state: &PairState) -> Vec<f64> {
    state.u.iter().zip(grid.r()).map(|(u, r)| u / r).collect()
}

fn check_xc(config: &RunConfig) -> Result<eks_core::hypothesis::ConditionReport, String> {
    let f = Functional::from_id(&config.functional).map_err(|e| e.to_string())?;
    let report = match f {
        Functional::Lda(l) => check_lda(&l, &config.sample),
        Functional::Gga(g) => check_gga(&g, &config.sample),
    }
    .map_err(|e| e.to_string())?;
    println!("{:<28} verdict", "condition");
    for c in &report.conditions {
        let v = serde_json::to_value(&c.verdict).map_err(|e| e.to_string())?;
        let word = v.get("verdict").and_then(Value::as_str).unwrap_or("?").to_string();
        println!("{:<28} {word}", format!("{:?}", c.id));
    }
    if let Some(fit) = &report.fitted_alpha {
        println!("fitted alpha          {}", sig10(fit.exponent));
    }
    println!("all conditions: {}", pass_word(report.all_pass()));
    Ok(report)
}

fn print_scf(r: &ScfResult) {
    let e = &r.energies;
    println!("converged       {}", r.converged);
    println!("iterations      {}", r.iterations);
    println!("residual        {:.3e}", r.final_residual());
    println!("E_total         {}", sig10(e.total));
    println!("  kinetic       {}", sig10(e.kinetic));
    println!("  nuclear       {}", sig10(e.nuclear));
    println!("  hartree       {}", sig10(e.hartree));
    println!("  xc            {}", sig10(e.exc));
    println!("fermi level     {}", sig10(r.state.fermi_level));
    for s in r.state.occupied() {
        println!("  n={} l={} eps={} f={}", s.n, s.l, sig10(s.eigenvalue), sig10(s.occupation));
    }
}

fn print_pair(s: &PairState, gamma: Option<f64>) {
    let e = &s.energies;
    println!("converged       {}", s.converged);
    println!("iterations      {}", s.iterations);
    println!("euler residual  {:.3e}", s.residual);
    println!("E_total         {}", sig10(e.total));
    println!("  kinetic       {}", sig10(e.kinetic));
    println!("  nuclear       {}", sig10(e.nuclear));
    println!("  hartree       {}", sig10(e.hartree));
    println!("  xc            {}", sig10(e.exc));
    println!("epsilon         {}", sig10(s.epsilon));
    if let Some(g) = gamma {
        println!("decay rate      {}", sig10(g));
    }
}

fn scan(config: &RunConfig, grid: &RadialGrid, warnings: &mut Vec<String>) -> Result<ScanOutput, String> {
    let points = scan_lambda(grid, &config.scf, &config.lambdas).map_err(|e| e.to_string())?;
    let points: Vec<LambdaPoint> = points
        .into_iter()
        .map(|mut p| {
            p.atom.state = compact(&p.atom.state);
            p.infinity.state = compact(&p.infinity.state);
            p
        })
        .collect();
    let rows: Vec<LambdaRow> = points.iter().map(LambdaPoint::row).collect();
    let table = table_report(&rows, warnings);
    println!("{:>8} {:>18} {:>18} {:>6}", "lambda", "I_lambda", "I_inf", "conv");
    for r in &rows {
        println!(
            "{:>8} {:>18} {:>18} {:>6}",
            r.lambda,
            sig10(r.i_lambda),
            sig10(r.i_infinity),
            r.converged && r.converged_infinity
        );
    }
    if let Some(t) = &table {
        print_table(t);
    }
    Ok(ScanOutput { rows, points, table })
}

fn table_report(rows: &[LambdaRow], warnings: &mut Vec<String>) -> Option<eks_core::diagnostics::LambdaTableReport> {
    match check_lambda_table(rows) {
        Ok(t) => {
            warnings.extend(t.warnings.iter().cloned());
            Some(t)
        }
        Err(e) => {
            warnings.push(format!("lambda table not checked: {e}"));
            None
        }
    }
}

fn print_table(t: &eks_core::diagnostics::LambdaTableReport) {
    println!("decreasing I          {}", pass_word(t.decreasing));
    println!("decreasing I_inf      {}", pass_word(t.decreasing_infinity));
    println!("I < I_inf < 0         {}", pass_word(t.binding));
    println!("subadditivity         {}", pass_word(t.subadditive));
    if let Some(p) = &t.vanishing_trend {
        println!("small-lambda power    {} ({})", pass_word(p.pass), sig10(p.exponent));
    }
    for v in t.monotonicity_violations.iter().chain(&t.binding_violations).chain(&t.subadditivity_violations) {
        println!("  violation at ({}, {}): {}", v.mu, v.lambda, v.detail);
    }
}

fn print_estimates(label: &str, r: &EstimateReport) {
    for c in &r.inequalities {
        println!("{label:<22} {:<22} margin {:>12.4e}  {}", c.name, c.margin, pass_word(c.pass));
    }
    if let Some(e) = &r.rank_one_equality {
        println!(
            "{label:<22} {:<22} rel    {:>12.4e}  {}",
            "rank_one_equality",
            e.relative_difference,
            pass_word(e.pass)
        );
    }
}

fn field<T: serde::de::DeserializeOwned>(v: &Value, ptr: &str) -> Result<T, String> {
    let x = v.pointer(ptr).ok_or_else(|| format!("result file has no `{ptr}`"))?;
    serde_json::from_value(x.clone()).map_err(|e| format!("result file `{ptr}`: {e}"))
}

fn verify(config: &RunConfig, path: &Path, warnings: &mut Vec<String>) -> Result<VerifyOutput, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let schema: u32 = field(&doc, "/schema_version")?;
    if schema != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version {schema}"));
    }
    let kind: String = field(&doc, "/result/kind")?;
    let source_grid: GridSpec = field(&doc, "/config/grid")?;
    let grid_mismatch = source_grid != config.grid;
    if grid_mismatch {
        warnings.push(format!(
            "grid provenance mismatch: result was computed on {source_grid:?}, requested {:?}; \
             checks use the result's grid",
            config.grid
        ));
    }
    let grid = source_grid.build().map_err(|e| e.to_string())?;
    let est = |e: eks_core::Result<EstimateReport>| e.map_err(|e| e.to_string());

    let mut out = VerifyOutput {
        source: PathBuf::from(path),
        source_kind: kind.clone(),
        grid_mismatch,
        estimates: Vec::new(),
        lambda_table: None,
        decay: None,
        conditions_pass: None,
        all_pass: true,
    };
    match kind.as_str() {
        "solve-atom" | "solve-infinity" => {
            let r: ScfResult = field(&doc, "/result/data")?;
            out.estimates.push(NamedEstimate { label: kind.clone(), report: est(verify_scf(&grid, &r))? });
        }
        "scan-lambda" => {
            let s: ScanOutput = field(&doc, "/result/data")?;
            for p in &s.points {
                let (atom, inf) = (&p.atom, &p.infinity);
                out.estimates.push(NamedEstimate {
                    label: format!("atom lambda={}", p.lambda),
                    report: est(verify_scf(&grid, atom))?,
                });
                // The problem at infinity has no nucleus: the nuclear bounds hold with Z = 0.
                out.estimates.push(NamedEstimate {
                    label: format!("inf lambda={}", p.lambda),
                    report: est(verify_estimates(&grid, &inf.state, &inf.config.functional, 0.0))?,
                });
            }
            out.lambda_table = table_report(&s.rows, warnings);
        }
        "solve-two-electron" => {
            let p: PairOutput = field(&doc, "/result/data")?;
            out.estimates.push(NamedEstimate { label: kind.clone(), report: est(verify_pair(&grid, &p.state))? });
            out.decay = fit_decay(&grid, &orbital(&grid, &p.state), DecayKind::Orbital).ok();
        }
        "check-xc" => {
            let conds = doc.pointer("/result/data/conditions").and_then(Value::as_array).ok_or("no conditions")?;
            out.conditions_pass =
                Some(conds.iter().all(|c| c.pointer("/verdict/verdict").and_then(Value::as_str) == Some("pass")));
        }
        other => return Err(format!("cannot verify a `{other}` document")),
    }
    for e in &out.estimates {
        print_estimates(&e.label, &e.report);
    }
    if let Some(t) = &out.lambda_table {
        print_table(t);
    }
    if let Some(d) = &out.decay {
        println!("decay rate {} (R^2 {:.6})", sig10(d.gamma), d.regression_r2);
    }
    out.all_pass = out.estimates.iter().all(|e| e.report.all_pass())
        && out.lambda_table.as_ref().is_none_or(|t| t.all_pass())
        && out.decay.as_ref().is_none_or(|d| d.gamma > 0.0)
        && out.conditions_pass.unwrap_or(true);
    println!("verification: {}", pass_word(out.all_pass));
    Ok(out)
}
