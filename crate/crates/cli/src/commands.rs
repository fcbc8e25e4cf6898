use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geim_core::analysis::analyze as analyze_run;
use geim_core::artifact::{
    read_measurements, read_report_json, write_analysis_csv, write_exact_json, write_field_csv, write_greedy_csv,
    write_report_json, write_series_csv,
};
use geim_core::rates::{audit_run, fit_run};
use geim_core::{run_geim, ArtifactFile, RunConfig};

use crate::Common;

/// Largest interpolation-consistency residual accepted by `assimilate`.
const CONSISTENCY_TOL: f64 = 1e-10;

struct Setup {
    cfg: RunConfig,
    out: PathBuf,
}

fn setup(c: &Common) -> Result<Setup> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.greedy.seed = s;
    }
    let out = c.out.clone().unwrap_or_else(|| cfg.outputs.clone());
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(Setup { cfg, out })
}

pub fn build(c: &Common) -> Result<()> {
    let Setup { cfg, out } = setup(c)?;
    let (set, dict) = cfg.build_inputs()?;
    let result = run_geim(&set, &dict, &cfg.greedy)?;
    let artifact = out.join("artifact.json");
    ArtifactFile::from_result(&result).save(&artifact)?;
    write_greedy_csv(&out.join("greedy.csv"), &result)?;

    println!("{:>4} {:>24} {:>10} {:>6} {:>6}", "n", "eps_n", "eta", "phi", "sigma");
    for n in 0..result.len() {
        println!(
            "{:>4} {:>24.16e} {:>10.6} {:>6} {:>6}",
            n,
            result.eps_history[n],
            result.effective_eta[n],
            result.selected_phi_index[n],
            result.selected_sigma_index[n]
        );
    }
    println!("basis size {} of n_max {}", result.len(), cfg.greedy.n_max);
    if result.stopped_early {
        println!("stopped_early: every snapshot is reproduced to the stopping tolerance");
    }
    println!("wrote {}", artifact.display());
    Ok(())
}

pub fn analyze(c: &Common, artifact: Option<PathBuf>) -> Result<()> {
    let Setup { cfg, out } = setup(c)?;
    let path = artifact.unwrap_or_else(|| out.join("artifact.json"));
    let art = ArtifactFile::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let (set, _) = cfg.build_inputs()?;
    let result = art.to_result(&set).context("artifact does not match the configured family")?;
    let report = analyze_run(&result, &set, &cfg.analysis)?;

    write_analysis_csv(&out.join("analysis.csv"), &report)?;
    write_report_json(&out.join("analysis.json"), &report)?;
    if cfg.emit_plots {
        write_series_csv(&out.join("plot_tau.csv"), "tau", &report.tau)?;
        write_series_csv(&out.join("plot_d.csv"), "d", &report.d)?;
        write_series_csv(&out.join("plot_eps.csv"), "eps", &report.eps_max)?;
    }
    println!("{:>4} {:>12} {:>12} {:>10} {:>10}", "n", "tau", "d", "lambda", "gamma");
    for n in 0..=report.n {
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>10.4} {:>10.4}",
            n, report.tau[n], report.d[n], report.lambda[n], report.gamma[n]
        );
    }
    if report.hilbert_surrogate {
        println!("hilbert_surrogate=true: d holds weighted-L2 widths");
    }
    for (name, ok) in report.spot_checks() {
        println!("check {name}: {}", if ok { "ok" } else { "violated" });
    }
    Ok(())
}

pub fn audit(c: &Common, sweep: bool, analysis: Option<PathBuf>) -> Result<bool> {
    let Setup { cfg, out } = setup(c)?;
    let path = analysis.unwrap_or_else(|| out.join("analysis.json"));
    let report = read_report_json(&path).with_context(|| format!("loading {}", path.display()))?;
    let mut opts = cfg.audit.clone();
    opts.sweep |= sweep;
    let fits = fit_run(&report);
    let audit = audit_run(&report, &fits, &opts);
    write_exact_json(&out.join("audit.json"), &audit)?;
    let table = audit.table();
    fs::write(out.join("audit.txt"), &table)?;
    for f in audit.failures() {
        println!("FAIL {} at {}: lhs {:?} rhs {:?}", f.id, f.index, f.lhs, f.rhs);
    }
    println!(
        "audit: {} passed, {} failed, {} skipped",
        audit.summary.passed, audit.summary.failed, audit.summary.skipped
    );
    Ok(audit.passed())
}

pub fn assimilate(c: &Common, measurements: &Path, n: Option<usize>, artifact: Option<PathBuf>) -> Result<bool> {
    let Setup { out, .. } = setup(c)?;
    let path = artifact.unwrap_or_else(|| out.join("artifact.json"));
    let art = ArtifactFile::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let system = art.to_system()?;
    let m = read_measurements(measurements).with_context(|| format!("reading {}", measurements.display()))?;
    let n = n.unwrap_or_else(|| m.len().min(system.len()));
    if n > m.len() {
        bail!("{n} measurements requested but the file holds {}", m.len());
    }
    if n > system.len() {
        bail!("{n} measurements requested but the basis has {} functions", system.len());
    }
    let m = &m[..n];
    let field = system.reconstruct(m)?;
    let residual = system.consistency_residual(&field, m)?;
    let dest = out.join("reconstruction.csv");
    write_field_csv(&dest, &field)?;
    println!("reconstructed from {n} measurements into {}", dest.display());
    println!("consistency residual {residual:.3e}");
    Ok(residual <= CONSISTENCY_TOL)
}
