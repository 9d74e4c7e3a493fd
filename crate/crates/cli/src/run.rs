use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use triplet_core::optimizer::optimal_sweep;
use triplet_core::oracle::{
    compare, run_ensemble, simulate, ComparisonReport, SimConfig, DEFAULT_SEGMENT_LEN,
};
use triplet_core::params::{check_regime, derive, load_params, DerivedParams, PhysParams};
use triplet_core::scenario::{self, presets, GROUPS};
use triplet_core::spectra::{coeffs, spectrum_sweep, GridSpec, SpectrumRecord, YPolicy};
use triplet_core::sqlimit::{band_integral_check, min_force};

use crate::args::{Cli, Command, MinforceArgs, OracleArgs, Preset, RegimeArgs, Source, SweepArgs};
use crate::error::CliError;
use crate::manifest::{self, RunManifest, ScenarioRecord, SimRecord, Verb};
use crate::output::{file_stem, write_atomic, write_sweep_csv};

/// Name used when no scenario is requested.
pub const BASE: &str = "base";

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(a) => sweep(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Regime(a) => regime(a, out),
        Command::Minforce(a) => minforce(a, out),
        Command::Presets => list_presets(out),
    }
}

fn load(source: &Source) -> Result<PhysParams, CliError> {
    let preset = source.preset == Some(Preset::Table1);
    Ok(load_params(source.config.as_deref(), preset)?)
}

/// One parameter set to run, after any scenario is applied.
struct Run {
    name: String,
    description: String,
    params: PhysParams,
    derived: DerivedParams,
}

fn resolve_runs(base: &PhysParams, names: &[String]) -> Result<Vec<Run>, CliError> {
    if names.is_empty() || names == [BASE] {
        return Ok(vec![Run {
            name: BASE.into(),
            description: "parameters as given".into(),
            params: *base,
            derived: derive(base)?,
        }]);
    }
    scenario::resolve_all(names)?
        .into_iter()
        .map(|s| {
            let params = s.apply(base);
            Ok(Run {
                name: s.name.clone(),
                description: s.to_string().trim_start_matches(&s.name).trim().to_string(),
                derived: derive(&params)?,
                params,
            })
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Usage(format!("{}: {e}", path.display()))
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<(), CliError> {
    let path = dir.join(manifest::FILE_NAME);
    let json = m.to_json();
    write_atomic(&path, |w| w.write_all(json.as_bytes())).map_err(io_err(&path))
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (base, names, grid, check) = match &a.manifest {
        Some(path) => {
            let m = RunManifest::load(path, Verb::Sweep)?;
            let grid: GridSpec = m
                .grid
                .as_deref()
                .ok_or_else(|| CliError::Usage("manifest has no grid".into()))?
                .parse()?;
            let names = m.scenarios.iter().map(|s| s.name.clone()).collect();
            (m.params, names, grid, m.check_optimizer.unwrap_or(false))
        }
        None => (
            load(&a.source)?,
            a.scenarios.clone(),
            a.grid,
            a.check_optimizer,
        ),
    };
    let runs = resolve_runs(&base, &names)?;
    let mut m = RunManifest::new(Verb::Sweep, base, derive(&base)?);
    m.grid = Some(grid.to_string());
    m.check_optimizer = Some(check);

    for run in runs {
        let omegas = grid.omegas(run.params.tau)?;
        let mut records = spectrum_sweep(&run.derived, &omegas, &YPolicy::AnalyticOptimal)?;
        for r in &mut records {
            r.scenario = Some(run.name.clone());
        }
        let file = format!("{}.csv", file_stem(&run.name));
        let path = a.out.join(&file);
        write_atomic(&path, |w| write_sweep_csv(w, &records)).map_err(io_err(&path))?;
        writeln!(out, "{}", sweep_summary(&run.name, &records))?;
        if check {
            let worst = optimal_sweep(&run.derived, &omegas)?
                .iter()
                .map(|r| r.relative_gap)
                .fold(0.0, f64::max);
            writeln!(out, "  simplex check: max relative gap {worst:.2e}")?;
        }
        writeln!(out, "  -> {}", path.display())?;
        m.scenarios.push(ScenarioRecord {
            name: run.name,
            description: run.description,
            files: vec![file],
            params: run.params,
            derived: run.derived,
            simulation: None,
        });
    }
    write_manifest(&a.out, &m)
}

fn sweep_summary(name: &str, records: &[SpectrumRecord]) -> String {
    let below = records.iter().filter(|r| r.r < 1.0).count();
    match records.iter().min_by(|x, y| x.r.total_cmp(&y.r)) {
        Some(best) => format!(
            "{name}: {} points, min R = {:.4e} at Ωτ/2π = {:.4e}, R < 1 at {below} points",
            records.len(),
            best.r,
            best.omega_tau_over_2pi
        ),
        None => format!("{name}: empty grid"),
    }
}

fn sim_config(d: &DerivedParams, a: &OracleArgs) -> SimConfig {
    let mut cfg = SimConfig::default_for(d);
    cfg.seed = a.seed;
    if let Some(n) = a.trajectories {
        cfg.trajectories = n;
    }
    if let Some(dt) = a.dt {
        cfg.dt = dt;
    }
    if let Some(s) = a.segments {
        cfg.segments = s;
    }
    cfg.duration = a
        .duration
        .unwrap_or((cfg.segments * DEFAULT_SEGMENT_LEN) as f64 * cfg.sample_interval());
    cfg
}

fn from_record(d: &DerivedParams, r: &SimRecord) -> SimConfig {
    let mut cfg = SimConfig::default_for(d);
    cfg.seed = r.seed;
    cfg.trajectories = r.trajectories;
    cfg.duration = r.duration;
    cfg.dt = r.dt;
    cfg.sample_every = r.sample_every;
    cfg.segments = r.segments;
    cfg
}

fn oracle_report(name: &str, cfg: &SimConfig, report: &ComparisonReport) -> String {
    format!(
        "scenario        {name}\nseed            {}\ntrajectories    {}\nsegments        {} × {} samples\noutput interval {:.6e} s\n{report}\n",
        cfg.seed,
        cfg.trajectories,
        cfg.segments,
        cfg.segment_len(),
        cfg.sample_interval()
    )
}

fn write_bins(w: &mut dyn Write, tau: f64, report: &ComparisonReport) -> std::io::Result<()> {
    writeln!(w, "omega_rad_s,omega_tau_over_2pi,estimate,analytic,ratio")?;
    for k in 0..report.omegas.len() {
        let omega = report.omegas[k];
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e}",
            omega,
            omega * tau / (2.0 * PI),
            report.estimate[k],
            report.analytic[k],
            report.ratio[k]
        )?;
    }
    Ok(())
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (base, names, records, dump) = match &a.manifest {
        Some(path) => {
            let m = RunManifest::load(path, Verb::Oracle)?;
            let records = m
                .scenarios
                .iter()
                .map(|s| {
                    s.simulation.clone().ok_or_else(|| {
                        CliError::Usage(format!(
                            "manifest has no simulation settings for {}",
                            s.name
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let dump = records.iter().any(|r| r.dump_timeseries);
            let names = m.scenarios.iter().map(|s| s.name.clone()).collect();
            (m.params, names, Some(records), dump)
        }
        None => (
            load(&a.source)?,
            a.scenarios.clone(),
            None,
            a.dump_timeseries,
        ),
    };
    let runs = resolve_runs(&base, &names)?;
    let mut m = RunManifest::new(Verb::Oracle, base, derive(&base)?);
    let mut failed = Vec::new();

    for (i, run) in runs.into_iter().enumerate() {
        let d = &run.derived;
        let cfg = match &records {
            Some(r) => from_record(d, &r[i]),
            None => sim_config(d, a),
        };
        cfg.validate(d)?;
        let est = run_ensemble(d, &cfg)?;
        let analytic = spectrum_sweep(d, &est.omegas, &cfg.y_policy)?;
        let report = compare(&analytic, &est, None)?;
        let text = oracle_report(&run.name, &cfg, &report);
        write!(out, "{text}")?;

        let stem = file_stem(&run.name);
        let mut files = vec![format!("{stem}.oracle.txt"), format!("{stem}.oracle.csv")];
        let path = a.out.join(&files[0]);
        write_atomic(&path, |w| w.write_all(text.as_bytes())).map_err(io_err(&path))?;
        let path = a.out.join(&files[1]);
        write_atomic(&path, |w| write_bins(w, run.params.tau, &report)).map_err(io_err(&path))?;
        if dump {
            let mut one = cfg.clone();
            one.trajectories = 1;
            let ts = simulate(d, &one)?;
            files.push(format!("{stem}.timeseries.csv"));
            let path = a.out.join(&files[2]);
            write_atomic(&path, |w| {
                ts.write_csv(0, w)
                    .map_err(|e| std::io::Error::other(e.to_string()))
            })
            .map_err(io_err(&path))?;
        }
        if !report.pass {
            failed.push(run.name.clone());
        }
        m.scenarios.push(ScenarioRecord {
            name: run.name,
            description: run.description,
            files,
            params: run.params,
            derived: run.derived,
            simulation: Some(SimRecord {
                seed: cfg.seed,
                trajectories: cfg.trajectories,
                duration: cfg.duration,
                dt: cfg.dt,
                sample_every: cfg.sample_every,
                segments: cfg.segments,
                dump_timeseries: dump,
            }),
        });
    }
    write_manifest(&a.out, &m)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::OracleMismatch(format!(
            "oracle disagrees with the analytic spectrum for {}",
            failed.join(", ")
        )))
    }
}

fn regime(a: &RegimeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&a.source)?;
    let d = derive(&p)?;
    let g0 = coeffs(&d, 0.0)?.g;
    writeln!(out, "γ_m             {:.6e} s⁻¹", d.gamma_m)?;
    writeln!(
        out,
        "γ+ / γ−         {:.6e} / {:.6e} s⁻¹",
        d.gamma_plus, d.gamma_minus
    )?;
    writeln!(out, "C0²             {:.6e}", d.c0_sq)?;
    writeln!(out, "n_T             {:.6e}", d.n_thermal)?;
    writeln!(out, "B               {:.4}", d.thermal_factor)?;
    writeln!(out, "G(0)            {:.6e} s⁻¹", g0.re)?;
    write!(out, "{}", check_regime(&d, &p))?;
    Ok(())
}

fn minforce(a: &MinforceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&a.source)?;
    let d = derive(&p)?;
    let tau = a.tau.unwrap_or(p.tau);
    let b = min_force(&d, tau)?;
    let kappa = (d.gamma_m.powi(2) + (2.0 * PI / tau).powi(2) / 3.0).sqrt();
    let check = band_integral_check(&d, kappa, tau)?;
    writeln!(
        out,
        "τ               {:.6e} s ({:.2} periods)",
        tau,
        tau * d.omega_m / (2.0 * PI)
    )?;
    writeln!(
        out,
        "γ_m τ           {:.3e}{}",
        b.gamma_m_tau,
        if b.short_time { "" } else { "  (not short)" }
    )?;
    writeln!(out, "normalized budget, units of F_s0²/(4ħmω_m):")?;
    writeln!(out, "  thermal       {:.6e}", b.thermal)?;
    writeln!(out, "  quantum       {:.6e}", b.sql)?;
    writeln!(out, "  total         {:.6e}", b.total)?;
    writeln!(out, "  thermal/quantum {:.4}", b.thermal / b.sql)?;
    writeln!(out, "minimum force   {:.6e} N", b.force)?;
    writeln!(out, "quantum only    {:.6e} N", b.force_sql)?;
    writeln!(
        out,
        "with 4π/τ²      {:.6e} N (quantum term ×{:.4})",
        b.force_alt,
        b.alt_ratio()
    )?;
    writeln!(
        out,
        "band integral   {:.6e} vs closed form {:.6e} (relative error {:.1e})",
        check.numeric, check.closed_form, check.relative_error
    )?;
    writeln!(
        out,
        "  (one-sided integral of S_fa over [0, 2π/τ] at 𝒦 = {kappa:.6e} s⁻¹)"
    )?;
    Ok(())
}

fn list_presets(out: &mut dyn Write) -> Result<(), CliError> {
    for s in presets() {
        writeln!(out, "{s}")?;
    }
    writeln!(out, "groups: {}", GROUPS.join(", "))?;
    writeln!(out, "custom: custom:{{sym|nonsym}}:{{lossy|lossless}}:PUMP")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use triplet_core::params::table1_preset;

    #[test]
    fn empty_scenario_list_runs_the_base() {
        let p = table1_preset();
        let runs = resolve_runs(&p, &[]).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].name, BASE);
        assert_eq!(runs[0].params, p);
    }

    #[test]
    fn groups_expand_and_keep_descriptions() {
        let runs = resolve_runs(&table1_preset(), &["fig2".to_string()]).unwrap();
        let names: Vec<_> = runs.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["fig2-sym", "fig2-nonsym", "fig2-nonsym-10P"]);
        assert!(runs[0].description.starts_with("symmetric, lossless"));
    }

    #[test]
    fn duplicate_scenarios_are_rejected() {
        let names = ["fig2".to_string(), "fig2-sym".to_string()];
        assert!(matches!(
            resolve_runs(&table1_preset(), &names),
            Err(CliError::Usage(_))
        ));
    }
}
