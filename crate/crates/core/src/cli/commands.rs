use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{load_config, render_config};
use super::manifest::{CacheRecord, FitRecord, RunManifest};
use super::verify::run_checks;
use crate::analysis::decay_fit;
use crate::cloop::{run, SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fdm::SchemeMode;
use crate::kernels::cache::cache_path;
use crate::kernels::{
    cache_read, cache_write, extract_feedback_gain, extract_observer_gain, solve_kernel, GainVectors, KernelKind,
    KernelTable, TriangleGrid,
};

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct CommandOptions {
    pub config: PathBuf,
    pub out_dir: PathBuf,
    /// Overrides `sim.scheme` when set.
    pub scheme: Option<SchemeMode>,
    pub cache_dir: Option<PathBuf>,
}

/// Exit status for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Usage(_) => 2,
        Error::BlowUp { .. } | Error::Diverged { .. } => 3,
        _ => 1,
    }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn prepare(opts: &CommandOptions, command: &str) -> Result<(SimConfig, RunManifest)> {
    let mut cfg = load_config(&opts.config)?;
    if let Some(s) = opts.scheme {
        cfg.scheme = s;
    }
    fs::create_dir_all(&opts.out_dir)?;
    let manifest = RunManifest {
        command: command.into(),
        config: render_config(&cfg),
        scheme: cfg.scheme.as_str().into(),
        ..RunManifest::default()
    };
    Ok((cfg, manifest))
}

/// Load a table from the cache or solve it, recording what happened.
fn obtain_table(
    kind: KernelKind,
    cfg: &SimConfig,
    cache_dir: Option<&Path>,
    manifest: &mut RunManifest,
) -> Result<KernelTable> {
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m)?;
    let key = format!("{kind}/lambda={:?}/L={:?}/M={}", cfg.lambda, cfg.length, cfg.kernel_m);
    let start = Instant::now();
    let Some(dir) = cache_dir else {
        let t = solve_kernel(kind, cfg.lambda, &grid)?;
        manifest.timings_s.insert(format!("solve_{kind}"), start.elapsed().as_secs_f64());
        manifest.cache.push(CacheRecord {
            key,
            status: "disabled".into(),
            path: None,
        });
        return Ok(t);
    };
    let path = cache_path(dir, kind, cfg.lambda, cfg.length, cfg.kernel_m);
    let status = match cache_read(dir, kind, cfg.lambda, cfg.length, cfg.kernel_m) {
        Ok(t) => {
            manifest.timings_s.insert(format!("load_{kind}"), start.elapsed().as_secs_f64());
            manifest.cache.push(CacheRecord {
                key,
                status: "hit".into(),
                path: Some(path.display().to_string()),
            });
            return Ok(t);
        }
        Err(Error::NotFound(_)) => "miss",
        Err(e @ Error::Format(_)) => {
            let note = format!("warning: discarding unreadable cache entry {}: {e}", path.display());
            eprintln!("{note}");
            manifest.notes.push(note);
            "rewritten"
        }
        Err(e) => return Err(e),
    };
    let t = solve_kernel(kind, cfg.lambda, &grid)?;
    manifest.timings_s.insert(format!("solve_{kind}"), start.elapsed().as_secs_f64());
    cache_write(dir, &t)?;
    manifest.cache.push(CacheRecord {
        key,
        status: status.into(),
        path: Some(path.display().to_string()),
    });
    Ok(t)
}

fn gains_for(cfg: &SimConfig, cache_dir: Option<&Path>, manifest: &mut RunManifest) -> Result<GainVectors> {
    let k = obtain_table(KernelKind::ControllerK, cfg, cache_dir, manifest)?;
    let p = obtain_table(KernelKind::ObserverP, cfg, cache_dir, manifest)?;
    GainVectors::from_tables(&k, &p, cfg.nx)
}

fn write_manifest(opts: &CommandOptions, manifest: &mut RunManifest) -> Result<()> {
    let path = opts.out_dir.join("manifest.json");
    manifest.outputs.push(path.display().to_string());
    manifest.write(&path)
}

/// Solve (or load) the three kernels, print their residuals and export the gains.
pub fn cmd_solve_kernels(opts: &CommandOptions) -> Result<RunManifest> {
    let (cfg, mut manifest) = prepare(opts, "solve-kernels")?;
    let cache = opts.cache_dir.as_deref();
    let mut tables = Vec::new();
    for kind in [KernelKind::ControllerK, KernelKind::ObserverP, KernelKind::InverseL] {
        let t = obtain_table(kind, &cfg, cache, &mut manifest)?;
        println!("{kind} (lambda={}, M={}):", cfg.lambda, cfg.kernel_m);
        for (name, v) in &t.residual_report.entries {
            println!("  {name} = {v:e}");
            manifest.values.insert(format!("{kind}.{name}"), *v);
        }
        tables.push(t);
    }

    let k = extract_feedback_gain(&tables[0], cfg.nx)?;
    let p1 = extract_observer_gain(&tables[1], cfg.nx)?;
    let dx = cfg.length / cfg.nx as f64;
    let mut csv = String::from("x,K,P1\n");
    for j in 0..=cfg.nx {
        let x = if j == cfg.nx { cfg.length } else { j as f64 * dx };
        let _ = writeln!(csv, "{},{},{}", num(x), num(k[j]), num(p1[j]));
    }
    let path = opts.out_dir.join("gains.csv");
    fs::write(&path, csv)?;
    manifest.outputs.push(path.display().to_string());
    write_manifest(opts, &mut manifest)?;
    Ok(manifest)
}

fn write_series(dir: &Path, tr: &Trajectory, blowup: Option<f64>) -> Result<Vec<PathBuf>> {
    let surface = dir.join("surface.csv");
    let norms = dir.join("norms.csv");
    let mut f = std::io::BufWriter::new(fs::File::create(&surface)?);
    writeln!(f, "t,x,u")?;
    for (t, u) in tr.times.iter().zip(&tr.plant) {
        let n = u.len() - 1;
        for (j, v) in u.iter().enumerate() {
            let x = if j == n { tr.dx * n as f64 } else { j as f64 * tr.dx };
            writeln!(f, "{},{},{}", num(*t), num(x), num(*v))?;
        }
    }
    if let Some(t) = blowup {
        writeln!(f, "# blowup at t={}", num(t))?;
    }
    f.flush()?;

    let mut g = std::io::BufWriter::new(fs::File::create(&norms)?);
    writeln!(g, "t,norm_u,norm_uhat,norm_err,kappa,y")?;
    for i in 0..tr.len() {
        writeln!(
            g,
            "{},{},{},{},{},{}",
            num(tr.times[i]),
            num(tr.norm_u[i]),
            num(tr.norm_uhat[i]),
            num(tr.norm_err[i]),
            num(tr.control[i]),
            num(tr.output[i])
        )?;
    }
    if let Some(t) = blowup {
        writeln!(g, "# blowup at t={}", num(t))?;
    }
    g.flush()?;
    Ok(vec![surface, norms])
}

/// Run the configured scenario and write `surface.csv`, `norms.csv` and the manifest.
///
/// On blow-up the partial series are still written, the manifest notes the
/// time and the error is returned.
pub fn cmd_simulate(opts: &CommandOptions) -> Result<RunManifest> {
    let (cfg, mut manifest) = prepare(opts, "simulate")?;
    let gains = gains_for(&cfg, opts.cache_dir.as_deref(), &mut manifest)?;
    let start = Instant::now();
    let result = run(&cfg, &gains);
    manifest.timings_s.insert("simulate".into(), start.elapsed().as_secs_f64());

    match result {
        Ok(tr) => {
            for p in write_series(&opts.out_dir, &tr, None)? {
                manifest.outputs.push(p.display().to_string());
            }
            let window = (cfg.tfinal / 2.0, cfg.tfinal);
            for (name, series) in [("norm_u", &tr.norm_u), ("norm_err", &tr.norm_err)] {
                match decay_fit(&tr.times, series, window) {
                    Ok(fit) => manifest.fits.push(FitRecord {
                        series: name.into(),
                        window,
                        rate: fit.rate,
                        amplitude: fit.c,
                        rsq: fit.rsq,
                    }),
                    Err(e) => manifest.notes.push(format!("no decay fit for {name}: {e}")),
                }
            }
            if let (Some(first), Some(last)) = (tr.norm_u.first(), tr.norm_u.last()) {
                manifest.values.insert("final_norm_u".into(), *last);
                manifest.values.insert("initial_norm_u".into(), *first);
            }
            write_manifest(opts, &mut manifest)?;
            Ok(manifest)
        }
        Err(Error::BlowUp {
            step,
            time,
            iterate,
            partial,
        }) => {
            for p in write_series(&opts.out_dir, &partial, Some(time))? {
                manifest.outputs.push(p.display().to_string());
            }
            manifest
                .notes
                .push(format!("blow-up at step {step}, t = {time}, fixed-point iterate {iterate}"));
            write_manifest(opts, &mut manifest)?;
            Err(Error::BlowUp {
                step,
                time,
                iterate,
                partial,
            })
        }
        Err(e) => Err(e),
    }
}

/// Run the acceptance checks and print one line per check.
pub fn cmd_verify(opts: &CommandOptions) -> Result<RunManifest> {
    let (cfg, mut manifest) = prepare(opts, "verify")?;
    let start = Instant::now();
    manifest.checks = run_checks(&cfg);
    manifest.timings_s.insert("verify".into(), start.elapsed().as_secs_f64());
    for c in &manifest.checks {
        println!("[{}] {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    write_manifest(opts, &mut manifest)?;
    Ok(manifest)
}
