//! Scenario runner: solve the configured equation, write the solution and
//! the requested diagnostic tables into the output directory, and record a
//! manifest with content checksums so reruns can be audited byte for byte.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use fhjlab_core::evolve::{
    frame_lipschitz_seminorms, run_advection_diffusion, run_burgers, run_hj, run_isaacs,
};
use fhjlab_core::nonlocal::one_sided_gradients;
use fhjlab_core::regularity::{cascade, fit_exponent, shock_monitor};
use fhjlab_core::{write_csv, write_field, FieldData, SpaceTimeField, TimeWindow};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{EquationKind, ScenarioConfig};

/// One artifact with its content hash.
#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Audit record of a run: what was asked (config hash, seed, grid), what was
/// produced (artifact checksums) and how long it took. Written even when the
/// run fails, with the failing stage recorded.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub config_sha256: String,
    pub seed: u64,
    pub rng: String,
    pub equation: String,
    pub grid_dim: usize,
    pub grid_n_points: usize,
    pub grid_period: f64,
    pub wall_clock_seconds: f64,
    pub failure_stage: Option<String>,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn hash_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Execute a validated scenario. All artifacts go under `out_dir` (created if
/// absent); nothing is written anywhere else. Returns the manifest, which is
/// also written to `manifest.json` — including on failure, where it records
/// the stage that failed before the error is propagated.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    config_text: &str,
    out_dir: &Path,
) -> anyhow::Result<RunManifest> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let mut written: Vec<PathBuf> = Vec::new();
    let outcome = execute(cfg, out_dir, &mut written);

    let mut outputs = Vec::with_capacity(written.len());
    for path in &written {
        outputs.push(OutputEntry {
            path: path
                .strip_prefix(out_dir)
                .unwrap_or(path)
                .to_string_lossy()
                .into_owned(),
            sha256: hash_file(path)?,
        });
    }
    let manifest = RunManifest {
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed: cfg.seed,
        rng: "chacha8".into(),
        equation: cfg.equation.as_str().into(),
        grid_dim: cfg.grid_dim,
        grid_n_points: cfg.grid_n_points,
        grid_period: cfg.grid_period,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        failure_stage: outcome.as_ref().err().map(|(stage, _)| stage.clone()),
        outputs,
    };
    let manifest_path = out_dir.join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).context("serializing manifest")?,
    )
    .with_context(|| format!("writing {}", manifest_path.display()))?;

    match outcome {
        Ok(()) => Ok(manifest),
        Err((stage, err)) => Err(err.context(format!("stage '{stage}' failed"))),
    }
}

type StageResult = Result<(), (String, anyhow::Error)>;

fn at<T>(stage: &str, r: anyhow::Result<T>) -> Result<T, (String, anyhow::Error)> {
    r.map_err(|e| (stage.to_string(), e))
}

fn execute(cfg: &ScenarioConfig, out_dir: &Path, written: &mut Vec<PathBuf>) -> StageResult {
    // ---- solve ----------------------------------------------------------
    let run = at("solve", solve(cfg))?;

    // ---- solution artifacts ---------------------------------------------
    let field_path = out_dir.join("solution.field");
    at(
        "write-solution",
        write_field(&field_path, &FieldData::SpaceTime(run.clone())).map_err(Into::into),
    )?;
    written.push(field_path);

    let csv_path = out_dir.join("solution.csv");
    at(
        "write-solution",
        (|| -> anyhow::Result<()> {
            let mut buf = Vec::new();
            write_csv(&mut buf, &FieldData::SpaceTime(run.clone()))?;
            fs::write(&csv_path, buf)?;
            Ok(())
        })(),
    )?;
    written.push(csv_path);

    // ---- diagnostics ----------------------------------------------------
    let mut report = serde_json::Map::new();
    report.insert(
        "final_max_abs".into(),
        serde_json::json!(run.frames().last().unwrap().max_abs()),
    );

    for diag in &cfg.diagnostics {
        match diag.as_str() {
            "decay" => {
                let path = out_dir.join("decay.csv");
                at(
                    "diagnostic-decay",
                    (|| -> anyhow::Result<()> {
                        let mut f = fs::File::create(&path)?;
                        writeln!(f, "t,max,min,max_abs")?;
                        for (k, &t) in run.times().iter().enumerate() {
                            let fr = run.frame(k);
                            writeln!(f, "{t},{},{},{}", fr.max(), fr.min(), fr.max_abs())?;
                        }
                        Ok(())
                    })(),
                )?;
                written.push(path);
            }
            "lipschitz" => {
                let path = out_dir.join("lipschitz.csv");
                at(
                    "diagnostic-lipschitz",
                    (|| -> anyhow::Result<()> {
                        let norms = frame_lipschitz_seminorms(&run);
                        let mut f = fs::File::create(&path)?;
                        writeln!(f, "t,lipschitz")?;
                        for (k, &t) in run.times().iter().enumerate() {
                            writeln!(f, "{t},{}", norms[k])?;
                        }
                        Ok(())
                    })(),
                )?;
                written.push(path);
            }
            "cascade" => {
                let path = out_dir.join("cascade.csv");
                at(
                    "diagnostic-cascade",
                    (|| -> anyhow::Result<()> {
                        let t_end = *run.times().last().unwrap();
                        let c = cascade(
                            &run,
                            [0.0, 0.0],
                            t_end,
                            cfg.a_bound,
                            cfg.grid_period / 8.0,
                            8,
                            TimeWindow::Clamp,
                        )?;
                        let fit = fit_exponent(&c)?;
                        let mut f = fs::File::create(&path)?;
                        writeln!(f, "k,radius,osc")?;
                        for l in &c.levels {
                            writeln!(f, "{},{},{}", l.k, l.radius, l.osc)?;
                        }
                        report.insert("cascade_fit".into(), serde_json::to_value(&fit)?);
                        Ok(())
                    })(),
                )?;
                written.push(path);
            }
            "shock" => {
                let path = out_dir.join("shock.csv");
                at(
                    "diagnostic-shock",
                    (|| -> anyhow::Result<()> {
                        // default threshold: three times the initial max
                        // one-sided gradient (calibrate externally for
                        // verdicts that must transfer across resolutions)
                        let (b, fw) = one_sided_gradients(run.frame(0), 0);
                        let threshold = 3.0 * b.max_abs().max(fw.max_abs()).max(1e-8);
                        let rep = shock_monitor(&run, threshold)?;
                        let mut f = fs::File::create(&path)?;
                        writeln!(f, "t,grad_max")?;
                        for (t, g) in rep.times.iter().zip(&rep.grad_max) {
                            writeln!(f, "{t},{g}")?;
                        }
                        report.insert("shock".into(), serde_json::to_value(&rep)?);
                        Ok(())
                    })(),
                )?;
                written.push(path);
            }
            other => {
                return Err((
                    "diagnostics".into(),
                    anyhow::anyhow!("unknown diagnostic '{other}'"),
                ))
            }
        }
    }

    let report_path = out_dir.join("report.json");
    at(
        "write-report",
        (|| -> anyhow::Result<()> {
            fs::write(
                &report_path,
                serde_json::to_string_pretty(&serde_json::Value::Object(report))?,
            )?;
            Ok(())
        })(),
    )?;
    written.push(report_path);

    let plot_path = out_dir.join("plot.gp");
    at(
        "write-plot",
        fs::write(&plot_path, plot_script(cfg)).map_err(Into::into),
    )?;
    written.push(plot_path);

    Ok(())
}

fn solve(cfg: &ScenarioConfig) -> anyhow::Result<SpaceTimeField> {
    let grid = cfg.grid()?;
    let u0 = cfg.initial_field(grid)?;
    let solver = cfg.solver_config()?;
    let run = match cfg.equation {
        EquationKind::Hj => {
            let h = cfg.closed_form_hamiltonian()?;
            run_hj(&u0, &h, &solver)?
        }
        EquationKind::Isaacs => {
            let family = cfg.isaacs_family(grid)?;
            run_isaacs(&u0, &family, &solver)?
        }
        EquationKind::AdvectionDiffusion => {
            let drift = cfg.drift_field(grid)?;
            run_advection_diffusion(&u0, &drift, &solver)?
        }
        EquationKind::Burgers => run_burgers(&u0, &solver)?,
    };
    Ok(run)
}

/// Generated gnuplot script reading the CSV tables of this run.
fn plot_script(cfg: &ScenarioConfig) -> String {
    let mut s = String::from(
        "# generated plot script; run with: gnuplot plot.gp\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,600\n",
    );
    s.push_str(
        "set output 'solution.png'\n\
         plot 'solution.csv' using 1:2 with lines title 'first frame', \\\n\
              '' using 1:(column(-1)) with lines title 'last frame'\n",
    );
    for diag in &cfg.diagnostics {
        match diag.as_str() {
            "decay" => s.push_str(
                "set output 'decay.png'\nplot 'decay.csv' using 1:4 with lines\n",
            ),
            "lipschitz" => s.push_str(
                "set output 'lipschitz.png'\nplot 'lipschitz.csv' using 1:2 with lines\n",
            ),
            "cascade" => s.push_str(
                "set output 'cascade.png'\nset logscale xy\n\
                 plot 'cascade.csv' using 2:3 with linespoints\nunset logscale xy\n",
            ),
            "shock" => s.push_str(
                "set output 'shock.png'\nplot 'shock.csv' using 1:2 with lines\n",
            ),
            _ => {}
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const HEAT: &str = r#"
equation = "advection-diffusion"
seed = 3
[grid]
n_points = 64
[drift]
kind = "zero"
[solver]
t_end = 0.25
[diagnostics]
requested = ["decay", "lipschitz"]
"#;

    #[test]
    fn scenario_writes_artifacts_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(HEAT).unwrap();
        let manifest = run_scenario(&cfg, HEAT, dir.path()).unwrap();
        assert!(manifest.failure_stage.is_none());
        let names: Vec<&str> = manifest.outputs.iter().map(|o| o.path.as_str()).collect();
        for expected in [
            "solution.field",
            "solution.csv",
            "decay.csv",
            "lipschitz.csv",
            "report.json",
            "plot.gp",
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
        for o in &manifest.outputs {
            assert_eq!(o.sha256.len(), 64);
            assert!(dir.path().join(&o.path).exists());
        }
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn failed_stage_is_recorded_in_manifest() {
        // cascade on a coarse grid cannot resolve 3 levels -> compute error
        let text = r#"
equation = "advection-diffusion"
[grid]
n_points = 16
[drift]
kind = "zero"
[solver]
t_end = 0.05
[diagnostics]
requested = ["cascade"]
"#;
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(text).unwrap();
        let err = run_scenario(&cfg, text, dir.path()).unwrap_err();
        assert!(err.to_string().contains("diagnostic-cascade"), "{err}");
        let manifest: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["failure_stage"], "diagnostic-cascade");
    }

    #[test]
    fn reruns_are_bit_identical() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let cfg = parse_config(HEAT).unwrap();
        let m1 = run_scenario(&cfg, HEAT, d1.path()).unwrap();
        let m2 = run_scenario(&cfg, HEAT, d2.path()).unwrap();
        for (a, b) in m1.outputs.iter().zip(&m2.outputs) {
            assert_eq!(a.path, b.path);
            assert_eq!(a.sha256, b.sha256, "artifact {} differs", a.path);
        }
    }
}
