use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use torus_nf::config::RunConfig;
use torus_nf::lattice::norm;
use torus_nf::normalform::run;
use torus_nf::quantize::{weyl_matrix, ModeSet};
use torus_nf::report;
use torus_nf::resonance::census;
use torus_nf::spectra::{eigensolve, operator_symbol, splitting_scan, SpectralHarness};
use torus_nf::verify::Verifier;
use torus_nf::{Error, Result};

#[derive(Parser)]
#[command(name = "torus-nf", version, about = "Normal form and eigenvalue asymptotics for (−Δ)^{M/2} + V on flat tori")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset: mathieu-1d, square-2d, unbounded-2d, floquet-2d.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the census seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for inner sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dual basis and the gap radius r.
    Dual,
    /// Nonresonant fraction of Γ* ∩ B_R for each configured R.
    Census,
    /// Table of z_j(ξ) and λ(ξ); also exports the normal form state.
    Expand {
        /// Points ξ as comma-separated coordinates; repeatable.
        #[arg(long = "xi", value_delimiter = ';')]
        xi: Vec<String>,
    },
    /// Eigenvalues of the truncated operator.
    Spectrum,
    /// The acceptance criteria, as a JSON report.
    Verify,
    /// Residual and matched eigenvalue of every interior quasimode.
    Quasimode,
    /// Print the resolved configuration as TOML.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => return Err(Error::Config("pass --config PATH or --preset NAME".into())),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = cli.seed {
        cfg.census.seed = seed;
    }
    Ok(cfg)
}

fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad coordinate `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    Ok(v)
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let cfg = load(cli)?;
    let setup = cfg.setup()?;
    let out = PathBuf::from(&cfg.output.dir);
    let p = &setup.params;
    let pert = &setup.perturbation;
    match &cli.command {
        Command::Config => print!("{}", cfg.to_toml()?),
        Command::Dual => {
            for row in setup.dual.basis() {
                println!("{}", row.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" "));
            }
            println!("r = {}", setup.dual.min_gap_r());
        }
        Command::Census => {
            let rows = census(p, &setup.dual, &cfg.census.radii, cfg.census.seed);
            let csv = report::census_csv(&rows);
            print!("{csv}");
            report::write_artifact(&out, "census.csv", &csv)?;
        }
        Command::Expand { xi } => {
            let state = run(pert, p, setup.nf.clone())?;
            let points: Vec<Vec<f64>> = if xi.is_empty() {
                [4.0, 8.0, 16.0, 32.0, 64.0]
                    .iter()
                    .map(|&t| {
                        let mut v = vec![0.0; cfg.dim()];
                        v[0] = t;
                        v
                    })
                    .collect()
            } else {
                xi.iter().map(|s| parse_point(s, cfg.dim())).collect::<Result<_>>()?
            };
            let rows: Vec<_> = points
                .into_iter()
                .map(|x| Ok((x.clone(), state.z_values(&x)?, state.lambda(&x)?)))
                .collect::<Result<_>>()?;
            let levels = rows.first().map_or(0, |r| r.1.len());
            let csv = report::z_table_csv(levels, &rows);
            print!("{csv}");
            report::write_artifact(&out, "z_table.csv", &csv)?;
            report::write_artifact(&out, "nf_state.json", &report::to_json(&state.export())?)?;
        }
        Command::Spectrum => {
            let modes = Arc::new(ModeSet::ball(setup.dual.clone(), cfg.truncation.r_trunc));
            let h = weyl_matrix(&operator_symbol(pert, p.m)?, &modes, &pert.kappa)?;
            let eig = eigensolve(&h)?;
            let csv = report::spectrum_csv(&eig.values);
            report::write_artifact(&out, "spectrum.csv", &csv)?;
            println!(
                "{}",
                json!({"modes": modes.len(), "norm": eig.norm, "max_residual": eig.max_residual, "clusters": eig.clusters.len()})
            );
        }
        Command::Verify => {
            let verifier = Verifier::new(cfg.census.seed);
            let rep = verifier.run_all();
            for line in report::summary_lines(&rep) {
                println!("{line}");
            }
            let path = report::write_artifact(&out, "verify.json", &report::to_json(&rep)?)?;
            println!("{} passed, {} failed; report in {}", rep.passed, rep.failed, path.display());
        }
        Command::Quasimode => {
            let state = run(pert, p, setup.nf.clone())?;
            let modes = Arc::new(ModeSet::ball(setup.dual.clone(), cfg.truncation.r_trunc));
            let harness = SpectralHarness::new(&state, pert, modes.clone())?;
            let interior: Vec<usize> = harness
                .interior()
                .into_iter()
                .filter(|&i| {
                    let xi = &modes.point(i).point;
                    let shifted: Vec<f64> = xi.iter().zip(&pert.kappa).map(|(a, b)| a - b).collect();
                    norm(&shifted) >= 2.0 * p.gamma
                })
                .collect();
            let rows = interior
                .par_iter()
                .map(|&i| harness.match_mode(&state, i))
                .collect::<Result<Vec<_>>>()?;
            report::write_artifact(&out, "quasimode.csv", &report::matches_csv(&rows))?;
            if pert.symmetric {
                let pairs: Vec<_> = interior
                    .iter()
                    .map(|&i| modes.point(i).mode.clone())
                    .filter(|k| k.0.iter().find(|c| **c != 0).is_some_and(|c| *c > 0))
                    .filter(|k| {
                        let minus = modes.index_of(&-k);
                        let plus = modes.index_of(k);
                        matches!((plus, minus), (Some(a), Some(b)) if harness.is_nonresonant(a) && harness.is_nonresonant(b))
                    })
                    .collect();
                let split = splitting_scan(&state, pert, &harness, &pairs)?;
                report::write_artifact(&out, "splitting.csv", &report::splitting_csv(&split))?;
            }
            let worst = rows.iter().filter(|r| r.nonresonant).map(|r| r.residual).fold(0.0, f64::max);
            println!("{}", json!({"interior_modes": rows.len(), "max_nonresonant_residual": worst, "out": out}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(2)
        }
    }
}
