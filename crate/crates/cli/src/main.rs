//! `pcompat`: compatibility, curvature, transport and Lie-algebra checks
//! driven by JSON scene and algebra files.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_compat::lie::{self, AlgebraFile, Rational, SearchSpec};
use poisson_compat::scene::{CurveFile, Scene, SceneFile, Tolerances};
use poisson_compat::{Check, DiffStrategy};

use report::{Inputs, ReportFile};

#[derive(Parser, Debug)]
#[command(
    name = "pcompat",
    version,
    about = "Compatibility of a metric with a bivector field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compatibility residuals of ∇^π and D^π.
    Compat {
        scene: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        #[command(flatten)]
        common: Common,
    },
    /// Contravariant identity suite, Jacobi identity of π, and the J̃ route
    /// for D^π when π is invertible.
    Identities {
        scene: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Contravariant curvature checks with Kähler and Einstein diagnostics.
    Curvature {
        scene: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Cotangent transport along a curve.
    Transport {
        scene: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 256)]
        steps: usize,
        /// Initial covector, comma separated; defaults to the first basis covector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta0: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact checks on Lie algebra files.
    Lie {
        #[command(subcommand)]
        command: LieCommand,
    },
}

#[derive(Subcommand, Debug)]
enum LieCommand {
    /// Antisymmetry, Jacobi identity and invariance of the form.
    Check {
        algebra: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify vectors by the two conditions and collect separating witnesses.
    Search {
        #[arg(required = true)]
        algebras: Vec<PathBuf>,
        /// `a..b` or `a..b:step`.
        #[arg(long, default_value = "-2..2", allow_hyphen_values = true)]
        grid: String,
        /// Random vectors drawn when the grid exceeds the cap.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = poisson_compat::chart::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Left-invariant data for a vector `u` under a bi-invariant metric.
    Geometry {
        algebra: PathBuf,
        /// Rational components, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        vector: Vec<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Overrides the tolerance of the command's primary checks.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    strategy: Option<Strategy>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Ad,
    Fd,
}

impl From<Strategy> for DiffStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Ad => DiffStrategy::ForwardAd,
            Strategy::Fd => DiffStrategy::CentralFd,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    Nabla,
    #[value(name = "D")]
    D,
    Both,
}

fn load_scene(inputs: &mut Inputs, path: &Path, common: &Common) -> Result<Scene> {
    let text = inputs.read(path)?;
    let file =
        SceneFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let scene = file
        .build(common.samples, common.seed, common.strategy.map(Into::into))
        .with_context(|| format!("building {}", path.display()))?;
    Ok(scene)
}

fn scene_report(
    command: &str,
    inputs: Inputs,
    scene: &Scene,
    tolerances: Tolerances,
) -> ReportFile {
    let chart = scene.geometry.chart();
    ReportFile::new(command, inputs, chart.seed(), chart.sample_count())
        .with_strategy(scene.geometry.strategy())
        .with_tolerances(tolerances)
}

fn run(cli: Cli) -> Result<(ReportFile, Option<PathBuf>)> {
    let mut inputs = Inputs::default();
    match cli.command {
        Command::Compat {
            scene,
            which,
            common,
        } => {
            let s = load_scene(&mut inputs, &scene, &common)?;
            let mut tol = s.tolerances;
            tol.compat = common.tol.unwrap_or(tol.compat);
            let mut rep = scene_report("compat", inputs, &s, tol);
            let mut r = s.geometry.compat_residuals(tol.compat);
            r.checks.retain(|c| match which {
                Which::Nabla => c.name == "nabla_pi",
                Which::D => c.name == "d_pi",
                Which::Both => true,
            });
            rep.absorb(r);
            Ok((rep, common.report))
        }
        Command::Identities { scene, common } => {
            let s = load_scene(&mut inputs, &scene, &common)?;
            let mut tol = s.tolerances;
            tol.identities = common.tol.unwrap_or(tol.identities);
            let g = &s.geometry;
            let mut rep = scene_report("identities", inputs, &s, tol);
            rep.absorb(g.prop11_identity_suite(tol.identities));
            rep.absorb(g.is_poisson(tol.poisson));
            if g.pi_invertible_on_samples() {
                rep.push(g.jtilde_route_check(tol.identities));
            } else {
                rep.notes
                    .push("pi is singular on the samples; J-tilde route skipped".into());
            }
            Ok((rep, common.report))
        }
        Command::Curvature { scene, common } => {
            let s = load_scene(&mut inputs, &scene, &common)?;
            let mut tol = s.tolerances;
            tol.curvature = common.tol.unwrap_or(tol.curvature);
            let g = &s.geometry;
            let mut rep = scene_report("curvature", inputs, &s, tol);
            let cocycle = g.check_pi_r_cocycle(tol.curvature);
            let compatible = !cocycle.has_flag(poisson_compat::curvature::NOT_COMPATIBLE);
            rep.absorb(g.curvature_report(tol.curvature));
            if compatible {
                rep.absorb(cocycle);
            } else {
                // Both hold only for D^π-compatible pairs.
                rep.demote("leaf_omega_parallel");
                rep.absorb_diagnostics(cocycle);
            }
            rep.absorb_diagnostics(g.kahler_diagnostic(tol.compat));
            rep.absorb_diagnostics(g.einstein_leaf_check(tol.curvature));
            Ok((rep, common.report))
        }
        Command::Transport {
            scene,
            curve,
            steps,
            beta0,
            common,
        } => {
            let s = load_scene(&mut inputs, &scene, &common)?;
            let ctext = inputs.read(&curve)?;
            let c = CurveFile::from_json(&ctext)
                .and_then(|f| f.build())
                .with_context(|| format!("loading curve {}", curve.display()))?;
            let n = s.geometry.dim();
            let beta0 =
                beta0.unwrap_or_else(|| (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect());
            if beta0.len() != n {
                bail!(
                    "--beta0 has {} components, scene dimension is {n}",
                    beta0.len()
                );
            }
            let g = &s.geometry;
            let start = c.point(0.0).context("evaluating the curve at t = 0")?;
            let p0 = poisson_compat::Point::new(start);
            if !g.chart().contains(&p0) {
                bail!("curve starts outside the chart domain");
            }
            let mut tol = s.tolerances;
            tol.transport = common.tol.unwrap_or(tol.transport);
            let mut rep = scene_report("transport", inputs, &s, tol);
            rep.data = Some(serde_json::json!({ "steps": steps, "beta0": beta0 }));
            rep.absorb(g.transport_report(&c, &beta0, steps, tol.transport));
            Ok((rep, common.report))
        }
        Command::Lie { command } => lie_command(inputs, command),
    }
}

fn load_algebra(inputs: &mut Inputs, path: &Path) -> Result<AlgebraFile> {
    let text = inputs.read(path)?;
    AlgebraFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn lie_command(mut inputs: Inputs, command: LieCommand) -> Result<(ReportFile, Option<PathBuf>)> {
    match command {
        LieCommand::Check { algebra, report } => {
            let file = load_algebra(&mut inputs, &algebra)?;
            let alg = file.algebra()?;
            let form = file.form()?;
            let mut rep = ReportFile::exact("lie check", inputs);
            rep.push_exact("jacobi", || alg.jacobi_residual());
            if let Some(b) = &form {
                rep.push_exact("ad_invariance", || b.ad_invariance_residual(&alg));
            } else {
                rep.notes.push("no invariant form given".into());
            }
            Ok((rep, report))
        }
        LieCommand::Search {
            algebras,
            grid,
            samples,
            seed,
            report,
        } => {
            let spec = SearchSpec {
                samples,
                seed,
                ..SearchSpec::parse_grid(&grid)?
            };
            let mut files = Vec::new();
            for path in &algebras {
                let f = load_algebra(&mut inputs, path)?;
                files.push((f.algebra()?, f.form()?));
            }
            let mut rep = ReportFile::exact("lie search", inputs);
            rep.seed = seed;
            let mut tables = Vec::new();
            let mut witnesses = 0;
            for (alg, form) in &files {
                let name = alg.name();
                let mut valid = rep.push_exact(&format!("{name}/jacobi"), || alg.jacobi_residual());
                if let Some(b) = form {
                    valid &= rep.push_exact(&format!("{name}/ad_invariance"), || {
                        b.ad_invariance_residual(alg)
                    });
                }
                if !valid {
                    continue;
                }
                let table = alg.search(&spec)?;
                witnesses += table.separating();
                tables.push(table);
            }
            // Separating vectors exist iff residual 0.
            rep.push(Check::new(
                "independence_witness",
                if witnesses > 0 { 0.0 } else { 1.0 },
                0.5,
            ));
            rep.data = Some(serde_json::json!({ "grid": grid, "tables": tables }));
            Ok((rep, report))
        }
        LieCommand::Geometry {
            algebra,
            vector,
            report,
        } => {
            let file = load_algebra(&mut inputs, &algebra)?;
            let alg = file.algebra()?;
            let Some(form) = file.form()? else {
                bail!("{} has no invariant form", algebra.display());
            };
            let u = vector
                .iter()
                .map(|s| lie::rational(s))
                .collect::<std::result::Result<Vec<Rational>, _>>()?;
            let geo = alg.biinvariant_geometry(&form, &u)?;
            let mut rep = ReportFile::exact("lie geometry", inputs);
            for (name, value) in [
                ("skewness", &geo.skewness),
                ("cond14", &geo.cond14),
                ("cond15", &geo.cond15),
            ] {
                rep.push_exact(name, || lie::rational(value).expect("rendered rational"));
            }
            rep.data = Some(serde_json::to_value(&geo)?);
            Ok((rep, report))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (rep, path) = match run(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    eprint!("{}", rep.summary());
    let json = rep.to_json();
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json + "\n") {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if rep.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
