mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use singquad::experiments::{
    cmd_aspect_ratio, cmd_convergence, cmd_selftest, cmd_solve_radiation, to_csv, write_output, MeshSource,
    RadiationStudy, StudySpec,
};
use singquad::nystrom::Formulation;
use singquad::{Error, LayerOperator, Variant};

use config::Options;

/// Singular boundary-element integrals on curved triangles and a
/// Burton-Miller radiation solver.
#[derive(Debug, Parser)]
#[command(name = "singquad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative error against the oracle versus angular point count.
    Convergence(Flags),
    /// Minimal angular point count for 1e-8 versus element stretch.
    Aspect(Flags),
    /// Manufactured exterior Neumann problem on refined meshes.
    Radiate(Flags),
    /// Runs the invariant suites of every module.
    Selftest(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Settings file with `key = value` lines; flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// single|double|adjoint|hyper (comma list for the element studies).
    #[arg(long)]
    kernel: Option<String>,
    /// guiggiani|guisig|present|present-a|present-naive (comma list for the element studies).
    #[arg(long)]
    variant: Option<String>,
    /// Wavenumber.
    #[arg(long)]
    k: Option<String>,
    /// Sigmoid exponent.
    #[arg(long)]
    m: Option<String>,
    /// Angular point counts, strictly increasing.
    #[arg(long = "n-angular", value_name = "LIST")]
    n_angular: Option<String>,
    /// Radial point count.
    #[arg(long = "n-radial", value_name = "INT")]
    n_radial: Option<String>,
    /// Element stretch values.
    #[arg(long, value_name = "LIST")]
    s: Option<String>,
    /// Field point labels a, b, c, d.
    #[arg(long, value_name = "LIST")]
    points: Option<String>,
    /// Mesh file; the built-in sphere is used without one.
    #[arg(long, value_name = "PATH")]
    mesh: Option<String>,
    /// Finest sphere refinement level.
    #[arg(long, value_name = "INT")]
    levels: Option<String>,
    /// Output file; stdout without one.
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// burton-miller|cbie.
    #[arg(long)]
    formulation: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn usage(msg: String) -> Failure {
    Failure::Usage(msg)
}

impl Flags {
    fn options(&self) -> Result<Options, Failure> {
        let mut o = match &self.config {
            Some(p) => Options::read(p).map_err(usage)?,
            None => Options::default(),
        };
        o.set("kernel", self.kernel.as_ref());
        o.set("variant", self.variant.as_ref());
        o.set("k", self.k.as_ref());
        o.set("m", self.m.as_ref());
        o.set("n-angular", self.n_angular.as_ref());
        o.set("n-radial", self.n_radial.as_ref());
        o.set("s", self.s.as_ref());
        o.set("points", self.points.as_ref());
        o.set("mesh", self.mesh.as_ref());
        o.set("levels", self.levels.as_ref());
        o.set("out", self.out.as_ref());
        o.set("formulation", self.formulation.as_ref());
        Ok(o)
    }
}

fn apply_study(o: &Options, study: &mut StudySpec) -> Result<(), Failure> {
    if let Some(v) = o.list::<LayerOperator>("kernel").map_err(usage)? {
        study.kernels = v;
    }
    if let Some(v) = o.list::<Variant>("variant").map_err(usage)? {
        study.variants = v;
    }
    if let Some(v) = o.get::<f64>("k").map_err(usage)? {
        study.k = v;
    }
    if let Some(v) = o.get::<f64>("m").map_err(usage)? {
        study.m = Some(v);
    }
    if let Some(v) = o.list::<usize>("n-angular").map_err(usage)? {
        study.n_sweep = v;
    }
    if let Some(v) = o.get::<usize>("n-radial").map_err(usage)? {
        study.n_radial = v;
    }
    if let Some(v) = o.list::<f64>("s").map_err(usage)? {
        study.s = v;
    }
    if let Some(v) = o.list::<String>("points").map_err(usage)? {
        study.field_points = v;
    }
    study.out = o.raw("out").map(PathBuf::from);
    study.validate()?;
    Ok(())
}

fn radiation_study(o: &Options) -> Result<RadiationStudy, Failure> {
    let mut study = RadiationStudy::default();
    if let Some(v) = o.get::<LayerOperator>("kernel").map_err(usage)? {
        return Err(Failure::Usage(format!(
            "radiate assembles all kernels; --kernel {v} is not accepted"
        )));
    }
    if let Some(v) = o.get::<Variant>("variant").map_err(usage)? {
        study.quad.variant = v;
    }
    if let Some(v) = o.list::<usize>("n-angular").map_err(usage)? {
        match v.as_slice() {
            [n] => study.quad.n_angular = *n,
            _ => return Err(Failure::Usage("radiate takes a single --n-angular value".into())),
        }
    }
    if let Some(v) = o.get::<usize>("n-radial").map_err(usage)? {
        study.quad.n_radial = v;
    }
    if let Some(v) = o.get::<f64>("m").map_err(usage)? {
        study.quad.m = Some(v);
    }
    if let Some(v) = o.get::<f64>("k").map_err(usage)? {
        study.k = v;
    }
    if let Some(v) = o.get::<u32>("levels").map_err(usage)? {
        study.levels = v;
    }
    if let Some(v) = o.get::<Formulation>("formulation").map_err(usage)? {
        study.formulation = v;
    }
    if let Some(p) = o.raw("mesh") {
        study.mesh = MeshSource::File(PathBuf::from(p));
    }
    study.quad.validate()?;
    if study.formulation == Formulation::BurtonMiller && !(study.k > 0.0 && study.k.is_finite()) {
        return Err(Failure::Usage(format!("Burton-Miller needs k > 0 (got {})", study.k)));
    }
    Ok(study)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Convergence(flags) => {
            let o = flags.options()?;
            let mut study = StudySpec::convergence();
            apply_study(&o, &mut study)?;
            let rows = cmd_convergence(&study)?;
            write_output(&to_csv(&rows), study.out.as_deref())?;
        }
        Command::Aspect(flags) => {
            let o = flags.options()?;
            let mut study = StudySpec::aspect();
            apply_study(&o, &mut study)?;
            let rows = cmd_aspect_ratio(&study)?;
            write_output(&to_csv(&rows), study.out.as_deref())?;
        }
        Command::Radiate(flags) => {
            let o = flags.options()?;
            let study = radiation_study(&o)?;
            let rows = cmd_solve_radiation(&study)?;
            write_output(&to_csv(&rows), o.raw("out").map(Path::new))?;
        }
        Command::Selftest(flags) => {
            let o = flags.options()?;
            let report = cmd_selftest();
            write_output(&report.render(), o.raw("out").map(Path::new))?;
            if !report.passed() {
                let labels: Vec<String> = report.failures().map(|f| format!("{}/{}", f.module, f.group)).collect();
                return Err(Failure::Numerical(format!("self-test failed: {}", labels.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
