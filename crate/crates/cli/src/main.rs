use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vklab::convergence::{run_convergence, ConvergenceConfig};
use vklab::field2d::DEFAULT_MARGIN;
use vklab::identities::{corpus, run_suite, Resolution};
use vklab::multiplicity::{
    read_family_spec, run_multiplicity_experiment, write_plot_csv, FamilySpec,
};
use vklab::radial::{read_profile_csv, write_profile_csv, RadialProfile, DEFAULT_CELLS};
use vklab::stationarity::{verify_proposition, StationarityConfig, TOL_RADIAL};
use vklab::{Error, Result};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vklab",
    version,
    about = "Radial stationary points of the constrained von Kármán energy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a radial profile against generated admissible variations.
    VerifyStationarity(Common),
    /// Check the angular averaging identities on the built-in corpus.
    VerifyAveraging(Common),
    /// Build the sign-flip family and check every member.
    Multiplicity(Common),
    /// Grid refinement study of the radial and lattice discretizations.
    Convergence(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in name (paraboloid, quartic, constant, family-default), a
    /// `t,v,v1,v2` CSV file, or a family spec file.
    #[arg(long)]
    profile: Option<String>,
    /// Family spec file (`key = value`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "VKLAB_OUT", default_value = "vklab-out")]
    out: PathBuf,
    /// Radial midpoint cells J (power of two).
    #[arg(long)]
    grid_j: Option<usize>,
    /// Lattice spacing h; 1/h must be a power of two.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Number of averaging angles M (power of two).
    #[arg(long)]
    angles_m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol_adm: Option<f64>,
    #[arg(long)]
    tol_stat: Option<f64>,
    /// Number of flipped family members.
    #[arg(long)]
    members: Option<usize>,
    /// Resolution levels of a refinement study.
    #[arg(long)]
    levels: Option<usize>,
    /// Distance kept from the unit circle by 2D grids.
    #[arg(long)]
    margin: Option<f64>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn power_of_two(name: &str, n: usize) -> Result<usize> {
    if n.is_power_of_two() {
        Ok(n)
    } else {
        Err(config_error(format!("{name} = {n} is not a power of two")))
    }
}

fn positive(name: &str, x: Option<f64>, default: f64) -> Result<f64> {
    let x = x.unwrap_or(default);
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config_error(format!("{name} = {x} must be positive")))
    }
}

impl Common {
    fn cells(&self) -> Result<usize> {
        power_of_two("--grid-j", self.grid_j.unwrap_or(DEFAULT_CELLS))
    }

    fn per_unit(&self, default: usize) -> Result<usize> {
        let Some(h) = self.grid_h else {
            return Ok(default);
        };
        if !(h > 0.0 && h < 1.0) {
            return Err(config_error(format!("--grid-h = {h} is outside (0, 1)")));
        }
        let k = (1.0 / h).round();
        if ((1.0 / h) - k).abs() > 1e-9 * k {
            return Err(config_error(format!("1/h = {} is not an integer", 1.0 / h)));
        }
        power_of_two("1/h", k as usize)
    }

    fn angles(&self, default: usize) -> Result<usize> {
        power_of_two("--angles-m", self.angles_m.unwrap_or(default))
    }

    fn levels(&self, default: usize) -> Result<usize> {
        let l = self.levels.unwrap_or(default);
        if l < 2 {
            return Err(config_error(format!(
                "--levels = {l}: a convergence order needs at least two resolutions"
            )));
        }
        Ok(l)
    }

    fn margin(&self) -> Result<f64> {
        positive("--margin", self.margin, DEFAULT_MARGIN)
    }

    fn family_spec(&self) -> Result<FamilySpec> {
        let mut spec = match &self.config {
            Some(p) => read_family_spec(p)?,
            None => FamilySpec::default(),
        };
        if let Some(m) = self.members {
            spec.members = m;
        }
        Ok(spec)
    }

    fn load_profile(&self) -> Result<RadialProfile> {
        let Some(sel) = self.profile.as_deref() else {
            return match &self.config {
                Some(p) => Ok(read_family_spec(p)?.build()?.base_profile()),
                None => Err(config_error("--profile or --config is required")),
            };
        };
        match sel {
            "paraboloid" => return Ok(RadialProfile::paraboloid()),
            "quartic" => return Ok(RadialProfile::quartic()),
            "constant" => return Ok(RadialProfile::constant(1.0)),
            "family-default" => {
                return Ok(FamilySpec::default()
                    .build()?
                    .base_profile()
                    .with_name("family-default"))
            }
            _ => {}
        }
        let path = Path::new(sel);
        if !path.is_file() {
            return Err(config_error(format!(
                "'{sel}' is neither a built-in profile nor a readable file"
            )));
        }
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(sel)
            .to_string();
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            read_profile_csv(name, File::open(path)?)
        } else {
            Ok(read_family_spec(path)?
                .build()?
                .base_profile()
                .with_name(name))
        }
    }

    fn stationarity_config(&self) -> Result<StationarityConfig> {
        let d = StationarityConfig::default();
        Ok(StationarityConfig {
            seed: self.seed,
            radial_cells: self.cells()?,
            tol_adm: positive("--tol-adm", self.tol_adm, TOL_RADIAL)?,
            tol_stat: positive("--tol-stat", self.tol_stat, TOL_RADIAL)?,
            per_unit: self.per_unit(d.per_unit)?,
            margin: self.margin()?,
            angles: self.angles(d.angles)?,
            ..d
        })
    }
}

fn write_json(dir: &Path, file: &str, value: &impl Serialize) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn verdict(pass: bool) -> u8 {
    if pass {
        0
    } else {
        EXIT_FAIL
    }
}

fn cmd_verify_stationarity(c: &Common) -> Result<u8> {
    let v = c.load_profile()?;
    let cfg = c.stationarity_config()?;
    let report = verify_proposition(&v, &cfg)?;
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    let path = write_json(&c.out, "stationarity.json", &report)?;
    let worst = report
        .variations
        .iter()
        .filter(|r| r.pass.is_some())
        .fold(0.0f64, |m, r| m.max(r.normalized));
    println!(
        "{}: {} variations, worst normalized defect {worst:.3e}, {:?} -> {}",
        report.profile,
        report.variations.len(),
        report.verdict,
        path.display()
    );
    Ok(verdict(report.passed()))
}

fn cmd_verify_averaging(c: &Common) -> Result<u8> {
    let base = Resolution {
        per_unit: c.per_unit(Resolution::default().per_unit)?,
        angles: c.angles(Resolution::default().angles)?,
    };
    let n = c.levels(2)?;
    let levels: Vec<Resolution> = std::iter::successors(Some(base), |r| Some(r.refined()))
        .take(n)
        .collect();
    let report = run_suite(&corpus(), &levels, c.margin()?)?;
    let path = write_json(&c.out, "averaging.json", &report)?;
    for f in &report.functions {
        let line: Vec<String> = f
            .identities
            .iter()
            .map(|i| format!("{} {:?}", i.identity, i.status).to_lowercase())
            .collect();
        println!("{:>16}: {}", f.function, line.join(", "));
    }
    println!("averaging: {} -> {}", report.verdict, path.display());
    Ok(verdict(report.passed()))
}

fn cmd_multiplicity(c: &Common) -> Result<u8> {
    let spec = c.family_spec()?;
    let cfg = c.stationarity_config()?;
    let run = run_multiplicity_experiment(&spec, &cfg)?;
    let path = write_json(&c.out, "multiplicity.json", &run.report)?;
    for m in &run.members {
        let f = File::create(c.out.join(format!("member_{}.csv", m.index)))?;
        write_profile_csv(&m.profile, &run.grid, BufWriter::new(f))?;
    }
    write_plot_csv(&run, &c.out.join("plot.csv"))?;
    let r = &run.report;
    println!(
        "family N = {}, {} members: distinct = {} (min separation {:.6e}), det {}, energy {}, {:?} -> {}",
        r.family.depth,
        spec.members,
        r.distinct,
        r.min_separation,
        if r.det_check.pass { "PASS" } else { "FAIL" },
        if r.energy_check.pass { "PASS" } else { "FAIL" },
        r.verdict,
        path.display()
    );
    Ok(verdict(run.report.passed()))
}

fn cmd_convergence(c: &Common) -> Result<u8> {
    let v = c.load_profile()?;
    let d = ConvergenceConfig::default();
    let cfg = ConvergenceConfig {
        cells: power_of_two("--grid-j", c.grid_j.unwrap_or(d.cells))?,
        per_unit: c.per_unit(d.per_unit)?,
        levels: c.levels(d.levels)?,
        margin: c.margin()?,
    };
    let report = run_convergence(&v, &cfg)?;
    let path = write_json(&c.out, "convergence.json", &report)?;
    for ch in &report.checks {
        let orders: Vec<String> = ch
            .orders
            .iter()
            .map(|o| o.map_or("-".into(), |o| format!("{o:.3}")))
            .collect();
        println!(
            "{:>18}: orders [{}] {:?}",
            ch.name,
            orders.join(", "),
            ch.status
        );
    }
    println!(
        "{}: {:?} -> {}",
        report.profile,
        report.verdict,
        path.display()
    );
    Ok(verdict(report.passed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::VerifyStationarity(c) => cmd_verify_stationarity(c),
        Command::VerifyAveraging(c) => cmd_verify_averaging(c),
        Command::Multiplicity(c) => cmd_multiplicity(c),
        Command::Convergence(c) => cmd_convergence(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            })
        }
    }
}
