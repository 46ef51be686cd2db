//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage / parse / bad input file, 2 construction
//! failure, 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{dim_poly_space, moller_bound, moller_bound_implicit, BoundReport};
use crate::constructor::{build_degree3_rule, build_rule, CubatureRule};
use crate::moments::{
    product_axis_moments, radial_moments, AxisMoments, MeasureSpec, MomentOracle, RadialMoments,
};
use crate::polyparse::{parse, Polynomial};
use crate::verify::{apply_rule, exactness_sweep, relative_error, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONSTRUCTION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

const POLYNOMIAL_HELP: &str = "\
Polynomials are sums of terms such as `3*x1^2*x2 - 0.5*x3^4 + 2`:
  expression := term (('+'|'-') term)*
  term       := [coefficient '*'] factor ('*' factor)*  |  coefficient
  factor     := 'x' index ['^' exponent]
Indices are 1-based; whitespace is ignored; coefficient and exponent
default to 1.";

#[derive(Debug, Parser)]
#[command(
    name = "cubature5",
    version,
    about = "Fifth-degree cubature rules with few points",
    after_help = POLYNOMIAL_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a rule and write it as JSON or CSV.
    Generate(GenerateArgs),
    /// Check a rule file against the closed-form moments of its region.
    Verify(VerifyArgs),
    /// Apply a rule file to a polynomial.
    #[command(after_help = POLYNOMIAL_HELP)]
    Integrate(IntegrateArgs),
    /// Print the Möller lower bound on the number of nodes.
    Bounds(BoundsArgs),
    /// Print closed-form moments of a measure.
    #[command(after_help = POLYNOMIAL_HELP)]
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionName {
    Cube,
    Gaussian,
    Ball,
    Shell,
    ExpRadial,
    CustomProduct,
    CustomRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Region selector shared by `generate` and `moments`.
#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum)]
    pub region: RegionName,
    /// Dimension (at least 4).
    #[arg(long)]
    pub n: usize,
    /// Gegenbauer exponent for `cube`: one value or a comma list, one per axis.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Inner radius of `shell`, in [0, 1).
    #[arg(long)]
    pub r: Option<f64>,
    /// `custom-product` axis moments `m0,m2,m4,m6`; separate axes with `;`
    /// or give one set for all axes.
    #[arg(long)]
    pub moments: Option<String>,
    /// `custom-radial` moments `L(1),L(x1^2),L(x1^4),L(x1^2*x2^2)`.
    #[arg(long = "radial-moments")]
    pub radial_moments: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Override the free parameter of the product construction.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// 5 (default) or 3.
    #[arg(long, default_value_t = 5)]
    pub degree: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub verbose: bool,
}

/// Moments for rule files whose region is `custom-*`.
#[derive(Debug, Args)]
pub struct CustomMomentArgs {
    #[arg(long)]
    pub moments: Option<String>,
    #[arg(long = "radial-moments")]
    pub radial_moments: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub rule: PathBuf,
    /// Highest total degree checked.
    #[arg(long, default_value_t = 6)]
    pub degree: u32,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub custom: CustomMomentArgs,
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub rule: PathBuf,
    /// Polynomial to integrate.
    pub expression: String,
    #[command(flatten)]
    pub custom: CustomMomentArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub degree: u32,
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Print the integral of this polynomial instead of the table.
    #[arg(long)]
    pub monomial: Option<String>,
}

/// A failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn construction(message: impl ToString) -> Self {
        Self {
            code: EXIT_CONSTRUCTION,
            message: message.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Integrate(a) => cmd_integrate(&a, out, err),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Moments(a) => cmd_moments(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::usage(e)
}

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("cannot parse {what} value '{}'", s.trim())))
        })
        .collect()
}

fn parse_axis_moments(text: &str, n: usize) -> CliResult<Vec<AxisMoments>> {
    let groups: Vec<&str> = text.split(';').filter(|s| !s.trim().is_empty()).collect();
    let axes = groups
        .iter()
        .map(|g| {
            let v = parse_list(g, "--moments")?;
            if v.len() != 4 {
                return Err(CliError::usage(format!(
                    "--moments expects m0,m2,m4,m6 per axis, got {} values",
                    v.len()
                )));
            }
            AxisMoments::even(v[0], v[1], v[2], v[3]).map_err(CliError::usage)
        })
        .collect::<CliResult<Vec<_>>>()?;
    match axes.len() {
        1 => Ok(vec![axes[0]; n]),
        len if len == n => Ok(axes),
        len => Err(CliError::usage(format!(
            "--moments has {len} axes but n = {n}"
        ))),
    }
}

fn parse_radial_moments(text: &str) -> CliResult<RadialMoments> {
    let v = parse_list(text, "--radial-moments")?;
    if v.len() != 4 {
        return Err(CliError::usage(format!(
            "--radial-moments expects L(1),L(x1^2),L(x1^4),L(x1^2*x2^2), got {} values",
            v.len()
        )));
    }
    Ok(RadialMoments {
        mass: v[0],
        second: v[1],
        fourth: v[2],
        mixed: v[3],
    })
}

impl MeasureArgs {
    /// Rejects parameters that do not belong to the selected region.
    fn validate(&self) -> CliResult {
        let allowed = |flag: &str, present: bool, regions: &[RegionName]| -> CliResult {
            if present && !regions.contains(&self.region) {
                Err(CliError::usage(format!(
                    "{flag} does not apply to region {:?}",
                    self.region
                )))
            } else {
                Ok(())
            }
        };
        allowed("--alpha", self.alpha.is_some(), &[RegionName::Cube])?;
        allowed("--r", self.r.is_some(), &[RegionName::Shell])?;
        allowed("--moments", self.moments.is_some(), &[RegionName::CustomProduct])?;
        allowed(
            "--radial-moments",
            self.radial_moments.is_some(),
            &[RegionName::CustomRadial],
        )?;
        match self.region {
            RegionName::CustomProduct if self.moments.is_none() => {
                Err(CliError::usage("custom-product needs --moments"))
            }
            RegionName::CustomRadial if self.radial_moments.is_none() => {
                Err(CliError::usage("custom-radial needs --radial-moments"))
            }
            _ => Ok(()),
        }
    }

    fn build(&self) -> CliResult<MeasureSpec> {
        self.validate()?;
        let n = self.n;
        let spec = match self.region {
            RegionName::Cube => match &self.alpha {
                None => MeasureSpec::cube(n),
                Some(text) => {
                    let alpha = parse_list(text, "--alpha")?;
                    if alpha.len() == 1 {
                        MeasureSpec::gegenbauer(n, alpha[0])
                    } else if alpha.len() == n {
                        MeasureSpec::gegenbauer_axes(alpha)
                    } else {
                        return Err(CliError::usage(format!(
                            "--alpha has {} values but n = {n}",
                            alpha.len()
                        )));
                    }
                }
            },
            RegionName::Gaussian => MeasureSpec::gaussian(n),
            RegionName::Ball => MeasureSpec::unit_ball(n),
            RegionName::Shell => MeasureSpec::shell(n, self.r.unwrap_or(0.0)),
            RegionName::ExpRadial => MeasureSpec::exp_radial(n),
            RegionName::CustomProduct => {
                let axes = parse_axis_moments(self.moments.as_deref().unwrap_or_default(), n)?;
                MeasureSpec::custom_product(axes)
            }
            RegionName::CustomRadial => {
                let m = parse_radial_moments(self.radial_moments.as_deref().unwrap_or_default())?;
                MeasureSpec::custom_radial(n, m)
            }
        };
        spec.map_err(CliError::usage)
    }
}

/// Measure a rule file refers to, or `None` for custom regions without
/// their moments.
fn measure_of_rule(rule: &CubatureRule, custom: &CustomMomentArgs) -> CliResult<Option<MeasureSpec>> {
    let n = rule.dimension;
    match rule.region.as_str() {
        "custom-product" => custom
            .moments
            .as_deref()
            .map(|m| {
                MeasureSpec::custom_product(parse_axis_moments(m, n)?).map_err(CliError::usage)
            })
            .transpose(),
        "custom-radial" => custom
            .radial_moments
            .as_deref()
            .map(|m| MeasureSpec::custom_radial(n, parse_radial_moments(m)?).map_err(CliError::usage))
            .transpose(),
        tag => MeasureSpec::from_region_tag(tag, n)
            .map(Some)
            .map_err(CliError::usage),
    }
}

fn load_rule(path: &Path) -> CliResult<CubatureRule> {
    CubatureRule::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let measure = args.measure.build()?;
    if args.gamma.is_some() && !measure.is_product() {
        return Err(CliError::usage(
            "--gamma only applies to product regions (cube, custom-product)",
        ));
    }
    let rule = match args.degree {
        5 => build_rule(&measure, args.gamma),
        3 if args.gamma.is_none() => build_degree3_rule(&measure),
        3 => return Err(CliError::usage("--gamma is not used by the degree-3 rule")),
        d => return Err(CliError::usage(format!("--degree must be 3 or 5, got {d}"))),
    }
    .map_err(CliError::construction)?;
    let report = BoundReport::new(rule.dimension, rule.declared_degree, rule.len())
        .map_err(CliError::construction)?;

    let body = match args.format {
        Format::Json => rule.to_json(),
        Format::Csv => rule.to_csv(),
    };
    // Keep stdout clean for the rule itself when no file is given.
    let summary: &mut dyn Write = match &args.out {
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            out
        }
        None => {
            out.write_all(body.as_bytes()).map_err(io_error)?;
            &mut *err
        }
    };
    let mut lines = vec![
        format!("region: {}", rule.region),
        format!("points: {}", rule.len()),
        format!("Möller bound: {}", report.moller_bound),
        format!("gap: {}", report.gap),
        format!("attains Möller bound: {}", rule.attains_moller_bound),
        format!("points in region: {}", rule.points_in_region),
        format!("negative weights: {}", rule.has_negative_weights),
        format!("gamma: {:e}", rule.gamma),
    ];
    if args.verbose {
        lines.push(format!("mass: {:e}", rule.mass));
        lines.push(format!("dim P_n^k bound: {}", report.dim_bound));
        lines.push(format!("scale diagonal: {:?}", rule.scale_diag));
        lines.push(format!("center dropped: {}", rule.center_dropped));
    }
    for line in lines {
        writeln!(summary, "{line}").map_err(io_error)?;
    }
    for w in &rule.warnings {
        writeln!(err, "warning: {w}").map_err(io_error)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let rule = load_rule(&args.rule)?;
    let measure = measure_of_rule(&rule, &args.custom)?.ok_or_else(|| {
        CliError::usage(format!(
            "region {} needs --moments or --radial-moments to verify",
            rule.region
        ))
    })?;
    let oracle = MomentOracle::new(&measure);
    let mut degree = args.degree;
    if degree > oracle.max_degree() {
        writeln!(
            err,
            "note: moments of region {} are known to degree {}; checking up to that",
            rule.region,
            oracle.max_degree()
        )
        .map_err(io_error)?;
        degree = oracle.max_degree();
    }
    let report = exactness_sweep(&rule, &oracle, degree, args.tolerance).map_err(CliError::usage)?;
    for d in &report.degrees {
        let status = if d.max_rel_error <= report.tolerance {
            "ok"
        } else if d.degree > rule.declared_degree {
            "fail (above declared degree)"
        } else {
            "FAIL"
        };
        let mut line = format!("degree {}: max rel error {:.3e} {status}", d.degree, d.max_rel_error);
        if args.verbose || d.max_rel_error > report.tolerance {
            line.push_str(&format!(" worst {:?}", d.worst_monomial));
        }
        writeln!(out, "{line}").map_err(io_error)?;
    }
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json())
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    if report.pass {
        writeln!(out, "PASS: exact to degree {}", rule.declared_degree).map_err(io_error)?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "FAIL: not exact to degree {}", rule.declared_degree).map_err(io_error)?;
        Ok(EXIT_VERIFICATION)
    }
}

fn cmd_integrate(args: &IntegrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let rule = load_rule(&args.rule)?;
    let poly = parse(&args.expression, rule.dimension).map_err(CliError::usage)?;
    let value = apply_rule(&rule, &poly).map_err(CliError::usage)?;
    writeln!(out, "rule: {value:e}").map_err(io_error)?;
    let measure = match measure_of_rule(&rule, &args.custom) {
        Ok(m) => m,
        Err(e) => {
            writeln!(err, "note: no exact value: {}", e.message).map_err(io_error)?;
            None
        }
    };
    let Some(measure) = measure else {
        return Ok(EXIT_OK);
    };
    let oracle = MomentOracle::new(&measure);
    match oracle.integrate(&poly) {
        Ok(exact) => {
            let scale = poly.terms().values().map(|c| c.abs()).fold(0.0, f64::max);
            writeln!(out, "exact: {exact:e}").map_err(io_error)?;
            writeln!(
                out,
                "relative error: {:e}",
                relative_error(value, exact, oracle.mass() * scale.max(f64::MIN_POSITIVE))
            )
            .map_err(io_error)?;
        }
        Err(e) => writeln!(err, "note: no exact value: {e}").map_err(io_error)?,
    }
    Ok(EXIT_OK)
}

fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> CliResult<i32> {
    let bound = moller_bound(args.n, args.degree).map_err(CliError::usage)?;
    writeln!(out, "Möller bound: {bound}").map_err(io_error)?;
    if args.verbose {
        let implicit = moller_bound_implicit(args.n, args.degree).map_err(CliError::usage)?;
        let dim = dim_poly_space(args.n, args.degree / 2).map_err(CliError::usage)?;
        writeln!(out, "implicit form 2 dim P - [k even]: {implicit}").map_err(io_error)?;
        writeln!(out, "dim P_n^k bound: {dim}").map_err(io_error)?;
    }
    Ok(EXIT_OK)
}

fn cmd_moments(args: &MomentsArgs, out: &mut dyn Write) -> CliResult<i32> {
    let measure = args.measure.build()?;
    let oracle = MomentOracle::new(&measure);
    if let Some(expr) = &args.monomial {
        let poly = parse(expr, measure.dimension()).map_err(CliError::usage)?;
        let value = oracle.integrate(&poly).map_err(CliError::usage)?;
        writeln!(out, "{value:e}").map_err(io_error)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "region: {}", measure.region_tag()).map_err(io_error)?;
    writeln!(out, "mass: {:e}", measure.mass()).map_err(io_error)?;
    if measure.is_product() {
        writeln!(out, "axis  L(x^2)/L(1)  L(x^4)/L(1)  L(x^6)/L(1)").map_err(io_error)?;
        for axis in 0..measure.dimension() {
            let m = product_axis_moments(&measure, axis).map_err(CliError::usage)?;
            writeln!(out, "{:>4}  {:e}  {:e}  {:e}", axis + 1, m[1], m[2], m[3]).map_err(io_error)?;
        }
    } else {
        let r = radial_moments(&measure).map_err(CliError::usage)?;
        for (name, value) in [
            ("x1^2", r.second),
            ("x1^4", r.fourth),
            ("x1^2*x2^2", r.mixed),
        ] {
            writeln!(out, "{name}: {value:e}").map_err(io_error)?;
        }
        if oracle.max_degree() >= 6 {
            for name in ["x1^6", "x1^4*x2^2", "x1^2*x2^2*x3^2"] {
                let poly: Polynomial = parse(name, measure.dimension()).map_err(CliError::usage)?;
                let value = oracle.integrate(&poly).map_err(CliError::usage)?;
                writeln!(out, "{name}: {value:e}").map_err(io_error)?;
            }
        }
    }
    Ok(EXIT_OK)
}
