//! Command-line front end. `run` returns the exit code and both output streams
//! so the binary stays a thin wrapper and tests can drive it directly.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bicomplex::{
    build_bicomplex, contracted_circle_parity, total_homology, AReading, BicomplexError,
    BicomplexOptions, IdentityCheck,
};
use crate::diagram::{cable_with, parse_diagram, ColorTuple, FramedLinkDiagram, StrandOrder};
use crate::intlinalg::{HomologySummary, LinalgError};
use crate::khovanov::{graded_euler, homology, KhovanovComplex, KhovanovError};
use crate::pairing::{pairing_complex, LineOrder, PairingError, DEFAULT_PAIRING_BOUND};
use crate::polyoracle::{colored_jones_with, jones, LaurentPoly, OracleError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_IDENTITY: i32 = 2;
pub const EXIT_CAP: i32 = 3;

pub const CAP_ENV: &str = "KHOVACABLE_CAP";

#[derive(Debug, Parser)]
#[command(name = "khovacable", version, about = "Khovanov bicomplexes of cabled link diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unnormalized Jones polynomial.
    Jones(Common),
    /// Colored Jones polynomial via cabling.
    ColoredJones(Colored),
    /// The n-cable as a PD document.
    Cable(Colored),
    /// Khovanov homology table, of the cable when --colors is given.
    Khovanov(OptColored),
    /// The graph of pairings and its signed complex.
    Pairings(PairingArgs),
    /// Identity suite of the bicomplex plus the Euler cross-check.
    BicomplexVerify(Colored),
    /// Homology of the total complex.
    TotalHomology(Colored),
}

#[derive(Debug, Args)]
pub struct Common {
    /// PD-code JSON file.
    pub input: PathBuf,
    /// Human-readable output instead of JSON.
    #[arg(long)]
    pub table: bool,
    /// State-space cap (overrides KHOVACABLE_CAP).
    #[arg(long)]
    pub cap: Option<u128>,
    #[arg(long, value_enum, default_value_t = StrandOrderArg::Leftmost)]
    pub strand_order: StrandOrderArg,
    #[arg(long, value_enum, default_value_t = LineOrderArg::SmallerAbove)]
    pub line_order: LineOrderArg,
    #[arg(long, value_enum, default_value_t = AReadingArg::LeftToRight)]
    pub a_reading: AReadingArg,
}

#[derive(Debug, Args)]
pub struct Colored {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated colors, one per component.
    #[arg(long, value_parser = parse_colors)]
    pub colors: ColorTuple,
}

#[derive(Debug, Args)]
pub struct OptColored {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_colors)]
    pub colors: Option<ColorTuple>,
}

#[derive(Debug, Args)]
pub struct PairingArgs {
    #[arg(long, value_parser = parse_colors)]
    pub colors: ColorTuple,
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_enum, default_value_t = LineOrderArg::SmallerAbove)]
    pub line_order: LineOrderArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrandOrderArg {
    Leftmost,
    Rightmost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineOrderArg {
    SmallerAbove,
    LargerAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AReadingArg {
    LeftToRight,
    RightToLeft,
}

impl From<StrandOrderArg> for StrandOrder {
    fn from(a: StrandOrderArg) -> Self {
        match a {
            StrandOrderArg::Leftmost => StrandOrder::Leftmost,
            StrandOrderArg::Rightmost => StrandOrder::Rightmost,
        }
    }
}

impl From<LineOrderArg> for LineOrder {
    fn from(a: LineOrderArg) -> Self {
        match a {
            LineOrderArg::SmallerAbove => LineOrder::SmallerAbove,
            LineOrderArg::LargerAbove => LineOrder::LargerAbove,
        }
    }
}

impl From<AReadingArg> for AReading {
    fn from(a: AReadingArg) -> Self {
        match a {
            AReadingArg::LeftToRight => AReading::LeftToRight,
            AReadingArg::RightToLeft => AReading::RightToLeft,
        }
    }
}

pub fn parse_colors(s: &str) -> Result<ColorTuple, String> {
    let v = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad color {p:?}: {e}"))
        })
        .collect::<Result<Vec<u32>, String>>()?;
    if v.contains(&0) {
        return Err("colors must be positive".into());
    }
    Ok(ColorTuple(v))
}

/// Exit code, stdout and stderr of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Report still printed on stdout, e.g. a failing identity suite.
    report: Option<String>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
            report: None,
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::CapExceeded { .. } => EXIT_CAP,
            OracleError::HalfInteger { .. } => EXIT_IDENTITY,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<KhovanovError> for Failure {
    fn from(e: KhovanovError) -> Self {
        let code = match e {
            KhovanovError::CapExceeded { .. } => EXIT_CAP,
            _ => EXIT_IDENTITY,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<PairingError> for Failure {
    fn from(e: PairingError) -> Self {
        let code = match e {
            PairingError::NotAComplex { .. } => EXIT_IDENTITY,
            PairingError::TooLarge { .. } => EXIT_CAP,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<BicomplexError> for Failure {
    fn from(e: BicomplexError) -> Self {
        let code = match &e {
            BicomplexError::CapExceeded { .. }
            | BicomplexError::Khovanov(KhovanovError::CapExceeded { .. }) => EXIT_CAP,
            BicomplexError::Diagram(_) | BicomplexError::Pairing(PairingError::Invalid(_)) => {
                EXIT_INPUT
            }
            _ => EXIT_IDENTITY,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        Failure {
            code: EXIT_IDENTITY,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<crate::diagram::DiagramError> for Failure {
    fn from(e: crate::diagram::DiagramError) -> Self {
        Failure::input(e.to_string())
    }
}

/// Cap from the flag, else the environment, else the default.
pub fn resolve_cap(flag: Option<u128>, env: Option<&str>) -> Result<u128, String> {
    let cap = match (flag, env) {
        (Some(c), _) => c,
        (None, Some(s)) => s
            .trim()
            .parse::<u128>()
            .map_err(|e| format!("{CAP_ENV}={s:?}: {e}"))?,
        (None, None) => crate::DEFAULT_CAP,
    };
    if cap == 0 {
        return Err("cap must be positive".into());
    }
    Ok(cap)
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(CAP_ENV).ok();
    run_with_env(args, env.as_deref())
}

pub fn run_with_env<I, T>(args: I, cap_env: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(&cli.command, cap_env) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: f.report.unwrap_or_default(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn load(path: &PathBuf) -> Result<FramedLinkDiagram, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_diagram(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn poly_json(p: &LaurentPoly) -> Value {
    let mut v = p.to_json();
    v["text"] = Value::from(p.to_string());
    v
}

fn options(c: &Common, cap: u128) -> BicomplexOptions {
    BicomplexOptions {
        cap,
        strand_order: c.strand_order.into(),
        line_order: c.line_order.into(),
        reading: c.a_reading.into(),
    }
}

fn dispatch(cmd: &Command, cap_env: Option<&str>) -> Result<String, Failure> {
    let common = match cmd {
        Command::Jones(c) => Some(c),
        Command::ColoredJones(c)
        | Command::Cable(c)
        | Command::BicomplexVerify(c)
        | Command::TotalHomology(c) => Some(&c.common),
        Command::Khovanov(c) => Some(&c.common),
        Command::Pairings(_) => None,
    };
    let cap = resolve_cap(common.and_then(|c| c.cap), cap_env).map_err(Failure::input)?;
    match cmd {
        Command::Jones(c) => {
            let d = load(&c.input)?;
            let j = jones(&d, cap)?;
            if c.table {
                return Ok(format!("{j}\n"));
            }
            Ok(pretty(&json!({ "writhe": d.writhe(), "jones": poly_json(&j) })))
        }
        Command::ColoredJones(c) => {
            let d = load(&c.common.input)?;
            let cj = colored_jones_with(&d, &c.colors, cap, c.common.strand_order.into())?;
            if c.common.table {
                return Ok(format!("{cj}\n"));
            }
            Ok(pretty(&json!({ "colors": c.colors.0, "colored_jones": poly_json(&cj) })))
        }
        Command::Cable(c) => {
            let d = load(&c.common.input)?;
            let cd = cable_with(&d, &c.colors, c.common.strand_order.into())?;
            if c.common.table {
                let mut s = String::new();
                let dd = &cd.diagram;
                let _ = writeln!(s, "components {}", dd.components());
                let _ = writeln!(s, "crossings {}", dd.crossing_count());
                let _ = writeln!(s, "writhe {}", dd.writhe());
                for (x, (cr, tag)) in dd.crossings().iter().zip(&cd.tags).enumerate() {
                    let _ = writeln!(
                        s,
                        "{x:>4} pd {:?} sign {:+} source {} under {} over {}",
                        cr.pd, cr.sign, tag.source, tag.under, tag.over
                    );
                }
                return Ok(s);
            }
            Ok(cd.diagram.to_json())
        }
        Command::Khovanov(c) => {
            let d = load(&c.common.input)?;
            let d = match &c.colors {
                Some(n) => cable_with(&d, n, c.common.strand_order.into())?.diagram,
                None => d,
            };
            let kc = KhovanovComplex::build(&d, cap)?;
            kc.check_d_squared()?;
            let h = homology(&kc)?;
            let euler = graded_euler(&kc);
            if c.common.table {
                return Ok(homology_table(&h, &euler));
            }
            let rows: Vec<Value> = h
                .iter()
                .map(|(&(i, j), s)| json!({ "i": i, "j": j, "betti": s.betti, "torsion": s.torsion_json() }))
                .collect();
            Ok(pretty(&json!({
                "crossings": d.crossing_count(),
                "states": kc.total_states(),
                "d_squared": "ok",
                "homology": rows,
                "graded_euler": poly_json(&euler),
            })))
        }
        Command::Pairings(p) => {
            let g = pairing_complex(&p.colors, p.line_order.into(), DEFAULT_PAIRING_BOUND)?;
            if p.table {
                let mut s = String::new();
                for (k, l) in g.levels.iter().enumerate() {
                    let names: Vec<String> = l.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(s, "k={k} |I_k|={} {}", l.len(), names.join(" "));
                }
                for e in &g.edges {
                    let _ = writeln!(
                        s,
                        "{} -> {} {:+}",
                        g.levels[e.level][e.from],
                        g.levels[e.level + 1][e.to],
                        e.sign
                    );
                }
                let _ = writeln!(s, "d^2=ok");
                return Ok(s);
            }
            let mut v = g.to_json();
            v["ranks"] = json!(g.ranks());
            v["d_squared"] = Value::from("ok");
            Ok(pretty(&v))
        }
        Command::BicomplexVerify(c) => {
            let d = load(&c.common.input)?;
            let opts = options(&c.common, cap);
            let b = build_bicomplex(&d, &c.colors, opts)?;
            let cj = colored_jones_with(&d, &c.colors, cap, opts.strand_order)?;
            let r = b.verify(Some(cj));
            let parity = contracted_circle_parity(&b);
            let dims: Vec<Value> = b
                .ranks()
                .iter()
                .map(|(&(k, i, j), &r)| json!({ "k": k, "i": i, "j": j, "rank": r }))
                .collect();
            let check = |c: &IdentityCheck| {
                json!({
                    "status": if c.ok() { "ok" } else { "fail" },
                    "blocks": c.blocks_checked,
                    "witness": c.witness,
                })
            };
            let parity_json: Vec<Value> = parity
                .iter()
                .map(|p| {
                    json!({
                        "edge": p.edge,
                        "degenerate": p.degenerate,
                        "contracted_circles": p.contracted_circles,
                        "states_checked": p.states_checked,
                        "stable": p.stable,
                        "even": p.even,
                    })
                })
                .collect();
            let report = if c.common.table {
                let mut s = format!("{}\n", r.summary_line());
                for w in [&r.d1_squared, &r.d2_squared, &r.anticommute, &r.chain_maps]
                    .iter()
                    .filter_map(|c| c.witness.as_ref().map(|w| format!("{}: {w}", c.name)))
                {
                    let _ = writeln!(s, "{w}");
                }
                s
            } else {
                pretty(&json!({
                    "colors": c.colors.0,
                    "summary": r.summary_line(),
                    "d_prime_squared": check(&r.d1_squared),
                    "d_double_prime_squared": check(&r.d2_squared),
                    "anticommute": check(&r.anticommute),
                    "chain_maps": check(&r.chain_maps),
                    "euler": {
                        "status": if r.euler == Some(true) { "ok" } else { "fail" },
                        "bigraded_euler": poly_json(&r.bigraded_euler),
                        "colored_jones": r.colored_jones.as_ref().map(poly_json),
                    },
                    "parity": parity_json,
                    "block_dimensions": dims,
                }))
            };
            if r.all_ok() {
                Ok(report)
            } else {
                Err(Failure {
                    code: EXIT_IDENTITY,
                    message: format!("identity suite failed: {}", r.summary_line()),
                    report: Some(report),
                })
            }
        }
        Command::TotalHomology(c) => {
            let d = load(&c.common.input)?;
            let b = build_bicomplex(&d, &c.colors, options(&c.common, cap))?;
            for chk in [
                b.check_d_prime_squared(),
                b.check_d_double_prime_squared(),
                b.check_anticommute(),
            ] {
                if let Some(w) = chk.witness {
                    return Err(Failure {
                        code: EXIT_IDENTITY,
                        message: format!("{}: {w}", chk.name),
                        report: None,
                    });
                }
            }
            let h = total_homology(&b)?;
            if c.common.table {
                let mut s = String::new();
                for (m, g) in &h {
                    let _ = writeln!(s, "{m:>4} {g}");
                }
                return Ok(s);
            }
            let rows: Vec<Value> = h
                .iter()
                .map(|(&m, s)| json!({ "degree": m, "betti": s.betti, "torsion": s.torsion_json() }))
                .collect();
            Ok(pretty(&json!({ "colors": c.colors.0, "total_homology": rows })))
        }
    }
}

fn homology_table(h: &BTreeMap<(i64, i64), HomologySummary>, euler: &LaurentPoly) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>4} {:>4}  group", "i", "j");
    for (&(i, j), g) in h {
        let _ = writeln!(s, "{i:>4} {j:>4}  {g}");
    }
    let _ = writeln!(s, "euler {euler}");
    s
}

trait TorsionJson {
    fn torsion_json(&self) -> Value;
}

impl TorsionJson for HomologySummary {
    fn torsion_json(&self) -> Value {
        serde_json::to_value(self).expect("json")["torsion"].clone()
    }
}
