//! The `dhn` command line.
//!
//! Exit codes: 0 success, 1 a verification failed (a bound was violated, a
//! labeling was not realized, a network is invalid), 2 usage or I/O error.

mod targets;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    bound_report, exact_pieces, rect_arch, sampled_pieces, shatter_verify, shatter_verify_sampled,
    sup_error, GridSpec, VcUpper,
};
use crate::builders::{
    binary_bit_extractor_lin, uniform_skips, decoder, holder_approximator,
    hyperrectangle_indicator, mixed_radix_bit_extractor, parity_network, piecewise_constant_1d,
    shattering_net, square_approximator, xor_network, BitTable, BuiltNetwork, Domain, Geometry,
    LinVariant, PieceSpec,
};
use crate::error::{Error, Result};
use crate::net::KindTag;

pub use targets::HolderTarget;

#[derive(Parser, Debug)]
#[command(name = "dhn", version, about = "Build, evaluate and analyze deep Heaviside networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a network and write its document.
    Build {
        #[command(subcommand)]
        what: BuildCmd,
        #[arg(short = 'o', long, global = true)]
        output: Option<PathBuf>,
    },
    /// Evaluate a network on points from a file or on a uniform grid.
    Eval {
        net: PathBuf,
        #[arg(long, conflicts_with = "grid")]
        points: Option<PathBuf>,
        /// Points per axis of a uniform grid on [0, 1]^d.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Pieces of a network along a segment.
    Pieces {
        net: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        to: Vec<f64>,
        #[arg(long, conflicts_with = "sampled")]
        exact: bool,
        /// Grid size of the sampled counter.
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Measured sup errors against the proven bounds, as CSV.
    Sweep {
        #[command(subcommand)]
        what: SweepCmd,
        #[arg(short = 'o', long, global = true)]
        output: Option<PathBuf>,
    },
    /// Check that the shattering networks realize every labeling.
    Shatter {
        #[arg(long)]
        kind: KindTag,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        t: usize,
        /// Try this many random labelings instead of all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Closed-form bounds for a rectangular architecture, as CSV.
    Bounds {
        #[arg(long)]
        kind: KindTag,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// `inf,sup` of a target function for the approximation lower bound.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
    },
    /// Check a network document.
    Validate { net: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum BuildCmd {
    /// Indicator of the box [a, b].
    Rect {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        b: Vec<f64>,
    },
    /// Sign parity of d inputs.
    Parity {
        #[arg(long)]
        d: usize,
    },
    /// XOR of the signs of two inputs.
    Xor,
    /// Step function on [0, 1], from a JSON spec file or from flags.
    Pc1d {
        #[arg(long, conflicts_with_all = ["breakpoints", "sides", "values"])]
        spec: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        breakpoints: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sides: Vec<i8>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Approximation of x^2 with L hidden layers.
    Square {
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        p1: Option<usize>,
        /// Skip budgets s_2..s_L (the last must be 0).
        #[arg(long, value_delimiter = ',')]
        skips: Option<Vec<usize>>,
        /// Shorthand for p1 = s and skips (s, ..., s, 0).
        #[arg(long, conflicts_with_all = ["p1", "skips"])]
        s: Option<usize>,
    },
    /// Bit extractor: mixed radix (skip) or binary (lin).
    Bits {
        #[arg(long, value_delimiter = ',', conflicts_with = "lin")]
        radix: Option<Vec<usize>>,
        /// Number of binary digits of a lin extractor.
        #[arg(long)]
        lin: Option<usize>,
        #[arg(long, value_enum, default_value_t = LinVariant::Wide)]
        variant: LinVariant,
    },
    /// Decoder of a bit table given as a string of 0/1 in (j, k, r) order.
    Decoder {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long)]
        payload: String,
        #[arg(long)]
        r_select: Option<usize>,
    },
    /// Quantized Taylor approximation of a built-in target.
    Holder {
        #[arg(long, value_enum)]
        target: HolderTarget,
        #[arg(long, default_value = "skip")]
        kind: KindTag,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Network realizing a labeling of the shattered point set.
    ShatterNet {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// String of 0/1, one per point.
        #[arg(long)]
        labels: String,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct GeometryArgs {
    #[arg(long)]
    kind: KindTag,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    t: usize,
}

impl GeometryArgs {
    fn geometry(self) -> Result<Geometry> {
        match self.kind {
            KindTag::Skip => Geometry::skip(self.d, self.m, self.n),
            KindTag::Lin => Geometry::lin(self.d, self.m, self.n, self.t),
            KindTag::Plain => Err(Error::InvalidInput("geometries are skip or lin".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum SweepCmd {
    /// Rows L, s, bound, measured, ratio for architectures with uniform skip budgets.
    Square {
        #[arg(long = "L", value_parser = parse_range, default_value = "2..6")]
        l: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_range, default_value = "1..3")]
        s: RangeInclusive<usize>,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
    /// Rows target, kind, m, n, bound, measured, ratio.
    Holder {
        #[arg(long, value_enum)]
        target: HolderTarget,
        #[arg(long, default_value = "skip")]
        kind: KindTag,
        #[arg(long, value_parser = parse_range, default_value = "1..2")]
        m: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_range, default_value = "1..2")]
        n: RangeInclusive<usize>,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Points per axis (default: 10^5 in one dimension, 129 otherwise).
        #[arg(long)]
        grid: Option<usize>,
    },
}

/// `a..b` (inclusive) or a single number.
fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok(a..=b)
        }
        None => parse(s).map(|v| v..=v),
    }
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    Failed,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Status::Ok) => 0,
        Ok(Status::Failed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(io_err(path)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    emit(output, &text)
}

fn load(path: &Path) -> Result<BuiltNetwork> {
    BuiltNetwork::from_json(&read(path)?)
}

fn bits(s: &str, what: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::InvalidInput(format!("{what} contains `{other}`, expected 0 or 1"))),
        })
        .collect()
}

struct Csv {
    out: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(header: &[String]) -> Result<Self> {
        let mut c = Csv {
            out: csv::Writer::from_writer(Vec::new()),
        };
        c.row(header.iter().cloned())?;
        Ok(c)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.out
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::InvalidInput(e.to_string()))
    }

    fn finish(self) -> Result<Vec<u8>> {
        self.out.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(T::to_string).collect()
}

/// One comma-separated coordinate row per point; blank lines are skipped.
fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read(path)?;
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            path: format!("{}:{}", path.display(), i + 1),
            message: e.to_string(),
        })?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: format!("{}:{}", path.display(), i + 1),
                message: e.to_string(),
            })?;
        if !row.is_empty() {
            out.push(row);
        }
    }
    Ok(out)
}

fn uniform_grid(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidInput("grid needs at least one point per axis".into()));
    }
    let total = n
        .checked_pow(d as u32)
        .filter(|&t| t <= 10_000_000)
        .ok_or_else(|| Error::Resource(format!("{n}^{d} grid points exceed 10^7")))?;
    let axis: Vec<f64> = match n {
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    };
    Ok((0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for c in (0..d).rev() {
                x[c] = axis[idx % n];
                idx /= n;
            }
            x
        })
        .collect())
}

fn execute(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Build { what, output } => {
            let built = build(what)?;
            let mut text = built.to_json()?.into_bytes();
            text.push(b'\n');
            emit(output.as_deref(), &text)?;
            Ok(Status::Ok)
        }
        Command::Eval {
            net,
            points,
            grid,
            output,
        } => {
            let b = load(&net)?;
            let d = b.net.input_dim();
            let xs = match (points, grid) {
                (Some(p), _) => read_points(&p)?,
                (None, Some(n)) => uniform_grid(d, n)?,
                (None, None) => return Err(Error::InvalidInput("pass --points or --grid".into())),
            };
            let ys = b.net.eval_many(&xs)?;
            let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            header.extend((1..=b.net.output_dim()).map(|i| format!("y{i}")));
            let mut csv = Csv::new(&header)?;
            for (x, y) in xs.iter().zip(&ys) {
                csv.row(strings(x).into_iter().chain(strings(y)))?;
            }
            emit(output.as_deref(), &csv.finish()?)?;
            Ok(Status::Ok)
        }
        Command::Pieces {
            net,
            from,
            to,
            exact: _,
            sampled,
            tol,
            output,
        } => {
            let b = load(&net)?;
            match sampled {
                Some(n) => {
                    let count = sampled_pieces(&b.net, &from, &to, n, tol)?;
                    emit(output.as_deref(), format!("{count}\n").as_bytes())?;
                }
                None => emit_json(output.as_deref(), &exact_pieces(&b.net, &from, &to)?)?,
            }
            Ok(Status::Ok)
        }
        Command::Sweep { what, output } => sweep(what, output.as_deref()),
        Command::Shatter {
            kind,
            m,
            n,
            t,
            samples,
            seed,
            output,
        } => {
            let cert = match samples {
                Some(s) => shatter_verify_sampled(kind, m, n, t, s, seed)?,
                None => shatter_verify(kind, m, n, t)?,
            };
            emit_json(output.as_deref(), &cert)?;
            Ok(if cert.passed() && cert.within_budget() {
                Status::Ok
            } else {
                Status::Failed
            })
        }
        Command::Bounds {
            kind,
            l,
            p,
            s,
            d,
            range,
        } => {
            let range = match range.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(_) => return Err(Error::InvalidInput("--range takes inf,sup".into())),
            };
            let arch = rect_arch(kind, d, l, p, s)?;
            let report = bound_report(&arch, range)?;
            let mut csv = Csv::new(&strings(&[
                "kind", "L", "p", "s", "d", "piece_bound", "vc_upper", "approx_lower",
            ]))?;
            let vc = match &report.vc_upper {
                VcUpper::Value { value } => value.to_string(),
                VcUpper::PreconditionUnmet { reason } => format!("precondition unmet: {reason}"),
            };
            csv.row([
                kind.to_string(),
                l.to_string(),
                p.to_string(),
                s.to_string(),
                d.to_string(),
                report.piece_bound.to_string(),
                vc,
                report.approx_lower.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
            emit(None, &csv.finish()?)?;
            Ok(Status::Ok)
        }
        Command::Validate { net } => {
            let b = load(&net);
            let b = match b {
                Ok(b) => b,
                Err(e @ Error::InvalidInput(_)) => {
                    println!("invalid: {e}");
                    return Ok(Status::Failed);
                }
                Err(e) => return Err(e),
            };
            let violations = b.net.validate();
            if violations.is_empty() {
                let a = b.net.arch();
                println!("ok: {} network, depth {}, widths {:?}", b.net.kind(), a.depth(), a.widths);
                Ok(Status::Ok)
            } else {
                for v in violations {
                    println!("invalid: {v}");
                }
                Ok(Status::Failed)
            }
        }
    }
}

fn build(what: BuildCmd) -> Result<BuiltNetwork> {
    match what {
        BuildCmd::Rect { a, b } => hyperrectangle_indicator(&a, &b),
        BuildCmd::Parity { d } => parity_network(d),
        BuildCmd::Xor => xor_network(),
        BuildCmd::Pc1d {
            spec,
            breakpoints,
            sides,
            values,
        } => {
            let spec = match spec {
                Some(path) => {
                    let text = read(&path)?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize::<_, PieceSpec>(de).map_err(|e| Error::Parse {
                        path: e.path().to_string(),
                        message: e.into_inner().to_string(),
                    })?
                }
                None => PieceSpec {
                    breakpoints,
                    sides,
                    values,
                },
            };
            piecewise_constant_1d(&spec)
        }
        BuildCmd::Square { l, p1, skips, s } => {
            let (p1, skips) = match (s, p1, skips) {
                (Some(s), _, _) => uniform_skips(l, s),
                (None, Some(p1), Some(skips)) => (p1, skips),
                _ => return Err(Error::InvalidInput("pass --s, or both --p1 and --skips".into())),
            };
            square_approximator(l, p1, &skips)
        }
        BuildCmd::Bits { radix, lin, variant } => match (radix, lin) {
            (Some(r), _) => mixed_radix_bit_extractor(&r),
            (None, Some(l)) => binary_bit_extractor_lin(l, variant),
            _ => Err(Error::InvalidInput("pass --radix or --lin".into())),
        },
        BuildCmd::Decoder {
            geometry,
            payload,
            r_select,
        } => {
            let table = BitTable::new(geometry.geometry()?, bits(&payload, "payload")?)?;
            decoder(&table, r_select)
        }
        BuildCmd::Holder { target, kind, m, n, t } => holder_approximator(kind, &target.config(m, n, t)),
        BuildCmd::ShatterNet { geometry, labels } => shattering_net(&geometry.geometry()?, &bits(&labels, "labels")?),
    }
}

fn ratio(measured: f64, bound: f64) -> String {
    (measured / bound).to_string()
}

fn sweep(what: SweepCmd, output: Option<&Path>) -> Result<Status> {
    let mut violated = false;
    let bytes = match what {
        SweepCmd::Square { l, s, grid } => {
            let mut csv = Csv::new(&strings(&["L", "s", "bound", "measured", "ratio"]))?;
            for l in l {
                for s in s.clone() {
                    let (p1, skips) = uniform_skips(l, s);
                    let b = square_approximator(l, p1, &skips)?;
                    let bound = b.guarantee.expect("square networks carry a guarantee").sup_error_bound;
                    let total = (1.0 / bound).round() as usize;
                    let spec = GridSpec::uniform(grid).with_points((0..=total).map(|k| k as f64 / total as f64));
                    let e = sup_error(&b.net, |x| x[0] * x[0], &Domain::unit(1), &spec)?;
                    violated |= e.value > bound;
                    csv.row([l.to_string(), s.to_string(), bound.to_string(), e.value.to_string(), ratio(e.value, bound)])?;
                }
            }
            csv.finish()?
        }
        SweepCmd::Holder {
            target,
            kind,
            m,
            n,
            t,
            grid,
        } => {
            let mut csv = Csv::new(&strings(&["target", "kind", "m", "n", "bound", "measured", "ratio"]))?;
            for m in m {
                for n in n.clone() {
                    let cfg = target.config(m, n, t);
                    let b = holder_approximator(kind, &cfg)?;
                    let bound = b.guarantee.expect("Hölder networks carry a guarantee").sup_error_bound;
                    let spec = match (cfg.d, grid) {
                        (_, Some(g)) => GridSpec::uniform(g),
                        (1, None) => {
                            let q = cfg.bits(kind)?.min(16);
                            GridSpec::uniform(100_000).with_points((0..=1u32 << q).map(|k| f64::from(k) / f64::from(1u32 << q)))
                        }
                        _ => GridSpec::uniform(129),
                    };
                    let e = sup_error(&b.net, |x| target.value(x), &Domain::unit(cfg.d), &spec)?;
                    violated |= e.value > bound;
                    csv.row([
                        target.name().to_string(),
                        kind.to_string(),
                        m.to_string(),
                        n.to_string(),
                        bound.to_string(),
                        e.value.to_string(),
                        ratio(e.value, bound),
                    ])?;
                }
            }
            csv.finish()?
        }
    };
    emit(output, &bytes)?;
    Ok(if violated { Status::Failed } else { Status::Ok })
}
