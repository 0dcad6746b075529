//! `parkfn`: sampling, exact and limit laws, goodness-of-fit runs and the
//! TV lower-bound explorer for Mallows-induced parking functions.

mod output;

use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use parkfn::exact_laws::{self, rational};
use parkfn::limit_laws::{self, Side};
use parkfn::mallows::{expected_inversions, QSchedule};
use parkfn::mc::config::KRule;
use parkfn::mc::{self, REPORT_HEADER};
use parkfn::parking::{self, enumerate_parking_with, parking_count, parse_prefs};
use parkfn::tv_explorer::{self, BoundSpec, QRange};
use parkfn::RandomStream;

use output::{Emitter, Format};

#[derive(Parser, Debug)]
#[command(name = "parkfn", version, about = "Mallows-induced parking functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct FormatArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,
}

impl FormatArgs {
    fn resolve(self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw parking functions from the induced law.
    Sample {
        #[arg(short = 'n')]
        n: usize,
        /// q-schedule, e.g. `0.5`, `q=1+c/n:c=2`, `q=1-c/n^a:c=1,a=0.5`.
        #[arg(short = 'q', long = "q")]
        q: QSchedule,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Exact law of `π_1` or `N_k` at finite n.
    Exact {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'q', long = "q")]
        q: String,
        #[arg(long, value_enum, default_value_t = Stat::Pi1)]
        stat: Stat,
        /// Parameter of the k rule: k itself, alpha, d or the offset.
        #[arg(short = 'k')]
        k: Option<String>,
        #[arg(long, value_enum, default_value_t = KRuleKind::Fixed)]
        k_rule: KRuleKind,
        /// Exact fractions; q must be a rational literal.
        #[arg(long)]
        rational: bool,
        #[arg(long)]
        cdf: bool,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Tabulate a limit law.
    Limit(LimitArgs),
    /// Run the goodness-of-fit experiments of a TOML config.
    Gof {
        #[arg(long)]
        config: PathBuf,
        /// Also append report rows to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// List every parking function of length n.
    Enumerate {
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        unsafe_large: bool,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Read comma-separated sequences from stdin and print one verdict per line.
    Validate {
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Lower bound on the TV distance to the uniform law, minimized over q.
    Tvbound {
        /// Event set, e.g. `2` or `1,2`, or `all` for every subset.
        #[arg(long = "A", default_value = "2")]
        events: String,
        #[arg(long, default_value = "1.01:5")]
        range: QRange,
        /// Leave out the `N_n = 1` event.
        #[arg(long)]
        no_top: bool,
        /// Print the grid as well as the summary.
        #[arg(long)]
        grid: bool,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Expected inversion counts across q-schedules.
    Regimes {
        /// Comma-separated list of n.
        #[arg(short = 'n', value_delimiter = ',', default_value = "10,100,1000,10000")]
        n: Vec<usize>,
        /// Repeat for several schedules.
        #[arg(short = 'q', long = "q", default_values = ["0.5", "q=1-c/n:c=1", "1", "q=1+c/n:c=1", "2"])]
        q: Vec<QSchedule>,
        #[command(flatten)]
        fmt: FormatArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stat {
    Pi1,
    Nk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KRuleKind {
    Fixed,
    Alpha,
    Dn,
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LimitLaw {
    /// `x - x ln x`.
    Q1Cdf,
    FcCdf,
    FcDensity,
    ExponentialCdf,
    Geometric,
    /// Upper corner of `π_1` for fixed q > 1.
    Corner,
    /// Poisson parameter on a grid of d.
    Lambda,
    Zsum,
    Ysum,
    Borel,
    DhLow,
    DhHigh,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long, value_enum)]
    law: LimitLaw,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(short = 'q', long = "q")]
    q: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(short = 'k')]
    k: Option<usize>,
    /// Largest index tabulated, or the truncation of `ysum`.
    #[arg(long)]
    kmax: Option<usize>,
    /// Grid intervals for continuous laws.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    fmt: FormatArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(cli.command, BufWriter::new(stdout.lock())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(io_err) = err.downcast_ref::<io::Error>() {
                if io_err.kind() == io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command, out: impl Write) -> Result<()> {
    match command {
        Command::Sample {
            n,
            q,
            count,
            seed,
            fmt,
        } => cmd_sample(&mut Emitter::new(fmt.resolve(), out), n, &q, count, seed),
        Command::Exact {
            n,
            q,
            stat,
            k,
            k_rule,
            rational,
            cdf,
            fmt,
        } => {
            let request = ExactRequest {
                n,
                q,
                stat,
                k: k.map(|raw| parse_k_rule(k_rule, &raw)).transpose()?,
                rational,
                cdf,
            };
            cmd_exact(&mut Emitter::new(fmt.resolve(), out), &request)
        }
        Command::Limit(args) => cmd_limit(&mut Emitter::new(args.fmt.resolve(), out), &args),
        Command::Gof { config, out: file, fmt } => {
            cmd_gof(&mut Emitter::new(fmt.resolve(), out), &config, file.as_deref())
        }
        Command::Enumerate { n, unsafe_large, fmt } => {
            cmd_enumerate(&mut Emitter::new(fmt.resolve(), out), n, unsafe_large)
        }
        Command::Validate { fmt } => {
            let stdin = io::stdin();
            cmd_validate(&mut Emitter::new(fmt.resolve(), out), stdin.lock())
        }
        Command::Tvbound {
            events,
            range,
            no_top,
            grid,
            fmt,
        } => cmd_tvbound(&mut Emitter::new(fmt.resolve(), out), &events, range, !no_top, grid),
        Command::Regimes { n, q, fmt } => cmd_regimes(&mut Emitter::new(fmt.resolve(), out), &n, &q),
    }
}

fn parse_k_rule(kind: KRuleKind, raw: &str) -> Result<KRule> {
    let float = || raw.parse::<f64>().with_context(|| format!("invalid -k value `{raw}`"));
    let int = || raw.parse::<usize>().with_context(|| format!("invalid -k value `{raw}`"));
    Ok(match kind {
        KRuleKind::Fixed => KRule::Fixed { k: int()? },
        KRuleKind::Alpha => KRule::Alpha { alpha: float()? },
        KRuleKind::Dn => KRule::Dn { d: float()? },
        KRuleKind::Top => KRule::Top { offset: int()? },
    })
}

fn cmd_sample<W: Write>(em: &mut Emitter<W>, n: usize, schedule: &QSchedule, count: usize, seed: u64) -> Result<()> {
    let q = schedule.evaluate(n)?;
    em.meta(
        "sample",
        &[
            ("seed", seed.to_string()),
            ("n", n.to_string()),
            ("schedule", schedule.to_string()),
            ("q_resolved", q.to_string()),
            ("count", count.to_string()),
        ],
    )?;
    em.columns(&["pf"])?;
    let mut rng = RandomStream::new(seed, 0);
    for _ in 0..count {
        let pf = mc::sample_pf(n, q, &mut rng)?;
        em.row(vec![json!(pf.as_slice())])?;
    }
    em.flush()?;
    Ok(())
}

struct ExactRequest {
    n: usize,
    q: String,
    stat: Stat,
    k: Option<KRule>,
    rational: bool,
    cdf: bool,
}

fn cmd_exact<W: Write>(em: &mut Emitter<W>, req: &ExactRequest) -> Result<()> {
    let n = req.n;
    let k = match (req.stat, req.k) {
        (Stat::Pi1, _) => None,
        (Stat::Nk, Some(rule)) => Some(rule.resolve(n)?),
        (Stat::Nk, None) => bail!("--stat nk needs -k"),
    };
    let mut meta = vec![
        ("n", n.to_string()),
        ("q", req.q.clone()),
        ("stat", format!("{:?}", req.stat).to_lowercase()),
        ("mode", if req.rational { "rational" } else { "float" }.to_string()),
    ];
    if let (Some(rule), Some(k)) = (req.k, k) {
        meta.push(("k_rule", rule.to_string()));
        meta.push(("k_resolved", k.to_string()));
    }
    let column = if req.cdf { "cdf" } else { "prob" };

    if req.rational {
        if n > rational::MAX_BRUTEFORCE_N {
            bail!("--rational is limited to n <= {}", rational::MAX_BRUTEFORCE_N);
        }
        let q = rational::parse_rational(req.q.trim().trim_start_matches("q="))?;
        em.meta("exact", &meta)?;
        em.columns(&["support", column])?;
        let rows: Vec<(usize, _)> = match k {
            None => (1..=n).map(|x| Ok((x, rational::pi1_pmf(n, &q, x)?))).collect::<Result<_>>()?,
            Some(k) => rational::nk_pmf(n, &q, k)?.into_iter().enumerate().collect(),
        };
        let mut acc = None;
        for (x, p) in rows {
            let running = match acc.take() {
                None => p.clone(),
                Some(prev) => prev + &p,
            };
            let shown = if req.cdf { &running } else { &p };
            em.row(vec![json!(x), Value::String(shown.to_string())])?;
            acc = Some(running);
        }
    } else {
        let schedule: QSchedule = req.q.parse()?;
        let q = schedule.evaluate(n)?;
        meta.push(("q_resolved", q.to_string()));
        em.meta("exact", &meta)?;
        em.columns(&["support", column])?;
        let rows: Vec<(i64, f64)> = match k {
            None => exact_laws::pi1_pmf_table(n, q)?
                .into_iter()
                .enumerate()
                .map(|(i, p)| (i as i64 + 1, p))
                .collect(),
            Some(k) => exact_laws::nk_pmf(n, q, k)?.iter().collect(),
        };
        let mut acc = 0.0;
        for (x, p) in rows {
            acc += p;
            em.row(vec![json!(x), json!(if req.cdf { acc.min(1.0) } else { p })])?;
        }
    }
    em.flush()?;
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str, law: LimitLaw) -> Result<T> {
    value.with_context(|| format!("--law {} needs {flag}", law_name(law)))
}

fn law_name(law: LimitLaw) -> String {
    law.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn cmd_limit<W: Write>(em: &mut Emitter<W>, args: &LimitArgs) -> Result<()> {
    let law = args.law;
    if args.points == 0 {
        bail!("--points must be positive");
    }
    let mut meta = vec![("law", law_name(law))];
    for (key, value) in [
        ("c", args.c.map(|v| v.to_string())),
        ("q", args.q.map(|v| v.to_string())),
        ("rate", args.rate.map(|v| v.to_string())),
        ("n", args.n.map(|v| v.to_string())),
        ("k", args.k.map(|v| v.to_string())),
        ("kmax", args.kmax.map(|v| v.to_string())),
    ] {
        if let Some(value) = value {
            meta.push((key, value));
        }
    }
    meta.push(("points", args.points.to_string()));
    meta.push(("tol", args.tol.to_string()));

    let unit_grid = |skip_zero: bool| {
        let m = args.points;
        (usize::from(skip_zero)..=m).map(move |i| i as f64 / m as f64)
    };
    let kmax = args.kmax.unwrap_or(20);
    let mut rows: Vec<(Value, f64, Option<f64>)> = Vec::new();
    match law {
        LimitLaw::Q1Cdf => {
            for x in unit_grid(false) {
                rows.push((json!(x), limit_laws::law_q1_cdf(x)?, None));
            }
        }
        LimitLaw::FcCdf | LimitLaw::FcDensity => {
            let c = require(args.c, "--c", law)?;
            for x in unit_grid(law == LimitLaw::FcDensity) {
                let v = if law == LimitLaw::FcCdf {
                    limit_laws::law_fc_cdf(x, c)?
                } else {
                    limit_laws::law_fc_density(x, c)?
                };
                rows.push((json!(x), v, None));
            }
        }
        LimitLaw::ExponentialCdf => {
            let rate = require(args.rate, "--rate", law)?;
            let span = 5.0 / rate;
            for x in unit_grid(false) {
                let x = x * span;
                rows.push((json!(x), limit_laws::law_exponential_cdf(x, rate)?, None));
            }
        }
        LimitLaw::Geometric => {
            let q = require(args.q, "-q", law)?;
            for k in 1..=kmax {
                rows.push((json!(k), limit_laws::law_geometric_pmf(k, q)?, None));
            }
        }
        LimitLaw::Corner => {
            let q = require(args.q, "-q", law)?;
            let n = require(args.n, "-n", law)?;
            for k in 0..=kmax.min(n.saturating_sub(1)) {
                rows.push((json!(k), limit_laws::corner_upper_q(n, q, k)?, None));
            }
        }
        LimitLaw::Lambda => {
            let c = require(args.c, "--c", law)?;
            for d in unit_grid(true) {
                rows.push((json!(d), limit_laws::lambda_c(c, d)?, None));
            }
        }
        LimitLaw::Zsum | LimitLaw::Ysum => {
            let q = require(args.q, "-q", law)?;
            let (pmf, tail) = if law == LimitLaw::Zsum {
                limit_laws::law_zsum(q, require(args.k, "-k", law)?, args.tol)?
            } else {
                limit_laws::law_ysum(q, args.kmax, args.tol)?
            };
            meta.push(("truncation", tail.truncation.to_string()));
            for (x, p) in pmf.iter() {
                rows.push((json!(x), p, Some(tail.bound)));
            }
        }
        LimitLaw::Borel => {
            for j in 1..=kmax {
                rows.push((json!(j), limit_laws::borel_pmf(j)?, None));
            }
        }
        LimitLaw::DhLow | LimitLaw::DhHigh => {
            let (side, first) = if law == LimitLaw::DhLow {
                (Side::Low, 1)
            } else {
                (Side::High, 0)
            };
            for k in first..=kmax {
                rows.push((json!(k), limit_laws::dh_corner(k, side)?, None));
            }
        }
    }

    em.meta("limit", &meta)?;
    em.columns(&["x_or_k", "value", "tailbound"])?;
    for (x, v, bound) in rows {
        em.row(vec![x, json!(v), bound.map_or(Value::Null, |b| json!(b))])?;
    }
    em.flush()?;
    Ok(())
}

fn cmd_gof<W: Write>(em: &mut Emitter<W>, path: &std::path::Path, out_file: Option<&std::path::Path>) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let experiments = mc::config::parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    let threads = mc::thread_count();
    em.meta(
        "gof",
        &[
            ("config", path.display().to_string()),
            ("experiments", experiments.len().to_string()),
            ("threads", threads.to_string()),
        ],
    )?;
    for cfg in &experiments {
        em.footer(&[("experiment", json!(cfg.name)), ("config", serde_json::to_value(cfg)?)])?;
    }
    let columns: Vec<&str> = REPORT_HEADER.split(',').collect();
    em.columns(&columns)?;
    em.flush()?;

    let mut sink = match out_file {
        Some(p) => {
            let fresh = fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .with_context(|| format!("opening {}", p.display()))?;
            if fresh {
                writeln!(file, "{REPORT_HEADER}")?;
            }
            Some(file)
        }
        None => None,
    };
    for cfg in &experiments {
        let report =
            mc::run_experiment_with_threads(cfg, threads).with_context(|| format!("experiment `{}`", cfg.name))?;
        let line = report.csv_row();
        let cells = line.split(',').map(|cell| match cell.parse::<f64>() {
            Ok(v) if cell.parse::<i64>().is_err() => json!(v),
            _ => cell.parse::<i64>().map_or_else(|_| Value::String(cell.to_string()), |v| json!(v)),
        });
        em.row(cells.collect())?;
        em.flush()?;
        if let Some(file) = sink.as_mut() {
            writeln!(file, "{line}")?;
        }
    }
    Ok(())
}

fn cmd_enumerate<W: Write>(em: &mut Emitter<W>, n: usize, unsafe_large: bool) -> Result<()> {
    let pfs = enumerate_parking_with(n, unsafe_large)?;
    em.meta("enumerate", &[("n", n.to_string())])?;
    em.columns(&["pf"])?;
    let mut count: u64 = 0;
    for pf in pfs {
        em.row(vec![json!(pf.as_slice())])?;
        count += 1;
    }
    let expected = parking_count(n);
    em.footer(&[("count", json!(count)), ("expected", json!(expected))])?;
    em.flush()?;
    if count != expected {
        bail!("enumerated {count} parking functions, expected {expected}");
    }
    Ok(())
}

fn cmd_validate<W: Write>(em: &mut Emitter<W>, input: impl BufRead) -> Result<()> {
    em.meta("validate", &[])?;
    em.columns(&["valid"])?;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let prefs = parse_prefs(trimmed).with_context(|| format!("line {}", lineno + 1))?;
        let verdict = parking::is_parking(&prefs).unwrap_or(false);
        em.row(vec![json!(verdict)])?;
    }
    em.flush()?;
    Ok(())
}

fn cmd_tvbound<W: Write>(em: &mut Emitter<W>, events: &str, range: QRange, include_top: bool, grid: bool) -> Result<()> {
    let specs = if events.trim() == "all" {
        BoundSpec::all_subsets(include_top)
    } else {
        let mut spec: BoundSpec = events.parse()?;
        if !include_top {
            spec = BoundSpec::new(spec.events().to_vec(), false)?;
        }
        vec![spec]
    };
    em.meta(
        "tvbound",
        &[
            ("A", events.trim().to_string()),
            ("range", format!("{}:{}", range.lo, range.hi)),
            ("include_top", include_top.to_string()),
            ("grid_step", tv_explorer::GRID_STEP.to_string()),
        ],
    )?;
    let points = tv_explorer::scan_grid(&range);
    if grid {
        em.columns(&["A", "q", "bound"])?;
        for spec in &specs {
            for point in &points {
                em.row(vec![json!(spec.to_string()), json!(point.q), json!(point.bound(spec))])?;
            }
        }
    }
    em.columns(&["A", "q_star", "value"])?;
    let minima: Vec<_> = specs.iter().map(|s| tv_explorer::minimize_bound(s, &range)).collect();
    for m in &minima {
        em.row(vec![json!(m.spec), json!(m.q_star), json!(m.value)])?;
    }
    if minima.len() > 1 {
        let report = tv_explorer::SubsetReport { minima };
        let (lo, hi) = (report.smallest(), report.largest());
        em.footer(&[
            ("smallest", json!(lo.spec)),
            ("smallest_value", json!(lo.value)),
            ("largest", json!(hi.spec)),
            ("largest_value", json!(hi.value)),
        ])?;
    }
    em.flush()?;
    Ok(())
}

fn cmd_regimes<W: Write>(em: &mut Emitter<W>, ns: &[usize], schedules: &[QSchedule]) -> Result<()> {
    let listed: Vec<String> = schedules.iter().map(ToString::to_string).collect();
    em.meta(
        "regimes",
        &[
            ("n", ns.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")),
            ("schedules", listed.join(";")),
        ],
    )?;
    em.columns(&["schedule", "n", "q", "expected_inversions", "per_n", "per_n2"])?;
    for schedule in schedules {
        for &n in ns {
            let q = schedule.evaluate(n)?;
            let e = expected_inversions(n, q)?;
            let nf = n as f64;
            em.row(vec![
                json!(schedule.to_string()),
                json!(n),
                json!(q),
                json!(e),
                json!(e / nf),
                json!(e / (nf * nf)),
            ])?;
        }
    }
    em.flush()?;
    Ok(())
}
