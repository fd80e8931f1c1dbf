use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amenable::density::{DensityParams, Direction, ShiftSpec};
use amenable::group::{Side, WindowFamily, WindowSpec};
use amenable::lemmas::ChainPlan;
use amenable::run::{run, Budgets, Envelope, Operation, RunConfig};
use amenable::setops::ProbeFamily;
use amenable::theorems::TheoremParams;
use amenable::verify::verify_json;
use amenable::{Error, GroupElement, GroupModel, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "amen", version, about = "Window-scale density, Δ-set and cover certificates for amenable groups")]
struct Cli {
    /// `z`, `zN`, `heisenberg`, `cyclic:n`, or a JSON model.
    #[arg(long, global = true, default_value = "z")]
    group: GroupModel,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Written atomically; stdout when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Largest window materialized; env `AMEN_WINDOW_CAP`
    #[arg(long, global = true)]
    window_cap: Option<usize>,
    /// Node budget for exhaustive searches; env `AMEN_SEARCH_BUDGET`
    #[arg(long, global = true)]
    search_budget: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Upper,
    Lower,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// `sym` or `anchored`.
    #[arg(long)]
    family: Option<WindowFamily>,
    /// Inclusive window index range `a:b`.
    #[arg(long)]
    n_range: Option<String>,
    /// `identity`, `window`, `squared`, `box:lo:hi`, or JSON.
    #[arg(long)]
    shifts: Option<ShiftSpec>,
}

impl GridArgs {
    fn params(&self, default: DensityParams) -> Result<DensityParams, Error> {
        let mut p = default;
        if let Some(f) = self.family {
            p.family = f;
        }
        if let Some(r) = &self.n_range {
            let bad = || Error::Schema(format!("bad n-range {r:?}"));
            let (a, b) = r.split_once(':').unwrap_or((r, r));
            p.n_min = a.trim().parse().map_err(|_| bad())?;
            p.n_max = b.trim().parse().map_err(|_| bad())?;
        }
        if let Some(s) = &self.shifts {
            p.shifts = s.clone();
        }
        Ok(p)
    }
}

#[derive(Args, Debug)]
struct TheoremArgs {
    /// Window `E` carrying the chain.
    #[arg(long)]
    e: Option<WindowSpec>,
    /// Base window `P`.
    #[arg(long)]
    base: Option<WindowSpec>,
    #[arg(long)]
    probes: Option<ProbeFamily>,
    #[arg(long)]
    shift_pool: Option<WindowSpec>,
    #[arg(long)]
    product_pool: Option<WindowSpec>,
    #[arg(long)]
    pullback_pool: Option<WindowSpec>,
    /// Per-step chain tolerance.
    #[arg(long)]
    tolerance: Option<Rational>,
    /// Full parameter object as JSON; the flags above override it.
    #[arg(long)]
    params: Option<String>,
}

impl TheoremArgs {
    fn params(&self) -> Result<TheoremParams, Error> {
        let mut p: TheoremParams = match &self.params {
            Some(s) => serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?,
            None => TheoremParams::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    p.$f = Some(v.clone());
                }
            )*};
        }
        over!(e, base, probes, shift_pool, product_pool, pullback_pool);
        if let Some(t) = &self.tolerance {
            p.chain.tolerance = Some(t.clone());
        }
        Ok(p)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper or lower Banach density estimate on a window grid.
    Density {
        #[arg(long)]
        set: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Upper)]
        direction: DirectionArg,
    },
    /// Invariance defects of a window family.
    FolnerCheck {
        #[arg(long, default_value = "sym")]
        family: WindowFamily,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        ns: Vec<u64>,
        /// Translations, `;`-separated; the model's generators by default.
        #[arg(long, value_delimiter = ';')]
        translations: Option<Vec<GroupElement>>,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
        #[arg(long, default_value = "1/10")]
        epsilon: Rational,
    },
    /// `A·B` inside an output window.
    Product {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long)]
        out: WindowSpec,
        #[arg(long)]
        wa: WindowSpec,
        #[arg(long)]
        wb: WindowSpec,
    },
    /// `Δ_ε(A)` over candidate elements.
    Delta {
        #[arg(long)]
        set: String,
        #[arg(long)]
        epsilon: Rational,
        #[arg(long)]
        candidates: WindowSpec,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// `G = FA` on a region, `|F| ≤ k`.
    Syndetic {
        #[arg(long)]
        set: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        region: WindowSpec,
        #[arg(long)]
        pool: WindowSpec,
        #[arg(long)]
        strict: bool,
    },
    /// Right translates of every probe inside `A`.
    Thick {
        #[arg(long)]
        set: String,
        #[arg(long)]
        probes: ProbeFamily,
        #[arg(long)]
        pool: WindowSpec,
    },
    /// `FA` thick for some `|F| ≤ k`.
    Pws {
        #[arg(long)]
        set: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        probes: ProbeFamily,
        #[arg(long)]
        f_pool: WindowSpec,
        #[arg(long)]
        shift_pool: WindowSpec,
        #[arg(long)]
        strict: bool,
    },
    /// Finite embeddability of probes into `B`.
    Embed {
        #[arg(long)]
        probes: ProbeFamily,
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long = "B")]
        b: String,
        #[arg(long)]
        pool: WindowSpec,
    },
    /// Window-scale checks of the cover, shift and chain lemmas
    #[command(subcommand)]
    Lemma(LemmaCommand),
    /// Certificates for the cover, root, sumset and embedding theorems
    #[command(subcommand)]
    Thm(ThmCommand),
    /// The two-interval family `A_k`, `B_k` and its sumset.
    Counterexample {
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        k: u64,
    },
    /// Executes a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Replays a certificate; `-` reads stdin.
    Verify { certificate: PathBuf },
}

#[derive(Subcommand, Debug)]
enum LemmaCommand {
    /// Pair-overlap inequality for a family of subsets of `E`.
    Overlap {
        #[arg(long)]
        e: WindowSpec,
        /// JSON list of element lists.
        #[arg(long)]
        family: String,
    },
    /// Greedy cover of `P` by translates of the window Δ-set.
    DeltaCover {
        #[arg(long = "C")]
        c: String,
        #[arg(long)]
        e: WindowSpec,
        #[arg(long)]
        epsilon: Rational,
        #[arg(long = "P")]
        p: WindowSpec,
        #[arg(long)]
        g0: Option<GroupElement>,
        #[arg(long)]
        candidates: Option<WindowSpec>,
    },
    /// Best concentrating shift.
    Shift {
        #[arg(long = "U")]
        u: WindowSpec,
        #[arg(long = "V")]
        v: WindowSpec,
        #[arg(long = "C")]
        c: String,
        #[arg(long = "D")]
        d: String,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        side: SideArg,
    },
    /// Concentration chain over several sets.
    Chain {
        #[arg(long, value_delimiter = ';', required = true)]
        sets: Vec<String>,
        #[arg(long)]
        e: WindowSpec,
        /// Chain plan as JSON.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        side: SideArg,
    },
}

#[derive(Subcommand, Debug)]
enum ThmCommand {
    /// Cover of `P` by `L · ⋂ Δ_ε(A_i)`.
    DeltaCover {
        #[arg(long, value_delimiter = ';', required = true)]
        sets: Vec<String>,
        #[arg(long)]
        epsilon: Rational,
        #[arg(long = "P")]
        p: WindowSpec,
        #[arg(long)]
        g0: Option<GroupElement>,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// Cover by `H` times k-th roots of the Δ-set intersection.
    Roots {
        #[arg(long, value_delimiter = ';', required = true)]
        sets: Vec<String>,
        #[arg(long)]
        epsilon: Rational,
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// `Pη ⊆ F·A·B` with `|F| ≤ ⌊1/αβ⌋`.
    Jin {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long = "X", default_value = "all")]
        x: String,
        #[arg(long)]
        w: Option<GroupElement>,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// The Jin cover with `X = G`, then thickness of `F·A·B`.
    JinPws {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// Best translate of `C` on a density grid.
    Pullback {
        #[arg(long = "C")]
        c: String,
        #[arg(long)]
        e: WindowSpec,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        pool: Option<WindowSpec>,
    },
    /// A dense `B` finitely embeddable in every `A_i`.
    Embed {
        #[arg(long, value_delimiter = ';', required = true)]
        sets: Vec<String>,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// Density estimates of `B` and `B⁻¹` on one grid.
    InverseProbe {
        #[arg(long)]
        set: String,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn json_arg<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, Error> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

fn symmetric_grid() -> DensityParams {
    DensityParams::new(WindowFamily::Symmetric, 8, 16, ShiftSpec::Window)
}

fn operation(cmd: Command, model: &GroupModel) -> Result<Operation, Error> {
    Ok(match cmd {
        Command::Density { set, grid, direction } => Operation::Density {
            set,
            params: grid.params(amenable::setops::default_delta_params())?,
            direction: match direction {
                DirectionArg::Upper => Direction::Upper,
                DirectionArg::Lower => Direction::Lower,
            },
        },
        Command::FolnerCheck { family, ns, translations, side, epsilon } => {
            Operation::FolnerCheck { family, ns, translations, side: side.into(), epsilon }
        }
        Command::Product { a, b, out, wa, wb } => Operation::Product { a, b, out, wa, wb },
        Command::Delta { set, epsilon, candidates, grid } => {
            Operation::Delta { set, epsilon, candidates, params: grid.params(amenable::setops::default_delta_params())? }
        }
        Command::Syndetic { set, k, region, pool, strict } => Operation::Syndetic { set, k, region, pool, strict },
        Command::Thick { set, probes, pool } => Operation::Thick { set, probes, pool },
        Command::Pws { set, k, probes, f_pool, shift_pool, strict } => Operation::Pws { set, k, probes, f_pool, shift_pool, strict },
        Command::Embed { probes, a, b, pool } => Operation::Embed { probes, a, b, pool },
        Command::Lemma(l) => match l {
            LemmaCommand::Overlap { e, family } => Operation::LemmaOverlap { e, family: json_arg(&family)? },
            LemmaCommand::DeltaCover { c, e, epsilon, p, g0, candidates } => {
                Operation::LemmaDeltaCover { c, e, epsilon, p, g0, candidates }
            }
            LemmaCommand::Shift { u, v, c, d, side } => Operation::LemmaShift { u, v, c, d, side: side.into() },
            LemmaCommand::Chain { sets, e, plan, side } => Operation::LemmaChain {
                sets,
                e,
                plan: plan.as_deref().map(json_arg::<ChainPlan>).transpose()?.unwrap_or_default(),
                side: side.into(),
            },
        },
        Command::Thm(t) => match t {
            ThmCommand::DeltaCover { sets, epsilon, p, g0, params } => {
                Operation::ThmDeltaCover { sets, epsilon, p, g0, params: params.params()? }
            }
            ThmCommand::Roots { sets, epsilon, k, params } => Operation::ThmRoots { sets, epsilon, k, params: params.params()? },
            ThmCommand::Jin { a, b, x, w, params } => Operation::ThmJin { a, b, x, w, params: params.params()? },
            ThmCommand::JinPws { a, b, params } => Operation::ThmJinPws { a, b, params: params.params()? },
            ThmCommand::Pullback { c, e, grid, pool } => {
                let n = e.build(model, amenable::group::DEFAULT_WINDOW_CAP).map(|w| w.len() as u64).unwrap_or(12);
                let default = DensityParams::new(WindowFamily::Anchored, n, n, ShiftSpec::Identity);
                Operation::ThmPullback { c, e, params: grid.params(default)?, pool }
            }
            ThmCommand::Embed { sets, params } => Operation::ThmEmbed { sets, params: params.params()? },
            ThmCommand::InverseProbe { set, grid } => Operation::ThmInverseProbe { set, params: grid.params(symmetric_grid())? },
        },
        Command::Counterexample { m, n, l, k } => Operation::Counterexample { m, n, l, k },
        Command::Run { .. } | Command::Verify { .. } => unreachable!("handled before dispatch"),
    })
}

fn read_input(path: &Path) -> Result<String, Error> {
    let mut s = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Schema(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Schema(format!("writing output: {e}"));
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(body.as_bytes()).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn csv_rows(env: &Envelope) -> Result<Vec<Vec<String>>, Error> {
    let r = &env.result;
    let s = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(xs) if xs.iter().all(|x| x.is_i64()) => {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        }
        other => other.to_string(),
    };
    let list = |key: &str| r.get(key).and_then(|v| v.as_array()).cloned().unwrap_or_default();
    let rows = match env.operation.as_str() {
        "density" => vec![
            vec!["direction".into(), "n".into(), "shift".into(), "value".into()],
            vec![s(&r["direction"]), s(&r["n"]), s(&r["shift"]), s(&r["value"])],
        ],
        "folner-check" => std::iter::once(vec!["n".into(), "len".into(), "defect".into()])
            .chain(list("rows").iter().map(|x| vec![s(&x["n"]), s(&x["len"]), s(&x["defect"])]))
            .collect(),
        "delta" => std::iter::once(vec!["g".into(), "value".into(), "n".into(), "shift".into()])
            .chain(list("members").iter().map(|x| vec![s(&x["g"]), s(&x["value"]), s(&x["n"]), s(&x["shift"])]))
            .collect(),
        "product" => std::iter::once(vec!["element".into()]).chain(list("members").iter().map(|x| vec![s(x)])).collect(),
        "lemma-chain" => std::iter::once(vec!["step".into(), "alpha".into(), "xi".into(), "achieved".into(), "within_tolerance".into()])
            .chain(list("steps").iter().enumerate().map(|(i, x)| {
                vec![(i + 1).to_string(), s(&x["alpha"]), s(&x["xi"]), s(&x["achieved"]), s(&x["within_tolerance"])]
            }))
            .collect(),
        "thm-inverse-probe" => std::iter::once(vec!["estimate".into(), "n".into(), "shift".into(), "value".into()])
            .chain(["upper", "lower", "inverse_upper", "inverse_lower"].iter().map(|k| {
                let x = &r[*k];
                vec![k.to_string(), s(&x["n"]), s(&x["shift"]), s(&x["value"])]
            }))
            .collect(),
        other => return Err(Error::Schema(format!("csv output is not available for {other}"))),
    };
    Ok(rows)
}

fn render(env: &Envelope, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => Ok(env.to_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in csv_rows(env)? {
                w.write_record(&row).map_err(|e| Error::Schema(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Schema(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    let flags = Budgets { window_cap: cli.window_cap, search_budget: cli.search_budget, threads: cli.threads };
    let mut config = match cli.command {
        Command::Verify { certificate } => {
            let report = verify_json(&read_input(&certificate)?)?;
            let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
            body.push('\n');
            write_output(cli.output.as_deref(), &body)?;
            return Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Run { config } => RunConfig::from_json(&read_input(&config)?)?,
        cmd => {
            let op = operation(cmd, &cli.group)?;
            RunConfig::new(cli.group, op)
        }
    };
    let b = &mut config.budgets;
    b.window_cap = flags.window_cap.or(b.window_cap);
    b.search_budget = flags.search_budget.or(b.search_budget);
    b.threads = flags.threads.or(b.threads);
    config.budgets = config.budgets.clone().with_env()?;
    if let Some(n) = config.budgets.threads {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let output = cli.output.or(config.output.clone());
    let env = run(&config)?;
    write_output(output.as_deref(), &render(&env, cli.format)?)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
