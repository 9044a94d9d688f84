//! `dbtile` — build, tile and analyze de Bruijn/Kautz interconnect graphs.
//!
//! Data goes to standard output, diagnostics and reports to standard error.
//! Exit codes: 0 success, 1 usage or runtime error, 2 validation failure.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use dbtile::asymptotics::{
    asymptote_series, exact_break_frequency, score_table, simulate_ideal, window_probability_sum,
    write_score_table_csv, write_series_tsv,
};
use dbtile::graphs::{GraphKind, HostGraph, LatinSquare, SizeSpec};
use dbtile::stratification::{read_tile, write_tile, TileGraph};
use dbtile::tilesearch::{
    exact_optimal_tile, greedy_tile, lower_bound, score_tile, ExactOptions, GreedyOptions,
};
use dbtile::tiling::{build_tiling, read_dump, Tiling};

#[derive(Parser)]
#[command(name = "dbtile", version, about = "de Bruijn / Kautz graph tiling toolkit")]
struct Cli {
    /// Worker threads for searches and tables (default: DBTILE_THREADS or
    /// all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log search progress to standard error
    #[arg(long, short = 'v', global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct HostArgs {
    /// Host family: debruijn | kautz | gdebruijn | gkautz
    #[arg(long)]
    kind: String,

    /// Degree
    #[arg(short = 'K', long = "degree", value_name = "K")]
    k: u32,

    /// Word length for the standard families (de Bruijn: V = K^N,
    /// Kautz: V = (K+1)·K^(N-1))
    #[arg(short = 'N', long = "diameter", value_name = "N")]
    n: Option<u32>,

    /// Vertex count for the generalized families
    #[arg(short = 'V', long = "vertices", value_name = "V")]
    v: Option<u64>,
}

impl HostArgs {
    fn build(&self) -> Result<HostGraph> {
        let kind = GraphKind::parse(&self.kind)
            .ok_or_else(|| anyhow!("unknown graph kind {:?}", self.kind))?;
        let size = match (self.n, self.v) {
            (Some(n), None) => SizeSpec::Diameter(n),
            (None, Some(v)) => SizeSpec::Vertices(v),
            _ => bail!("give exactly one of -N or -V"),
        };
        Ok(HostGraph::build(kind, self.k, size)?)
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Wall-clock budget for exact search, seconds
    #[arg(long, default_value_t = 60)]
    budget_seconds: u64,

    /// Largest stratification level for exact search (default 2M+1)
    #[arg(long)]
    level_range: Option<u32>,

    /// Refuse exact search beyond this many tile words
    #[arg(long, default_value_t = 32)]
    max_cells: usize,

    /// Random seed for greedy search
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Greedy restarts
    #[arg(long, default_value_t = 32)]
    restarts: u32,
}

impl SearchArgs {
    fn exact(&self) -> ExactOptions {
        ExactOptions {
            level_range: self.level_range,
            budget: Duration::from_secs(self.budget_seconds),
            max_cells: self.max_cells,
        }
    }

    fn greedy(&self) -> GreedyOptions {
        GreedyOptions { seed: self.seed, restarts: self.restarts }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit a host graph as DOT
    Graph(HostArgs),

    /// Generate a tile and print it as a tile file (report on stderr)
    Tile {
        #[command(subcommand)]
        method: TileMethod,
    },

    /// Validate a tile file (exit 2 if it is not a certified tile)
    ValidateTile {
        /// Tile file; `-` or absent reads standard input
        file: Option<PathBuf>,
    },

    /// Broken-edge lower bound for tiles of size K^M
    Bound {
        #[arg(short = 'K', long = "degree")]
        k: u32,
        #[arg(short = 'M', long = "tile-exponent")]
        m: u32,
    },

    /// Build, verify or export complete tilings
    Tiling {
        #[command(subcommand)]
        action: TilingAction,
    },

    /// Tables over a (K, M) grid
    Table {
        #[command(subcommand)]
        which: TableKind,
    },

    /// Idealized broken-edge model
    Ideal {
        #[command(subcommand)]
        which: IdealKind,
    },

    /// Broken-fraction series against the asymptotic references (TSV)
    Series {
        #[arg(short = 'K', long = "degree")]
        k: u32,
        #[arg(long, default_value_t = 1)]
        mmin: u32,
        #[arg(long)]
        mmax: u32,
    },
}

#[derive(Subcommand)]
enum TileMethod {
    /// Expansion-score stratification
    Score {
        #[arg(short = 'K', long = "degree")]
        k: u32,
        #[arg(short = 'M', long = "tile-exponent")]
        m: u32,
    },
    /// Branch-and-bound exact optimum
    Exact {
        #[arg(short = 'K', long = "degree")]
        k: u32,
        #[arg(short = 'M', long = "tile-exponent")]
        m: u32,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Randomized greedy with restarts
    Greedy {
        #[arg(short = 'K', long = "degree")]
        k: u32,
        #[arg(short = 'M', long = "tile-exponent")]
        m: u32,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Subcommand)]
enum TilingAction {
    /// Construct a tiling and dump it (or render dot / netlist)
    Build {
        #[command(flatten)]
        host: HostArgs,
        /// Tile source: score:M | exact:M | greedy:M | file:PATH
        #[arg(long)]
        tile: String,
        /// Projection digit map: f1 | f2 | path to a K×K table
        #[arg(long, default_value = "f1")]
        latin: String,
        /// Attempt construction even for uncertified tiles
        #[arg(long)]
        force: bool,
        /// Output: dump | dot | netlist
        #[arg(long, default_value = "dump")]
        format: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Re-verify a dumped tiling (exit 2 on failure)
    Verify {
        /// Dump file; `-` or absent reads standard input
        file: Option<PathBuf>,
    },
    /// Board/cable netlist of a dumped tiling
    Netlist {
        /// Dump file; `-` or absent reads standard input
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TableKind {
    /// Score-tile internal/broken table (CSV)
    Score {
        #[arg(long, default_value_t = 2)]
        kmin: u32,
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long, default_value_t = 2)]
        mmin: u32,
        #[arg(long, default_value_t = 6)]
        mmax: u32,
    },
    /// Exact-search optima over a grid (CSV with search status)
    Optimal {
        #[arg(long, default_value_t = 2)]
        kmin: u32,
        #[arg(long, default_value_t = 3)]
        kmax: u32,
        #[arg(long, default_value_t = 2)]
        mmin: u32,
        #[arg(long, default_value_t = 3)]
        mmax: u32,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Subcommand)]
enum IdealKind {
    /// Exact break frequency 2/(M+1) plus a telescoping check
    Exact {
        #[arg(short = 'M', long = "window")]
        m: u64,
        /// Upper limit of the partial-sum check
        #[arg(long, default_value_t = 10_000)]
        tail: u64,
    },
    /// Monte Carlo run of the sliding-window model
    Simulate {
        #[arg(short = 'M', long = "window")]
        m: usize,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let mut logger = env_logger::Builder::from_default_env();
    if cli.verbose {
        logger.filter_level(log::LevelFilter::Info);
    }
    let _ = logger.try_init();

    let threads = cli
        .threads
        .or_else(|| std::env::var("DBTILE_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
        _ => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

fn parse_latin(spec: &str, k: u32) -> Result<LatinSquare> {
    match spec {
        "f1" => Ok(LatinSquare::difference(k)),
        "f2" => Ok(LatinSquare::sum(k)),
        path => {
            let mut text = String::new();
            File::open(path)
                .with_context(|| format!("opening Latin square {path}"))?
                .read_to_string(&mut text)?;
            let table: Vec<Vec<u32>> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.split_whitespace().map(|t| t.parse().map_err(Into::into)).collect())
                .collect::<Result<_>>()?;
            Ok(LatinSquare::from_table(table)?)
        }
    }
}

/// Resolve `score:M | exact:M | greedy:M | file:PATH` into a tile.
fn resolve_tile(spec: &str, k: u32, search: &SearchArgs) -> Result<TileGraph> {
    let (method, arg) =
        spec.split_once(':').ok_or_else(|| anyhow!("tile spec {spec:?} needs method:arg"))?;
    match method {
        "score" => Ok(score_tile(k, arg.parse().context("tile exponent")?)),
        "exact" => {
            let m = arg.parse().context("tile exponent")?;
            let (tile, status) = exact_optimal_tile(k, m, &search.exact())?;
            eprintln!("exact tile ({k},{m}): {} edges, {status:?}", tile.edge_count());
            Ok(tile)
        }
        "greedy" => Ok(greedy_tile(k, arg.parse().context("tile exponent")?, &search.greedy())),
        "file" => {
            let tile = read_tile(BufReader::new(File::open(arg)?))?;
            if tile.k() != k {
                bail!("tile file has K={}, host has K={k}", tile.k());
            }
            Ok(tile)
        }
        other => bail!("unknown tile method {other:?}"),
    }
}

fn emit_tile(tile: &TileGraph) -> Result<i32> {
    let report = tile.validate();
    let stdout = io::stdout();
    write_tile(&mut stdout.lock(), tile)?;
    eprintln!("{report}");
    Ok(if report.certified { 0 } else { 2 })
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Graph(host) => {
            let g = host.build()?;
            g.write_dot(&mut io::stdout().lock())?;
            Ok(0)
        }

        Command::Tile { method } => match method {
            TileMethod::Score { k, m } => emit_tile(&score_tile(k, m)),
            TileMethod::Exact { k, m, search } => {
                let (tile, status) = exact_optimal_tile(k, m, &search.exact())?;
                eprintln!("status={status:?}");
                emit_tile(&tile)
            }
            TileMethod::Greedy { k, m, search } => {
                let tile = greedy_tile(k, m, &search.greedy());
                let baseline = score_tile(k, m);
                eprintln!(
                    "greedy internal={} (score-tile baseline {})",
                    tile.edge_count(),
                    baseline.edge_count()
                );
                emit_tile(&tile)
            }
        },

        Command::ValidateTile { file } => {
            let tile = read_tile(open_input(&file)?)?;
            let report = tile.validate();
            println!("{report}");
            Ok(if report.certified { 0 } else { 2 })
        }

        Command::Bound { k, m } => {
            let b = lower_bound(k, m);
            println!(
                "K={k} M={m} best_N={} bound={} bound_exact={} ceil={} asymptotic={}",
                b.best_n,
                b.bound_real.to_f64().unwrap_or(f64::NAN),
                b.bound_real,
                b.bound_int,
                b.asymptotic.to_f64().unwrap_or(f64::NAN),
            );
            Ok(0)
        }

        Command::Tiling { action } => match action {
            TilingAction::Build { host, tile, latin, force, format, search } => {
                let g = host.build()?;
                let tile = resolve_tile(&tile, g.degree(), &search)?;
                let latin = parse_latin(&latin, g.degree())?;
                let tiling = match build_tiling(&g, &tile, &latin, force) {
                    Ok(t) => t,
                    Err(e @ dbtile::tiling::TilingError::NotCertified { .. })
                    | Err(e @ dbtile::tiling::TilingError::Obstruction { .. }) => {
                        eprintln!("{e}");
                        return Ok(2);
                    }
                    Err(e) => return Err(e.into()),
                };
                let report = tiling.verify();
                eprintln!("tiles={} {report}", tiling.tile_count());
                let stdout = io::stdout();
                let mut out = stdout.lock();
                match format.as_str() {
                    "dump" => tiling.write_dump(&mut out)?,
                    "dot" => tiling.write_dot(&mut out)?,
                    "netlist" => tiling.write_netlist(&mut out)?,
                    other => bail!("unknown format {other:?}"),
                }
                Ok(0)
            }
            TilingAction::Verify { file } => {
                let tiling: Tiling = read_dump(open_input(&file)?)?;
                let report = tiling.verify();
                println!("tiles={} {report}", tiling.tile_count());
                Ok(if report.all_ok() { 0 } else { 2 })
            }
            TilingAction::Netlist { file } => {
                let tiling = read_dump(open_input(&file)?)?;
                tiling.write_netlist(&mut io::stdout().lock())?;
                Ok(0)
            }
        },

        Command::Table { which } => match which {
            TableKind::Score { kmin, kmax, mmin, mmax } => {
                let ks: Vec<u32> = (kmin..=kmax).collect();
                let ms: Vec<u32> = (mmin..=mmax).collect();
                let cells = score_table(&ks, &ms);
                write_score_table_csv(&mut io::stdout().lock(), &cells)?;
                Ok(0)
            }
            TableKind::Optimal { kmin, kmax, mmin, mmax, search } => {
                let stdout = io::stdout();
                let mut out = stdout.lock();
                writeln!(out, "K,M,internal,broken,status")?;
                for k in kmin..=kmax {
                    for m in mmin..=mmax {
                        match exact_optimal_tile(k, m, &search.exact()) {
                            Ok((tile, status)) => writeln!(
                                out,
                                "{k},{m},{},{},{status:?}",
                                tile.edge_count(),
                                tile.broken_count()
                            )?,
                            Err(e) => {
                                eprintln!("skipping ({k},{m}): {e}");
                            }
                        }
                    }
                }
                Ok(0)
            }
        },

        Command::Ideal { which } => match which {
            IdealKind::Exact { m, tail } => {
                let exact = exact_break_frequency(m);
                // the partial window sum plus its tail term must reproduce
                // 2/(M+1) exactly
                let reconstructed = window_probability_sum(m, tail)
                    + BigRational::new(2.into(), (tail + 2).into());
                let ok = reconstructed == BigRational::new(2.into(), (m + 1).into());
                println!(
                    "M={m} exact={exact} float={:.6} telescoping_check[T={tail}]={}",
                    exact.to_f64().unwrap_or(f64::NAN),
                    if ok { "ok" } else { "MISMATCH" },
                );
                Ok(if ok { 0 } else { 2 })
            }
            IdealKind::Simulate { m, steps, seed } => {
                let r = simulate_ideal(m, steps, seed)?;
                println!("{r} deviation={:.3}σ", r.deviation_sigmas());
                Ok(0)
            }
        },

        Command::Series { k, mmin, mmax } => {
            let rows = asymptote_series(k, mmin, mmax);
            write_series_tsv(&mut io::stdout().lock(), &rows)?;
            Ok(0)
        }
    }
}
