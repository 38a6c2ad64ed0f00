//! Command line front end: build, query, bench, gen, stats.
//!
//! Exit codes: 0 success, 1 usage, 2 validation or format problems,
//! 3 file I/O. Machine-readable output is key=value, one per line;
//! human context goes on `#` lines.

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use pemb::embedding::build_sequential;
use pemb::index::{
    build_degree_index, build_neighbour_index, default_degree_threshold,
    default_neighbour_threshold,
};
use pemb::parbuild::{par_build, worker_threads};
use pemb::rng::XorShift64;
use pemb::rotation::RotationSystem;
use pemb::spanning::{spanning_tree_dfs, spanning_tree_parallel};
use pemb::{generate, stats, Order, PembStructure};

#[derive(Parser)]
#[command(name = "pemb", about = "Succinct planar embeddings", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeKind {
    Dfs,
    Parallel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexKind {
    Degree,
    Neighbour,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    Degree,
    Listing,
    Face,
    Neighbour,
    Dfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Ccw,
    Cw,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Grid,
    Cycle,
    Stacked,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a .pemb structure from a PG1 rotation file.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Use the parallel pipeline with this many workers; a single
        /// sequential pass when absent. 0 consults PEMB_THREADS, then
        /// the machine.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value_t = TreeKind::Dfs)]
        tree: TreeKind,
        /// Optional directories to attach, comma separated.
        #[arg(long, value_delimiter = ',')]
        indexes: Vec<IndexKind>,
    },
    /// Answer one navigation query against a .pemb file.
    Query {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_enum)]
        op: OpKind,
        /// Rotation direction for listing and face.
        #[arg(long, value_enum, default_value_t = Dir::Ccw)]
        order: Dir,
        /// Vertex ids, or an edge position for face.
        args: Vec<usize>,
    },
    /// Median build and query timings plus space, as key=value lines.
    Bench {
        #[arg(long)]
        input: PathBuf,
        /// Measurements per data point; at least 10.
        #[arg(long)]
        reps: usize,
        #[arg(long = "threads-list", value_delimiter = ',', default_value = "1,2,4,8")]
        threads_list: Vec<usize>,
    },
    /// Write a generated rotation system as PG1.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        out: PathBuf,
        /// grid: rows cols. cycle: length. stacked: vertices seed.
        params: Vec<u64>,
    },
    /// Space breakdown and entropy of a .pemb file.
    Stats {
        #[arg(long)]
        structure: PathBuf,
    },
}

type CmdError = (u8, String);

fn usage(msg: impl Into<String>) -> CmdError {
    (1, msg.into())
}

fn app(e: pemb::Error) -> CmdError {
    let code = match e {
        pemb::Error::Io(_) => 3,
        _ => 2,
    };
    (code, e.to_string())
}

fn read_text(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path).map_err(|e| (3, format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CmdError> {
    std::fs::read(path).map_err(|e| (3, format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CmdError> {
    std::fs::write(path, bytes).map_err(|e| (3, format!("{}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Result<PembStructure, CmdError> {
    PembStructure::from_bytes(&read_bytes(path)?).map_err(app)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("pemb: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), CmdError> {
    match cmd {
        Cmd::Build { input, output, threads, tree, indexes } => {
            cmd_build(&input, &output, threads, tree, &indexes)
        }
        Cmd::Query { structure, op, order, args } => cmd_query(&structure, op, order, &args),
        Cmd::Bench { input, reps, threads_list } => cmd_bench(&input, reps, &threads_list),
        Cmd::Gen { kind, out, params } => cmd_gen(kind, &out, &params),
        Cmd::Stats { structure } => cmd_stats(&structure),
    }
}

fn cmd_build(
    input: &Path,
    output: &Path,
    threads: Option<usize>,
    tree: TreeKind,
    indexes: &[IndexKind],
) -> Result<(), CmdError> {
    let g = RotationSystem::load_pg(&read_text(input)?).map_err(app)?;
    let t = match tree {
        TreeKind::Dfs => spanning_tree_dfs(&g),
        TreeKind::Parallel => {
            spanning_tree_parallel(&g, worker_threads(threads.unwrap_or(0)))
        }
    }
    .map_err(app)?;
    let mut s = match threads {
        None => build_sequential(&g, &t),
        Some(k) => par_build(&g, &t, k),
    }
    .map_err(app)?;
    if indexes.contains(&IndexKind::Degree) {
        s.attach_degree_index(build_degree_index(&s, default_degree_threshold(s.m())));
    }
    if indexes.contains(&IndexKind::Neighbour) {
        s.attach_neighbour_index(build_neighbour_index(
            &s,
            default_neighbour_threshold(s.m()),
        ));
    }
    let bytes = s.to_bytes();
    write_bytes(output, &bytes)?;
    println!("n={}", s.n());
    println!("m={}", s.m());
    if s.m() > 0 {
        println!("bpe={:.3}", s.size_bits() as f64 / s.m() as f64);
    }
    println!("bytes={}", bytes.len());
    println!("output={}", output.display());
    Ok(())
}

fn cmd_query(structure: &Path, op: OpKind, order: Dir, args: &[usize]) -> Result<(), CmdError> {
    let s = load_structure(structure)?;
    let order = match order {
        Dir::Ccw => Order::Ccw,
        Dir::Cw => Order::Cw,
    };
    let vertex_arg = |k: usize| -> Result<usize, CmdError> {
        let v = args[k];
        if v >= 1 && v <= s.n() {
            Ok(v)
        } else {
            Err((2, format!("vertex {v} out of range 1..={}", s.n())))
        }
    };
    let expect = |want: usize| -> Result<(), CmdError> {
        if args.len() == want {
            Ok(())
        } else {
            Err(usage(format!("expected {want} argument(s), got {}", args.len())))
        }
    };
    match op {
        OpKind::Degree => {
            expect(1)?;
            println!("{}", s.degree(vertex_arg(0)?));
        }
        OpKind::Listing => {
            expect(1)?;
            println!("{}", join(&s.listing(vertex_arg(0)?, order)));
        }
        OpKind::Face => {
            expect(1)?;
            let e = args[0];
            if e < 1 || e > 2 * s.m() {
                return Err((2, format!("position {e} out of range 1..={}", 2 * s.m())));
            }
            println!("{}", join(&s.face(e, order)));
        }
        OpKind::Neighbour => {
            expect(2)?;
            println!("{}", s.neighbour(vertex_arg(0)?, vertex_arg(1)?));
        }
        OpKind::Dfs => {
            expect(1)?;
            println!("{}", join(&s.dfs(vertex_arg(0)?)));
        }
    }
    Ok(())
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn median(samples: &mut Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = samples.len();
    if k == 0 {
        return 0.0;
    }
    if k % 2 == 1 {
        samples[k / 2]
    } else {
        (samples[k / 2 - 1] + samples[k / 2]) / 2.0
    }
}

fn cmd_bench(input: &Path, reps: usize, threads_list: &[usize]) -> Result<(), CmdError> {
    if reps < 10 {
        return Err(usage("--reps must be at least 10"));
    }
    if threads_list.is_empty() || threads_list.contains(&0) {
        return Err(usage("--threads-list needs positive worker counts"));
    }
    let g = RotationSystem::load_pg(&read_text(input)?).map_err(app)?;
    if g.n() == 0 {
        return Err((2, "nothing to bench on an empty graph".into()));
    }
    let t = spanning_tree_dfs(&g).map_err(app)?;
    let s = build_sequential(&g, &t).map_err(app)?;
    let n = g.n();
    let m = g.m();
    let stem = input
        .file_stem()
        .map(|x| x.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    println!("# bench {stem}: median of {reps} repetitions");
    println!("dataset={stem}");
    println!("n={n}");
    println!("m={m}");
    if m > 0 {
        println!("bpe={:.3}", s.size_bits() as f64 / m as f64);
    }

    let mut rng = XorShift64::new(42);
    let batch = 1000usize;
    let vertices: Vec<usize> = (0..batch).map(|_| 1 + rng.below(n)).collect();
    let positions: Vec<usize> = (0..batch)
        .map(|_| if m == 0 { 0 } else { 1 + rng.below(2 * m) })
        .collect();

    let time_batch = |f: &dyn Fn() -> usize| -> f64 {
        let start = Instant::now();
        black_box(f());
        start.elapsed().as_secs_f64() * 1e9 / batch as f64
    };
    let run_queries = |name: &str, f: &dyn Fn() -> usize| {
        black_box(f());
        let mut samples: Vec<f64> = (0..reps).map(|_| time_batch(f)).collect();
        println!("{name}_median_ns={:.1}", median(&mut samples));
    };
    run_queries("degree", &|| vertices.iter().map(|&v| s.degree(v)).sum());
    run_queries("listing", &|| {
        vertices.iter().map(|&v| s.listing(v, Order::Ccw).len()).sum()
    });
    if m > 0 {
        run_queries("face", &|| {
            positions.iter().map(|&e| s.face(e, Order::Cw).len()).sum()
        });
    }
    {
        let starts: Vec<usize> = (0..reps).map(|_| 1 + rng.below(n)).collect();
        black_box(s.dfs(starts[0]).len());
        let mut samples: Vec<f64> = starts
            .iter()
            .map(|&v| {
                let start = Instant::now();
                black_box(s.dfs(v).len());
                start.elapsed().as_secs_f64() * 1e6
            })
            .collect();
        println!("dfs_median_us={:.1}", median(&mut samples));
    }

    let build_median = |threads: usize| -> Result<f64, CmdError> {
        let mut samples = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            let built = par_build(&g, &t, threads).map_err(app)?;
            samples.push(start.elapsed().as_secs_f64() * 1e3);
            black_box(built.m());
        }
        Ok(median(&mut samples))
    };
    {
        let mut samples = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            let built = build_sequential(&g, &t).map_err(app)?;
            samples.push(start.elapsed().as_secs_f64() * 1e3);
            black_box(built.m());
        }
        println!("build_seq_ms={:.3}", median(&mut samples));
    }
    let t1 = build_median(1)?;
    println!("build_p1_ms={t1:.3}");
    for &p in threads_list {
        if p == 1 {
            continue;
        }
        let tp = build_median(p)?;
        println!("build_p{p}_ms={tp:.3}");
        println!("speedup_p{p}={:.3}", t1 / tp);
        println!("efficiency_p{p}={:.3}", t1 / (p as f64 * tp));
    }
    Ok(())
}

fn cmd_gen(kind: GenKind, out: &Path, params: &[u64]) -> Result<(), CmdError> {
    let g = match kind {
        GenKind::Grid => {
            if params.len() != 2 {
                return Err(usage("grid takes rows and cols"));
            }
            generate::grid(params[0] as usize, params[1] as usize)
        }
        GenKind::Cycle => {
            if params.len() != 1 {
                return Err(usage("cycle takes a length"));
            }
            generate::cycle(params[0] as usize)
        }
        GenKind::Stacked => {
            if params.len() != 2 {
                return Err(usage("stacked takes a vertex count and a seed"));
            }
            generate::stacked(params[0] as usize, params[1])
        }
    }
    .map_err(app)?;
    write_bytes(out, g.save_pg().as_bytes())?;
    println!("n={}", g.n());
    println!("m={}", g.m());
    println!("out={}", out.display());
    Ok(())
}

fn cmd_stats(structure: &Path) -> Result<(), CmdError> {
    let s = load_structure(structure)?;
    let rep = stats::stats(&s);
    println!("n={}", rep.n);
    println!("m={}", rep.m);
    println!("loaded_bits={}", rep.loaded_bits);
    println!("serialized_bits={}", rep.serialized_bits);
    println!("bpe={:.3}", rep.bits_per_edge);
    println!("serialized_bpe={:.3}", rep.serialized_bits_per_edge);
    println!("open_paren={}", rep.symbol_counts[0]);
    println!("close_paren={}", rep.symbol_counts[1]);
    println!("open_bracket={}", rep.symbol_counts[2]);
    println!("close_bracket={}", rep.symbol_counts[3]);
    println!("h0={:.4}", rep.h0);
    println!("h1={:.4}", rep.h1);
    println!("entropy_bpe={:.4}", rep.entropy_bits_per_edge);
    for (name, bits) in &rep.components {
        println!("component_{name}_bits={bits}");
    }
    Ok(())
}
