//! `sltree` — Sturm–Liouville spectra on metric trees from the shell.
//!
//! Every subcommand reads a tree description (text or JSON, see the library's
//! `format` module) and writes CSV to stdout or `--out`. Exit codes: 0 on
//! success (for `verify`: the evidence is consistent), 2 when `verify` finds
//! the forbidden configuration, 1 on any error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use sltree::diophantine::{simultaneous_approx_tree, DEFAULT_BUDGET};
use sltree::experiment::{
    ambarzumyan_experiment, charfn_samples, fd_eigenvalues, first_eigenvalues,
    write_charfn_csv, write_spectrum_csv,
};
use sltree::format::read_file;
use sltree::spectrum::{scan_spectrum, ScanOptions, ZeroSource};

#[derive(Parser)]
#[command(name = "sltree", version, about = "Sturm-Liouville spectra on metric trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan a spectral window and list eigenvalues with multiplicities
    Spectrum {
        /// Tree description file (text or JSON)
        #[arg(long)]
        tree: PathBuf,
        /// Spectral window as `lo:hi` in the eigenvalue variable
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: (f64, f64),
        /// Override the scan resolution (frequency-variable grid step)
        #[arg(long)]
        step: Option<f64>,
        /// Impose a fixed-end condition at this pendant vertex
        #[arg(long)]
        dirichlet_leaf: Option<usize>,
        /// Locate zeros on the vertex-condition determinant instead of the
        /// edge recursion (slower; useful as a cross-check)
        #[arg(long)]
        det: bool,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the characteristic functions on a uniform grid
    Charfn {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: (f64, f64),
        /// Number of grid points (endpoints included)
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        dirichlet_leaf: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simultaneously approximate the edge-length ratios by one denominator
    Approx {
        #[arg(long)]
        tree: PathBuf,
        /// Resolution: subcube count per axis of the pigeonhole scan
        #[arg(long)]
        n: u32,
        /// Cap on the number of scan points
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Compare the dressed spectrum against the free one and test the
    /// zero-potential evidence
    Verify {
        #[arg(long)]
        tree: PathBuf,
        /// How many eigenvalues to compare
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Spectra count as equal when every gap stays below this
        #[arg(long, default_value_t = 1e-3)]
        gap_tol: f64,
        /// Write the full report here as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the scan against a finite-volume discretization
    Oracle {
        #[arg(long)]
        tree: PathBuf,
        /// Mesh step of the discretization
        #[arg(long, default_value_t = 1e-3)]
        mesh: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad hi: {e}"))?;
    Ok((lo, hi))
}

fn sink(out: &Option<PathBuf>) -> sltree::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn run(cmd: Cmd) -> sltree::Result<i32> {
    match cmd {
        Cmd::Spectrum {
            tree,
            window,
            step,
            dirichlet_leaf,
            det,
            out,
        } => {
            let parsed = read_file::<f64>(&tree)?;
            let opts = ScanOptions {
                rho_step: step,
                oracle: if det {
                    ZeroSource::Determinant
                } else {
                    ZeroSource::Recursion
                },
                dirichlet_leaf,
                ..ScanOptions::default()
            };
            let spec = scan_spectrum(&parsed.tree, &parsed.potentials, window, &opts)?;
            eprintln!(
                "{} eigenvalue(s), total multiplicity {}, in [{}, {}]",
                spec.entries.len(),
                spec.total_multiplicity(),
                window.0,
                window.1
            );
            write_spectrum_csv(sink(&out)?, &spec)?;
            Ok(0)
        }
        Cmd::Charfn {
            tree,
            window,
            count,
            dirichlet_leaf,
            out,
        } => {
            let parsed = read_file::<f64>(&tree)?;
            let rows =
                charfn_samples(&parsed.tree, &parsed.potentials, window, count, dirichlet_leaf)?;
            write_charfn_csv(sink(&out)?, &rows)?;
            Ok(0)
        }
        Cmd::Approx { tree, n, budget } => {
            let parsed = read_file::<f64>(&tree)?;
            let a = simultaneous_approx_tree(&parsed.tree, n, budget)?;
            println!("n = {}", a.n);
            println!("m = {}", a.m);
            for (i, (k, err)) in a.k.iter().zip(&a.errors).enumerate() {
                println!("k[{i}] = {k}, err = {err:.6e}");
            }
            println!("bound = {:.6e}", a.bound);
            Ok(0)
        }
        Cmd::Verify {
            tree,
            count,
            gap_tol,
            out,
        } => {
            let parsed = read_file::<f64>(&tree)?;
            let r = ambarzumyan_experiment(&parsed.tree, &parsed.potentials, count, gap_tol)?;
            println!(
                "tree: {} edge(s), total length {}",
                r.edge_count, r.total_length
            );
            println!(
                "compared {} eigenvalue(s): max gap {:.3e}, tolerance {:.3e}",
                r.lambda_q.len(),
                r.max_gap,
                r.gap_tol
            );
            match r.sum_k_tail {
                Some(t) => println!(
                    "mass evidence: estimator tail {:.6}, closed form {:.6}",
                    t, r.sum_k_true
                ),
                None => println!(
                    "mass evidence: estimator unavailable, closed form {:.6}",
                    r.sum_k_true
                ),
            }
            println!("verdict: {}", r.verdict());
            if let Some(p) = out {
                serde_json::to_writer_pretty(std::fs::File::create(p)?, &r)?;
            }
            Ok(if r.consistent { 0 } else { 2 })
        }
        Cmd::Oracle {
            tree,
            mesh,
            count,
            out,
        } => {
            let parsed = read_file::<f64>(&tree)?;
            let fd = fd_eigenvalues(&parsed.tree, &parsed.potentials, mesh, count)?.expanded();
            let scan = first_eigenvalues(&parsed.tree, &parsed.potentials, count)?;
            let mut w = sink(&out)?;
            writeln!(w, "index,scan,fd,gap")?;
            let mut max_gap = 0.0f64;
            for (i, (s, f)) in scan.iter().zip(&fd).enumerate() {
                let gap = (s - f).abs();
                max_gap = max_gap.max(gap);
                writeln!(w, "{i},{s:.14e},{f:.14e},{gap:.3e}")?;
            }
            eprintln!("max |scan - fd| = {max_gap:.3e} at mesh step {mesh}");
            Ok(0)
        }
    }
}
