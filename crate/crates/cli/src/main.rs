use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use brickwork::certify::{certify, certify_tallies, parent_hamiltonian, CertifyConfig, MixedState, TermTally};
use brickwork::ensemble::ensemble_stats;
use brickwork::mbqc::{gadget_suite, ideal_cz_network_state, reduce_cluster_to_brickwork, ReductionPlan};
use brickwork::partition::partition_function;
use brickwork::{AngleField, Bitstring, Lattice, LatticeKind, LatticeSpec, PhaseProgram, PureState};

/// Translation-invariant Ising sampling on brickwork lattices.
///
/// The statevector cap defaults to 26 qubits and can be changed with the
/// BRICKWORK_MAX_QUBITS environment variable.
#[derive(Parser, Debug)]
#[command(name = "brickwork", version)]
struct Cli {
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample all-X outcomes of the Ising-evolved state.
    Sample {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Number of outcome strings.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact all-X outcome distribution.
    Distribution {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, value_enum, default_value_t = DistFormat::Json)]
        format: DistFormat,
    },
    /// X-basis amplitude of one outcome string.
    Amplitude {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Outcome string, site 0 first. Defaults to all zeros.
        #[arg(long)]
        x: Option<Bitstring>,
    },
    /// Partition function Z_x and its agreement with the state vector.
    Partition {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Outcome string, site 0 first. Defaults to all zeros.
        #[arg(long)]
        x: Option<Bitstring>,
        /// Largest accepted |q_x − |Z_x|²/4^N|.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Check every gadget identity by simulation.
    VerifyGadgets {
        #[arg(long, value_enum, default_value_t = TableFormat::Table)]
        format: TableFormat,
    },
    /// Plan the reduction of a square cluster to a brickwork.
    Reduce {
        /// Cluster rows (odd).
        #[arg(long, default_value_t = 1)]
        rows: i64,
        /// Cluster columns (one less than a multiple of 14).
        #[arg(long, default_value_t = 13)]
        cols: i64,
    },
    /// Certify the prepared state from simulated local measurements.
    Certify {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Total variation budget ε.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Allowed failure probability α.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Outcome bit-flip rate of the measurements.
        #[arg(long, default_value_t = 0.0)]
        noise_flip: f64,
        /// Readings per term; defaults to the sample budget.
        #[arg(long)]
        samples: Option<u64>,
        /// Depolarize this site of the prepared state.
        #[arg(long)]
        depolarize_site: Option<usize>,
        /// Weight of the depolarizing perturbation.
        #[arg(long, default_value_t = 0.0)]
        depolarize_weight: f64,
        /// JSON array of term tallies to certify instead of simulating.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Statistics of the random brick ensemble.
    EnsembleStats {
        /// Number of wires (brick rows).
        #[arg(long, default_value_t = 8)]
        cells: usize,
        #[arg(long, default_value_t = 8)]
        layers: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct LatticeArgs {
    /// Path to a JSON lattice description; overrides --kind, --m and --n.
    #[arg(long)]
    lattice: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::Brickwork)]
    kind: KindArg,
    /// Rows (cells for a brickwork).
    #[arg(long, default_value_t = 1)]
    m: i64,
    /// Columns (cells per row for a brickwork).
    #[arg(long, default_value_t = 1)]
    n: i64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Brickwork,
    Cluster,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Table,
    Json,
}

impl LatticeArgs {
    fn build(&self) -> Result<(Lattice, AngleField)> {
        let spec = match &self.lattice {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                LatticeSpec::from_json(&text)?
            }
            None => LatticeSpec {
                kind: match self.kind {
                    KindArg::Brickwork => LatticeKind::Brickwork,
                    KindArg::Cluster => LatticeKind::Cluster,
                },
                m: self.m,
                n: self.n,
                edges: None,
                angles: None,
                coupling: None,
            },
        };
        Ok(spec.build()?)
    }
}

fn evolved(lattice: &Lattice, field: &AngleField) -> Result<PureState> {
    let mut state = PureState::plus(lattice.num_sites())?;
    state.apply_phase_program(&PhaseProgram::from_hamiltonian(lattice, field)?)?;
    Ok(state)
}

fn outcome(x: &Option<Bitstring>, n: usize) -> Result<Bitstring> {
    match x {
        Some(b) if b.len() != n => bail!("outcome has {} bits, lattice has {n} sites", b.len()),
        Some(b) => Ok(*b),
        None => Ok(Bitstring::zeros(n)),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Output text and whether the run met its checks.
fn run(command: Command) -> Result<(String, bool)> {
    match command {
        Command::Sample { lattice, count, seed } => {
            let (l, f) = lattice.build()?;
            Ok((evolved(&l, &f)?.sample(count, seed)?.to_text(), true))
        }
        Command::Distribution { lattice, format } => {
            let (l, f) = lattice.build()?;
            let dist = evolved(&l, &f)?.full_distribution()?;
            let text = match format {
                DistFormat::Csv => dist.to_csv(),
                DistFormat::Json => {
                    let outcomes: Vec<_> = Bitstring::all(dist.num_bits())
                        .zip(dist.probabilities())
                        .map(|(x, p)| json!({ "x": x, "p": p }))
                        .collect();
                    to_json(&json!({ "num_sites": dist.num_bits(), "outcomes": outcomes }))?
                }
            };
            Ok((text, true))
        }
        Command::Amplitude { lattice, x } => {
            let (l, f) = lattice.build()?;
            let x = outcome(&x, l.num_sites())?;
            let a = evolved(&l, &f)?.x_basis_amplitude(x)?;
            Ok((to_json(&json!({ "x": x, "re": a.re, "im": a.im, "probability": a.norm_sqr() }))?, true))
        }
        Command::Partition { lattice, x, tolerance } => {
            let (l, f) = lattice.build()?;
            let x = outcome(&x, l.num_sites())?;
            let z = partition_function(&l, &f, x)?;
            let q = evolved(&l, &f)?.x_basis_amplitude(x)?.norm_sqr();
            let residual = (q - z.born_probability()).abs();
            let text = to_json(&json!({
                "x": x,
                "re": z.value.re,
                "im": z.value.im,
                "abs2": z.abs2(),
                "q_from_statevec": q,
                "residual": residual,
            }))?;
            Ok((text, residual <= tolerance))
        }
        Command::VerifyGadgets { format } => {
            let suite = gadget_suite()?;
            let ok = suite.iter().all(|c| c.passed);
            let text = match format {
                TableFormat::Json => to_json(&suite)?,
                TableFormat::Table => {
                    let mut out = format!("{:<44} {:>20} {:>20}  result\n", "check", "fidelity", "byproducts");
                    for c in &suite {
                        let by = c.byproduct_fidelity.map_or("-".to_string(), |b| format!("{b:.15}"));
                        let verdict = if c.passed { "pass" } else { "FAIL" };
                        out.push_str(&format!("{:<44} {:>20.15} {:>20}  {verdict}\n", c.name, c.fidelity, by));
                    }
                    let passed = suite.iter().filter(|c| c.passed).count();
                    out.push_str(&format!("{passed}/{} passed\n", suite.len()));
                    out
                }
            };
            Ok((text, ok))
        }
        Command::Reduce { rows, cols } => {
            let cluster = Lattice::cluster(rows, cols)?;
            let plan: ReductionPlan = reduce_cluster_to_brickwork(&cluster)?;
            Ok((to_json(&plan)?, true))
        }
        Command::Certify {
            lattice,
            epsilon,
            alpha,
            seed,
            noise_flip,
            samples,
            depolarize_site,
            depolarize_weight,
            records,
        } => {
            let (l, f) = lattice.build()?;
            let config = CertifyConfig { epsilon, alpha, seed, noise_flip, samples_per_term: samples };
            let report = match records {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let tallies: Vec<TermTally> = serde_json::from_str(&text).context("parsing term tallies")?;
                    certify_tallies(&tallies, &parent_hamiltonian(&l, &f)?, l.num_sites(), &config)?
                }
                None => {
                    let mut rho = MixedState::pure(ideal_cz_network_state(&l, &f)?);
                    if let Some(site) = depolarize_site {
                        rho = rho.depolarize(site, depolarize_weight)?;
                    }
                    certify(&rho, &l, &f, &config)?
                }
            };
            Ok((to_json(&report)?, true))
        }
        Command::EnsembleStats { cells, layers, trials, seed } => {
            let stats = ensemble_stats(cells, layers, trials, seed)?;
            Ok((to_json(&stats)?, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|(text, ok)| {
        match &cli.output {
            Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
