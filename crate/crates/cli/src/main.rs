use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypercut::circuit::{emit_qasm, generate, GeneratorKind, GeneratorOptions};
use hypercut::metrics::{write_tables_csv, NoiseParams};
use hypercut::partitioner::sampling_overhead;
use hypercut::pipeline::{
    benchmark_suite, load_input, parse_memory, plan, run, run_circuit, write_artifacts, write_suite_artifacts,
    PipelineError, RunConfig, MEMORY_ENV,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hypercut",
    version,
    about = "Partition quantum circuits and run the pieces on classical or quantum backends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark circuit as QASM.
    Generate {
        /// bv, ghz, qft or random
        kind: String,
        n: usize,
        /// BV secret over the n-1 data qubits, character i is qubit i.
        #[arg(long)]
        secret: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; defaults to `{kind}{n}.qasm` in the current directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep K and print the chosen partition.
    Partition {
        input: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Full workflow; writes report.json, tables.csv, distribution.json and plotdata/.
    Run {
        input: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Plan-only noise and cost tables. Without an input, covers BV, GHZ,
    /// random and QFT at the requested sizes.
    Report {
        input: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        random_depth: usize,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, default_value_t = 8)]
    k_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Classical memory budget: bytes, a k/m/g suffix, or `auto`.
    #[arg(long, env = MEMORY_ENV, default_value = "8GiB")]
    memory: String,
    /// Multi-qubit gate threshold; derived from the memory budget when omitted.
    #[arg(long)]
    max_multiqubit_gates: Option<usize>,
    /// Depolarizing noise in the quantum sampler.
    #[arg(long)]
    noise: bool,
    #[arg(long, default_value = "out")]
    out: String,
    #[arg(long)]
    threads: Option<usize>,
    /// Partitioning runs per K.
    #[arg(long, default_value_t = 4)]
    attempts: usize,
    #[arg(long, default_value_t = 8)]
    max_cuts: usize,
    #[arg(long, default_value_t = 4096)]
    max_variants: u64,
    #[arg(long, default_value_t = 25)]
    simulator_cap: usize,
    /// Also write every physical variant as QASM under `qasm/`.
    #[arg(long)]
    export_qasm: bool,
}

impl RunOpts {
    fn config(&self, input: &str) -> Result<RunConfig, PipelineError> {
        if self.threads == Some(0) {
            return Err(PipelineError::Input("--threads must be positive".into()));
        }
        if self.shots == 0 {
            return Err(PipelineError::Input("--shots must be positive".into()));
        }
        Ok(RunConfig {
            input: input.to_string(),
            k_cap: self.k_cap,
            seed: self.seed,
            shots: self.shots,
            memory_bytes: parse_memory(&self.memory)?,
            max_multiqubit_gates: self.max_multiqubit_gates,
            noise: self.noise,
            output_dir: self.out.clone(),
            parallelism: self.threads,
            attempts: self.attempts.max(1),
            max_cuts: self.max_cuts,
            max_variants: self.max_variants,
            simulator_cap: self.simulator_cap,
            export_qasm: self.export_qasm,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.kind().to_string();
            let detail = e.render().to_string();
            eprintln!("{}", json!({ "error": { "kind": "usage", "message": message, "detail": detail } }));
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}

fn io(context: String) -> impl FnOnce(std::io::Error) -> PipelineError {
    move |source| PipelineError::Io { context, source }
}

fn dispatch(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Generate { kind, n, secret, depth, seed, output } => {
            let kind: GeneratorKind = kind.parse()?;
            let c = generate(kind, n, &GeneratorOptions { secret, depth, seed })?;
            let path = output.unwrap_or_else(|| PathBuf::from(format!("{}.qasm", c.name())));
            fs::write(&path, emit_qasm(&c)).map_err(io(format!("writing {}", path.display())))?;
            println!("{}", path.display());
        }
        Command::Partition { input, opts } => {
            let cfg = opts.config(&input)?;
            let circuit = load_input(&input)?;
            let p = plan(&circuit, &cfg)?;
            let cuts = p.set.cuts().len();
            let out = json!({
                "circuit": circuit.name(),
                "K": p.candidate.k,
                "C": cuts,
                "overhead": sampling_overhead(cuts, 4),
                "subcircuits": p.set.subcircuits.len(),
                "widths": p.set.subcircuits.iter().map(|s| s.width()).collect::<Vec<_>>(),
                "cuts": p.set.cuts(),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        }
        Command::Run { input, opts } => {
            let cfg = opts.config(&input)?;
            let out = run(&cfg)?;
            let dir = PathBuf::from(&cfg.output_dir);
            write_artifacts(&out, &dir)?;
            let a = &out.document.report.aggregates;
            let summary = json!({
                "circuit": out.document.circuit.name,
                "K": out.document.partition.k,
                "C": a.cut_points,
                "overhead": a.sampling_overhead,
                "noise_saved_pct": a.noise_saved_pct,
                "qubit_max": a.qubit_max,
                "classical_max": a.classical_max,
                "executed": out.document.execution.executed,
                "skipped_reason": out.document.execution.skipped_reason,
                "output_dir": dir,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
        }
        Command::Report { input, sizes, random_depth, opts } => {
            let cfg = opts.config(input.as_deref().unwrap_or(""))?;
            let circuits = match &input {
                Some(i) => vec![load_input(i)?],
                None => benchmark_suite(&sizes, random_depth, cfg.seed)?,
            };
            let mut reports = Vec::new();
            for c in &circuits {
                let out = run_circuit(c, &cfg, false)?;
                reports.push(out.plan.report(&NoiseParams::default()));
            }
            write_suite_artifacts(&reports, &PathBuf::from(&cfg.output_dir))?;
            let mut table = Vec::new();
            write_tables_csv(&reports, &mut table).map_err(io("formatting table".into()))?;
            print!("{}", String::from_utf8_lossy(&table));
        }
    }
    Ok(())
}
