//! End-to-end driver: load, partition, flag, execute, reconstruct, report.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{generate, parse_qasm, Circuit, CircuitError, GeneratorKind, GeneratorOptions, QasmError};
use crate::cutter::{extract_subcircuits, CutError, CutPoint, SubcircuitSet};
use crate::executor::{
    decide, execute_all, Decision, Distribution, ExecConfig, ExecError, ExecMode, NoiseModel, ResourceBudget,
    VariantResult, DEFAULT_MEMORY_BYTES, DEFAULT_SHOTS, DEFAULT_SIMULATOR_CAP,
};
use crate::hypergraph::build_hypergraph;
use crate::metrics::{
    build_report, write_cost_plot_csv, write_noise_plot_csv, write_subcircuit_plot_csv, write_tables_csv, NoiseParams,
    RunReport,
};
use crate::partitioner::{sweep_k_with, KEvaluation, PartitionCandidate, PartitionError, SweepParams};
use crate::reconstructor::{reconstruct, ReconstructError, EXACT_TOLERANCE, SAMPLED_TOLERANCE};

/// Environment variable overriding the memory budget (bytes, or `auto`).
pub const MEMORY_ENV: &str = "HYPERCUT_MEMORY_BYTES";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Qasm { path: String, source: QasmError },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl PipelineError {
    /// True for bad inputs or options, false for failures inside a stage.
    pub fn is_user_error(&self) -> bool {
        matches!(self, PipelineError::Input(_) | PipelineError::Qasm { .. } | PipelineError::Circuit(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Input(_) => "input",
            PipelineError::Qasm { .. } => "qasm",
            PipelineError::Circuit(_) => "circuit",
            PipelineError::Partition(_) => "partition",
            PipelineError::Cut(_) => "cut",
            PipelineError::Exec(_) => "execution",
            PipelineError::Reconstruct(_) => "reconstruction",
            PipelineError::Io { .. } => "io",
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// QASM file path or generator spec such as `ghz:10` or `random:20:depth=10:seed=3`.
    pub input: String,
    pub k_cap: usize,
    pub seed: u64,
    pub shots: usize,
    pub memory_bytes: u64,
    /// `None` derives the threshold from `memory_bytes`.
    pub max_multiqubit_gates: Option<usize>,
    pub noise: bool,
    pub output_dir: String,
    /// Worker threads; `None` uses every core.
    pub parallelism: Option<usize>,
    pub attempts: usize,
    /// Execution is skipped above this many cut points.
    pub max_cuts: usize,
    /// Execution is skipped above this many physical variants.
    pub max_variants: u64,
    pub simulator_cap: usize,
    pub export_qasm: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: String::new(),
            k_cap: 8,
            seed: 0,
            shots: DEFAULT_SHOTS,
            memory_bytes: DEFAULT_MEMORY_BYTES,
            max_multiqubit_gates: None,
            noise: false,
            output_dir: "out".to_string(),
            parallelism: None,
            attempts: 4,
            max_cuts: 8,
            max_variants: 4096,
            simulator_cap: DEFAULT_SIMULATOR_CAP,
            export_qasm: false,
        }
    }
}

impl RunConfig {
    pub fn budget(&self) -> ResourceBudget {
        let mut b = ResourceBudget::with_memory(self.memory_bytes);
        if let Some(g) = self.max_multiqubit_gates {
            b.max_multiqubit_gates = g;
        }
        b.shots = self.shots;
        b
    }

    pub fn sweep_params(&self) -> SweepParams {
        SweepParams { k_cap: self.k_cap, seed: self.seed, attempts: self.attempts, ..SweepParams::default() }
    }

    pub fn exec_config(&self) -> ExecConfig {
        ExecConfig {
            budget: self.budget(),
            noise: self.noise.then(NoiseModel::default),
            seed: self.seed,
            simulator_cap: self.simulator_cap,
        }
    }
}

/// Parses a memory size: plain bytes, a `k`/`m`/`g` (binary) suffix, or `auto`.
pub fn parse_memory(text: &str) -> Result<u64, PipelineError> {
    let t = text.trim().to_ascii_lowercase();
    if t == "auto" {
        return detect_memory().ok_or_else(|| PipelineError::Input("cannot detect available memory".into()));
    }
    let t = t.trim_end_matches('b');
    let t = t.strip_suffix('i').unwrap_or(t);
    let (digits, shift) = match t.chars().last() {
        Some('k') => (&t[..t.len() - 1], 10),
        Some('m') => (&t[..t.len() - 1], 20),
        Some('g') => (&t[..t.len() - 1], 30),
        _ => (t, 0),
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|v| v.checked_mul(1u64 << shift))
        .filter(|&v| v > 0)
        .ok_or_else(|| PipelineError::Input(format!("invalid memory size `{text}`")))
}

/// `MemAvailable` from `/proc/meminfo`.
pub fn detect_memory() -> Option<u64> {
    let info = fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    kb.checked_mul(1024)
}

/// Parses `kind:n[:key=value...]` with keys `secret`, `depth`, `seed`.
pub fn parse_generator_spec(spec: &str) -> Result<(GeneratorKind, usize, GeneratorOptions), PipelineError> {
    let bad = || PipelineError::Input(format!("invalid generator spec `{spec}`"));
    let mut fields = spec.split(':');
    let kind: GeneratorKind = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let n: usize = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let mut opts = GeneratorOptions::default();
    for field in fields {
        let (key, value) = field.split_once('=').ok_or_else(bad)?;
        match key {
            "secret" => opts.secret = Some(value.to_string()),
            "depth" => opts.depth = Some(value.parse().map_err(|_| bad())?),
            "seed" => opts.seed = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    Ok((kind, n, opts))
}

/// Loads a QASM file if `input` names one, otherwise treats it as a generator spec.
pub fn load_input(input: &str) -> Result<Circuit, PipelineError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(io_err(format!("reading {input}")))?;
        let mut c = parse_qasm(&text).map_err(|source| PipelineError::Qasm { path: input.to_string(), source })?;
        c.set_name(path.file_stem().map_or("circuit".into(), |s| s.to_string_lossy().into_owned()));
        return Ok(c);
    }
    if !input.contains(':') {
        return Err(PipelineError::Input(format!("`{input}` is neither a file nor a generator spec")));
    }
    let (kind, n, opts) = parse_generator_spec(input)?;
    Ok(generate(kind, n, &opts)?)
}

/// Everything decided before execution.
#[derive(Clone, Debug)]
pub struct Plan {
    pub circuit: Circuit,
    pub candidate: PartitionCandidate,
    pub evaluations: Vec<KEvaluation>,
    pub set: SubcircuitSet,
    pub decisions: Vec<Decision>,
    pub budget: ResourceBudget,
    pub sweep_time: Duration,
}

pub fn plan(c: &Circuit, cfg: &RunConfig) -> Result<Plan, PipelineError> {
    let c = if c.is_scheduled() { c.clone() } else { crate::circuit::schedule_asap(c) };
    let outcome = sweep_k_with(&c, &cfg.sweep_params())?;
    let hg = build_hypergraph(&c).map_err(PartitionError::from)?;
    let set = extract_subcircuits(&c, &hg, &outcome.candidate.assignment)?;
    let budget = cfg.budget();
    let decisions = set.subcircuits.iter().map(|s| decide(s, &budget)).collect();
    Ok(Plan {
        circuit: c,
        candidate: outcome.candidate,
        evaluations: outcome.evaluations,
        set,
        decisions,
        budget,
        sweep_time: outcome.elapsed,
    })
}

impl Plan {
    pub fn report(&self, params: &NoiseParams) -> RunReport {
        build_report(&self.circuit, &self.set, &self.decisions, params)
    }

    pub fn physical_variants(&self) -> u64 {
        self.set.subcircuits.iter().map(|s| s.num_physical_variants()).fold(0, u64::saturating_add)
    }

    /// Why execution would be skipped, if it would.
    pub fn execution_blocker(&self, cfg: &RunConfig) -> Option<String> {
        let cuts = self.set.cuts().len();
        if cuts > cfg.max_cuts {
            return Some(format!("{cuts} cut points exceed the limit of {}", cfg.max_cuts));
        }
        let width = self.set.max_width();
        if width > cfg.simulator_cap {
            return Some(format!("subcircuit width {width} exceeds the simulator cap of {}", cfg.simulator_cap));
        }
        let variants = self.physical_variants();
        if variants > cfg.max_variants {
            return Some(format!("{variants} variants exceed the limit of {}", cfg.max_variants));
        }
        None
    }
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub results: Vec<VariantResult>,
    pub distribution: Distribution,
    pub exact: bool,
    pub tolerance: f64,
    pub execute_time: Duration,
    pub reconstruct_time: Duration,
}

pub fn execute(plan: &Plan, cfg: &RunConfig) -> Result<Execution, PipelineError> {
    let t0 = Instant::now();
    let results = execute_all(&plan.set, &plan.decisions, &cfg.exec_config())?;
    let execute_time = t0.elapsed();
    let exact = plan.decisions.iter().all(|d| d.mode == ExecMode::Classical);
    let tolerance = if exact { EXACT_TOLERANCE } else { SAMPLED_TOLERANCE };
    let t1 = Instant::now();
    let distribution = reconstruct(&plan.set, &results, tolerance)?;
    Ok(Execution { results, distribution, exact, tolerance, execute_time, reconstruct_time: t1.elapsed() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub name: String,
    pub num_qubits: usize,
    pub gates: usize,
    pub depth: usize,
    pub single_qubit_gates: usize,
    pub multi_qubit_gates: usize,
    pub non_clifford: bool,
}

impl CircuitSummary {
    pub fn of(c: &Circuit) -> CircuitSummary {
        CircuitSummary {
            name: c.name().to_string(),
            num_qubits: c.num_qubits(),
            gates: c.gates().len(),
            depth: c.depth(),
            single_qubit_gates: c.single_qubit_gate_count(),
            multi_qubit_gates: c.multi_qubit_gate_count(),
            non_clifford: c.has_non_clifford(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    #[serde(rename = "K")]
    pub k: usize,
    pub subcircuits: usize,
    #[serde(rename = "C")]
    pub cut_points: usize,
    pub sampling_overhead: Option<u64>,
    pub gate_violations_before_repair: usize,
    pub balanced: bool,
    pub part_sizes: Vec<usize>,
    pub widths: Vec<usize>,
    pub cuts: Vec<CutPoint>,
    /// Best valid cut count per evaluated K.
    pub sweep: Vec<SweepEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "C")]
    pub cut_points: Option<usize>,
}

impl PartitionSummary {
    pub fn of(plan: &Plan) -> PartitionSummary {
        let cand = &plan.candidate;
        PartitionSummary {
            k: cand.k,
            subcircuits: plan.set.subcircuits.len(),
            cut_points: plan.set.cuts().len(),
            sampling_overhead: crate::partitioner::sampling_overhead(plan.set.cuts().len(), 4),
            gate_violations_before_repair: cand.gate_violations,
            balanced: cand.balanced,
            part_sizes: cand.assignment.part_sizes(),
            widths: plan.set.subcircuits.iter().map(|s| s.width()).collect(),
            cuts: plan.set.cuts().to_vec(),
            sweep: plan.evaluations.iter().map(|e| SweepEntry { k: e.k, cut_points: e.best_cut_points }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionSummary {
    pub executed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
    pub physical_variants: u64,
    pub exact: bool,
    pub tolerance: Option<f64>,
    pub support: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sweep_ms: f64,
    pub per_k_ms: Vec<(usize, f64)>,
    pub execute_ms: f64,
    pub reconstruct_ms: f64,
    pub total_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// The contents of `report.json`. Everything but `timings` is a pure
/// function of the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub config: RunConfig,
    pub circuit: CircuitSummary,
    pub budget: ResourceBudget,
    pub noise_params: NoiseParams,
    pub partition: PartitionSummary,
    pub report: RunReport,
    pub execution: ExecutionSummary,
    pub timings: Timings,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub document: RunDocument,
    pub plan: Plan,
    pub execution: Option<Execution>,
}

fn with_pool<T: Send>(parallelism: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match parallelism {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::Input(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Plans and, unless the plan is too large, executes and reconstructs.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let circuit = load_input(&cfg.input)?;
    run_circuit(&circuit, cfg, true)
}

/// Like [`run`] on an already loaded circuit; `execute_variants = false`
/// stops after flagging.
pub fn run_circuit(circuit: &Circuit, cfg: &RunConfig, execute_variants: bool) -> Result<RunOutput, PipelineError> {
    with_pool(cfg.parallelism, || run_inner(circuit, cfg, execute_variants))?
}

fn run_inner(circuit: &Circuit, cfg: &RunConfig, execute_variants: bool) -> Result<RunOutput, PipelineError> {
    let start = Instant::now();
    let params = NoiseParams::default();
    let plan = plan(circuit, cfg)?;
    let blocker = if execute_variants { plan.execution_blocker(cfg) } else { Some("plan only".to_string()) };
    let execution = match blocker {
        None => Some(execute(&plan, cfg)?),
        Some(_) => None,
    };
    let document = RunDocument {
        config: cfg.clone(),
        circuit: CircuitSummary::of(&plan.circuit),
        budget: plan.budget.clone(),
        noise_params: params,
        partition: PartitionSummary::of(&plan),
        report: plan.report(&params),
        execution: ExecutionSummary {
            executed: execution.is_some(),
            skipped_reason: blocker,
            physical_variants: plan.physical_variants(),
            exact: execution.as_ref().is_some_and(|e| e.exact),
            tolerance: execution.as_ref().map(|e| e.tolerance),
            support: execution.as_ref().map_or(0, |e| e.distribution.len()),
        },
        timings: Timings {
            sweep_ms: ms(plan.sweep_time),
            per_k_ms: plan.evaluations.iter().map(|e| (e.k, ms(e.elapsed))).collect(),
            execute_ms: execution.as_ref().map_or(0.0, |e| ms(e.execute_time)),
            reconstruct_ms: execution.as_ref().map_or(0.0, |e| ms(e.reconstruct_time)),
            total_ms: ms(start.elapsed()),
        },
    };
    Ok(RunOutput { document, plan, execution })
}

pub fn report_json(doc: &RunDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(io_err(format!("writing {}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

/// Writes `report.json`, `tables.csv`, `plotdata/` and, when executed,
/// `distribution.json` and `distribution.csv`.
pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<(), PipelineError> {
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(io_err(format!("creating {}", plot_dir.display())))?;
    let doc = &out.document;
    write_file(&dir.join("report.json"), report_json(doc).as_bytes())?;
    let reports = std::slice::from_ref(&doc.report);
    write_file(&dir.join("tables.csv"), &csv_bytes(|b| write_tables_csv(reports, b)))?;
    write_file(&plot_dir.join("noise.csv"), &csv_bytes(|b| write_noise_plot_csv(reports, b)))?;
    write_file(&plot_dir.join("cost.csv"), &csv_bytes(|b| write_cost_plot_csv(reports, b)))?;
    write_file(&plot_dir.join("subcircuits.csv"), &csv_bytes(|b| write_subcircuit_plot_csv(&doc.report, b)))?;
    if let Some(exec) = &out.execution {
        let map = exec.distribution.to_string_map();
        let mut json = serde_json::to_string_pretty(&map).expect("distribution serializes");
        json.push('\n');
        write_file(&dir.join("distribution.json"), json.as_bytes())?;
        let mut csv = String::from("bitstring,probability\n");
        for (k, p) in &map {
            csv.push_str(&format!("{k},{p}\n"));
        }
        write_file(&dir.join("distribution.csv"), csv.as_bytes())?;
    }
    if doc.config.export_qasm {
        out.plan.set.write_variants_qasm(&dir.join("qasm")).map_err(io_err("writing variant qasm"))?;
    }
    Ok(())
}

/// Benchmark families at the given sizes; random circuits use `random_depth` and `seed`.
pub fn benchmark_suite(sizes: &[usize], random_depth: usize, seed: u64) -> Result<Vec<Circuit>, PipelineError> {
    let mut out = Vec::new();
    for kind in [GeneratorKind::Bv, GeneratorKind::Ghz, GeneratorKind::Random, GeneratorKind::Qft] {
        for &n in sizes {
            let opts = match kind {
                GeneratorKind::Random => {
                    GeneratorOptions { depth: Some(random_depth), seed: Some(seed), ..Default::default() }
                }
                _ => GeneratorOptions::default(),
            };
            out.push(generate(kind, n, &opts)?);
        }
    }
    Ok(out)
}

/// Plan-only reports for several circuits, written as one table.
pub fn write_suite_artifacts(reports: &[RunReport], dir: &Path) -> Result<(), PipelineError> {
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(io_err(format!("creating {}", plot_dir.display())))?;
    let mut json = serde_json::to_string_pretty(reports).expect("reports serialize");
    json.push('\n');
    write_file(&dir.join("suite.json"), json.as_bytes())?;
    write_file(&dir.join("tables.csv"), &csv_bytes(|b| write_tables_csv(reports, b)))?;
    write_file(&plot_dir.join("noise.csv"), &csv_bytes(|b| write_noise_plot_csv(reports, b)))?;
    write_file(&plot_dir.join("cost.csv"), &csv_bytes(|b| write_cost_plot_csv(reports, b)))?;
    Ok(())
}
