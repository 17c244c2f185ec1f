use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nbpolar::channel::QuantSpec;
use nbpolar::code::CodeSpec;
use nbpolar::config::{load_construction, CodeConfig, ConfigError};
use nbpolar::construction::mc_construct;
use nbpolar::fastnodes::{classify, fast_decode, ClassifyOptions, FastConfig, SpcMode};
use nbpolar::latency::ledger;
use nbpolar::lnbsc::{decode, Arith, CnMode, LlrMat};
use nbpolar::presets::{self, PRESETS};
use nbpolar::sim::{code_fingerprint, run_simulation, DecoderOptions, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "nbpolar", version, about = "Non-binary polar codes: construction, simulation and latency")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo construction of an information set.
    Construct(ConstructArgs),
    /// FER/BER simulation over BPSK-AWGN.
    Simulate(SimulateArgs),
    /// Special-node distribution as CSV.
    Classify(ClassifyArgs),
    /// Time-step ledger as CSV.
    Latency(LatencyArgs),
    /// Noiseless encode/decode self-test.
    Roundtrip(RoundtripArgs),
    /// List shipped preset codes.
    Presets,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Code config file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset code, see `nbpolar presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Construction file replacing the preset's shipped one.
    #[arg(long, requires = "preset")]
    construction: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    /// Use the baseline SC decoder instead of the fast one.
    #[arg(long)]
    baseline: bool,
    #[arg(long, value_enum, default_value = "ems")]
    cn_mode: CnArg,
    #[arg(long, value_enum, default_value = "full")]
    spc_mode: SpcArg,
    #[arg(long, value_enum, default_value = "on")]
    quantize: Switch,
    #[arg(long, default_value_t = 5)]
    channel_bits: u32,
    #[arg(long, default_value_t = 6)]
    internal_bits: u32,
    #[arg(long, default_value_t = 2.0)]
    scale: f64,
    /// Saturate while summing aggregated columns.
    #[arg(long)]
    aggregate_quantized: bool,
    /// Cap on special-node size (Rate-0/Rate-1 exempt).
    #[arg(long)]
    max_special_size: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CnArg {
    Exact,
    Ems,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpcArg {
    Full,
    Simplified,
}

impl DecoderArgs {
    fn options(&self) -> DecoderOptions {
        DecoderOptions {
            fast: !self.baseline,
            cn: match self.cn_mode {
                CnArg::Exact => CnMode::Exact,
                CnArg::Ems => CnMode::Ems,
            },
            spc: match self.spc_mode {
                SpcArg::Full => SpcMode::Full,
                SpcArg::Simplified => SpcMode::Simplified,
            },
            quant: matches!(self.quantize, Switch::On).then_some(QuantSpec {
                channel_bits: self.channel_bits,
                internal_bits: self.internal_bits,
                scale: self.scale,
                aggregate_quantized: self.aggregate_quantized,
            }),
            max_special_size: self.max_special_size,
        }
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Number of information symbols (default: from config or preset).
    #[arg(long)]
    k: Option<usize>,
    /// Design SNR, 10·log10(1/σ²).
    #[arg(long, allow_hyphen_values = true)]
    design_snr: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "ems")]
    cn_mode: CnArg,
    /// Output construction file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Comma-separated SNR points in dB (1/σ²).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "sigma")]
    snr_list: Vec<f64>,
    /// Single noise standard deviation instead of an SNR list.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; a JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Code config files.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Presets (repeatable); `all` selects every preset.
    #[arg(long)]
    preset: Vec<String>,
    #[arg(long)]
    max_special_size: Option<usize>,
    #[arg(long, value_enum, default_value = "full")]
    spc_mode: SpcArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LatencyArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_enum, default_value = "full")]
    spc_mode: SpcArg,
    #[arg(long)]
    max_special_size: Option<usize>,
    /// Emit one row per visited node instead of the summary.
    #[arg(long)]
    nodes: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 100)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type Outcome = Result<(), Failure>;

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct(a),
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Latency(a) => latency_cmd(a),
        Command::Roundtrip(a) => roundtrip(a),
        Command::Presets => list_presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn preset(name: &str) -> Result<&'static presets::Preset, Failure> {
    presets::find(name).ok_or_else(|| Failure::Usage(format!("unknown preset `{name}`")))
}

fn load_code(args: &CodeArgs) -> Result<CodeSpec, Failure> {
    match (&args.config, &args.preset) {
        (Some(path), None) => {
            let (cfg, dir) = CodeConfig::load(path).map_err(runtime)?;
            cfg.build(&dir).map_err(runtime)
        }
        (None, Some(name)) => {
            let p = preset(name)?;
            match &args.construction {
                Some(path) => {
                    let c = load_construction(path).map_err(runtime)?;
                    if c.n != p.n() {
                        return Err(runtime(ConfigError::ConstructionLength { expected: p.n(), got: c.n }));
                    }
                    p.with_info(c.info_set).map_err(runtime)
                }
                None => p.code().map_err(runtime),
            }
        }
        _ => Err(Failure::Usage("give exactly one of --config or --preset".into())),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn construct(a: ConstructArgs) -> Outcome {
    let (template, default_k) = match (&a.code.config, &a.code.preset) {
        (Some(path), None) => {
            let (cfg, _) = CodeConfig::load(path).map_err(runtime)?;
            (cfg.template().map_err(runtime)?, cfg.k)
        }
        (None, Some(name)) => {
            let p = preset(name)?;
            (p.template(), Some(p.k()))
        }
        _ => return Err(Failure::Usage("give exactly one of --config or --preset".into())),
    };
    let k = a.k.or(default_k).ok_or_else(|| Failure::Usage("--k is required".into()))?;
    if k > template.len() {
        return Err(Failure::Usage(format!("k = {k} exceeds N = {}", template.len())));
    }
    if a.trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let cn = match a.cn_mode {
        CnArg::Exact => CnMode::Exact,
        CnArg::Ems => CnMode::Ems,
    };
    let res = mc_construct(&template, k, a.design_snr, a.trials, a.seed, Arith::float(cn)).map_err(runtime)?;
    let text = serde_json::to_string(&res).map_err(runtime)?;
    emit(&text, Some(&a.out))?;
    eprintln!("wrote {} (N = {}, K = {k})", a.out.display(), template.len());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Outcome {
    let code = load_code(&a.code)?;
    let snr_db = match a.sigma {
        Some(s) if s > 0.0 => vec![-20.0 * s.log10()],
        Some(_) => return Err(Failure::Usage("--sigma must be positive".into())),
        None => a.snr_list.clone(),
    };
    let cfg = SimConfig {
        snr_db,
        decoder: a.decoder.options(),
        min_frame_errors: a.min_errors,
        max_frames: a.max_frames,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let result = run_simulation(&code, &cfg).map_err(runtime)?;
    let csv = result.to_csv();
    emit(&csv, a.out.as_deref())?;
    if let Some(out) = &a.out {
        let sidecar = serde_json::json!({
            "config_hash": result.config_hash,
            "simulation": cfg,
            "code": code_fingerprint(&code),
        });
        let path = out.with_extension("json");
        let text = serde_json::to_string_pretty(&sidecar).map_err(runtime)?;
        emit(&text, Some(&path))?;
    }
    Ok(())
}

const TABLE_HEADER: &str = "Code-Rate,Code-Length,Rate-0,Rate-1,M-REP,M-SPC,Type-I,Type-II,Type-III,Type-IV,Type-V,GM-REP†,GM-PC†,Time-Steps";

fn table_row(code: &CodeSpec, opts: &ClassifyOptions, spc: SpcMode) -> String {
    let plan = classify(code, opts);
    let c = plan.counts();
    let steps = ledger(code, &plan, spc).total_steps;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        code.rate(),
        code.len(),
        c.rate0,
        c.rate1,
        c.mrep,
        c.mspc,
        c.type1,
        c.type2,
        c.type3,
        c.type4,
        c.type5,
        c.gmrep,
        c.gmpc,
        steps
    )
}

fn spc(arg: SpcArg) -> SpcMode {
    match arg {
        SpcArg::Full => SpcMode::Full,
        SpcArg::Simplified => SpcMode::Simplified,
    }
}

fn classify_cmd(a: ClassifyArgs) -> Outcome {
    let mut codes = Vec::new();
    for path in &a.config {
        codes.push(load_code(&CodeArgs { config: Some(path.clone()), preset: None, construction: None })?);
    }
    for name in &a.preset {
        if name == "all" {
            for p in PRESETS {
                codes.push(p.code().map_err(runtime)?);
            }
        } else {
            codes.push(preset(name)?.code().map_err(runtime)?);
        }
    }
    if codes.is_empty() {
        return Err(Failure::Usage("give at least one --config or --preset".into()));
    }
    let opts = ClassifyOptions { max_special_size: a.max_special_size, no_gm: false };
    let mut out = format!("{TABLE_HEADER}\n");
    for code in &codes {
        out.push_str(&table_row(code, &opts, spc(a.spc_mode)));
        out.push('\n');
    }
    emit(&out, a.out.as_deref())
}

fn latency_cmd(a: LatencyArgs) -> Outcome {
    let code = load_code(&a.code)?;
    let opts = ClassifyOptions { max_special_size: a.max_special_size, no_gm: false };
    let plan = classify(&code, &opts);
    let l = ledger(&code, &plan, spc(a.spc_mode));
    let mut out = String::new();
    if a.nodes {
        out.push_str("nu,s,kind,min_steps,max_steps\n");
        for e in &l.entries {
            let _ = writeln!(out, "{},{},{},{},{}", e.node.nu, e.node.s, e.kind, e.steps.min, e.steps.max);
        }
    } else {
        let _ = writeln!(out, "{TABLE_HEADER},Min-Time-Steps,Baseline-Steps,Reduction-Percent");
        let _ = writeln!(
            out,
            "{},{},{},{:.2}",
            table_row(&code, &opts, spc(a.spc_mode)),
            l.total_min_steps,
            l.baseline_steps,
            l.reduction_percent
        );
    }
    emit(&out, a.out.as_deref())
}

fn roundtrip(a: RoundtripArgs) -> Outcome {
    let code = load_code(&a.code)?;
    let q = code.field().q();
    let plan = classify(&code, &ClassifyOptions::default());
    let mut failures = 0u64;
    for t in 0..a.frames {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(t);
        let m: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..q as u8)).collect();
        let (_, c) = code.encode_systematic(&m).map_err(runtime)?;
        let cols: Vec<Vec<f64>> = c
            .iter()
            .map(|&s| (0..q).map(|x| if x == s as usize { 0.0 } else { 31.0 }).collect())
            .collect();
        let llr = LlrMat::from_columns(&cols);
        let arith = Arith::quantized(CnMode::Ems, QuantSpec::default());
        let base = decode(&code, &llr, arith).map_err(runtime)?;
        let fast = fast_decode(&code, &plan, &llr, FastConfig { arith, spc: SpcMode::Full }).map_err(runtime)?;
        if base.chi != c || fast.chi != c {
            failures += 1;
        }
    }
    println!("frames={} failures={failures}", a.frames);
    if failures > 0 {
        return Err(Failure::Runtime(format!("{failures} frames failed to round-trip")));
    }
    Ok(())
}

fn list_presets() -> Outcome {
    println!("name,length,rate,k,shipped");
    for p in PRESETS {
        println!("{},{},{},{},{}", p.name, p.length, p.rate, p.k(), p.construction().is_some());
    }
    Ok(())
}
