use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amrpress_core::amr::io::{export_dataset, import_dataset};
use amrpress_core::amr::synth::{generate_synthetic, Preset, SyntheticSpec};
use amrpress_core::amr::AmrDataset;
use amrpress_core::container::{container_read, read_container_header};
use amrpress_core::harness::{run_simulated_write, RankPlan};
use amrpress_core::metrics::{
    bound_violations, error_map, fmt_f64, level_volume, quality_report, sweep, write_error_map, write_sweep_csv, Axis,
    QualityReport, QualityRow, SweepSpec,
};
use amrpress_core::preprocess::Arrangement;
use amrpress_core::sz::{Algorithm, Codec, CompressorConfig, EbMode, Encoding, DEFAULT_CHUNK_ELEMS};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "amrpress", version, about = "Error-bounded lossy compression for patch-based AMR data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic AMR dataset directory.
    Gen(GenArgs),
    /// Compress a dataset directory into a container file.
    Compress(CompressArgs),
    /// Decompress a container file into a dataset directory.
    Decompress(DecompressArgs),
    /// Quality of a container file against the original dataset.
    Metrics(MetricsArgs),
    /// Rate-distortion sweep written as CSV.
    Sweep(SweepArgs),
    /// Export an absolute-error slice as a raw array plus JSON header.
    Errmap(ErrmapArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Smooth,
    Rough,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Lr,
    Interp,
    Baseline1d,
}

#[derive(Clone, Copy, ValueEnum)]
enum EbModeArg {
    Abs,
    Rel,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Sle,
    PerBlock,
    Lm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrangementArg {
    Auto,
    Linear,
    Cluster,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecArg {
    Lz,
    Store,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Lr => Algorithm::Lr,
            AlgorithmArg::Interp => Algorithm::Interp,
            AlgorithmArg::Baseline1d => Algorithm::Baseline1d,
        }
    }
}

impl From<EbModeArg> for EbMode {
    fn from(m: EbModeArg) -> Self {
        match m {
            EbModeArg::Abs => EbMode::Absolute,
            EbModeArg::Rel => EbMode::RangeRelative,
        }
    }
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Sle => Encoding::Sle,
            EncodingArg::PerBlock => Encoding::PerBlock,
            EncodingArg::Lm => Encoding::LinearMerge,
        }
    }
}

impl ArrangementArg {
    fn resolve(self, algorithm: Algorithm) -> Arrangement {
        match self {
            ArrangementArg::Auto => algorithm.default_arrangement(),
            ArrangementArg::Linear => Arrangement::Linear,
            ArrangementArg::Cluster => Arrangement::Cluster,
        }
    }
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<usize>| format!("expected X,Y,Z, got {} values", v.len()))
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "smooth")]
    preset: PresetArg,
    /// Level-0 extent as `X,Y,Z`.
    #[arg(long, value_parser = parse_dims, default_value = "64,64,64")]
    dims: [usize; 3],
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long = "unit", default_value_t = 8)]
    unit_block_size: usize,
    /// Fraction of unit blocks left unrefined per level.
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    max_grid: usize,
    #[arg(long, default_value_t = 1)]
    fields: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CodecArgs {
    #[arg(long, value_enum, default_value = "lr")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1e-3)]
    eb: f64,
    #[arg(long, value_enum, default_value = "rel")]
    eb_mode: EbModeArg,
    #[arg(long, value_enum, default_value = "sle")]
    encoding: EncodingArg,
    #[arg(long, value_enum, default_value = "auto")]
    arrangement: ArrangementArg,
    /// Prediction block edge (4 or 6); adaptive when omitted.
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, value_enum, default_value = "lz")]
    codec: CodecArg,
    #[arg(long, default_value_t = 65536)]
    quant_capacity: u32,
}

impl CodecArgs {
    fn config(&self, unit_block_size: usize) -> CompressorConfig {
        let algorithm = self.algorithm.into();
        let mut cfg = CompressorConfig::new(algorithm, self.eb_mode.into(), self.eb, unit_block_size)
            .with_encoding(self.encoding.into())
            .with_arrangement(self.arrangement.resolve(algorithm))
            .with_codec(match self.codec {
                CodecArg::Lz => Codec::Lz,
                CodecArg::Store => Codec::Store,
            });
        if let Some(b) = self.block_size {
            cfg = cfg.with_sz_block_size(b);
        }
        cfg.quant_capacity = self.quant_capacity;
        cfg
    }
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
    #[arg(long, default_value_t = 1)]
    ranks: usize,
    /// Elements per compressor call for the 1D baseline.
    #[arg(long, default_value_t = DEFAULT_CHUNK_ELEMS)]
    chunk_elems: usize,
    /// Modeled start-up cost per compressor call, in seconds.
    #[arg(long, default_value_t = 0.03)]
    t_start: f64,
    /// Write report JSON here instead of `<output>.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Skip the decode-and-check pass.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Args)]
struct DecompressArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    compressed: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lr")]
    algorithms: Vec<AlgorithmArg>,
    #[arg(long, value_delimiter = ',', default_values_t = [2e-2, 1e-2, 3e-3, 1e-3, 3e-4])]
    ebs: Vec<f64>,
    #[arg(long, value_enum, default_value = "rel")]
    eb_mode: EbModeArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sle")]
    encodings: Vec<EncodingArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "linear")]
    arrangements: Vec<ArrangementArg>,
    #[arg(long, default_value_t = 1)]
    ranks: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_ELEMS)]
    chunk_elems: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ErrmapArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    compressed: PathBuf,
    #[arg(long, default_value_t = 0)]
    level: usize,
    /// Field name; the first field when omitted.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, value_enum, default_value = "z")]
    axis: AxisArg,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Output stem; `.f64` and `.json` are appended.
    #[arg(long, short)]
    output: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Bound(usize),
}

impl From<amrpress_core::Error> for Failure {
    fn from(e: amrpress_core::Error) -> Self {
        match e {
            amrpress_core::Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn with_path<T>(path: &Path, r: amrpress_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", path.display())),
        f => f,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn gen(a: GenArgs) -> Outcome {
    let spec = SyntheticSpec {
        preset: match a.preset {
            PresetArg::Smooth => Preset::Smooth,
            PresetArg::Rough => Preset::Rough,
        },
        dims: a.dims,
        levels: a.levels,
        unit_block_size: a.unit_block_size,
        refine_threshold: a.threshold,
        seed: a.seed,
        max_grid_size: a.max_grid,
        field_count: a.fields,
    };
    let ds = generate_synthetic(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    export_dataset(&ds, &a.out)?;
    let boxes: Vec<usize> = ds.levels.iter().map(|l| l.boxes.len()).collect();
    println!("wrote {} ({} values, boxes per level {boxes:?})", a.out.display(), ds.value_count());
    Ok(())
}

fn compress(a: CompressArgs) -> Outcome {
    let ds = with_path(&a.input, import_dataset(&a.input))?;
    let cfg = a.codec.config(ds.unit_block_size);
    cfg.validate()?;
    if a.ranks == 0 || a.chunk_elems == 0 {
        return Err(Failure::Usage("--ranks and --chunk-elems must be at least 1".into()));
    }
    let (out, report) = run_simulated_write(&ds, &cfg, a.ranks, a.t_start, a.chunk_elems)?;
    fs::write(&a.output, &out.bytes)?;
    let report_path = a.report.unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".report.json");
        p.into()
    });
    fs::write(&report_path, serde_json::to_vec_pretty(&report).map_err(|e| Failure::Data(e.to_string()))?)?;
    println!(
        "{} -> {}: {} bytes, ratio {:.3}, {} compressor calls, modeled start-up {:.2} s",
        a.input.display(),
        a.output.display(),
        report.file_bytes,
        report.compression_ratio,
        report.invocations,
        report.modeled_startup_seconds
    );
    if !a.no_verify {
        let back = container_read(&out.bytes)?;
        let plan = RankPlan::round_robin(&ds.skeleton(), a.ranks)?;
        let bad = bound_violations(&ds, &back, &cfg, &plan);
        if bad > 0 {
            return Err(Failure::Bound(bad));
        }
    }
    Ok(())
}

fn decompress(a: DecompressArgs) -> Outcome {
    let bytes = read_file(&a.input)?;
    let ds = with_path(&a.input, container_read(&bytes))?;
    export_dataset(&ds, &a.output)?;
    println!("{} -> {} ({} values)", a.input.display(), a.output.display(), ds.value_count());
    Ok(())
}

fn load_pair(original: &Path, compressed: &Path) -> Result<(AmrDataset, AmrDataset, Vec<u8>), Failure> {
    let ds = with_path(original, import_dataset(original))?;
    let bytes = read_file(compressed)?;
    let back = with_path(compressed, container_read(&bytes))?;
    if back.skeleton() != ds.skeleton() {
        return Err(Failure::Data("compressed file does not describe the original dataset".into()));
    }
    Ok((ds, back, bytes))
}

fn print_row(out: &mut impl Write, r: &QualityRow) -> io::Result<()> {
    let level = r.level.map_or("all".to_string(), |l| l.to_string());
    writeln!(
        out,
        "{:<6} {:<14} {:>10} {:>12} {:>10} {:>9} {:>12} {:>10}",
        level,
        r.field.as_deref().unwrap_or("all"),
        fmt_psnr(r.psnr),
        format!("{:.3e}", r.max_abs_error),
        format!("{:.3}", r.compression_ratio),
        format!("{:.4}", r.bitrate),
        format!("{:.4e}", r.value_range),
        r.points
    )
}

fn fmt_psnr(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        fmt_f64(v)
    }
}

fn print_report(q: &QualityReport) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<6} {:<14} {:>10} {:>12} {:>10} {:>9} {:>12} {:>10}",
        "level", "field", "psnr_db", "max_abs_err", "ratio", "bitrate", "range", "points"
    )?;
    for r in q.rows.iter().chain(&q.fields) {
        print_row(&mut out, r)?;
    }
    print_row(&mut out, &q.total)?;
    writeln!(out, "mean PSNR over fields (MSE domain): {}", fmt_psnr(q.mean_mse_psnr))
}

fn metrics(a: MetricsArgs) -> Outcome {
    let (ds, back, bytes) = load_pair(&a.original, &a.compressed)?;
    let (_, records) = read_container_header(&bytes)?;
    let q = quality_report(&ds, &back, &records, bytes.len() as u64)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&q).map_err(|e| Failure::Data(e.to_string()))?);
    } else {
        print_report(&q)?;
    }
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Outcome {
    let ds = with_path(&a.input, import_dataset(&a.input))?;
    if a.ebs.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Failure::Usage("error bounds must be positive".into()));
    }
    let algorithms: Vec<Algorithm> = a.algorithms.iter().map(|&x| x.into()).collect();
    let mut arrangements: Vec<Arrangement> = Vec::new();
    for arr in &a.arrangements {
        let resolved = match arr {
            ArrangementArg::Auto => algorithms.iter().map(|&g| ArrangementArg::Auto.resolve(g)).collect(),
            other => vec![other.resolve(Algorithm::Lr)],
        };
        for r in resolved {
            if !arrangements.contains(&r) {
                arrangements.push(r);
            }
        }
    }
    let spec = SweepSpec {
        algorithms,
        encodings: a.encodings.iter().map(|&e| e.into()).collect(),
        arrangements,
        eb_mode: a.eb_mode.into(),
        error_bounds: a.ebs,
        ranks: a.ranks,
        baseline_chunk_elems: a.chunk_elems,
    };
    let rows = sweep(&ds, &spec)?;
    match a.output {
        Some(path) => write_sweep_csv(&rows, fs::File::create(&path)?)?,
        None => write_sweep_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn errmap(a: ErrmapArgs) -> Outcome {
    let (ds, back, _) = load_pair(&a.original, &a.compressed)?;
    if a.level >= ds.levels.len() {
        return Err(Failure::Usage(format!("level {} out of range (dataset has {})", a.level, ds.levels.len())));
    }
    let field = match &a.field {
        Some(name) => ds
            .field_index(name)
            .ok_or_else(|| Failure::Usage(format!("unknown field {name:?}; fields are {:?}", ds.field_names)))?,
        None => 0,
    };
    let (shape, orig) = level_volume(&ds, a.level, field);
    let (_, recon) = level_volume(&back, a.level, field);
    let axis = match a.axis {
        AxisArg::X => Axis::X,
        AxisArg::Y => Axis::Y,
        AxisArg::Z => Axis::Z,
    };
    let map = error_map(&orig, &recon, shape, axis, a.index)?;
    write_error_map(&map, &a.output)?;
    let max = map.values.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    println!("{}x{} slice written to {}.f64 (max error {max:.3e})", map.width, map.height, a.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Compress(a) => compress(a),
        Command::Decompress(a) => decompress(a),
        Command::Metrics(a) => metrics(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Errmap(a) => errmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Bound(n)) => {
            eprintln!("error: self-check found {n} values outside the error bound");
            ExitCode::from(3)
        }
    }
}
