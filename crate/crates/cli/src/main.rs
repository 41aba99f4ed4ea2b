use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divclust::algorithm::{AlgorithmConfig, EditBudget, Engine};
use divclust::eval::{bench, render_table, BenchConfig};
use divclust::io::{
    export_split_views, load_matrix, make_blobs, render_dendrogram_svg, save_matrix, views_to_json, write_atomic,
    BlobSpec, Delimiter, LoadOptions, SvgOptions,
};
use divclust::linalg::KernelSpec;
use divclust::split::BandwidthRule;
use divclust::tree::ClusterTree;
use divclust::Error;
use divclust_server::{AppState, ServerConfig};

const LOG_ENV: &str = "DIVCLUST_LOG";

#[derive(Parser)]
#[command(name = "divclust", version, about = "Divisive hierarchical clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a data file and write one label per row.
    Fit(FitArgs),
    /// Time algorithms on datasets and report NMI.
    Bench(BenchArgs),
    /// Render a dendrogram or split views from a saved tree.
    Export(ExportArgs),
    /// Run the interactive session server.
    Serve(ServeArgs),
    /// Write a seeded Gaussian blob dataset.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Delimited numeric data, one sample per row.
    #[arg(long)]
    input: PathBuf,
    /// The first line holds column names.
    #[arg(long)]
    header: bool,
    /// Zero-based column with class labels, dropped from the features.
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    delimiter: DelimiterArg,
}

impl InputArgs {
    fn load(&self, label_file: Option<PathBuf>) -> divclust::Result<divclust::linalg::DataMatrix> {
        let opts = LoadOptions {
            delimiter: self.delimiter.into(),
            header: self.header,
            label_column: self.label_column,
            label_file,
        };
        load_matrix(&self.input, &opts)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DelimiterArg {
    Auto,
    Comma,
    Tab,
}

impl From<DelimiterArg> for Delimiter {
    fn from(d: DelimiterArg) -> Self {
        match d {
            DelimiterArg::Auto => Delimiter::Auto,
            DelimiterArg::Comma => Delimiter::Comma,
            DelimiterArg::Tab => Delimiter::Tab,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BandwidthRuleArg {
    NormalReference,
    Silverman,
}

#[derive(Clone, Copy, ValueEnum)]
enum EditBudgetArg {
    Natural,
    Preserve,
}

/// One flag per configuration field. Flags override values read from
/// `--config`.
#[derive(Args)]
struct ConfigArgs {
    /// JSON algorithm configuration to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pddp, depddp, ipddp, km_pddp or bkm.
    #[arg(long)]
    algorithm: Option<String>,
    /// Number of clusters; required by every algorithm except depddp.
    #[arg(long, visible_alias = "max-clusters")]
    k: Option<usize>,
    /// pca, kpca or ica.
    #[arg(long)]
    projection: Option<String>,
    /// Kernel for kpca, e.g. `rbf`, `rbf:gamma=0.5`, `poly:degree=2`.
    #[arg(long)]
    kernel: Option<String>,
    /// Components kept by the projection (1 or 2).
    #[arg(long)]
    components: Option<usize>,
    /// ipddp tail fraction trimmed from each end of the scores.
    #[arg(long, visible_alias = "trim-fraction")]
    trim: Option<f64>,
    #[arg(long)]
    bandwidth_scale: Option<f64>,
    #[arg(long, value_enum)]
    bandwidth_rule: Option<BandwidthRuleArg>,
    #[arg(long)]
    kde_grid_size: Option<usize>,
    #[arg(long)]
    valley_percentile: Option<f64>,
    #[arg(long)]
    min_sample_split: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// 2-means restarts for bkm.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_enum)]
    edit_budget: Option<EditBudgetArg>,
}

impl ConfigArgs {
    fn build(&self) -> divclust::Result<AlgorithmConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => AlgorithmConfig::default(),
        };
        if let Some(a) = &self.algorithm {
            c.algorithm = a.clone();
        }
        if self.k.is_some() {
            c.max_clusters = self.k;
        }
        if let Some(p) = &self.projection {
            c.projection.method = p.clone();
        }
        if let Some(k) = &self.kernel {
            c.projection.kernel = Some(k.parse::<KernelSpec>()?);
        }
        if self.components.is_some() {
            c.projection.components = self.components;
        }
        if let Some(t) = self.trim {
            c.trim_fraction = t;
        }
        if let Some(s) = self.bandwidth_scale {
            c.bandwidth_scale = s;
        }
        if let Some(r) = self.bandwidth_rule {
            c.bandwidth_rule = match r {
                BandwidthRuleArg::NormalReference => BandwidthRule::NormalReference,
                BandwidthRuleArg::Silverman => BandwidthRule::Silverman,
            };
        }
        if let Some(g) = self.kde_grid_size {
            c.kde_grid_size = g;
        }
        if let Some(p) = self.valley_percentile {
            c.valley_percentile = p;
        }
        if let Some(m) = self.min_sample_split {
            c.min_sample_split = m;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        if let Some(b) = self.edit_budget {
            c.edit_budget = match b {
                EditBudgetArg::Natural => EditBudget::Natural,
                EditBudgetArg::Preserve => EditBudget::Preserve,
            };
        }
        Ok(c)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Where to write labels; standard output when omitted.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Where to write the fitted tree as JSON.
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Bench description; relative dataset paths resolve against its directory.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving `report.json` and `table.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    tree: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// SVG dendrogram output.
    #[arg(long)]
    dendrogram: Option<PathBuf>,
    /// Split views JSON output, one record per internal node.
    #[arg(long)]
    views: Option<PathBuf>,
    /// Class labels, one per line, drawn as a strip under the dendrogram.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Directory of datasets addressable by file name.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Directory for uploaded datasets and session edit logs.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    #[arg(long, default_value_t = divclust_server::ServerConfig::default().max_upload_bytes)]
    max_upload_bytes: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generating blob of each row, one per line.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

fn write_labels(path: &Path, labels: &[usize]) -> divclust::Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    write_atomic(path, text.as_bytes())
}

fn fit(args: FitArgs) -> divclust::Result<()> {
    let config = args.config.build()?;
    let engine = Engine::new(config)?;
    let data = args.input.load(None)?;
    let out = engine.fit(&data)?;
    if let Some(w) = &out.warning {
        eprintln!("warning: {w}");
    }
    tracing::info!("{} clusters over {} samples", out.tree.leaf_count(), data.rows());
    if let Some(path) = &args.tree_out {
        write_atomic(path, out.tree.to_json()?.as_bytes())?;
    }
    match &args.labels_out {
        Some(path) => write_labels(path, &out.labels),
        None => {
            let text: String = out.labels.iter().map(|l| format!("{l}\n")).collect();
            print!("{text}");
            Ok(())
        }
    }
}

fn run_bench(args: BenchArgs) -> divclust::Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut config: BenchConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let base = args.config.parent().unwrap_or(Path::new(""));
    for ds in &mut config.datasets {
        if ds.path.is_relative() {
            ds.path = base.join(&ds.path);
        }
        if let Some(f) = ds.format.label_file.as_mut().filter(|f| f.is_relative()) {
            *f = base.join(&*f);
        }
    }
    let report = bench(&config)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let table = render_table(&report);
    write_atomic(args.out.join("report.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    write_atomic(args.out.join("table.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn export(args: ExportArgs) -> divclust::Result<()> {
    let text = std::fs::read_to_string(&args.tree).map_err(|e| Error::io(&args.tree, e))?;
    let tree = ClusterTree::from_json(&text)?;
    let data = args.input.load(args.labels.clone())?;
    if data.rows() != tree.n_samples() {
        return Err(Error::Shape(format!(
            "tree covers {} samples, input has {} rows",
            tree.n_samples(),
            data.rows()
        )));
    }
    if args.dendrogram.is_none() && args.views.is_none() {
        return Err(Error::Config("nothing to export: pass --dendrogram and/or --views".into()));
    }
    if let Some(path) = &args.dendrogram {
        let svg = render_dendrogram_svg(&tree.to_linkage(), data.labels(), &SvgOptions::default())?;
        write_atomic(path, svg.as_bytes())?;
    }
    if let Some(path) = &args.views {
        write_atomic(path, views_to_json(export_split_views(&tree, &data)?)?.as_bytes())?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> divclust::Result<()> {
    let state = AppState::new(ServerConfig {
        data_dir: args.data_dir,
        snapshot_dir: args.snapshot_dir,
        max_upload_bytes: args.max_upload_bytes,
    })?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    let addr = SocketAddr::new(args.host, args.port);
    runtime
        .block_on(divclust_server::serve(addr, state))
        .map_err(|e| Error::io(addr.to_string(), e))
}

fn generate(args: GenerateArgs) -> divclust::Result<()> {
    let blobs = make_blobs(&BlobSpec {
        n: args.n,
        d: args.d,
        k: args.k,
        separation: args.separation,
        spread: args.spread,
        seed: args.seed,
    })?;
    save_matrix(&args.out, &blobs.data, false)?;
    if let Some(path) = &args.labels_out {
        write_labels(path, blobs.data.labels().unwrap_or_default())?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else if e.is_data_error() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Bench(a) => run_bench(a),
        Command::Export(a) => export(a),
        Command::Serve(a) => serve(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
