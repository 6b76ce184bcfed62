//! Command-line front end: compile a resource bundle, annotate text,
//! evaluate output against a reference corpus, or benchmark throughput.
//!
//! Exit codes: 0 success, 1 usage error, 2 resource error (bad manifest,
//! tagset, graph, lexicon, or corpus content), 3 I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use eojeol::annotate::{annotate_text, decode_input, Encoding};
use eojeol::eval::{evaluate, load_reference, system_words, DowngradeMap};
use eojeol::lexicon::{read_file, write_file, CompiledLexicon};
use eojeol::pipeline::{compile_bundle, CompileOptions};
use eojeol::resource::BundleManifest;
use eojeol::Error;

#[derive(Parser)]
#[command(name = "eojeol", version, about = "Korean morphological annotation toolkit")]
struct Cli {
    /// Print per-step timing to the diagnostic stream.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a resource bundle into one word-lexicon file.
    Compile {
        /// Bundle manifest (TOML).
        #[arg(long)]
        manifest: PathBuf,
        /// Override the manifest's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Do not apply allomorph graphs to derived stems.
        #[arg(long)]
        no_chain_allomorphy: bool,
    },
    /// Annotate text into morpheme graphs, one per sentence.
    Annotate {
        /// Compiled lexicon file.
        #[arg(long)]
        lexicon: PathBuf,
        /// Input text file.
        #[arg(long)]
        input: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EncodingArg::Utf8)]
        encoding: EncodingArg,
    },
    /// Score annotation output against a reference corpus.
    Eval {
        /// Annotation output (morpheme graph file).
        #[arg(long)]
        system: PathBuf,
        /// Reference corpus file.
        #[arg(long)]
        reference: PathBuf,
        /// Tag downgrade map file.
        #[arg(long)]
        map: PathBuf,
    },
    /// Measure annotation throughput over a text file.
    Bench {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = EncodingArg::Utf8)]
        encoding: EncodingArg,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum EncodingArg {
    Utf8,
    Utf16le,
}

impl From<EncodingArg> for Encoding {
    fn from(arg: EncodingArg) -> Encoding {
        match arg {
            EncodingArg::Utf8 => Encoding::Utf8,
            EncodingArg::Utf16le => Encoding::Utf16le,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        let code = match err {
            Error::Io(_) => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Compile { manifest, output, no_chain_allomorphy } => {
            cmd_compile(manifest, output.as_deref(), *no_chain_allomorphy, cli.verbose)
        }
        Command::Annotate { lexicon, input, output, encoding } => {
            cmd_annotate(lexicon, input, output.as_deref(), (*encoding).into(), cli.verbose)
        }
        Command::Eval { system, reference, map } => cmd_eval(system, reference, map),
        Command::Bench { lexicon, input, encoding } => {
            cmd_bench(lexicon, input, (*encoding).into())
        }
    }
}

/// Returns elapsed seconds, printing them when verbose.
fn step<T>(
    verbose: bool,
    name: &str,
    f: impl FnOnce() -> Result<T, Error>,
) -> Result<T, Error> {
    let started = Instant::now();
    let value = f()?;
    if verbose {
        eprintln!("{name}: {:.3} s", started.elapsed().as_secs_f64());
    }
    Ok(value)
}

fn cmd_compile(
    manifest_path: &Path,
    output: Option<&Path>,
    no_chain_allomorphy: bool,
    verbose: bool,
) -> Result<(), Error> {
    let manifest = step(verbose, "load manifest", || BundleManifest::load(manifest_path))?;
    let options = CompileOptions { chain_allomorphy: !no_chain_allomorphy };
    let (lexicon, report) = step(verbose, "compile bundle", || {
        compile_bundle(&manifest, &options)
    })?;
    let target = output
        .map(Path::to_path_buf)
        .or_else(|| manifest.output.clone())
        .ok_or_else(|| {
            Error::Manifest("no output path: pass --output or set `output` in the manifest".into())
        })?;
    step(verbose, "write lexicon", || write_file(&lexicon, &target))?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    print!("{}", report.render());
    println!("output={}", target.display());
    Ok(())
}

fn load_lexicon(path: &Path, verbose: bool) -> Result<CompiledLexicon, Error> {
    step(verbose, "load lexicon", || read_file(path))
}

fn read_text(path: &Path, encoding: Encoding) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    decode_input(&bytes, encoding)
}

fn cmd_annotate(
    lexicon_path: &Path,
    input: &Path,
    output: Option<&Path>,
    encoding: Encoding,
    verbose: bool,
) -> Result<(), Error> {
    let lexicon = load_lexicon(lexicon_path, verbose)?;
    let text = read_text(input, encoding)?;
    let stats = match output {
        Some(path) => {
            let mut sink = std::io::BufWriter::new(std::fs::File::create(path)?);
            let stats = annotate_text(&lexicon, &text, &mut sink)?;
            sink.flush()?;
            stats
        }
        None => {
            let stdout = std::io::stdout();
            let mut sink = std::io::BufWriter::new(stdout.lock());
            let stats = annotate_text(&lexicon, &text, &mut sink)?;
            sink.flush()?;
            stats
        }
    };
    if verbose {
        eprintln!(
            "sentences={} words={} unknown_words={}",
            stats.sentences, stats.words, stats.unknown_words
        );
    }
    Ok(())
}

fn cmd_eval(system: &Path, reference: &Path, map_path: &Path) -> Result<(), Error> {
    let map = DowngradeMap::load(map_path)?;
    let dag_text = std::fs::read_to_string(system)?;
    let dags = eojeol::annotate::dag::parse_dags(&dag_text)?;
    let words = system_words(&dags)?;
    let reference = load_reference(reference, &map.coarse_symbols())?;
    let metrics = evaluate(&words, &reference, &map)?;
    print!("{}", metrics.render());
    Ok(())
}

fn cmd_bench(lexicon_path: &Path, input: &Path, encoding: Encoding) -> Result<(), Error> {
    let lexicon = load_lexicon(lexicon_path, false)?;
    let text = read_text(input, encoding)?;
    let started = Instant::now();
    let stats = annotate_text(&lexicon, &text, &mut std::io::sink())?;
    let elapsed = started.elapsed().as_secs_f64();
    let rate = if elapsed > 0.0 { stats.words as f64 / elapsed } else { f64::INFINITY };
    println!("words={}", stats.words);
    println!("elapsed_s={elapsed:.3}");
    println!("words_per_s={rate:.0}");
    Ok(())
}
