use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use eoqa::app::server::{serve, ServiceState};
use eoqa::app::{evaluate_corpus, load_corpus, AskOptions, Engine};
use eoqa::geofns::{materialize, to_ntriples, SpatialPredicate};
use eoqa::kgstore::{nt_files_in, read_triples, TripleStore};

#[derive(Parser)]
#[command(name = "eoqa", version, about = "Question answering over Earth-observation knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct KgArgs {
    /// Directory of N-Triples files.
    #[arg(long)]
    kg: PathBuf,
    /// Precomputed spatial relations; computed at startup when omitted.
    #[arg(long)]
    materialized: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one question.
    Ask {
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, conflicts_with = "stdin")]
        question: Option<String>,
        /// Read the question from standard input.
        #[arg(long)]
        stdin: bool,
        /// Print only the generated query.
        #[arg(long)]
        emit_sparql: bool,
        #[arg(long)]
        no_execute: bool,
        /// Include the parse, annotations and generation notes.
        #[arg(long)]
        trace: bool,
    },
    /// Precompute topological relations between all features.
    Materialize {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// Subset of within, contains, intersects.
        #[arg(long, value_delimiter = ',', default_values_t = ["within".to_string(), "contains".to_string(), "intersects".to_string()])]
        predicates: Vec<String>,
    },
    /// Score a JSON Lines corpus.
    Eval {
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long)]
        corpus: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn load_engine(kg: &KgArgs) -> anyhow::Result<Engine> {
    Engine::load(&kg.kg, kg.materialized.as_deref()).with_context(|| format!("loading {}", kg.kg.display()))
}

fn ask(kg: &KgArgs, question: Option<String>, stdin: bool, emit_sparql: bool, no_execute: bool, trace: bool) -> ExitCode {
    let fail = |message: String| {
        emit(&json!({ "error": message }).to_string());
        ExitCode::from(2)
    };
    let question = match (question, stdin) {
        (Some(q), _) => q,
        (None, true) => {
            let mut s = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut s) {
                return fail(format!("reading stdin: {e}"));
            }
            s.trim().to_string()
        }
        (None, false) => return fail("one of --question or --stdin is required".into()),
    };
    let engine = match load_engine(kg) {
        Ok(e) => e,
        Err(e) => return fail(format!("{e:#}")),
    };
    let opts = AskOptions {
        execute: !no_execute && !emit_sparql,
        trace,
    };
    match engine.ask(&question, opts) {
        Ok(r) if emit_sparql => {
            emit(&r.rewritten_sparql);
            ExitCode::SUCCESS
        }
        Ok(r) => {
            emit(&serde_json::to_string_pretty(&r).expect("responses serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.to_string()),
    }
}

fn run_materialize(kg: &Path, output: &Path, names: &[String]) -> anyhow::Result<()> {
    let mut predicates = BTreeSet::new();
    for n in names {
        match SpatialPredicate::from_name(n.trim()) {
            Some(p) => {
                predicates.insert(p);
            }
            None => bail!("unknown predicate {n:?}"),
        }
    }
    let triples = read_triples(&nt_files_in(kg)?)?;
    let store = TripleStore::from_triples(triples);
    let relations = materialize(&store, &predicates);
    std::fs::write(output, to_ntriples(&relations)).with_context(|| format!("writing {}", output.display()))?;
    eprintln!("{} relations written to {}", relations.len(), output.display());
    Ok(())
}

fn run_eval(kg: &KgArgs, corpus: &Path, report: Option<&Path>) -> anyhow::Result<()> {
    let entries = load_corpus(corpus)?;
    let engine = load_engine(kg)?;
    let started = std::time::Instant::now();
    let r = evaluate_corpus(&engine, &entries)?;
    emit(r.to_table().trim_end());
    eprintln!("evaluated {} questions in {:.2} s", entries.len(), started.elapsed().as_secs_f64());
    if let Some(path) = report {
        let text = serde_json::to_string_pretty(&r.to_json())? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_serve(kg: KgArgs, host: &str, port: u16) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        let state = ServiceState::loading();
        let loader = state.clone();
        tokio::task::spawn_blocking(move || match load_engine(&kg) {
            Ok(engine) => {
                loader.install(engine);
                eprintln!("knowledge graph ready");
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                std::process::exit(2);
            }
        });
        serve(listener, state).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ask {
            kg,
            question,
            stdin,
            emit_sparql,
            no_execute,
            trace,
        } => return ask(&kg, question, stdin, emit_sparql, no_execute, trace),
        Command::Materialize { kg, output, predicates } => run_materialize(&kg, &output, &predicates),
        Command::Eval { kg, corpus, report } => run_eval(&kg, &corpus, report.as_deref()),
        Command::Serve { kg, port, host } => run_serve(kg, &host, port),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
