use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use lemmalink::corpus::default_whitelist;
use lemmalink::formats::MappingRow;
use lemmalink::io as files;
use lemmalink::service::{self, AppState};
use lemmalink::store::{iaa_from_labels, labels_from_rows};
use lemmalink::{
    CorpusDescriptor, DataDir, Format, IngestOptions, IngestReport, LemmaOverrides,
    LexiconDescriptor, Store, StoreError,
};
use lemmalink_core::{LemmaRef, Precision, RelationCode, RelationWeights, CANONICAL_NAMESPACE};

#[derive(Parser)]
#[command(
    name = "lemmalink",
    version,
    about = "Link Arabic lexicons and corpora to a canonical lemma set"
)]
struct Cli {
    /// Store directory (created if missing).
    #[arg(
        long,
        env = "LEMMALINK_DATA",
        default_value = "lemmalink-data",
        global = true
    )]
    data_dir: PathBuf,
    /// Precision weight of relation X2 for a new store.
    #[arg(long, global = true)]
    x2_weight: Option<u8>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a lexicon or a corpus.
    Ingest(IngestArgs),
    /// Copy external lemmas into the canonical lexicon.
    Adopt(AdoptArgs),
    /// Discover candidate correspondences between two lexicons.
    Automap(AutomapArgs),
    /// Apply a mappings export (TSV or JSON lines).
    ReviewImport { path: PathBuf },
    /// Resolve a corpus' lemma references to canonical lemmas.
    LinkCorpus {
        corpus: String,
        /// Comma-separated relation codes that may resolve a token.
        #[arg(long, value_delimiter = ',')]
        relations: Option<Vec<String>>,
    },
    /// Reports.
    Stats {
        #[command(subcommand)]
        report: StatsCommand,
    },
    /// Write lemmas, mappings or a linked corpus.
    Export {
        #[command(subcommand)]
        what: ExportCommand,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Bearer token required on every request.
        #[arg(long, env = "LEMMALINK_TOKEN")]
        token: Option<String>,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["lexicon", "corpus"])))]
struct IngestArgs {
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Lexicon or corpus id; defaults to the file stem.
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    name: Option<String>,
    /// Kind of lexicon source.
    #[arg(long, default_value = "lexicon")]
    category: String,
    /// Corpus variety: MSA, Classical or a dialect name.
    #[arg(long, default_value = "MSA")]
    variety: String,
    /// Load into the canonical lexicon.
    #[arg(long, conflicts_with = "corpus")]
    canonical: bool,
    /// Require fully diacritized forms.
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip the full-diacritization check.
    #[arg(long)]
    lenient: bool,
    /// Replace an already loaded lexicon.
    #[arg(long)]
    replace: bool,
    /// Treat أ إ آ ٱ as bare alef.
    #[arg(long)]
    fold_hamza: bool,
}

#[derive(Args)]
struct AdoptArgs {
    #[arg(long)]
    lexicon: String,
    /// Adopt one lemma instead of the whole lexicon.
    #[arg(long)]
    local_id: Option<String>,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct AutomapArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
    /// Also write the new candidates as a mappings TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Lemma counts per POS.
    Coverage {
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<String>>,
        #[command(flatten)]
        output: ReportOut,
    },
    /// Confirmed correspondences per relation.
    Relations {
        /// Two lexicon ids.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        scope: Option<Vec<String>>,
        #[command(flatten)]
        output: ReportOut,
    },
    /// Cohen's kappa between reviewers.
    Iaa {
        /// Read labels from a mappings export instead of the review history.
        #[arg(long)]
        mappings: Option<PathBuf>,
        #[command(flatten)]
        output: ReportOut,
    },
    /// Token and lemma coverage per corpus.
    Corpora {
        #[command(flatten)]
        output: ReportOut,
    },
    /// Unresolved source lemmas of a corpus by frequency.
    Unresolved {
        corpus: String,
        #[command(flatten)]
        output: ReportOut,
    },
}

#[derive(Args)]
struct ReportOut {
    /// Write the full report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// tsv or json
    #[arg(long, default_value = "tsv")]
    report_format: String,
}

#[derive(Subcommand)]
enum ExportCommand {
    Lemmas {
        #[arg(long, default_value = CANONICAL_NAMESPACE)]
        lexicon: String,
        #[command(flatten)]
        output: ExportOut,
    },
    Mappings {
        #[command(flatten)]
        output: ExportOut,
    },
    Corpus {
        corpus: String,
        #[command(flatten)]
        output: ExportOut,
    },
}

#[derive(Args)]
struct ExportOut {
    #[arg(long, default_value = "tsv")]
    format: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn weights(x2: Option<u8>) -> Result<RelationWeights, Failure> {
    match x2 {
        None => Ok(RelationWeights::default()),
        Some(p) => Precision::new(p)
            .map(|x2| RelationWeights { x2 })
            .ok_or_else(|| Failure::Usage(format!("--x2-weight must be within 1..=100, got {p}"))),
    }
}

fn open(cli: &Cli) -> Result<(DataDir, Store), Failure> {
    let dir = DataDir::open(&cli.data_dir)?;
    let w = weights(cli.x2_weight)?;
    let store = dir.load(w)?;
    if cli.x2_weight.is_some() && store.mappings().weights() != w {
        return Err(Failure::Usage(format!(
            "the store already uses X2 weight {}",
            store.mappings().weights().x2.percent()
        )));
    }
    Ok((dir, store))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Prints rejected rows to stderr; a report with rejections is a data error
/// once the accepted rows are saved.
fn finish_report(report: &IngestReport, what: &str) -> Result<(), Failure> {
    for r in &report.rejected {
        eprintln!("{what}: rejected {r}");
    }
    if report.rejected.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "{} of {} rows rejected",
            report.rejected.len(),
            report.total
        )))
    }
}

fn format_arg(s: &str) -> Result<Format, Failure> {
    s.parse().map_err(Failure::Usage)
}

fn write_out(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn report<T: serde::Serialize>(
    output: &ReportOut,
    value: &T,
    tsv: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let Some(path) = &output.out else {
        return Ok(());
    };
    let text = match output.report_format.as_str() {
        "tsv" => tsv(),
        "json" => serde_json::to_string_pretty(value).expect("serializable") + "\n",
        other => return Err(Failure::Usage(format!("unknown report format \"{other}\""))),
    };
    write_out(path, &text)
}

fn parse_relations(codes: &[String]) -> Result<BTreeSet<RelationCode>, Failure> {
    codes
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            c.parse::<RelationCode>()
                .map_err(|e| Failure::Usage(e.to_string()))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Ingest(args) => {
            let (dir, mut store) = open(&cli)?;
            if let Some(path) = &args.lexicon {
                let rows = files::read_lexicon_file(path)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                let id = if args.canonical {
                    CANONICAL_NAMESPACE.to_string()
                } else {
                    args.id.clone().unwrap_or_else(|| stem(path))
                };
                if !args.canonical && id == CANONICAL_NAMESPACE {
                    return Err(Failure::Usage(format!(
                        "use --canonical to load into {CANONICAL_NAMESPACE}"
                    )));
                }
                let name = args.name.clone().unwrap_or_else(|| id.clone());
                let strict = if args.strict {
                    Some(true)
                } else if args.lenient {
                    Some(false)
                } else {
                    None
                };
                let options = IngestOptions {
                    strict,
                    replace: args.replace,
                    fold_hamza: args.fold_hamza,
                };
                let r = store.ingest_lexicon(
                    LexiconDescriptor::new(id.clone(), name, args.category.clone()),
                    rows,
                    options,
                )?;
                dir.save(&store)?;
                println!(
                    "lexicon={id} accepted={} rejected={} total={}",
                    r.accepted,
                    r.rejected.len(),
                    r.total
                );
                finish_report(&r, &id)
            } else {
                let path = args.corpus.as_ref().expect("clap requires one source");
                let rows = files::read_corpus_file(path)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                let id = args.id.clone().unwrap_or_else(|| stem(path));
                let name = args.name.clone().unwrap_or_else(|| id.clone());
                let r = store.ingest_corpus(
                    CorpusDescriptor::new(id.clone(), name, args.variety.clone()),
                    rows,
                )?;
                dir.save(&store)?;
                println!(
                    "corpus={id} accepted={} rejected={} total={}",
                    r.accepted,
                    r.rejected.len(),
                    r.total
                );
                finish_report(&r, &id)
            }
        }
        Command::Adopt(args) => {
            let (dir, mut store) = open(&cli)?;
            let overrides = LemmaOverrides {
                strict: Some(!args.lenient),
                ..Default::default()
            };
            let r = match &args.local_id {
                Some(local) => {
                    let (id, _) = store.adopt_as_qabas(
                        &LemmaRef::external(args.lexicon.clone(), local.clone()),
                        &overrides,
                    )?;
                    println!("adopted=1 id={id}");
                    dir.save(&store)?;
                    return Ok(());
                }
                None => store.adopt_all(&args.lexicon, &overrides)?,
            };
            dir.save(&store)?;
            println!(
                "adopted={} rejected={} total={}",
                r.accepted,
                r.rejected.len(),
                r.total
            );
            finish_report(&r, &args.lexicon)
        }
        Command::Automap(args) => {
            let (dir, mut store) = open(&cli)?;
            let batch = store.automap(&args.source, &args.target)?;
            dir.save(&store)?;
            if let Some(path) = &args.out {
                let mut text = String::new();
                lemmalink::formats::push_row(&mut text, &lemmalink::formats::MAPPING_COLUMNS);
                for c in &batch.candidates {
                    lemmalink::formats::push_row(&mut text, &Store::mapping_row(c).cells());
                }
                write_out(path, &text)?;
            }
            let s = batch.stats;
            println!(
                "candidates={} pairs_compared={} blocks={} skipped_existing={}",
                batch.candidates.len(),
                s.pairs_compared,
                s.blocks,
                s.skipped_existing
            );
            Ok(())
        }
        Command::ReviewImport { path } => {
            let (dir, mut store) = open(&cli)?;
            let rows = files::read_mappings_file(path)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let r = store.import_mappings(rows);
            dir.save(&store)?;
            println!(
                "changed={} created={} updated={} unchanged={} rejected={}",
                r.changed(),
                r.created,
                r.updated,
                r.unchanged,
                r.rejected.len()
            );
            for e in &r.rejected {
                eprintln!("review-import: rejected {e}");
            }
            if r.rejected.is_empty() {
                Ok(())
            } else {
                Err(Failure::Data(format!(
                    "{} of {} rows rejected",
                    r.rejected.len(),
                    r.total
                )))
            }
        }
        Command::LinkCorpus { corpus, relations } => {
            let whitelist = match relations {
                Some(codes) => parse_relations(codes)?,
                None => default_whitelist(),
            };
            let (dir, mut store) = open(&cli)?;
            let r = store.link_corpus(corpus, &whitelist)?;
            dir.save(&store)?;
            for a in &r.ambiguous {
                eprintln!(
                    "ambiguous {}:{} {} -> {:?}",
                    a.sentence, a.token, a.source, a.candidates
                );
            }
            println!(
                "corpus={} tokens_resolved={} tokens_total={} tokens_percent={} lemmas_resolved={} lemmas_total={} lemmas_percent={} ambiguous={} changed={}",
                r.corpus_id,
                r.tokens.mapped,
                r.tokens.total,
                r.tokens.percent(),
                r.lemmas.mapped,
                r.lemmas.total,
                r.lemmas.percent(),
                r.ambiguous.len(),
                r.changed
            );
            Ok(())
        }
        Command::Stats { report: which } => {
            let (_dir, store) = open(&cli)?;
            stats(&store, which)
        }
        Command::Export { what } => {
            let (_dir, store) = open(&cli)?;
            let (text, output) = match what {
                ExportCommand::Lemmas { lexicon, output } => (
                    store.export_lexicon(lexicon, format_arg(&output.format)?)?,
                    output,
                ),
                ExportCommand::Mappings { output } => {
                    (store.export_mappings(format_arg(&output.format)?), output)
                }
                ExportCommand::Corpus { corpus, output } => (
                    store.export_corpus(corpus, format_arg(&output.format)?)?,
                    output,
                ),
            };
            match &output.out {
                Some(path) => {
                    write_out(path, &text)?;
                    let rows = text.lines().count() - usize::from(output.format == "tsv");
                    println!("rows={rows} out={}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Serve { bind, token } => {
            let (dir, store) = open(&cli)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(bind.as_str())
                    .await
                    .map_err(|e| Failure::Usage(format!("cannot bind {bind}: {e}")))?;
                println!("listening={}", listener.local_addr()?);
                let app = AppState::new(store, Some(dir), token.clone());
                service::serve(listener, app.clone()).await?;
                app.checkpoint()?;
                Ok::<_, Failure>(())
            })
        }
    }
}

fn stats(store: &Store, which: &StatsCommand) -> Result<(), Failure> {
    match which {
        StatsCommand::Coverage { sources, output } => {
            let sources = match sources {
                Some(s) => s.clone(),
                None => store
                    .lexicons()
                    .map(|d| d.lexicon_id.clone())
                    .filter(|id| id != CANONICAL_NAMESPACE)
                    .collect(),
            };
            let c = store.pos_coverage(&sources)?;
            report(output, &c, || files::coverage_tsv(&c))?;
            let totals: Vec<String> = c.total.iter().map(u64::to_string).collect();
            println!(
                "sources={} totals={}",
                c.sources.join(","),
                totals.join(",")
            );
            Ok(())
        }
        StatsCommand::Relations { scope, output } => {
            let scope = match scope.as_deref() {
                None => None,
                Some([a, b]) => Some((a.as_str(), b.as_str())),
                Some(_) => return Err(Failure::Usage("--scope takes two lexicon ids".into())),
            };
            let r = store.relation_counts(scope)?;
            report(output, &r, || files::relations_tsv(&r))?;
            let counts: Vec<String> = RelationCode::ALL
                .iter()
                .map(|c| format!("{}={}", c.as_str(), r.get(*c)))
                .collect();
            println!("total={} {}", r.total, counts.join(" "));
            Ok(())
        }
        StatsCommand::Iaa { mappings, output } => {
            let r = match mappings {
                None => store.iaa(),
                Some(path) => {
                    let rows: Vec<MappingRow> = files::read_mappings_file(path)?
                        .into_iter()
                        .map(|(line, r)| r.map_err(|e| Failure::Data(format!("line {line}: {e}"))))
                        .collect::<Result<_, _>>()?;
                    iaa_from_labels(&labels_from_rows(&rows).map_err(Failure::Data)?)
                }
            };
            report(output, &r, || files::iaa_tsv(&r))?;
            let pairs: Vec<String> = r
                .pairs
                .iter()
                .map(|p| format!("{}-{}={:.2}", p.a, p.b, p.rounded))
                .collect();
            println!("annotators={} {}", r.annotators.len(), pairs.join(" "));
            Ok(())
        }
        StatsCommand::Corpora { output } => {
            let rows = store.corpus_coverage_table();
            report(output, &rows, || files::corpora_tsv(&rows))?;
            let total = rows.last().expect("total row");
            println!(
                "corpora={} tokens_percent={} lemmas_percent={}",
                rows.len() - 1,
                total.tokens_percent,
                total.lemmas_percent
            );
            Ok(())
        }
        StatsCommand::Unresolved { corpus, output } => {
            let list = store.unresolved_lemmas(corpus)?;
            report(output, &list, || {
                let mut out = String::new();
                lemmalink::formats::push_row(&mut out, &["source", "tokens"]);
                for u in &list {
                    lemmalink::formats::push_row(
                        &mut out,
                        &[u.source.clone(), u.tokens.to_string()],
                    );
                }
                out
            })?;
            println!(
                "unresolved_lemmas={} tokens={}",
                list.len(),
                list.iter().map(|u| u.tokens).sum::<u64>()
            );
            Ok(())
        }
    }
}
