use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use diacritix::classify::{ClassifierKind, Hyper};
use diacritix::datasetgen::{generate, read_dataset, write_dataset_to, AmbiguousSet, GenParams};
use diacritix::embed::{
    analogy_mrr, build_cowords, enhance, odd_word, project, read_analogy, read_oddword, read_wordsim, wordsim_pearson,
    AlignmentDictionary, EmbeddingModel, EmbeddingRestorer, EnhanceWarning, Scheme,
};
use diacritix::evaluate::{
    crossval_all, cv_report, full_text_eval, ClassifierTrainer, EmbeddingTrainer, NGramTrainer, Trainer, DEFAULT_FOLDS,
};
use diacritix::ngram::{dominant_forms, variant_index_from_sets, NGramModel};
use diacritix::pipeline::{train_classifiers, Fallback, Pipeline, Restorer};
use diacritix::{classify, compute_stats, embed, Corpus, Error};

#[derive(Parser, Debug)]
#[command(
    name = "diacritix",
    version,
    about = "Learn to restore diacritics from a marked corpus"
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Globals {
    /// Seed for fold assignment and classifier shuffling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Fold case before grouping words (`--lowercase=false` keeps case).
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set,
          num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    lowercase: bool,

    /// Context window size (odd, at least 3). Classifiers default to 9,
    /// embeddings to 11.
    #[arg(long, global = true)]
    window: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print corpus statistics as JSON.
    Stats { corpus: PathBuf },
    /// Build the ambiguous-wordkey dataset (JSON Lines).
    Dataset {
        corpus: PathBuf,
        #[command(flatten)]
        gates: Gates,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Train a restoration model bundle.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Project source-language vectors through an alignment dictionary.
    Project {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        align: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Move variant vectors towards their coword centroids.
    Enhance {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cowords: CowordArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Restore diacritics in text, one sentence per line.
    Restore {
        #[arg(long)]
        model: PathBuf,
        /// Input file; standard input when omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate restorers.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Intrinsic evaluation of word vectors.
    #[command(subcommand)]
    Intrinsic(IntrinsicCommand),
}

#[derive(Args, Debug)]
struct Gates {
    #[arg(long, default_value_t = 0.05)]
    varnt_rep: f64,
    #[arg(long, default_value_t = 0.0001)]
    wdkey_rep: f64,
    #[arg(long, default_value_t = 0.75)]
    varnt_distrib: f64,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Marked training corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Dataset built from the corpus; generated with default gates when
    /// omitted.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CowordArgs {
    /// Cowords kept per variant.
    #[arg(long, default_value_t = 50)]
    top_n: usize,
    /// Weight coword centroids by co-occurrence count.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args, Debug)]
struct NgramArgs {
    /// Highest n-gram order.
    #[arg(short, default_value_t = 5)]
    n: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Perceptron,
    Logistic,
    Svm,
    Nb,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Perceptron => ClassifierKind::Perceptron,
            KindArg::Logistic => ClassifierKind::LogisticSgd,
            KindArg::Svm => ClassifierKind::LinearSvmSgd,
            KindArg::Nb => ClassifierKind::MultinomialNb,
        }
    }
}

#[derive(Args, Debug)]
struct ClfArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Logistic)]
    kind: KindArg,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    /// Naive Bayes smoothing.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Debug)]
struct EmbArgs {
    /// word2vec text vectors (already enhanced if desired).
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, default_value = "basic")]
    scheme: Scheme,
    /// Use the whole sentence as context instead of a window.
    #[arg(long)]
    sentence: bool,
    #[command(flatten)]
    cowords: CowordArgs,
}

#[derive(Subcommand, Debug)]
enum TrainCommand {
    /// Back-off n-gram model.
    Ngram {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        ngram: NgramArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// One linear classifier per wordkey.
    Clf {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        clf: ClfArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Cosine-similarity restorer over word vectors.
    Emb {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        emb: EmbArgs,
        /// Leave ambiguous words unrestored when no candidate has a vector.
        #[arg(long)]
        echo_fallback: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CvModel {
    Ngram {
        #[command(flatten)]
        ngram: NgramArgs,
    },
    Clf {
        #[command(flatten)]
        clf: ClfArgs,
    },
    Emb {
        #[command(flatten)]
        emb: EmbArgs,
    },
}

#[derive(Subcommand, Debug)]
enum EvalCommand {
    /// Stratified k-fold cross-validation per wordkey. Prints a TSV table.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, default_value_t = DEFAULT_FOLDS)]
        k: usize,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(subcommand)]
        model: CvModel,
    },
    /// Compare a restored text with its gold version. Prints JSON.
    Fulltext {
        #[arg(long)]
        restored: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum IntrinsicCommand {
    /// Rows of `w1 w2 w3 w4 odd`.
    Oddword {
        #[arg(long)]
        vectors: PathBuf,
        file: PathBuf,
    },
    /// Rows of `a b c d`; reports mean reciprocal rank.
    Analogy {
        #[arg(long)]
        vectors: PathBuf,
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        list_len: usize,
    },
    /// Rows of `w1 w2 score`; reports Pearson correlation.
    Wordsim {
        #[arg(long)]
        vectors: PathBuf,
        file: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Param(_) => 1,
        Error::Model(_) | Error::EmptyModel(_) | Error::Unrepresentable(_) => 3,
        _ => 2,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn params(gates: Option<&Gates>, lowercase: bool) -> GenParams {
    let d = GenParams::default();
    GenParams {
        varnt_rep: gates.map_or(d.varnt_rep, |g| g.varnt_rep),
        wdkey_rep: gates.map_or(d.wdkey_rep, |g| g.wdkey_rep),
        varnt_distrib: gates.map_or(d.varnt_distrib, |g| g.varnt_distrib),
        lowercase,
    }
}

fn load_data(data: &DataArgs, lowercase: bool) -> Result<(Corpus, Vec<AmbiguousSet>), Error> {
    let corpus = Corpus::read(&data.corpus, true)?;
    let sets = match &data.dataset {
        Some(p) => read_dataset(p)?,
        None => generate(&corpus, &params(None, lowercase))?,
    };
    Ok((corpus, sets))
}

fn hyper(clf: &ClfArgs, seed: u64) -> (ClassifierKind, Hyper) {
    let kind = ClassifierKind::from(clf.kind);
    let mut h = Hyper::defaults_for(kind);
    h.seed = seed;
    if let Some(e) = clf.epochs {
        h.epochs = e;
    }
    if let Some(lr) = clf.learning_rate {
        h.learning_rate = lr;
    }
    if let Some(l2) = clf.l2 {
        h.l2 = l2;
    }
    if let Some(a) = clf.alpha {
        h.alpha = a;
    }
    (kind, h)
}

fn report_warnings(warnings: &[EnhanceWarning]) {
    for w in warnings {
        match w {
            EnhanceWarning::VariantMissing(v) => eprintln!("warning: variant {v} has no vector"),
            EnhanceWarning::NoCowordVectors(v) => eprintln!("warning: no coword of {v} has a vector"),
        }
    }
}

fn embedding_restorer(
    emb: &EmbArgs,
    corpus: &Corpus,
    sets: &[AmbiguousSet],
    window: Option<usize>,
    lowercase: bool,
) -> Result<EmbeddingRestorer, Error> {
    let window = if emb.sentence {
        None
    } else {
        Some(window.unwrap_or(embed::DEFAULT_WINDOW))
    };
    let index = variant_index_from_sets(sets);
    Ok(EmbeddingRestorer {
        scheme: emb.scheme,
        window,
        cowords: build_cowords(corpus, sets, emb.cowords.top_n, window, lowercase)?,
        context_forms: dominant_forms(corpus, lowercase, &index, |_| true),
    })
}

fn train(cmd: TrainCommand, cli: &Globals) -> Result<(), Error> {
    let (pipeline, out) = match cmd {
        TrainCommand::Ngram { data, ngram, out } => {
            let (corpus, sets) = load_data(&data, cli.lowercase)?;
            let index = variant_index_from_sets(&sets);
            let model = NGramModel::train(&corpus, ngram.n, &index, cli.lowercase)?;
            let restorer = Restorer::Ngram { n: ngram.n, model };
            (Pipeline::new(&corpus, &sets, cli.lowercase, restorer), out)
        }
        TrainCommand::Clf { data, clf, out } => {
            let (corpus, sets) = load_data(&data, cli.lowercase)?;
            let (kind, h) = hyper(&clf, cli.seed);
            let window = cli.window.unwrap_or(classify::DEFAULT_WINDOW);
            let classifiers = train_classifiers(&sets, kind, window, &h)?;
            let restorer = Restorer::Classifier {
                kind,
                window,
                classifiers,
            };
            (Pipeline::new(&corpus, &sets, cli.lowercase, restorer), out)
        }
        TrainCommand::Emb {
            data,
            emb,
            echo_fallback,
            out,
        } => {
            let (corpus, sets) = load_data(&data, cli.lowercase)?;
            let restorer = embedding_restorer(&emb, &corpus, &sets, cli.window, cli.lowercase)?;
            let vectors = fs::canonicalize(&emb.vectors).map_err(|e| Error::io(&emb.vectors, e))?;
            EmbeddingModel::load(&vectors)?;
            let restorer = Restorer::Embedding {
                restorer,
                vectors,
                model: None,
            };
            let fallback = if echo_fallback {
                Fallback::Echo
            } else {
                Fallback::Unigram
            };
            (
                Pipeline::new(&corpus, &sets, cli.lowercase, restorer).with_fallback(fallback),
                out,
            )
        }
    };
    pipeline.save(&out)?;
    eprintln!(
        "{} restorer: {} ambiguous wordkeys, {} mapped words -> {}",
        pipeline.restorer.name(),
        pipeline.variant_index.len(),
        pipeline.unambiguous_map.len(),
        out.display()
    );
    Ok(())
}

fn eval(cmd: EvalCommand, cli: &Globals) -> Result<(), Error> {
    match cmd {
        EvalCommand::Cv { data, k, report, model } => {
            let (corpus, sets) = load_data(&data, cli.lowercase)?;
            let index = variant_index_from_sets(&sets);
            let vectors;
            let restorer;
            let trainer: Box<dyn Trainer> = match &model {
                CvModel::Ngram { ngram } => Box::new(NGramTrainer {
                    corpus: &corpus,
                    index,
                    n: ngram.n,
                    lowercase: cli.lowercase,
                }),
                CvModel::Clf { clf } => {
                    let (kind, hyper) = hyper(clf, cli.seed);
                    Box::new(ClassifierTrainer {
                        kind,
                        window: cli.window.unwrap_or(classify::DEFAULT_WINDOW),
                        hyper,
                    })
                }
                CvModel::Emb { emb } => {
                    vectors = EmbeddingModel::load(&emb.vectors)?;
                    restorer = embedding_restorer(emb, &corpus, &sets, cli.window, cli.lowercase)?;
                    Box::new(EmbeddingTrainer {
                        model: &vectors,
                        restorer: &restorer,
                    })
                }
            };
            let outcomes = crossval_all(trainer.as_ref(), &sets, k, cli.seed);
            for o in &outcomes {
                if let Some(w) = &o.warning {
                    eprintln!("warning: {}: {w}", o.wordkey);
                }
                for (i, f) in o.folds.iter().enumerate() {
                    if let Some(e) = &f.error {
                        eprintln!("warning: {} fold {}: {e}", o.wordkey, i + 1);
                    }
                }
            }
            let report_data = cv_report(&sets, outcomes)?;
            if let Some(path) = report {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &report_data)?;
                w.flush().map_err(|e| Error::io(&path, e))?;
            }
            io::stdout()
                .write_all(report_data.to_tsv().as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
        EvalCommand::Fulltext { restored, gold } => {
            let r = full_text_eval(&Corpus::read(&restored, true)?, &Corpus::read(&gold, true)?)?;
            let base_err = 1.0 - r.baseline.accuracy;
            let err = 1.0 - r.scores.accuracy;
            print_json(&json!({
                "scores": r.scores,
                "baseline": r.baseline,
                "improvement": r.scores.accuracy - r.baseline.accuracy,
                "error_reduction": if base_err > 0.0 { (base_err - err) / base_err } else { 0.0 },
                "lines": r.line_errors.len(),
                "lines_with_errors": r.line_errors.iter().filter(|e| **e).count(),
                "line_errors": r.line_errors,
            }))
        }
    }
}

fn intrinsic(cmd: IntrinsicCommand) -> Result<(), Error> {
    match cmd {
        IntrinsicCommand::Oddword { vectors, file } => {
            let model = EmbeddingModel::load(&vectors)?;
            let items = read_oddword(open(&file)?)?;
            let (mut correct, mut judged) = (0, 0);
            for item in &items {
                if let Some(odd) = odd_word(&model, &item.words) {
                    judged += 1;
                    correct += usize::from(odd == item.odd);
                }
            }
            print_json(&json!({
                "accuracy": if judged == 0 { 0.0 } else { correct as f64 / judged as f64 },
                "correct": correct,
                "evaluated": judged,
                "skipped": items.len() - judged,
            }))
        }
        IntrinsicCommand::Analogy {
            vectors,
            file,
            list_len,
        } => {
            let model = EmbeddingModel::load(&vectors)?;
            let quads = read_analogy(open(&file)?)?;
            print_json(&json!(analogy_mrr(&model, &quads, list_len)))
        }
        IntrinsicCommand::Wordsim { vectors, file } => {
            let model = EmbeddingModel::load(&vectors)?;
            let pairs = read_wordsim(open(&file)?)?;
            print_json(&json!(wordsim_pearson(&model, &pairs)?))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = &cli.globals;
    match cli.command {
        Command::Stats { corpus } => {
            let c = Corpus::read(corpus, true)?;
            print_json(&json!(compute_stats(&c)))
        }
        Command::Dataset { corpus, gates, out } => {
            let c = Corpus::read(corpus, true)?;
            let sets = generate(&c, &params(Some(&gates), g.lowercase))?;
            eprintln!(
                "{} ambiguous wordkeys, {} instances",
                sets.len(),
                sets.iter().map(|s| s.instances.len()).sum::<usize>()
            );
            match out {
                Some(p) => {
                    let mut w = create(&p)?;
                    write_dataset_to(&sets, &mut w)?;
                    w.flush().map_err(|e| Error::io(&p, e))
                }
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    write_dataset_to(&sets, &mut w)?;
                    w.flush().map_err(|e| Error::io("<stdout>", e))
                }
            }
        }
        Command::Train(t) => train(t, g),
        Command::Project { vectors, align, out } => {
            let src = EmbeddingModel::load(&vectors)?;
            let dict = AlignmentDictionary::read_from(open(&align)?)?;
            let projected = project(&src, &dict)?;
            eprintln!("{} of {} target words projected", projected.len(), dict.entries.len());
            projected.save(&out)
        }
        Command::Enhance {
            vectors,
            scheme,
            data,
            cowords,
            out,
        } => {
            let model = EmbeddingModel::load(&vectors)?;
            let (corpus, sets) = load_data(&data, g.lowercase)?;
            let table = build_cowords(&corpus, &sets, cowords.top_n, g.window, g.lowercase)?;
            let (enhanced, warnings) = enhance(&model, &table, scheme, cowords.weighted);
            report_warnings(&warnings);
            enhanced.save(&out)
        }
        Command::Restore { model, input, out } => {
            let pipeline = Pipeline::load(&model).map_err(|e| match e {
                Error::Model(_) => e,
                other => Error::Model(other.to_string()),
            })?;
            let mut bytes = Vec::new();
            match &input {
                Some(p) => open(p)?.read_to_end(&mut bytes).map_err(|e| Error::io(p, e))?,
                None => io::stdin()
                    .lock()
                    .read_to_end(&mut bytes)
                    .map_err(|e| Error::io("<stdin>", e))?,
            };
            let text = Corpus::from_bytes(&bytes, false)?;
            let restored = pipeline.restore_text(&text)?.to_text();
            match &out {
                Some(p) => fs::write(p, restored).map_err(|e| Error::io(p, e)),
                None => io::stdout()
                    .write_all(restored.as_bytes())
                    .map_err(|e| Error::io("<stdout>", e)),
            }
        }
        Command::Eval(e) => eval(e, g),
        Command::Intrinsic(i) => intrinsic(i),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
