//! `kg`: one verb per invocation over TSV and s-expression files.
//!
//! Results go to standard output as TSV, diagnostics to standard error.
//! Exit status is 0 on success, 1 for a negative answer (invalid data,
//! an inconsistency, a non-entailment) and 2 for usage or input errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kg_core::graph::{parse_graph, Format, Parsed};
use kg_core::query::{eval_algebra, parse_bgp, parse_query, to_tsv, EvalOptions, Mode, Semantics};
use kg_core::sexpr::parse_one;
use kg_core::{Graph, PropertyGraph};
use kg_learn::analytics::{pagerank_with, PageRankConfig};
use kg_learn::embeddings::{train, EmbeddingModel, ModelKind, TrainConfig};
use kg_learn::miner::{mine, mined_to_tsv, MineConfig};
use kg_reason::annotations::{
    annotated_rows_to_tsv, eval_annotated, fuzzy_domain, temporal_domain, AnnotatedGraph, AnnotationDomain,
};
use kg_reason::rules::{builtin_ruleset, check_consistency, entails_ground, least_model, RuleSet};
use kg_reason::schema::{bisim_min_quotient, quotient, Partition};
use kg_reason::shapes::{parse_schema, parse_targets, validate};

#[derive(Parser)]
#[command(name = "kg", version, about = "Query, validate, reason over and learn from knowledge graphs")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct GraphInput {
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Graph file format; datasets are merged and property graphs reified.
    #[arg(long, default_value = "tsv-triples", value_parser = ["tsv-triples", "tsv-dataset", "tsv-pg"])]
    format: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Temporal,
    Fuzzy,
}

#[derive(Subcommand)]
enum Verb {
    /// Evaluate a query file (`bgp`, algebra or path expression).
    Query {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, default_value = "homomorphism")]
        mode: Mode,
        #[arg(long, default_value = "set")]
        semantics: Semantics,
    },
    /// Validate target nodes against a shapes schema; prints violations.
    Validate {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        schema: PathBuf,
        /// `node<TAB>shape` pairs; no file means an empty target.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Print the least model of the union of the graphs under a rule set.
    Materialize {
        #[arg(long, required = true)]
        graph: Vec<PathBuf>,
        /// Builtin rule set (`rdfs`, `owl-subset`) or a rule file.
        #[arg(long)]
        rules: String,
    },
    /// Decide whether g1 entails the ground graph g2.
    Entails {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long)]
        rules: String,
    },
    /// Materialize, then report violated negative conditions.
    Consistency {
        #[arg(long, required = true)]
        graph: Vec<PathBuf>,
        #[arg(long)]
        rules: String,
    },
    /// Quotient graph under a `node<TAB>part` partition.
    Quotient {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Smallest bisimilar quotient refining a partition (default: one part).
    Bisim {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// PageRank over the edges, ignoring labels.
    Pagerank {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 0.85)]
        d: f64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        /// Keep only edges with these labels.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Stop once the L1 change of an iteration is at most this.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Evaluate a `bgp` over an annotated graph (`s p o annotation`).
    AnnotateQuery {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value = "temporal")]
        domain: Domain,
        /// Projected variables, without `?`; defaults to all.
        #[arg(long, value_delimiter = ',')]
        project: Option<Vec<String>>,
        /// Keep rows annotated with the bottom value.
        #[arg(long)]
        keep_bottom: bool,
    },
    /// Train an embedding model and print it as TSV.
    EmbedTrain {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value = "transe")]
        model: ModelKind,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long, default_value_t = 2)]
        negatives: usize,
        /// TransE distance exponent (1 or 2).
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Write the model here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every edge of a file with a trained model.
    EmbedScore {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Rank objects for a subject and label.
    EmbedPredict {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        s: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Mine closed Horn rules with PCA confidence.
    Mine {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 2)]
        min_support: usize,
        #[arg(long, default_value_t = 0.75)]
        min_conf: f64,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        /// Only mine rules with these head labels.
        #[arg(long, value_delimiter = ',')]
        heads: Option<Vec<String>>,
    },
    /// Convert between graph formats.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = ["tsv-triples", "tsv-dataset", "tsv-pg"])]
        from: String,
        #[arg(long, value_parser = ["tsv-triples", "tsv-pg"])]
        to: String,
    },
}

enum Outcome {
    Yes,
    No,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path, format: &str) -> Result<Graph> {
    let format: Format = format.parse()?;
    let parsed = parse_graph(&read(path)?, format).with_context(|| format!("parsing {}", path.display()))?;
    Ok(match parsed {
        Parsed::Graph(g) => g,
        Parsed::Dataset(ds) => ds.merged(),
        Parsed::PropertyGraph(pg) => pg.to_del(),
    })
}

fn load_all(paths: &[PathBuf]) -> Result<Graph> {
    paths.iter().try_fold(Graph::empty(), |acc, p| Ok(acc.union(&load(p, "tsv-triples")?)))
}

impl GraphInput {
    fn load(&self) -> Result<Graph> {
        load(&self.graph, &self.format)
    }
}

fn ruleset(spec: &str) -> Result<RuleSet> {
    if let Ok(rs) = builtin_ruleset(spec) {
        return Ok(rs);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("`{spec}` is neither a builtin rule set (rdfs, owl-subset) nor a rule file");
    }
    RuleSet::parse(spec, &read(path)?).with_context(|| format!("parsing {spec}"))
}

fn annotate<D: AnnotationDomain>(d: &D, graph: &Path, query: &Path, project: Option<Vec<String>>, keep: bool) -> Result<String> {
    let g = AnnotatedGraph::parse_tsv(d, &read(graph)?).with_context(|| format!("parsing {}", graph.display()))?;
    let q = parse_bgp(&parse_one(&read(query)?)?)?;
    let vars = project.unwrap_or_else(|| q.vars());
    let rows = eval_annotated(&g, &q, &vars, d, !keep);
    Ok(annotated_rows_to_tsv(d, &vars, &rows))
}

fn run(verb: Verb, seed: u64, out: &mut String) -> Result<Outcome> {
    match verb {
        Verb::Query { input, query, mode, semantics } => {
            let g = input.load()?;
            let q = parse_query(&read(&query)?).with_context(|| format!("parsing {}", query.display()))?;
            let rows = eval_algebra(&g, &q, EvalOptions { mode, semantics })?;
            out.push_str(&to_tsv(&q.vars(), &rows));
        }
        Verb::Validate { input, schema, target } => {
            let g = input.load()?;
            let schema = parse_schema(&read(&schema)?)?;
            let target = match target {
                Some(t) => parse_targets(&read(&t)?)?,
                None => Vec::new(),
            };
            let report = validate(&g, &schema, &target)?;
            out.push_str(&report.to_tsv());
            if !report.valid {
                return Ok(Outcome::No);
            }
        }
        Verb::Materialize { graph, rules } => {
            out.push_str(&least_model(&load_all(&graph)?, &ruleset(&rules)?).to_tsv());
        }
        Verb::Entails { g1, g2, rules } => {
            let yes = entails_ground(&load(&g1, "tsv-triples")?, &load(&g2, "tsv-triples")?, &ruleset(&rules)?)?;
            out.push_str(if yes { "true\n" } else { "false\n" });
            if !yes {
                return Ok(Outcome::No);
            }
        }
        Verb::Consistency { graph, rules } => {
            let violations = check_consistency(&load_all(&graph)?, &ruleset(&rules)?);
            for v in &violations {
                out.push_str(&format!("{v}\n"));
            }
            if !violations.is_empty() {
                return Ok(Outcome::No);
            }
        }
        Verb::Quotient { input, partition } => {
            let part = Partition::parse_tsv(&read(&partition)?)?;
            out.push_str(&quotient(&input.load()?, &part)?.graph.to_tsv());
        }
        Verb::Bisim { input, partition } => {
            let g = input.load()?;
            let part = match partition {
                Some(p) => Partition::parse_tsv(&read(&p)?)?,
                None => Partition::whole(&g),
            };
            out.push_str(&bisim_min_quotient(&g, &part)?.graph.to_tsv());
        }
        Verb::Pagerank { input, d, iters, labels, epsilon } => {
            let cfg = PageRankConfig { damping: d, iters, epsilon, labels: labels.map(|l| l.into_iter().collect()) };
            out.push_str(&pagerank_with(&input.load()?, &cfg)?.to_tsv());
        }
        Verb::AnnotateQuery { graph, query, domain, project, keep_bottom } => {
            out.push_str(&match domain {
                Domain::Temporal => annotate(&temporal_domain(), &graph, &query, project, keep_bottom)?,
                Domain::Fuzzy => annotate(&fuzzy_domain(), &graph, &query, project, keep_bottom)?,
            });
        }
        Verb::EmbedTrain { input, model, dim, epochs, lr, margin, negatives, q, out: file } => {
            let cfg = TrainConfig { dim, epochs, learning_rate: lr, margin, negatives, seed, q, ..TrainConfig::default() };
            let text = train(&input.load()?, model, &cfg)?.to_tsv();
            match file {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => out.push_str(&text),
            }
        }
        Verb::EmbedScore { embeddings, edges } => {
            let m = EmbeddingModel::parse_tsv(&read(&embeddings)?)?;
            for e in load(&edges, "tsv-triples")?.edges() {
                out.push_str(&format!("{e}\t{}\n", m.score(e)? + 0.0));
            }
        }
        Verb::EmbedPredict { embeddings, s, p, k } => {
            let m = EmbeddingModel::parse_tsv(&read(&embeddings)?)?;
            for (node, score) in m.predict(&s, &p, k)? {
                // `+ 0.0` prints a zero distance as `0` rather than `-0`.
                out.push_str(&format!("{node}\t{}\n", score + 0.0));
            }
        }
        Verb::Mine { input, min_support, min_conf, max_len, heads } => {
            let cfg = MineConfig {
                head_labels: heads.map(|h| h.into_iter().collect::<BTreeSet<_>>()),
                ..MineConfig::new(min_support, min_conf, max_len)
            };
            out.push_str(&mined_to_tsv(&mine(&input.load()?, &cfg)?));
        }
        Verb::Convert { input, from, to } => {
            let g = load(&input, &from)?;
            out.push_str(&match to.as_str() {
                "tsv-pg" => PropertyGraph::from_del(&g).to_tsv(),
                _ => g.to_tsv(),
            });
        }
    }
    Ok(Outcome::Yes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("kg: {e}");
            return ExitCode::from(2);
        }
    };
    let mut out = String::new();
    let result = pool.install(|| run(cli.verb, cli.seed, &mut out));
    print!("{out}");
    match result {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("kg: {e:#}");
            ExitCode::from(2)
        }
    }
}
