use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubehom::cache::{enumerate_cached, CACHE_DIR_ENV};
use cubehom::cells::{build_filled_complex, cellular_homology, compare_covering, mv_span_check};
use cubehom::homology::{homology_of_with, AssembleOptions, HomologyOptions, HomologyResult, Ring};
use cubehom::subdivision::{
    prism, random_cube, subdivide_chain, subdivide_cube, verify_homotopy_identity,
};
use cubehom::{
    boundary, from_token, parse_graph, validate_cube, Chain, EnumOptions, Error, Graph,
    Restriction, SingularCube,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_DOMAIN: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_PROPERTY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "cubehom",
    version,
    about = "Discrete cubical homology of graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the parallel engine (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached cube bases; falls back to $CUBEHOM_CACHE_DIR.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Generator token, e.g. cycle:5, petersen, times:cycle:5:4.
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    gen: Option<String>,
    /// Edge-list file.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a graph as JSON.
    Gen {
        #[command(flatten)]
        g: GraphArgs,
    },
    /// Enumerate non-degenerate cubes.
    Enumerate {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "all")]
        restriction: String,
        /// Include the cube labels in the output.
        #[arg(long)]
        list: bool,
        /// Abort above this many cubes.
        #[arg(long)]
        max_cubes: Option<u64>,
    },
    /// Homology of the full or a restricted cube complex.
    Homology {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "q")]
        ring: String,
        #[arg(long, default_value = "all")]
        restriction: String,
        /// Over Q, trust ranks mod a large prime without exact confirmation.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        max_cubes: Option<u64>,
    },
    /// Subdivide a single cube.
    Subdivide {
        #[command(flatten)]
        g: GraphArgs,
        /// Labels in colex order, comma separated.
        #[arg(long)]
        cube: String,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
    },
    /// Check the chain homotopy identity and the chain-map property.
    VerifyHomotopy {
        #[command(flatten)]
        g: GraphArgs,
        /// A single cube; otherwise random cubes are sampled.
        #[arg(long)]
        cube: Option<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Subdivision parameters for the chain-map check.
        #[arg(long = "N", value_delimiter = ',', default_value = "2,3,4")]
        n: Vec<usize>,
    },
    /// Compare the covering subcomplex with the filled 2-complex.
    CompareCovering {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 2)]
        dmax: usize,
    },
    /// Cellular homology of the filled 2-complex.
    Cellular {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "z")]
        ring: String,
    },
    /// Check that no k-cube touches both poles of a times construction.
    MvCheck {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        k: usize,
    },
}

struct Outcome {
    doc: Value,
    exit: u8,
}

impl Outcome {
    fn ok(doc: impl Serialize) -> Self {
        Outcome {
            doc: serde_json::to_value(doc).expect("serializable"),
            exit: 0,
        }
    }
    fn check(doc: impl Serialize, passed: bool) -> Self {
        Outcome {
            doc: serde_json::to_value(doc).expect("serializable"),
            exit: if passed { 0 } else { EXIT_PROPERTY },
        }
    }
}

fn load_graph(a: &GraphArgs) -> cubehom::Result<(Graph, String)> {
    match (&a.gen, &a.graph) {
        (Some(tok), _) => Ok((from_token(tok)?, tok.clone())),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::domain(format!("{}: {e}", path.display())))?;
            Ok((parse_graph(&text)?, path.display().to_string()))
        }
        (None, None) => Err(Error::domain("one of --gen or --graph is required")),
    }
}

fn parse_restriction(tag: &str, g: &Graph) -> cubehom::Result<Restriction> {
    match tag {
        "all" | "full" => Ok(Restriction::All),
        "two_point" | "two-point" => Ok(Restriction::TwoPoint),
        "covering" | "subgraph_list" => Ok(Restriction::Subgraphs(g.covering_by_short_cycles())),
        _ => match tag.strip_prefix("subset:") {
            Some(list) => {
                let mut vs = parse_labels(list)?;
                vs.sort_unstable();
                vs.dedup();
                Ok(Restriction::Subset(vs))
            }
            None => Err(Error::domain(format!(
                "unknown restriction {tag:?} (all, two_point, covering, subset:<v,..>)"
            ))),
        },
    }
}

fn parse_labels(s: &str) -> cubehom::Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::domain(format!("bad vertex label {t:?}")))
        })
        .collect()
}

fn parse_cube(s: &str, g: &Graph) -> cubehom::Result<SingularCube> {
    let labels = parse_labels(s)?;
    let d = labels.len().trailing_zeros() as usize;
    if labels.len() != 1 << d {
        return Err(Error::InvalidCube(format!(
            "{} labels is not a power of two",
            labels.len()
        )));
    }
    validate_cube(&labels, d, g)
}

fn parse_ring(s: &str) -> cubehom::Result<Ring> {
    s.parse::<Ring>()
        .map_err(|_| Error::domain(format!("unknown ring {s:?} (z, q, gf:P)")))
}

fn enum_options(max: Option<u64>, d: usize) -> EnumOptions {
    max.map_or_else(
        || EnumOptions::with_memory_budget(cubehom::cube::DEFAULT_MEMORY_BUDGET, d),
        |m| EnumOptions { max_cubes: m },
    )
}

fn cache_dir(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

fn chain_doc(c: &Chain) -> Value {
    json!({ "dim": c.dim(), "terms": c.to_records() })
}

fn with_graph(mut r: HomologyResult, name: &str) -> HomologyResult {
    r.graph = name.to_string();
    r
}

#[derive(Serialize)]
struct SampleFailure {
    cube: Vec<u32>,
    residual_terms: usize,
    chain_map_failures: Vec<usize>,
    two_point_violation: bool,
}

fn verify_one(
    sigma: &SingularCube,
    g: &Graph,
    ns: &[usize],
) -> cubehom::Result<Option<SampleFailure>> {
    let residual = verify_homotopy_identity(sigma, g)?;
    let base = Chain::from_cube(sigma);
    let mut chain_map_failures = Vec::new();
    for &n in ns {
        let lhs = boundary(&subdivide_cube(sigma, n, g)?);
        let rhs = subdivide_chain(&boundary(&base), n, g)?;
        if lhs != rhs {
            chain_map_failures.push(n);
        }
    }
    let two_point_violation = sigma.image_size() <= 2 && {
        let tp = Restriction::TwoPoint;
        let mut pieces = vec![prism(sigma, g)?];
        pieces.extend(
            ns.iter()
                .map(|&n| subdivide_cube(sigma, n, g))
                .collect::<cubehom::Result<Vec<_>>>()?,
        );
        pieces.iter().any(|c| c.support().any(|l| !tp.admits(l)))
    };
    if residual.is_zero() && chain_map_failures.is_empty() && !two_point_violation {
        return Ok(None);
    }
    Ok(Some(SampleFailure {
        cube: sigma.labels().to_vec(),
        residual_terms: residual.len(),
        chain_map_failures,
        two_point_violation,
    }))
}

fn run(cli: &Cli) -> cubehom::Result<Outcome> {
    let cache = cache_dir(&cli.cache_dir);
    match &cli.command {
        Command::Gen { g } => {
            let (graph, name) = load_graph(g)?;
            Ok(Outcome::ok(json!({
                "graph": name,
                "vertices": graph.vertex_count(),
                "edges": graph.edges(),
                "poles": graph.poles(),
                "hash": format!("{:016x}", graph.content_hash()),
            })))
        }
        Command::Enumerate {
            g,
            dim,
            restriction,
            list,
            max_cubes,
        } => {
            let (graph, name) = load_graph(g)?;
            let r = parse_restriction(restriction, &graph)?;
            let basis = enumerate_cached(
                &graph,
                *dim,
                &r,
                enum_options(*max_cubes, *dim),
                cache.as_deref(),
            )?;
            let mut doc =
                json!({ "graph": name, "dim": dim, "restriction": r.tag(), "count": basis.len() });
            if *list {
                doc["cubes"] = json!(basis.iter().collect::<Vec<_>>());
            }
            Ok(Outcome::ok(doc))
        }
        Command::Homology {
            g,
            dim,
            ring,
            restriction,
            fast,
            max_cubes,
        } => {
            let (graph, name) = load_graph(g)?;
            let r = parse_restriction(restriction, &graph)?;
            let opts = AssembleOptions {
                enumeration: Some(enum_options(*max_cubes, *dim)),
                cache_dir: cache,
            };
            let res = homology_of_with(
                &graph,
                *dim,
                &r,
                parse_ring(ring)?,
                &opts,
                HomologyOptions {
                    confirm_exact: !fast,
                },
            )?;
            Ok(Outcome::ok(with_graph(res, &name)))
        }
        Command::Subdivide { g, cube, n } => {
            let (graph, name) = load_graph(g)?;
            let sigma = parse_cube(cube, &graph)?;
            let c = subdivide_cube(&sigma, *n, &graph)?;
            Ok(Outcome::ok(
                json!({ "graph": name, "cube": sigma.labels(), "N": n, "chain": chain_doc(&c) }),
            ))
        }
        Command::VerifyHomotopy {
            g,
            cube,
            dim,
            samples,
            seed,
            n,
        } => {
            let (graph, name) = load_graph(g)?;
            let cubes = match cube {
                Some(s) => vec![parse_cube(s, &graph)?],
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    (0..*samples)
                        .filter_map(|_| random_cube(&graph, *dim, &mut rng))
                        .collect()
                }
            };
            let mut failures = Vec::new();
            for sigma in &cubes {
                if let Some(f) = verify_one(sigma, &graph, n)? {
                    failures.push(f);
                }
            }
            let passed = failures.is_empty();
            let doc = json!({
                "graph": name,
                "dim": cubes.first().map_or(*dim, |c| c.dim()),
                "seed": seed,
                "samples": cubes.len(),
                "N": n,
                "residual_failures": failures.iter().filter(|f| f.residual_terms > 0).count(),
                "chain_map_failures": failures.iter().filter(|f| !f.chain_map_failures.is_empty()).count(),
                "two_point_failures": failures.iter().filter(|f| f.two_point_violation).count(),
                "failures": failures,
                "passed": passed,
            });
            Ok(Outcome::check(doc, passed))
        }
        Command::CompareCovering { g, dmax } => {
            let (graph, name) = load_graph(g)?;
            let report = compare_covering(&graph, *dmax)?;
            let passed = report.all_match;
            Ok(Outcome::check(
                json!({ "graph": name, "dmax": dmax, "rows": report.rows, "all_match": passed }),
                passed,
            ))
        }
        Command::Cellular { g, dim, ring } => {
            let (graph, name) = load_graph(g)?;
            let x = build_filled_complex(&graph);
            Ok(Outcome::ok(with_graph(
                cellular_homology(&x, *dim, parse_ring(ring)?)?,
                &name,
            )))
        }
        Command::MvCheck { g, k } => {
            let (graph, name) = load_graph(g)?;
            let holds = mv_span_check(&graph, *k)?;
            Ok(Outcome::check(
                json!({ "graph": name, "k": k, "holds": holds }),
                holds,
            ))
        }
    }
}

fn pretty(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        pretty(val, indent + 2, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for item in items {
                            out.push_str(&format!("{pad}  -\n"));
                            pretty(item, indent + 4, out);
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {val}\n")),
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Resource { .. } => EXIT_RESOURCE,
        _ => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let doc = json!({ "error": e.to_string() });
            Outcome {
                doc,
                exit: exit_code_for(&e),
            }
        }
    };
    let text = if cli.pretty {
        let mut s = String::new();
        pretty(&outcome.doc, 0, &mut s);
        s
    } else {
        let mut s = serde_json::to_string(&outcome.doc).expect("serializable");
        s.push('\n');
        s
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(EXIT_DOMAIN);
    }
    ExitCode::from(outcome.exit)
}
