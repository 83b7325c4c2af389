//! Command-line front end: every verification produces a JSON report of checks.
//!
//! Exit codes: `0` when every check passes, `1` when any check fails or
//! errors, `2` on malformed input or an exceeded size cap.

pub mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyonstack_core::double::{anyon_catalog, fusion_factorization_check, fusion_rules, stack_count_check};
use anyonstack_core::entropy::{
    annulus_around_block, axiom_a0_check, block_regions, tee_fit, DenseState, EntropySource, Region, RegionPoint,
    DENSE_REGION_CAP,
};
use anyonstack_core::group::{build_group, FiniteGroup, GroupSpec, DEFAULT_GROUP_CAP};
use anyonstack_core::lattice::{Boundary, BoundaryConvention, LatticeSpec};
use anyonstack_core::operator::DEFAULT_MAX_DIM;
use anyonstack_core::qd::{
    commutation_check, frustration_check, ground_state, ground_state_stack_check, stack_operator_check,
    PAIR_CHECK_CAP,
};
use anyonstack_core::report::{all_passed, max_error, Check};
use anyonstack_core::ribbon::{ribbon_factorization_check, ribbon_locality_check, Ribbon, DEFAULT_MAX_RIBBON_LENGTH, DEFAULT_TUPLE_BUDGET};
use anyonstack_core::set_model::{set_check, Coupling, SetLattice};
use anyonstack_core::stabilizer::toric_code;
use anyonstack_core::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::suites::{run_suite, Suite};

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "anyonstack", version, about = "Finite-size verification reports for stacked anyon models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for character-table randomization and sampled checks.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest Hilbert-space dimension for dense states.
    #[arg(long, global = true, env = "ANYONSTACK_MAX_DIM")]
    pub max_dim: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write entropy-versus-boundary data points as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anyon catalog of the Drinfeld double of a group.
    Anyons {
        /// Group: a name (Z4, S3, D4, Q8, Z2xS3, ...) or JSON, inline or a file path.
        #[arg(long)]
        group: String,
    },
    /// Sector counts of two groups and their direct product, with the label bijection.
    StackCheck {
        /// Group: a name (Z4, S3, D4, Q8, Z2xS3, ...) or JSON, inline or a file path.
        #[arg(long)]
        group: String,
        /// Second group, in the same forms as --group.
        #[arg(long)]
        group2: String,
    },
    /// Fusion rules of a group, or their factorization for a product.
    Fusion {
        /// Group: a name (Z4, S3, D4, Q8, Z2xS3, ...) or JSON, inline or a file path.
        #[arg(long)]
        group: String,
        /// Second group, in the same forms as --group.
        #[arg(long)]
        group2: Option<String>,
    },
    /// Quantum double model checks on a lattice.
    LatticeCheck {
        /// Group: a name (Z4, S3, D4, Q8, Z2xS3, ...) or JSON, inline or a file path.
        #[arg(long)]
        group: String,
        /// Second group, in the same forms as --group.
        #[arg(long)]
        group2: Option<String>,
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Ribbon as JSON (inline or a file path).
        #[arg(long)]
        ribbon: Option<String>,
        /// Random local observables for expectation factorization.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Entropies of toric code regions.
    Entropy {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Regions as a JSON list of `{label, edges}` (inline or a file path).
        #[arg(long)]
        regions: Option<String>,
        /// Check the annulus identity on the annulus around the face at the origin.
        #[arg(long)]
        axiom_a0: bool,
        /// Fit the area law with a topological correction.
        #[arg(long)]
        fit_tee: bool,
    },
    /// Symmetry-enriched toric code checks.
    SetCheck {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Set every phase exponent to zero.
        #[arg(long)]
        decoupled: bool,
    },
    /// A fixed verification suite.
    All {
        #[arg(long, value_enum, default_value_t = Suite::Desk)]
        suite: Suite,
    },
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, default_value_t = 2)]
    pub lx: usize,
    #[arg(long, default_value_t = 2)]
    pub ly: usize,
    /// torus or open (default depends on the command).
    #[arg(long)]
    pub boundary: Option<Boundary>,
}

impl LatticeArgs {
    fn build(&self, default: Boundary) -> Result<LatticeSpec> {
        LatticeSpec::new(self.lx, self.ly, self.boundary.unwrap_or(default))
    }
}

struct Outcome {
    checks: Vec<Check>,
    payload: Map<String, Value>,
    points: Vec<(BoundaryConvention, RegionPoint)>,
}

impl Outcome {
    fn new(checks: Vec<Check>) -> Self {
        Outcome {
            checks,
            payload: Map::new(),
            points: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        let v = serde_json::to_value(value).map_err(|e| Error::Numerical(e.to_string()))?;
        self.payload.insert(key.into(), v);
        Ok(self)
    }
}

/// Parse `argv` (including the program name), run, and write the report.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start {threads} worker threads: {e}");
            return 2;
        }
    };
    let start = Instant::now();
    let outcome = pool.install(|| execute(&cli));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e @ (Error::Input(_) | Error::CapExceeded { .. })) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
        Err(e) => Outcome::new(vec![Check::error("run", &e).since(start)]),
    };
    let mut report = Map::new();
    report.insert("version".into(), json!(REPORT_VERSION));
    report.insert("command".into(), json!(echo(&argv)));
    report.insert("seed".into(), json!(cli.seed));
    report.insert("passed".into(), json!(all_passed(&outcome.checks)));
    report.insert("checks".into(), json!(outcome.checks));
    for (k, v) in outcome.payload {
        report.insert(k, v);
    }
    let text = match serde_json::to_string_pretty(&Value::Object(report)) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, format!("{text}\n")),
        None => writeln!(stdout, "{text}"),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return 2;
    }
    if let Some(path) = &cli.csv {
        if let Err(e) = write_csv(path, &outcome.points) {
            let _ = writeln!(stderr, "error: cannot write CSV: {e}");
            return 2;
        }
    }
    if all_passed(&outcome.checks) {
        0
    } else {
        1
    }
}

/// The command line without options that cannot change the result.
fn echo(argv: &[String]) -> String {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        let name = a.split('=').next().unwrap_or(a);
        if matches!(name, "--threads" | "--out" | "--csv") {
            skip = !a.contains('=');
            continue;
        }
        out.push(a.as_str());
    }
    out.join(" ")
}

#[derive(Serialize)]
struct CsvRow<'a> {
    convention: BoundaryConvention,
    region: &'a str,
    entropy: f64,
    boundary: usize,
    components: usize,
}

fn write_csv(path: &Path, points: &[(BoundaryConvention, RegionPoint)]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for (convention, p) in points {
        w.serialize(CsvRow {
            convention: *convention,
            region: &p.label,
            entropy: p.entropy,
            boundary: p.boundary,
            components: p.components,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// JSON given inline or as a path to a file.
fn json_argument<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {what} file {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed {what}: {e}")))
}

/// A group name such as `S3` or `Z2xZ3`, or a JSON group spec inline or in a file.
pub fn parse_group(arg: &str) -> Result<FiniteGroup> {
    let trimmed = arg.trim();
    let spec = if trimmed.starts_with('{') || Path::new(trimmed).is_file() {
        json_argument::<GroupSpec>(trimmed, "group spec")?
    } else {
        GroupSpec::named(trimmed)
    };
    let g = build_group(&spec, DEFAULT_GROUP_CAP)?;
    Ok(match spec {
        GroupSpec::Name { name } => g.with_name(name),
        _ => g,
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let seed = cli.seed;
    let max_dim = cli.max_dim.unwrap_or(DEFAULT_MAX_DIM);
    match &cli.command {
        Command::Anyons { group } => anyons(&parse_group(group)?, seed),
        Command::StackCheck { group, group2 } => {
            let (checks, report) = stack_count_check(&parse_group(group)?, &parse_group(group2)?, DEFAULT_GROUP_CAP, seed)?;
            Outcome::new(checks).with("stack", report)
        }
        Command::Fusion { group, group2 } => {
            let g = parse_group(group)?;
            match group2 {
                Some(h) => Ok(Outcome::new(fusion_factorization_check(&g, &parse_group(h)?, DEFAULT_GROUP_CAP, seed)?)),
                None => fusion(&g, seed),
            }
        }
        Command::LatticeCheck {
            group,
            group2,
            lattice,
            ribbon,
            samples,
        } => {
            let g = parse_group(group)?;
            let h = group2.as_deref().map(parse_group).transpose()?;
            let ribbon = ribbon.as_deref().map(|r| json_argument::<Ribbon>(r, "ribbon")).transpose()?;
            lattice_check(&g, h.as_ref(), &lattice.build(Boundary::Torus)?, ribbon.as_ref(), *samples, seed, max_dim)
        }
        Command::Entropy {
            lattice,
            regions,
            axiom_a0,
            fit_tee,
        } => {
            let regions = regions.as_deref().map(|r| json_argument::<Vec<Region>>(r, "regions")).transpose()?;
            entropy(&lattice.build(Boundary::Torus)?, regions, *axiom_a0, *fit_tee, max_dim)
        }
        Command::SetCheck { lattice, decoupled } => {
            let coupling = if *decoupled { Coupling::Decoupled } else { Coupling::Enriched };
            let lat = lattice.build(Boundary::Open)?;
            let (checks, report) = set_check(&SetLattice::new(lat)?, coupling, "cli")?;
            Outcome::new(checks).with("set", report)
        }
        Command::All { suite } => {
            let out = run_suite(*suite, seed, max_dim)?;
            let mut o = Outcome::new(out.checks).with("suite", suite.name())?.with("results", out.payload)?;
            o.points = out.points;
            Ok(o)
        }
    }
}

/// Number of orbits of commuting pairs under simultaneous conjugation.
fn commuting_pair_orbits(g: &FiniteGroup, pairs: &[(usize, usize)]) -> usize {
    let n = g.order();
    let mut seen = vec![false; n * n];
    let mut orbits = 0;
    for &(a, b) in pairs {
        if seen[a * n + b] {
            continue;
        }
        orbits += 1;
        for x in g.elements() {
            let xi = g.inv(x);
            seen[g.mul(g.mul(x, a), xi) * n + g.mul(g.mul(x, b), xi)] = true;
        }
    }
    orbits
}

fn anyons(g: &FiniteGroup, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let cat = anyon_catalog(g, seed)?;
    let n = g.order();
    let orbits = commuting_pair_orbits(g, &cat.commuting_pairs());
    let mut checks = vec![
        Check::count(format!("sector_count_vs_commuting_pairs[{}]", g.name()), cat.len(), orbits).since(start),
        Check::count(format!("total_dimension[{}]", g.name()), cat.total_dimension_squared(), n * n).since(start),
    ];
    let mut errs = Vec::new();
    for c in 0..cat.classes().len() {
        let t = &cat.centralizer(c).table;
        errs.push(t.row_orthogonality_error().max(t.column_orthogonality_error()));
    }
    checks.push(Check::within(format!("centralizer_tables[{}]", g.name()), max_error(errs), 1e-8).since(start));
    let anyons: Vec<Value> = cat
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let class = &cat.classes()[l.class_index];
            json!({
                "label": i,
                "class_representative": class.representative,
                "class_size": class.size(),
                "centralizer_order": cat.centralizer(l.class_index).group.order(),
                "irrep": l.irrep_index,
                "irrep_degree": cat.irrep_degree(i),
                "qdim": cat.qdims()[i],
            })
        })
        .collect();
    Outcome::new(checks)
        .with("group", g.name())?
        .with("order", n)?
        .with("sector_count", cat.len())?
        .with("total_dimension_squared", cat.total_dimension_squared())?
        .with("anyons", anyons)
}

fn fusion(g: &FiniteGroup, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let cat = anyon_catalog(g, seed)?;
    let tensor = fusion_rules(&cat)?;
    let violation = tensor.violation(cat.qdims());
    let mut check = Check::holds(format!("fusion_invariants[{}]", g.name()), violation.is_none()).since(start);
    if let Some(v) = violation {
        check = check.with_detail(v);
    }
    let entries: Vec<[usize; 4]> = tensor.entries().into_iter().map(|(i, j, k, n)| [i, j, k, n as usize]).collect();
    Outcome::new(vec![check])
        .with("group", g.name())?
        .with("qdims", cat.qdims())?
        .with("conjugates", tensor.conjugates())?
        .with("entries", entries)
}

fn lattice_payload(lat: &LatticeSpec) -> Value {
    json!({
        "boundary": match lat.boundary() { Boundary::Torus => "torus", Boundary::Open => "open" },
        "lx": lat.lx(),
        "ly": lat.ly(),
        "vertices": lat.num_vertices(),
        "edges": lat.num_edges(),
        "faces": lat.num_faces(),
    })
}

fn lattice_check(
    g: &FiniteGroup,
    h: Option<&FiniteGroup>,
    lat: &LatticeSpec,
    ribbon: Option<&Ribbon>,
    samples: usize,
    seed: u64,
    max_dim: usize,
) -> Result<Outcome> {
    let tag = g.name().to_string();
    let mut checks = commutation_check(lat, g, PAIR_CHECK_CAP, &tag)?;
    let psi = ground_state(lat, g, max_dim)?;
    checks.extend(frustration_check(lat, g, &psi, &tag)?);
    if let Some(h) = h {
        checks.extend(stack_operator_check(g, h, lat, DEFAULT_GROUP_CAP)?);
        checks.extend(ground_state_stack_check(g, h, lat, max_dim, samples, seed)?);
    }
    if let Some(r) = ribbon {
        let valid = r.validate(lat, DEFAULT_MAX_RIBBON_LENGTH)?;
        checks.extend(ribbon_locality_check(lat, g, &valid, PAIR_CHECK_CAP, &tag)?);
        if let Some(h) = h {
            checks.extend(ribbon_factorization_check(g, h, lat, r, DEFAULT_TUPLE_BUDGET, seed)?);
        }
    }
    Outcome::new(checks).with("lattice", lattice_payload(lat))?.with("dim", psi.space.dim())
}

fn entropy(lat: &LatticeSpec, regions: Option<Vec<Region>>, axiom_a0: bool, fit_tee: bool, max_dim: usize) -> Result<Outcome> {
    let start = Instant::now();
    let stab = toric_code(lat)?;
    let regions = match regions {
        Some(r) => r.into_iter().map(|r| Region::new(r.label, r.edges)).collect(),
        None => block_regions(lat, &[(1, 1), (1, 2), (2, 2)])?,
    };
    if let Some(bad) = regions.iter().find(|r| r.edges.iter().any(|&e| e >= lat.num_edges())) {
        return Err(Error::Input(format!("region {:?} has edges outside the lattice", bad.label)));
    }
    let dense_state = if (lat.num_edges() as u32) < usize::BITS && (1usize << lat.num_edges()) <= max_dim {
        Some(ground_state(lat, &suites::named("Z2")?, max_dim)?)
    } else {
        None
    };
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut agreement = Vec::new();
    for r in &regions {
        let s = EntropySource::entropy(&stab, &r.edges)?;
        let dense = match &dense_state {
            Some(psi) => {
                let d = DenseState {
                    state: psi,
                    cap: DENSE_REGION_CAP,
                }
                .entropy(&r.edges)?;
                agreement.push((d - s).abs());
                Some(d)
            }
            None => None,
        };
        rows.push(json!({
            "label": r.label,
            "edges": r.edges,
            "entropy": s,
            "entropy_bits": s / std::f64::consts::LN_2,
            "dense_entropy": dense,
            "boundary_cut_vertices": lat.boundary_size(&r.edges, BoundaryConvention::CutVertices),
            "components": lat.boundary_components(&r.edges),
        }));
    }
    if !agreement.is_empty() {
        checks.push(Check::within("dense_stabilizer_agreement", max_error(agreement), 1e-9).since(start));
    }
    let mut out_points = Vec::new();
    let mut fits = Vec::new();
    if fit_tee {
        for conv in [BoundaryConvention::CutVertices, BoundaryConvention::HalfEdges, BoundaryConvention::DanglingEdges] {
            let fit = tee_fit(&stab, lat, &regions, conv)?;
            out_points.extend(fit.points.iter().cloned().map(|p| (conv, p)));
            fits.push(fit);
        }
        checks.push(
            Check::within("tee_gamma", (fits[0].gamma - std::f64::consts::LN_2).abs(), 1e-6)
                .with_detail(format!("gamma = {} nats", fits[0].gamma))
                .since(start),
        );
        checks.push(Check::within("tee_residual", fits[0].residual, 1e-8).since(start));
    }
    if axiom_a0 {
        let (b, c) = annulus_around_block(lat, 0, 0, 1, 1)?;
        checks.push(axiom_a0_check(&stab, lat, &b, &c, "origin")?);
    }
    let mut o = Outcome::new(checks)
        .with("lattice", lattice_payload(lat))?
        .with("regions", rows)?
        .with("fits", fits)?;
    o.points = out_points;
    Ok(o)
}
