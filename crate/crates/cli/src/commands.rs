use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use clines_core::classes::{
    bruen_drudge, cp_gmp, decompose, derive_sequence, meet_counts_incidence, verify_cl, ClReport,
    ClassError, DerivationPair, LineClass, OrbitDecomposition,
};
use clines_core::geometry::DEFAULT_MAX_Q;
use clines_core::klein::{tight_set_check, KleinTable, Rational, TightSetReport};
use clines_core::spectra::{classify, plane_spectrum, star_spectrum, ClassLabel};
use clines_core::symmetry::{close, gamma_generators, is_invariant, orbits, Domain};
use clines_core::{Field, Geometry, IdSet, PointId};

use crate::document::{DocumentError, LineClassDocument};
use crate::search::search;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONSTRUCTION: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Document(#[from] DocumentError),
    #[error("construction failed: {0}")]
    Construction(ClassError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Construction(_) => EXIT_CONSTRUCTION,
            _ => EXIT_USAGE,
        }
    }
}

impl From<ClassError> for CliError {
    fn from(e: ClassError) -> CliError {
        match e {
            ClassError::InvalidPair(_) | ClassError::InvalidSequence(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Construction(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "clines",
    version,
    about = "Cameron-Liebler line classes of PG(3,q) with parameter (q²+1)/2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a line class and write it as a JSON document.
    Construct(ConstructArgs),
    /// Check a document by line-meet counts and as a tight set; exit 1 on failure.
    Verify(VerifyArgs),
    /// Print plane and star character spectra and the family label.
    Spectra(SpectraArgs),
    /// Explore derivation sequences and list the distinct spectrum pairs reached.
    Search(SearchArgs),
    /// Check invariance under Γ and report its order and orbits on π.
    Symmetry(InputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Bd,
    Cpgmp,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StartArg {
    Bd,
    Cpgmp,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field order, an odd prime power.
    #[arg(long)]
    pub q: u32,
    /// Code of the non-square ω (default: smallest non-square).
    #[arg(long)]
    pub omega: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_MAX_Q)]
    pub max_q: u32,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Class the derivation starts from.
    #[arg(long, value_enum, default_value = "bd")]
    pub base: StartArg,
    /// Derivation pair `λ1,λ2` as element codes; repeat for a sequence.
    /// Without any, the derived family uses the smallest square and non-square.
    #[arg(long = "pair", value_name = "L1,L2")]
    pub pairs: Vec<String>,
    /// Embed verification and spectra in the document.
    #[arg(long)]
    pub report: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub max_q: Option<u32>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Maximum number of derivation steps (default and maximum (q−1)/2).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value = "bd")]
    pub start: StartArg,
    /// Maximum number of derivation steps attempted in total.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Construct(a) => construct(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Spectra(a) => spectra(a, out),
        Command::Search(a) => search_cmd(a, out),
        Command::Symmetry(a) => symmetry(a, out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn build_geometry(args: &FieldArgs) -> Result<Geometry, CliError> {
    let field = Field::with_order(args.q).map_err(|e| CliError::Usage(e.to_string()))?;
    let omega = match args.omega {
        Some(code) => field
            .element(code)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        None => field.canonical_nonsquare(),
    };
    Geometry::build_with(field, omega, args.max_q).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_pair(g: &Geometry, text: &str) -> Result<DerivationPair, CliError> {
    let bad = || CliError::Usage(format!("pair {text:?} is not of the form L1,L2"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    Ok(DerivationPair::from_codes(g.field(), a, b)?)
}

fn start_class(dec: &OrbitDecomposition, start: StartArg) -> LineClass {
    match start {
        StartArg::Bd => bruen_drudge(dec),
        StartArg::Cpgmp => cp_gmp(dec),
    }
}

pub fn construct_class(g: &Geometry, a: &ConstructArgs) -> Result<LineClass, CliError> {
    let dec = decompose(g)?;
    match a.family {
        FamilyArg::Bd | FamilyArg::Cpgmp if !a.pairs.is_empty() => Err(CliError::Usage(
            "--pair is only used with --family derived".into(),
        )),
        FamilyArg::Bd => Ok(bruen_drudge(&dec)),
        FamilyArg::Cpgmp => Ok(cp_gmp(&dec)),
        FamilyArg::Derived => {
            let mut pairs = a
                .pairs
                .iter()
                .map(|p| parse_pair(g, p))
                .collect::<Result<Vec<_>, _>>()?;
            if pairs.is_empty() {
                pairs.push(DerivationPair::canonical(g.field()));
            }
            Ok(derive_sequence(
                g,
                &dec,
                &start_class(&dec, a.base),
                &pairs,
            )?)
        }
    }
}

fn construct(a: &ConstructArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = build_geometry(&a.field)?;
    let class = construct_class(&g, a)?;
    let mut doc = LineClassDocument::from_class(&g, &class);
    if a.report {
        let report = VerifyReport::run(&g, &class);
        let spectra = SpectraReport::new(&g, &class);
        doc.reports = Some(
            serde_json::json!({ "verification": report.without_runtime(), "spectra": spectra }),
        );
    }
    emit(&doc.to_json(), a.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn load(input: &InputArgs) -> Result<(Geometry, LineClass), CliError> {
    let text = fs::read_to_string(&input.input).map_err(io_err(&input.input))?;
    let doc = LineClassDocument::from_json(&text)?;
    let g = doc.geometry(input.max_q)?;
    let class = doc.to_class(&g)?;
    Ok((g, class))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub q: u32,
    pub lines: usize,
    pub declared_parameter: u32,
    /// `|L| / (q²+q+1)` when that is an integer.
    pub inferred_parameter: Option<u32>,
    pub incidence: Option<ClReport>,
    pub tight_set: Option<TightSetReport>,
    /// Both checkers computed the same meet count for every line.
    pub checkers_agree: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u128>,
}

impl VerifyReport {
    pub fn run(g: &Geometry, class: &LineClass) -> VerifyReport {
        let start = Instant::now();
        let incidence = verify_cl(g, class).ok();
        let inferred_parameter = incidence.as_ref().map(|r| r.parameter);
        let (tight_set, checkers_agree) = if class.is_empty() {
            (None, incidence.is_some())
        } else {
            let table = KleinTable::new(g);
            let q = g.q() as i64;
            let i = Rational::new(class.len() as i64, q * q + q + 1);
            let tight = tight_set_check(g, &table, &class.lines, i).ok();
            let agree = table.perp_counts(&class.lines) == meet_counts_incidence(g, &class.lines);
            (tight, agree)
        };
        let pass = incidence.as_ref().is_some_and(|r| r.pass)
            && tight_set.as_ref().is_none_or(|t| t.pass)
            && checkers_agree
            && inferred_parameter == Some(class.parameter);
        VerifyReport {
            q: g.q(),
            lines: class.len(),
            declared_parameter: class.parameter,
            inferred_parameter,
            incidence,
            tight_set,
            checkers_agree,
            pass,
            runtime_ms: Some(start.elapsed().as_millis()),
        }
    }

    fn without_runtime(mut self) -> VerifyReport {
        self.runtime_ms = None;
        self
    }
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let (g, class) = load(&a.input)?;
    let report = VerifyReport::run(&g, &class);
    emit(&to_json(&report), a.output.as_deref(), out)?;
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectraReport {
    pub planes: String,
    pub stars: String,
    pub classification: ClassLabel,
}

impl SpectraReport {
    pub fn new(g: &Geometry, class: &LineClass) -> SpectraReport {
        let planes = plane_spectrum(g, &class.lines);
        let stars = star_spectrum(g, &class.lines);
        SpectraReport {
            classification: classify(g.q(), &planes, &stars),
            planes: planes.to_text(),
            stars: stars.to_text(),
        }
    }
}

fn spectra(a: &SpectraArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let (g, class) = load(&a.input)?;
    let r = SpectraReport::new(&g, &class);
    let text = if a.json {
        to_json(&r)
    } else {
        format!(
            "planes: {}\nstars: {}\nclass: {}\n",
            r.planes, r.stars, r.classification
        )
    };
    emit(&text, None, out)?;
    Ok(EXIT_OK)
}

fn search_cmd(a: &SearchArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = build_geometry(&a.field)?;
    let max = (g.q() as usize - 1) / 2;
    let depth = a.depth.unwrap_or(max);
    if depth > max {
        return Err(CliError::Usage(format!(
            "depth {depth} exceeds (q−1)/2 = {max}"
        )));
    }
    let dec = decompose(&g)?;
    let result = search(&g, &dec, &start_class(&dec, a.start), depth, a.budget)?;
    emit(&to_json(&result), a.output.as_deref(), out)?;
    Ok(if result.partial {
        EXIT_BUDGET
    } else if !result.all_verified {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub q: u32,
    pub order: usize,
    pub invariant: bool,
    pub pi_orbit_sizes: Vec<usize>,
    /// Orbit size to number of orbits, over lines not in π.
    pub line_orbits_off_pi: BTreeMap<usize, usize>,
}

impl SymmetryReport {
    pub fn run(g: &Geometry, lines: &IdSet) -> Result<SymmetryReport, CliError> {
        let f = g.field();
        let q = g.q() as usize;
        let gens = gamma_generators(f, g.omega());
        let group = close(f, &gens, 2 * q * q * (q + 1))
            .map_err(|e| CliError::Construction(ClassError::StructureViolation(e.to_string())))?;
        let orbit_err = |e: clines_core::symmetry::SymmetryError| {
            CliError::Construction(ClassError::StructureViolation(e.to_string()))
        };
        let pi = IdSet::from_ids(
            g.num_points(),
            (0..g.num_points() as PointId).filter(|&p| g.in_pi(p)),
        );
        let mut pi_orbit_sizes: Vec<usize> = orbits(g, &gens, Domain::Points, &pi)
            .map_err(orbit_err)?
            .iter()
            .map(Vec::len)
            .collect();
        pi_orbit_sizes.sort();
        let off_pi = IdSet::from_ids(
            g.num_lines(),
            (0..g.num_lines() as u32).filter(|&l| !g.line_in_pi(l)),
        );
        let mut line_orbits_off_pi = BTreeMap::new();
        for o in orbits(g, &gens, Domain::Lines, &off_pi).map_err(orbit_err)? {
            *line_orbits_off_pi.entry(o.len()).or_insert(0) += 1;
        }
        Ok(SymmetryReport {
            q: g.q(),
            order: group.order(),
            invariant: is_invariant(g, &gens, lines),
            pi_orbit_sizes,
            line_orbits_off_pi,
        })
    }
}

fn symmetry(a: &InputArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let (g, class) = load(a)?;
    let report = SymmetryReport::run(&g, &class.lines)?;
    emit(&to_json(&report), None, out)?;
    Ok(if report.invariant {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;
    use tempfile::TempDir;

    struct Outcome {
        code: u8,
        stdout: Vec<u8>,
    }

    fn clines(args: &[&str]) -> Outcome {
        let cli = match Cli::try_parse_from(std::iter::once("clines").chain(args.iter().copied())) {
            Ok(cli) => cli,
            Err(e) => {
                return Outcome {
                    code: e.exit_code() as u8,
                    stdout: Vec::new(),
                }
            }
        };
        let mut stdout = Vec::new();
        let code = run(&cli, &mut stdout).unwrap_or_else(|e| e.exit_code());
        Outcome { code, stdout }
    }

    fn construct(dir: &Path, name: &str, args: &[&str]) -> String {
        let path = dir.join(name).to_str().unwrap().to_string();
        let mut all = vec!["construct"];
        all.extend_from_slice(args);
        all.extend_from_slice(&["-o", &path]);
        assert_eq!(clines(&all).code, EXIT_OK);
        path
    }

    fn json(bytes: &[u8]) -> Value {
        serde_json::from_slice(bytes).expect("valid JSON")
    }

    fn read(path: &str) -> Value {
        json(&fs::read(path).unwrap())
    }

    fn write(path: &str, doc: &Value) {
        fs::write(path, serde_json::to_string(doc).unwrap()).unwrap();
    }

    #[test]
    fn construct_bd_q7_has_1425_lines_and_verifies() {
        let dir = TempDir::new().unwrap();
        let path = construct(dir.path(), "bd.json", &["--q", "7", "--family", "bd"]);
        let doc = read(&path);
        assert_eq!(doc["class"]["lines"].as_array().unwrap().len(), 1425);
        assert_eq!(doc["class"]["parameter"], 25);

        let o = clines(&["verify", &path]);
        assert_eq!(o.code, EXIT_OK);
        let r = json(&o.stdout);
        assert_eq!(r["pass"], true);
        assert_eq!(r["checkers_agree"], true);
        assert_eq!(r["inferred_parameter"], 25);
        assert!(r["runtime_ms"].is_u64());
    }

    #[test]
    fn construct_is_byte_deterministic() {
        let dir = TempDir::new().unwrap();
        let args = ["--q", "5", "--family", "derived", "--report"];
        let a = construct(dir.path(), "a.json", &args);
        let b = construct(dir.path(), "b.json", &args);
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn unsupported_q_and_bad_pairs_are_usage_errors() {
        for q in ["8", "6", "1", "17", "x"] {
            assert_eq!(
                clines(&["construct", "--q", q, "--family", "bd"]).code,
                EXIT_USAGE,
                "q = {q}"
            );
        }
        let derived = ["construct", "--q", "7", "--family", "derived"];
        for pairs in [
            &["--pair", "3,1"][..],
            &["--pair", "1"],
            &["--pair", "1,3", "--pair", "1,5"],
        ] {
            let args: Vec<&str> = derived.iter().chain(pairs).copied().collect();
            assert_eq!(clines(&args).code, EXIT_USAGE, "{pairs:?}");
        }
        let o = clines(&["construct", "--q", "7", "--family", "bd", "--pair", "1,3"]);
        assert_eq!(o.code, EXIT_USAGE);
    }

    #[test]
    fn other_nonsquare_omega_still_gives_a_class() {
        let dir = TempDir::new().unwrap();
        let path = construct(
            dir.path(),
            "w.json",
            &["--q", "7", "--omega", "5", "--family", "derived"],
        );
        assert_eq!(read(&path)["field"]["omega"], 5);
        assert_eq!(clines(&["verify", &path]).code, EXIT_OK);
        let o = clines(&["construct", "--q", "7", "--omega", "2", "--family", "bd"]);
        assert_eq!(o.code, EXIT_USAGE);
    }

    #[test]
    fn verify_rejects_resized_and_malformed_documents() {
        let dir = TempDir::new().unwrap();
        let path = construct(dir.path(), "bd.json", &["--q", "5", "--family", "bd"]);
        let mut doc = read(&path);
        doc["class"]["lines"].as_array_mut().unwrap().pop();
        write(&path, &doc);
        let o = clines(&["verify", &path]);
        assert_eq!(o.code, EXIT_VERIFY_FAILED);
        let r = json(&o.stdout);
        assert_eq!(r["pass"], false);
        assert!(r["inferred_parameter"].is_null());

        let missing = dir.path().join("missing.json");
        assert_eq!(
            clines(&["verify", missing.to_str().unwrap()]).code,
            EXIT_USAGE
        );
        let garbage = dir.path().join("garbage.json");
        fs::write(&garbage, "{").unwrap();
        assert_eq!(
            clines(&["verify", garbage.to_str().unwrap()]).code,
            EXIT_USAGE
        );
    }

    #[test]
    fn verify_rejects_a_wrong_declared_parameter() {
        let dir = TempDir::new().unwrap();
        let path = construct(dir.path(), "bd.json", &["--q", "5", "--family", "bd"]);
        let mut doc = read(&path);
        doc["class"]["parameter"] = Value::from(12);
        write(&path, &doc);
        assert_eq!(clines(&["verify", &path]).code, EXIT_VERIFY_FAILED);
    }

    #[test]
    fn spectra_labels_the_three_families() {
        let dir = TempDir::new().unwrap();
        for (family, label) in [
            ("bd", "bruen-drudge"),
            ("cpgmp", "perturbed-bd"),
            ("derived", "derived-new"),
        ] {
            let path = construct(
                dir.path(),
                &format!("{family}.json"),
                &["--q", "7", "--family", family],
            );
            let o = clines(&["spectra", &path]);
            assert_eq!(o.code, EXIT_OK);
            let text = String::from_utf8(o.stdout).unwrap();
            assert!(text.ends_with(&format!("class: {label}\n")), "{text}");
            assert_eq!(
                json(&clines(&["spectra", &path, "--json"]).stdout)["classification"],
                label
            );
        }
        let path = construct(dir.path(), "d.json", &["--q", "7", "--family", "derived"]);
        let r = json(&clines(&["spectra", &path, "--json"]).stdout);
        assert_eq!(r["planes"], "13^49, 21^126, 29^77, 37^98, 45^49, 53");
        assert_eq!(r["stars"], "4, 12^49, 20^98, 28^77, 36^126, 44^49");
    }

    #[test]
    fn symmetry_reports_invariance() {
        let dir = TempDir::new().unwrap();
        let path = construct(dir.path(), "d.json", &["--q", "5", "--family", "derived"]);
        let o = clines(&["symmetry", &path]);
        assert_eq!(o.code, EXIT_OK);
        let r = json(&o.stdout);
        assert_eq!(r["order"], 150);
        assert_eq!(r["invariant"], true);
        assert_eq!(r["pi_orbit_sizes"], serde_json::json!([1, 15, 15]));

        let mut doc = read(&path);
        doc["class"]["lines"].as_array_mut().unwrap().swap_remove(0);
        write(&path, &doc);
        assert_eq!(clines(&["symmetry", &path]).code, EXIT_VERIFY_FAILED);
    }

    #[test]
    fn search_budget_and_depth() {
        let o = clines(&["search", "--q", "7", "--budget", "3"]);
        assert_eq!(o.code, EXIT_BUDGET);
        assert_eq!(json(&o.stdout)["partial"], true);
        assert_eq!(
            clines(&["search", "--q", "7", "--depth", "4"]).code,
            EXIT_USAGE
        );
        let o = clines(&["search", "--q", "7"]);
        assert_eq!(o.code, EXIT_OK);
        let r = json(&o.stdout);
        assert_eq!(r["all_verified"], true);
        assert_eq!(r["fingerprints"].as_array().unwrap().len(), 3);
    }
}
