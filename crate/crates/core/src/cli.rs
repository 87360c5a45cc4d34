//! The `pointwise` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::construction::{
    combine, generate_basis, series_bound_check, verify_independence, verify_membership,
    CombinationCertificate, CombinationVerdict, GSpec, GeneratedSubspace,
};
use crate::error::Error;
use crate::gallery::{
    finite_dim_pointwise_failure, kernel_space_counterexample, mother_vector_catalog,
};
use crate::literal::{format_value_space, parse_value_space, SequenceLiteral};
use crate::maps::MapSpec;
use crate::scalar::{format_q, parse_q, Scalar, ScalarField, Q};
use crate::seqcore::{LazySequence, Shape, VectorSpaceSpec};
use crate::spaces::{
    certify, check_invariant_axioms, check_strongly_invariant, checkpoints, partial_norm_trace,
    Evidence, MembershipCertificate, NestedFamily, ProbeOptions, SpaceSpec, Verdict,
};
use crate::weak::{apply_functional, generate_weak, weak_sup_norm, FunctionalFamily, WeakSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pointwise", version, about = "Pointwise spaceability constructions with exact certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Write the certificates as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write `n,value` partial-norm traces to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// JSON config; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Probe budget (coordinates).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Probe divergence threshold.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Seed for random functionals.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Truncation length for traces and checks.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldArg>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldArg {
    Rational,
    Float,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership certificate for a sequence in a space.
    Probe(ProbeArgs),
    /// Invariance axiom reports for a space on sample sequences.
    Axioms(AxiomsArgs),
    /// Build the generated subspace and report partition, basis and ranks.
    Construct(ConstructArgs),
    /// Certificate for one coefficient vector.
    Verify(VerifyArgs),
    /// The construction with weak family membership over a finite-dimensional Y.
    Weak(WeakArgs),
    /// Named regressions.
    Gallery(GalleryArgs),
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub seq: Option<String>,
}

#[derive(Args, Debug)]
pub struct AxiomsArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// Sample sequence; repeatable.
    #[arg(long = "seq")]
    pub seqs: Vec<String>,
    /// Also check strong invariance.
    #[arg(long)]
    pub strong: bool,
    /// Subsequence patterns for the strong check.
    #[arg(long, value_delimiter = ',', default_value = "odds,evens")]
    pub patterns: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ConstructArgs {
    /// The space E.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub map: Option<String>,
    /// Comma-separated nested family, e.g. `lp:1,lp:3/2`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub mother: Option<String>,
    /// Number of basis vectors in the rank table.
    #[arg(long)]
    pub k: Option<usize>,
    /// Partition blocks shown.
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    /// Coordinates shown per basis vector.
    #[arg(long, default_value_t = 12)]
    pub preview: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub base: ConstructArgs,
    /// Comma-separated coefficients `a_1, a_2, …`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

#[derive(Args, Debug)]
pub struct WeakArgs {
    #[command(flatten)]
    pub base: ConstructArgs,
    /// Value space Y: `sup:2`, `p:1:2`, …
    #[arg(long)]
    pub y: Option<String>,
    /// Place a scalar mother along this coordinate of Y.
    #[arg(long)]
    pub axis: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Random functionals besides the extreme points.
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GalleryArgs {
    pub target: GalleryTarget,
    /// Catalog exponent p.
    #[arg(long)]
    pub p: Option<String>,
    /// Catalog probes Γ, comma-separated.
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GalleryTarget {
    Kernel,
    FiniteDim,
    Catalog,
}

/// A config value written either in short syntax or as a full record.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Spec<T> {
    Short(String),
    Full(T),
}

/// Optional JSON configuration mirroring the flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: Option<Spec<SpaceSpec>>,
    pub map: Option<Spec<MapSpec>>,
    pub family: Option<Spec<Vec<SpaceSpec>>>,
    pub mother: Option<Spec<SequenceLiteral>>,
    pub seq: Option<Spec<SequenceLiteral>>,
    #[serde(default, deserialize_with = "coeff_list")]
    pub coeffs: Option<Vec<Q>>,
    pub budget: Option<u64>,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub k: Option<usize>,
    pub y: Option<String>,
    pub axis: Option<usize>,
    pub field: Option<FieldArg>,
}

fn coeff_list<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Q>>, D::Error> {
    crate::scalar::qvec::deserialize(d).map(Some)
}

struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Exit code for a failed run.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NotInG(_) | Error::DegenerateMother(_) => EXIT_REFUTED,
        Error::Inconclusive(_)
        | Error::InconclusiveSplit
        | Error::BudgetExhausted { .. }
        | Error::InsufficientTruncation(_)
        | Error::UnsupportedSpace(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

struct Ctx {
    global: GlobalArgs,
    config: Config,
}

impl Ctx {
    fn opts(&self) -> ProbeOptions {
        let d = ProbeOptions::default();
        ProbeOptions {
            budget: self.global.budget.or(self.config.budget).unwrap_or(d.budget),
            threshold: self.global.threshold.or(self.config.threshold).unwrap_or(d.threshold),
        }
    }

    fn n(&self) -> u64 {
        self.global.n.or(self.config.n).unwrap_or(1000)
    }

    fn seed(&self) -> u64 {
        self.global.seed.or(self.config.seed).unwrap_or(0)
    }

    fn field(&self) -> ScalarField {
        match self.global.field.or(self.config.field) {
            Some(FieldArg::Float) => ScalarField::float(),
            _ => ScalarField::rational(),
        }
    }

    fn space(&self, flag: &Option<String>) -> std::result::Result<SpaceSpec, Usage> {
        pick(flag, &self.config.space, "--space", |s| s.parse())
    }

    fn map(&self, flag: &Option<String>) -> std::result::Result<MapSpec, Usage> {
        match (flag, &self.config.map) {
            (None, None) => Ok(MapSpec::identity()),
            _ => pick(flag, &self.config.map, "--map", |s| s.parse()),
        }
    }

    fn family(&self, flag: &Option<String>) -> std::result::Result<NestedFamily, Usage> {
        let members = pick(flag, &self.config.family, "--family", parse_family)?;
        Ok(NestedFamily::new(members)?)
    }

    fn sequence(
        &self,
        flag: &Option<String>,
        from_config: &Option<Spec<SequenceLiteral>>,
        name: &str,
    ) -> std::result::Result<SequenceLiteral, Usage> {
        pick(flag, from_config, name, |s| s.parse())
    }

    fn coeffs(&self, flag: &Option<String>) -> std::result::Result<Option<Vec<Scalar>>, Usage> {
        if let Some(s) = flag {
            return Ok(Some(parse_coeffs(s)?));
        }
        match &self.config.coeffs {
            Some(list) => Ok(Some(list.iter().cloned().map(Scalar::Rational).collect())),
            None => Ok(None),
        }
    }
}

fn pick<T: Clone + DeserializeOwned>(
    flag: &Option<String>,
    cfg: &Option<Spec<T>>,
    name: &str,
    parse: impl Fn(&str) -> crate::error::Result<T>,
) -> std::result::Result<T, Usage> {
    if let Some(s) = flag {
        return Ok(parse(s)?);
    }
    match cfg {
        Some(Spec::Short(s)) => Ok(parse(s)?),
        Some(Spec::Full(t)) => Ok(t.clone()),
        None => Err(Usage(format!("missing {name}"))),
    }
}

/// Splits `lp:1,lp:3/2,c0` at commas that start a new member.
pub fn parse_family(s: &str) -> crate::error::Result<Vec<SpaceSpec>> {
    let mut parts: Vec<String> = Vec::new();
    for tok in s.split(',') {
        let starts_member = tok.trim().chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        match parts.last_mut() {
            Some(last) if !starts_member => {
                last.push(',');
                last.push_str(tok);
            }
            _ => parts.push(tok.to_string()),
        }
    }
    parts.iter().map(|p| p.parse()).collect()
}

pub fn parse_coeffs(s: &str) -> crate::error::Result<Vec<Scalar>> {
    s.split(',').map(|c| parse_q(c).map(Scalar::Rational)).collect()
}

fn execute(cli: Cli) -> Outcome {
    let config = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("bad config: {e}")))?
        }
        None => Config::default(),
    };
    let ctx = Ctx {
        global: cli.global,
        config,
    };
    match &cli.command {
        Command::Probe(a) => probe(&ctx, a),
        Command::Axioms(a) => axioms(&ctx, a),
        Command::Construct(a) => construct(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Weak(a) => weak(&ctx, a),
        Command::Gallery(a) => gallery(&ctx, a),
    }
}

fn write_json(ctx: &Ctx, doc: &Json) -> Outcome {
    if let Some(path) = &ctx.global.json {
        let mut text = serde_json::to_string_pretty(doc).expect("serializable");
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(EXIT_PASS)
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Usage> {
    fs::write(path, text).map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(ctx: &Ctx, rows: &[(u64, f64)]) -> Outcome {
    if let Some(path) = &ctx.global.csv {
        let mut text = String::from("n,value\n");
        for (n, v) in rows {
            let _ = writeln!(text, "{n},{v}");
        }
        write_file(path, &text)?;
    }
    Ok(EXIT_PASS)
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("serializable")
}

fn describe(cert: &MembershipCertificate) -> String {
    let mut out = format!(
        "{:?} in {} [{}]",
        cert.verdict,
        cert.space,
        to_json(&cert.method).as_str().unwrap_or("?")
    );
    match &cert.evidence {
        Evidence::Decision {
            steps,
            functional_value,
            ..
        } => {
            for s in steps {
                let _ = write!(out, "\n    {s}");
            }
            if let Some(v) = functional_value {
                let _ = write!(out, "\n    functional value {v}");
            }
        }
        Evidence::Trace { trace, threshold, .. } => {
            if let Some((n, v)) = trace.last() {
                let _ = write!(out, "\n    partial norm {v:.6} at n = {n} (threshold {threshold})");
            }
        }
        Evidence::Functional {
            partial_sums,
            limit,
            tail_bound,
            ..
        } => {
            if let Some((n, v)) = partial_sums.last() {
                let _ = write!(out, "\n    functional partial sum {v:.6} at n = {n}");
            }
            if let Some(l) = limit {
                let _ = write!(out, "\n    limit {l}");
            }
            if let Some(t) = tail_bound {
                let _ = write!(out, "\n    tail bound {t:e}");
            }
        }
    }
    out
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        _ => EXIT_PASS,
    }
}

fn probe(ctx: &Ctx, a: &ProbeArgs) -> Outcome {
    let space = ctx.space(&a.space)?;
    let lit = ctx.sequence(&a.seq, &ctx.config.seq, "--seq")?;
    let x = lit.build(ctx.field())?;
    let cert = certify(&space, &x, ctx.opts());
    println!("{}: {}", x.label(), describe(&cert));
    let trace = if cert.trace().is_empty() {
        partial_norm_trace(&space, &x, ctx.n())
    } else {
        cert.trace().to_vec()
    };
    write_json(ctx, &json!({ "command": "probe", "certificate": to_json(&cert) }))?;
    write_csv(ctx, &trace)?;
    Ok(verdict_code(cert.verdict))
}

fn axioms(ctx: &Ctx, a: &AxiomsArgs) -> Outcome {
    let space = ctx.space(&a.space)?;
    let mut samples = Vec::new();
    for s in &a.seqs {
        samples.push(s.parse::<SequenceLiteral>()?.build(ctx.field())?);
    }
    if samples.is_empty() {
        if let Some(Spec::Short(_) | Spec::Full(_)) = &ctx.config.seq {
            samples.push(ctx.sequence(&None, &ctx.config.seq, "--seq")?.build(ctx.field())?);
        } else {
            return Err(Usage("at least one --seq is needed".into()).into());
        }
    }
    let n = ctx.n();
    let report = check_invariant_axioms(&space, &samples, n, ctx.opts())?;
    println!(
        "{space}: b1 {}, b2 {}, K declared {}, empirical max ‖x‖/‖x⁰‖ = {}",
        ok(report.b1_holds),
        ok(report.b2_holds),
        report.k_declared.as_deref().unwrap_or("-"),
        report.k_empirical
    );
    for s in &report.samples {
        println!(
            "  {}: ‖x‖ = {}, ‖x⁰‖ = {} over {} nonzeros, verdicts {:?}/{:?}{}",
            s.sample,
            brief(&s.partial_norm),
            brief(&s.zero_free_norm),
            s.nonzeros,
            s.verdict,
            s.zero_free_verdict,
            if s.b1_vacuous { " (x⁰ = 0)" } else { "" }
        );
    }
    let mut code = if report.holds() { EXIT_PASS } else { EXIT_REFUTED };
    let mut doc = json!({ "command": "axioms", "invariant": to_json(&report) });
    if a.strong {
        let patterns = a
            .patterns
            .iter()
            .map(|p| parse_pattern(p))
            .collect::<crate::error::Result<Vec<_>>>()?;
        let strong = check_strongly_invariant(&space, &samples, &patterns, n, ctx.opts())?;
        println!(
            "strong invariance: {} ({} violations)",
            ok(strong.holds()),
            strong.violations.len()
        );
        for v in &strong.violations {
            println!("  violation: {}", to_json(v));
        }
        if !strong.holds() {
            code = EXIT_REFUTED;
        }
        doc["strong"] = to_json(&strong);
    }
    write_json(ctx, &doc)?;
    if let Some(x) = samples.first() {
        write_csv(ctx, &partial_norm_trace(&space, x, n))?;
    }
    Ok(code)
}

fn parse_pattern(s: &str) -> crate::error::Result<crate::seqcore::IndexSet> {
    use crate::seqcore::IndexSet;
    match s.trim() {
        "odds" => Ok(IndexSet::odds()),
        "evens" => Ok(IndexSet::evens()),
        other => match other.split_once(':') {
            Some(("dyadic", i)) => IndexSet::dyadic_ray(
                i.parse().map_err(|_| Error::Parse(format!("bad ray {i:?}")))?,
            ),
            Some(("ap", cd)) => {
                let (c, d) = cd
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("ap needs c,d: {cd:?}")))?;
                IndexSet::progression(
                    c.parse().map_err(|_| Error::Parse(format!("bad step {c:?}")))?,
                    d.parse().map_err(|_| Error::Parse(format!("bad offset {d:?}")))?,
                )
            }
            _ => Err(Error::Parse(format!("unknown pattern {s:?}"))),
        },
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn gspec(ctx: &Ctx, a: &ConstructArgs) -> std::result::Result<GSpec, Usage> {
    Ok(GSpec {
        e: ctx.space(&a.space)?,
        f: ctx.map(&a.map)?,
        family: ctx.family(&a.family)?,
    })
}

/// Exact text when short, otherwise a decimal approximation.
fn brief(s: &Scalar) -> String {
    let text = s.to_string();
    if text.len() > 24 {
        format!("≈{:.9}", s.to_f64())
    } else {
        text
    }
}

fn show_values(x: &LazySequence, n: u64) -> String {
    (1..=n)
        .map(|j| {
            let v = x.eval(j);
            match v.as_scalar() {
                Some(s) => brief(s),
                None => format!(
                    "({})",
                    v.components().iter().map(brief).collect::<Vec<_>>().join(", ")
                ),
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn combination_line(c: &CombinationCertificate) -> String {
    let coeffs = c.coefficients.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    let mut line = format!("a = ({coeffs}): {}", to_json(&c.verdict).as_str().unwrap_or("?"));
    if let Some(b) = c.escaping_block {
        let _ = write!(line, ", escaping block N{b}");
    }
    for m in &c.membership {
        let _ = write!(
            line,
            "; {} {:?} [{}]",
            m.space,
            m.verdict,
            to_json(&m.subsequence.method).as_str().unwrap_or("?")
        );
    }
    line
}

fn combination_code(v: CombinationVerdict) -> i32 {
    match v {
        CombinationVerdict::InG | CombinationVerdict::Zero => EXIT_PASS,
        CombinationVerdict::NotInG => EXIT_REFUTED,
        CombinationVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Human report and JSON body shared by `construct` and `weak`.
fn subspace_report(
    ctx: &Ctx,
    sub: &GeneratedSubspace,
    a: &ConstructArgs,
    coeff_sets: &[Vec<Scalar>],
) -> std::result::Result<(Json, i32), Failure> {
    let g = sub.gspec();
    let family: Vec<String> = g.family.members().iter().map(ToString::to_string).collect();
    println!("G(E = {}, f = {}, family = [{}])", g.e, g.f, family.join(", "));
    println!("mother {}: {}", sub.mother().label(), describe(sub.mother_in_e()));
    println!(
        "N1 = {}: {}",
        sub.partition().n1,
        describe(sub.divergence())
    );
    println!("s̃ = {}", format_q(sub.stilde()));

    println!("partition:");
    let blocks = sub.partition().describe(a.blocks, 6);
    for (i, name, first) in &blocks {
        let list = first.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        println!("  N{i:<3} {name:<28} {list}, …");
    }
    let cover = sub.partition().cover_check(10_000);
    println!("cover of 1..=10000: {}", ok(cover.holds()));

    println!("basis (first {} coordinates):", a.preview);
    let mut basis = Vec::new();
    for i in 1..=a.blocks.max(1) {
        let y = generate_basis(sub, i);
        println!("  y{i}: {}", show_values(&y, a.preview));
        basis.push(json!({ "i": i, "values": (1..=a.preview).map(|j| y.eval(j).to_string()).collect::<Vec<_>>() }));
    }

    let k = a.k.or(ctx.config.k).unwrap_or(32);
    let rank = verify_independence(sub, k, ctx.n())?;
    println!("rank table (k: rank), n = {}:", rank.n_used);
    let table = rank
        .rank_profile
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{}:{}", i + 1, r))
        .collect::<Vec<_>>()
        .join(" ");
    println!("  {table}");

    let mut code = if rank.full_rank() && cover.holds() {
        EXIT_PASS
    } else {
        EXIT_REFUTED
    };
    println!("certificates:");
    let mut certs = Vec::new();
    for coeffs in coeff_sets {
        let c = verify_membership(sub, coeffs)?;
        println!("  {}", combination_line(&c));
        code = code.max(combination_code(c.verdict));
        certs.push(c);
    }
    let doc = json!({
        "subspace": to_json(&sub.summary()),
        "partition": blocks.iter().map(|(i, name, first)| json!({ "block": i, "set": name, "first": first })).collect::<Vec<_>>(),
        "cover": to_json(&cover),
        "basis": basis,
        "rank": to_json(&rank),
        "certificates": to_json(&certs),
    });
    Ok((doc, code))
}

fn unit_coeffs(count: usize) -> Vec<Vec<Scalar>> {
    (1..=count)
        .map(|i| {
            let mut v = vec![Scalar::zero(); i];
            v[i - 1] = Scalar::one();
            v
        })
        .collect()
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> Outcome {
    let g = gspec(ctx, a)?;
    let x = ctx.sequence(&a.mother, &ctx.config.mother, "--mother")?.build(ctx.field())?;
    let sub = GeneratedSubspace::new(g, x, ctx.opts())?;
    let (mut doc, code) = subspace_report(ctx, &sub, a, &unit_coeffs(a.blocks.max(1)))?;
    doc["command"] = json!("construct");
    write_json(ctx, &doc)?;
    write_csv(ctx, &partial_norm_trace(&sub.gspec().e, sub.mother(), ctx.n()))?;
    Ok(code)
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Outcome {
    let g = gspec(ctx, &a.base)?;
    let x = ctx.sequence(&a.base.mother, &ctx.config.mother, "--mother")?.build(ctx.field())?;
    let coeffs = ctx.coeffs(&a.coeffs)?.ok_or_else(|| Usage("missing --coeffs".into()))?;
    let sub = GeneratedSubspace::new(g, x, ctx.opts())?;
    let cert = verify_membership(&sub, &coeffs)?;
    println!("{}", combination_line(&cert));
    for m in &cert.membership {
        println!("  {}", describe(&m.subsequence));
        for s in &m.steps {
            println!("    {s}");
        }
    }
    let n = ctx.n();
    let mut doc = json!({
        "command": "verify",
        "subspace": to_json(&sub.summary()),
        "certificate": to_json(&cert),
    });
    if let crate::spaces::SpaceKind::Lp { .. } = sub.gspec().e.kind {
        if sub.gspec().e.values == Shape::Scalar {
            let bound = series_bound_check(&sub, &coeffs, n)?;
            println!(
                "series bound (s̃ = {}, n = {n}): {} ≤ {}: {}{}",
                format_q(&bound.stilde),
                bound.lhs,
                bound.rhs,
                ok(bound.holds),
                if bound.equal { " (equal)" } else { "" }
            );
            doc["series_bound"] = to_json(&bound);
        }
    }
    let z = combine(&sub, &coeffs)?;
    write_json(ctx, &doc)?;
    write_csv(ctx, &partial_norm_trace(&sub.gspec().e, &z.lazy, n))?;
    Ok(combination_code(cert.verdict))
}

fn weak(ctx: &Ctx, a: &WeakArgs) -> Outcome {
    let y_text = a
        .y
        .clone()
        .or_else(|| ctx.config.y.clone())
        .unwrap_or_else(|| "sup:2".into());
    let y: VectorSpaceSpec = parse_value_space(&y_text)?;
    let mut lit = ctx.sequence(&a.base.mother, &ctx.config.mother, "--mother")?;
    if !matches!(lit, SequenceLiteral::Vector { .. }) {
        let axis = a.axis.or(ctx.config.axis).unwrap_or(1);
        lit = lit.along_axis(y.clone(), axis)?;
    }
    let x = lit.build(ctx.field())?;
    let g = gspec(ctx, &a.base)?;
    let e = g.e.clone().with_values(Shape::Vector(y.clone()));
    let fam = FunctionalFamily::new(y.clone(), a.random.unwrap_or(32), ctx.seed());
    println!(
        "Y = {} with {} extreme functionals and {} random (seed {})",
        format_value_space(&y),
        fam.extreme_points.len(),
        fam.random.len(),
        fam.seed
    );
    let sub = generate_weak(x, e, g.f.clone(), g.family.clone(), fam.clone(), ctx.opts())?;
    let coeff_sets = match ctx.coeffs(&a.coeffs)? {
        Some(c) => vec![c],
        None => unit_coeffs(a.base.blocks.max(1)),
    };
    let (mut doc, code) = subspace_report(ctx, &sub, &a.base, &coeff_sets)?;
    doc["command"] = json!("weak");
    doc["functionals"] = to_json(&fam);

    let n = ctx.n();
    let top = g.family.maximal().clone().with_values(Shape::Scalar);
    let mut code = code;
    if let Ok(ws) = WeakSpec::new(top, y) {
        if let Ok(norm) = weak_sup_norm(&ws, sub.mother(), &fam, n) {
            println!(
                "weak sup norm in {} at n = {n}: {} (φ = {:?}{})",
                ws.f,
                brief(&norm.value),
                norm.attained_by.0.iter().map(format_q).collect::<Vec<_>>(),
                if norm.exact_supremum { ", exact over the dual ball" } else { "" }
            );
            doc["weak_sup_norm"] = to_json(&norm);
        }
        let rows = weak_trace(&ws, sub.mother(), &fam, n);
        write_csv(ctx, &rows)?;
    } else {
        code = code.max(EXIT_PASS);
    }
    write_json(ctx, &doc)?;
    Ok(code)
}

/// `max_φ` of the floating-point partial-norm traces at each checkpoint.
fn weak_trace(ws: &WeakSpec, x: &LazySequence, fam: &FunctionalFamily, n: u64) -> Vec<(u64, f64)> {
    let marks = checkpoints(n);
    let mut best = vec![0.0f64; marks.len()];
    for phi in fam.all() {
        if let Ok(s) = apply_functional(phi, x) {
            for (slot, (_, v)) in best.iter_mut().zip(partial_norm_trace(&ws.f, &s, n)) {
                *slot = slot.max(v);
            }
        }
    }
    marks.into_iter().zip(best).collect()
}

fn gallery(ctx: &Ctx, a: &GalleryArgs) -> Outcome {
    match a.target {
        GalleryTarget::Kernel => {
            let rep = kernel_space_counterexample()?;
            println!("E = {} (kernel of the sum functional inside ℓ1)", rep.space);
            println!("w = (1, -1, 1/2, -1/2, …): {}", describe(&rep.witness_in));
            println!("  functional partial sums: {}", rep.functional_partial_sums.join(", "));
            println!(
                "  ‖w‖₁ = {} (truncated: {})",
                rep.l1_norm.as_deref().unwrap_or("?"),
                rep.truncated_l1
                    .iter()
                    .map(|(n, v)| format!("n={n}: {v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!("odd subsequence: {}", describe(&rep.odd_subsequence_out));
            println!("e1: {}", describe(&rep.e1_out));
            println!("invariant axioms: {}", ok(rep.axioms.holds()));
            println!("strong invariance violations:");
            for v in &rep.strong.violations {
                println!("  {}", to_json(v)["kind"].as_str().unwrap_or("?"));
            }
            println!("regression: {}", if rep.passed { "pass" } else { "FAIL" });
            write_json(ctx, &json!({ "command": "gallery", "target": "kernel", "report": to_json(&rep) }))?;
            let w = crate::gallery::kernel_witness();
            write_csv(ctx, &partial_norm_trace(&SpaceSpec::lp(Q::from_integer(1.into())), &w, ctx.n()))?;
            Ok(if rep.passed { EXIT_PASS } else { EXIT_REFUTED })
        }
        GalleryTarget::FiniteDim => {
            let rep = finite_dim_pointwise_failure()?;
            let r3 = &rep.r3;
            println!(
                "R³: 2·(1,1,1) in A: {}; plane z = 0 has dimension {} and lies in A: {}",
                r3.doubled_in_a, r3.plane_dimension, r3.plane_inside
            );
            let nb = &rep.neighborhood;
            let v = |x: &[Q]| x.iter().map(format_q).collect::<Vec<_>>().join(", ");
            println!(
                "neighborhood (d = {}, ε = {}): δ = {}, α = {}, αy0 = ({}) in A: {}, λ = {}, λαy0 = ({}) in A: {}",
                nb.d,
                format_q(&nb.epsilon),
                format_q(&nb.delta),
                format_q(&nb.alpha),
                v(&nb.alpha_y0),
                nb.alpha_y0_in_a,
                format_q(&nb.lambda),
                v(&nb.scaled),
                nb.scaled_in_a
            );
            println!("kernel vectors stay in A: {}", nb.kernel_stays_in_a);
            println!("regression: {}", if rep.passed { "pass" } else { "FAIL" });
            write_json(ctx, &json!({ "command": "gallery", "target": "finite-dim", "report": to_json(&rep) }))?;
            Ok(if rep.passed { EXIT_PASS } else { EXIT_REFUTED })
        }
        GalleryTarget::Catalog => {
            let p = parse_q(a.p.as_deref().unwrap_or("2"))?;
            let gamma = match &a.gamma {
                Some(g) => g.split(',').map(parse_q).collect::<crate::error::Result<Vec<_>>>()?,
                None => vec![&p / Q::from_integer(2.into())],
            };
            let entries = mother_vector_catalog(&p, &gamma)?;
            for e in &entries {
                println!("{}:", e.label);
                for c in &e.certificates {
                    println!("  {}", describe(c));
                }
            }
            write_json(ctx, &json!({ "command": "gallery", "target": "catalog", "entries": to_json(&entries) }))?;
            if let Some(first) = entries.first() {
                write_csv(ctx, &partial_norm_trace(&SpaceSpec::lp(p.clone()), &first.sequence, ctx.n()))?;
            }
            Ok(EXIT_PASS)
        }
    }
}
