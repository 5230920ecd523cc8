//! Command implementations behind the `pavc` binary. Each command returns a
//! [`RunReport`]; the binary prints it and exits 0 iff every check passed.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use pavc_core::contfrac::ContinuedFraction;
use pavc_core::eval::{BoundHints, BoundedEvaluator, EvalConfig};
use pavc_core::formula::{
    parse_partitioned, parse_with, print, print_partitioned, read_headers, shape, Formula, ParseOptions,
    PartitionedFormula,
};
use pavc_core::generator::{self, Encoder, GeneratorMeta, ModulusMode};
use pavc_core::qe::{eliminate_quantifiers_with, QeConfig};
use pavc_core::upperbound::upper_bound_via_qe;
use pavc_core::vclab::{
    family_from_formula, is_shattered, shatter_function, vc_dimension, FamilyMode, Interval,
    Point, VcConfig,
};

#[derive(Debug, Parser)]
#[command(name = "pavc", version, about = "Presburger arithmetic VC-dimension workbench")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate F_T(x; y) for a given d, with its meta certificate.
    Gen(GenArgs),
    /// Check a generated formula against its meta certificate.
    Verify(VerifyArgs),
    /// VC-dimension of the family a formula cuts out on finite windows.
    Vc(FamilyArgs),
    /// Test whether given points are shattered, or tabulate π(n).
    Shatter(ShatterArgs),
    /// Eliminate quantifiers.
    Qe(QeArgs),
    /// Shape, length and variable report.
    Analyze(AnalyzeArgs),
    /// VC upper-bound certificate via quantifier elimination.
    Upperbound(QeArgs),
    /// Convergents of a continued fraction.
    Convergents(ConvergentsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EncoderArg {
    Naive,
    NaiveBridged,
    CfShort,
}

impl From<EncoderArg> for Encoder {
    fn from(e: EncoderArg) -> Self {
        match e {
            EncoderArg::Naive => Encoder::Naive,
            EncoderArg::NaiveBridged => Encoder::NaiveBridged,
            EncoderArg::CfShort => Encoder::CfShort,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModulusArg {
    Prime,
    Product,
}

impl From<ModulusArg> for ModulusMode {
    fn from(m: ModulusArg) -> Self {
        match m {
            ModulusArg::Prime => ModulusMode::Prime,
            ModulusArg::Product => ModulusMode::Product,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub d: u32,
    #[arg(long, value_enum, default_value = "naive")]
    pub encoder: EncoderArg,
    #[arg(long, value_enum, default_value = "prime")]
    pub modulus: ModulusArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Formula file; defaults to `ft_d<d>.pa`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Meta file; defaults to the formula path with extension `meta.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, default_value_t = generator::DEFAULT_CAP)]
    pub cap: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Enumerate quantifiers over bound hints.
    Bounded,
    /// Eliminate quantifiers first.
    Qe,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub formula: PathBuf,
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long, value_enum, default_value = "bounded")]
    pub mode: Mode,
    /// Overrides the meta ground window.
    #[arg(long, allow_hyphen_values = true)]
    pub ground: Option<Interval>,
    /// Overrides the meta parameter window.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<Interval>,
    /// Overrides the meta t window.
    #[arg(long, allow_hyphen_values = true)]
    pub t_window: Option<Interval>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub formula: PathBuf,
    /// Supplies windows and hints; explicit flags win.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Ground window, one `lo..hi` per object variable (comma separated);
    /// a single interval is reused for every variable.
    #[arg(long, allow_hyphen_values = true)]
    pub ground: Option<String>,
    /// Parameter window, same syntax as --ground.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Bound hint `var=lo..hi` for a quantified variable.
    #[arg(long = "hint", allow_hyphen_values = true)]
    pub hints: Vec<String>,
    /// Defaults to bounded when hints are available or the formula is
    /// quantifier-free, else qe.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Stop the VC search at this size.
    #[arg(long, default_value_t = 20)]
    pub cap: usize,
    #[arg(long)]
    pub allow_div: bool,
    #[arg(long)]
    pub max_atoms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ShatterArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// A point of the tested set, coordinates comma separated; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Tabulate π(n) for n up to this value when no points are given.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct QeArgs {
    #[arg(long)]
    pub formula: PathBuf,
    #[arg(long)]
    pub allow_div: bool,
    /// Overrides the atom cap (also settable through PAVC_MAX_ATOMS).
    #[arg(long)]
    pub max_atoms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub formula: PathBuf,
    #[arg(long)]
    pub allow_div: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConvergentsArgs {
    /// Terms `a0,a1,...`.
    #[arg(long)]
    pub terms: Option<String>,
    /// A rational `p/q` to expand first.
    #[arg(long)]
    pub rational: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub outputs: Value,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Digest of the inputs of one run.
#[derive(Default)]
struct Inputs(Sha256);

impl Inputs {
    fn add(&mut self, label: &str, bytes: &[u8]) {
        self.0.update((label.len() as u64).to_le_bytes());
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.add("file", text.as_bytes());
        Ok(text)
    }

    fn finish(self) -> String {
        format!("{:x}", self.0.finalize())
    }
}

fn report(command: &str, inputs: Inputs, seed: Option<u64>, start: Instant, checks: Vec<Check>, outputs: Value) -> RunReport {
    RunReport {
        command: command.to_string(),
        inputs_digest: inputs.finish(),
        seed,
        wall_time_ms: start.elapsed().as_millis() as u64,
        pass: checks.iter().all(|c| c.pass),
        checks,
        outputs,
    }
}

fn qe_config(max_atoms: Option<usize>) -> QeConfig {
    let mut c = QeConfig::from_env();
    if let Some(m) = max_atoms {
        c.max_atoms = m;
    }
    c
}

/// Parses with headers when both are present.
fn read_formula(text: &str, allow_div: bool) -> Result<(Formula, Option<PartitionedFormula>)> {
    let opts = ParseOptions {
        allow_div,
        ..Default::default()
    };
    match read_headers(text)? {
        (Some(_), Some(_)) => {
            let pf = parse_partitioned(text, &opts)?;
            Ok((pf.formula().clone(), Some(pf)))
        }
        _ => Ok((parse_with(text, &opts)?, None)),
    }
}

fn read_partitioned(text: &str, allow_div: bool) -> Result<PartitionedFormula> {
    read_formula(text, allow_div)?
        .1
        .ok_or_else(|| anyhow!("formula file needs `#objects:` and `#params:` headers"))
}

fn to_interval((lo, hi): &(BigInt, BigInt)) -> Result<Interval> {
    let c = |n: &BigInt| n.to_i64().ok_or_else(|| anyhow!("window bound {n} does not fit in 64 bits"));
    Ok(Interval::new(c(lo)?, c(hi)?))
}

fn parse_windows(text: &str, dims: usize) -> Result<Vec<Interval>> {
    let ivs: Vec<Interval> = text
        .split(',')
        .map(|s| s.parse::<Interval>().map_err(|e| anyhow!(e)))
        .collect::<Result<_>>()?;
    match ivs.len() {
        1 => Ok(vec![ivs[0]; dims]),
        n if n == dims => Ok(ivs),
        n => bail!("{n} intervals given for {dims} variables"),
    }
}

fn parse_hint(text: &str) -> Result<(String, Interval)> {
    let (v, iv) = text.split_once('=').ok_or_else(|| anyhow!("expected var=lo..hi, got {text:?}"))?;
    Ok((v.trim().to_string(), iv.parse::<Interval>().map_err(|e| anyhow!(e))?))
}

fn parse_point(text: &str) -> Result<Point> {
    text.split(',')
        .map(|s| s.trim().parse::<i64>().with_context(|| format!("bad coordinate in {text:?}")))
        .collect()
}

fn read_meta(inputs: &mut Inputs, path: &Path) -> Result<GeneratorMeta> {
    let text = inputs.read(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing meta {}", path.display()))
}

fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn cmd_gen(a: &GenArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    inputs.add("gen", format!("{} {:?} {:?} {} {}", a.d, a.encoder, a.modulus, a.seed, a.cap).as_bytes());
    let encoder: Encoder = a.encoder.into();
    let modulus = match encoder {
        Encoder::CfShort => Some(generator::select_modulus(a.d, a.modulus.into(), a.seed)?),
        _ => None,
    };
    let (f, mut meta) = generator::encode(a.d, encoder, a.modulus.into(), a.cap).map_err(|e| match &modulus {
        Some(m) => anyhow!("encoder unavailable: {e} (selected modulus {m})"),
        None => anyhow!("{e}"),
    })?;
    meta.modulus = modulus;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("ft_d{}.pa", a.d)));
    let meta_out = a.meta.clone().unwrap_or_else(|| meta_path(&out));
    fs::write(&out, print_partitioned(&f)).with_context(|| format!("writing {}", out.display()))?;
    let meta_text = serde_json::to_string_pretty(&meta)? + "\n";
    fs::write(&meta_out, meta_text).with_context(|| format!("writing {}", meta_out.display()))?;
    let s = shape(f.formula());
    let outputs = json!({
        "formula": out.display().to_string(),
        "meta": meta_out.display().to_string(),
        "d": a.d,
        "encoder": meta.encoder,
        "shape": s,
        "short_10_18": s.is_short(10, 18),
        "witnesses": meta.witnesses.len(),
    });
    Ok(report("gen", inputs, Some(a.seed), start, vec![], outputs))
}

/// The three checks on a generated formula: agreement with `T` along the
/// t window, exact lexicographic family with `{1..d}` shattered, and shape.
pub fn verify(f: &PartitionedFormula, meta: &GeneratorMeta, a: &VerifyOptions) -> Result<(Vec<Check>, Value)> {
    let d = meta.d;
    if f.object_vars().len() != 1 || f.param_vars().len() != 1 {
        bail!("expected one object and one parameter variable");
    }
    let ev = match a.mode {
        Mode::Bounded => BoundedEvaluator::new(f.formula(), &meta.hints, &EvalConfig::default())?,
        Mode::Qe => {
            let qf = eliminate_quantifiers_with(f.formula(), &QeConfig::from_env())?.formula.into_formula();
            BoundedEvaluator::new(&qf, &BoundHints::new(), &EvalConfig::default())?
        }
    };
    let x_first = ev.free_vars().first().map(String::as_str) == Some(f.object_vars()[0].as_str());
    let holds = |x: i64, y: i64| {
        let (x, y) = (BigInt::from(x), BigInt::from(y));
        match ev.free_vars().len() {
            0 => ev.eval(&[]),
            1 if x_first => ev.eval(&[x]),
            1 => ev.eval(&[y]),
            _ => ev.eval(&[x, y]),
        }
    };
    let mut checks = Vec::new();

    // (a) F(x; y) ⇔ x + d·y ∈ T along the t window
    let tw = match a.t_window {
        Some(iv) => iv,
        None => to_interval(&meta.t_window)?,
    };
    let dd = d as i64;
    let mut mismatch = None;
    for t in tw.lo..=tw.hi {
        let x = (t - 1).rem_euclid(dd) + 1;
        let y = (t - x) / dd;
        let want = generator::t_contains(d, &BigInt::from(t));
        let got = holds(x, y);
        if got != want {
            mismatch = Some((t, x, y, got, want));
            break;
        }
    }
    checks.push(match mismatch {
        None => Check::new("a_extensional", true, format!("F(x; y) matches T on t in {tw}")),
        Some((t, x, y, got, want)) => Check::new(
            "a_extensional",
            false,
            format!("first mismatch at t = {t} (x = {x}, y = {y}): formula {got}, T oracle {want}"),
        ),
    });
    let t_list = generator::build_t(d, u32::MAX)?;
    let bad = meta.witnesses.iter().find(|w| !generator::witness_holds(d, w));
    let covered: BTreeSet<&BigInt> = meta.witnesses.iter().map(|w| &w.t).collect();
    let missing = t_list.iter().find(|t| !covered.contains(t));
    checks.push(match (bad, missing) {
        (Some(w), _) => Check::new("a_witnesses", false, format!("witness for t = {} violates the bridging system", w.t)),
        (None, Some(t)) => Check::new("a_witnesses", false, format!("no witness recorded for t = {t}")),
        (None, None) => Check::new("a_witnesses", true, format!("{} witnesses satisfy the bridging system", t_list.len())),
    });

    // (b) the family on the windows is exactly the 2^d lexicographic subsets
    let gw = match a.ground {
        Some(iv) => iv,
        None => to_interval(&meta.ground_window)?,
    };
    let pw = match a.params {
        Some(iv) => iv,
        None => to_interval(&meta.param_window)?,
    };
    let mode = match a.mode {
        Mode::Bounded => FamilyMode::Bounded(meta.hints.clone()),
        Mode::Qe => FamilyMode::Qe(QeConfig::from_env()),
    };
    let cfg = VcConfig::default();
    let fam = family_from_formula(f, &[gw], &[pw], &mode, &cfg)?;
    let mut wrong = None;
    for i in 0..fam.len() {
        let j = fam.label(i)[0];
        let got: Vec<i64> = fam.member(i).into_iter().map(|p| p[0]).collect();
        let want: Vec<i64> = if (0..1i64 << d).contains(&j) {
            generator::lex_subset(d, &BigInt::from(j))?
                .into_iter()
                .map(i64::from)
                .filter(|x| (gw.lo..=gw.hi).contains(x))
                .collect()
        } else {
            vec![]
        };
        if got != want {
            wrong = Some((j, got, want));
            break;
        }
    }
    let ground: Vec<Point> = (1..=dd).map(|x| vec![x]).collect();
    let shattered = ground.iter().all(|p| (gw.lo..=gw.hi).contains(&p[0]))
        && is_shattered(&fam, &ground, &cfg)?.is_some();
    let distinct = fam.distinct_count();
    checks.push(match (&wrong, shattered) {
        (Some((j, got, want)), _) => Check::new(
            "b_family",
            false,
            format!("S_{j} on the window is {got:?}, expected {want:?}"),
        ),
        (None, false) => {
            let present: BTreeSet<Vec<i64>> = fam
                .distinct()
                .into_iter()
                .map(|(_, s)| s.into_iter().map(|p| p[0]).collect())
                .collect();
            let absent = (0..1u64 << d)
                .map(|m| (1..=dd).filter(|i| m >> (i - 1) & 1 == 1).collect::<Vec<_>>())
                .find(|s| !present.contains(s));
            Check::new(
                "b_family",
                false,
                format!("{{1..{d}}} is not shattered; subset {absent:?} is never cut out"),
            )
        }
        (None, true) => Check::new(
            "b_family",
            true,
            format!("{distinct} distinct members, equal to the lexicographic family; {{1..{d}}} shattered"),
        ),
    });
    let vc = if fam.ground().len() <= 20 {
        Some(vc_dimension(&fam, fam.ground().len(), &cfg)?.vc_dim.lower_bound())
    } else {
        None
    };

    // (c) shape; binding only for the short encoder
    let s = shape(f.formula());
    let short = s.is_short(10, 18);
    let detail = format!(
        "{} variables, {} inequalities, phi = {} bits: {} Short-PA(10,18)",
        s.total_vars,
        s.num_inequalities,
        s.phi_bits,
        if short { "within" } else { "not within" }
    );
    checks.push(Check::new("c_shape", short || meta.encoder != Encoder::CfShort, detail));

    let outputs = json!({
        "d": d,
        "mode": a.mode,
        "t_window": tw,
        "ground_window": gw,
        "param_window": pw,
        "family_size": distinct,
        "measured_vc": vc,
        "shape": s,
        "short_10_18": short,
    });
    Ok((checks, outputs))
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub ground: Option<Interval>,
    pub params: Option<Interval>,
    pub t_window: Option<Interval>,
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let f = read_partitioned(&inputs.read(&a.formula)?, false)?;
    let meta = read_meta(&mut inputs, &a.meta)?;
    let opts = VerifyOptions {
        mode: a.mode,
        ground: a.ground,
        params: a.params,
        t_window: a.t_window,
    };
    inputs.add("opts", format!("{opts:?}").as_bytes());
    let (checks, outputs) = verify(&f, &meta, &opts)?;
    Ok(report("verify", inputs, None, start, checks, outputs))
}

struct Family {
    f: PartitionedFormula,
    ground: Vec<Interval>,
    params: Vec<Interval>,
    mode: FamilyMode,
}

fn family_setup(inputs: &mut Inputs, a: &FamilyArgs) -> Result<Family> {
    let f = read_partitioned(&inputs.read(&a.formula)?, a.allow_div)?;
    let meta = match &a.meta {
        Some(p) => Some(read_meta(inputs, p)?),
        None => None,
    };
    let window = |flag: &Option<String>, from_meta: Option<&(BigInt, BigInt)>, dims: usize, what: &str| {
        match (flag, from_meta) {
            (Some(s), _) => parse_windows(s, dims),
            (None, Some(w)) if dims == 1 => Ok(vec![to_interval(w)?]),
            _ => bail!("no {what} window: pass --{what}"),
        }
    };
    let ground = window(&a.ground, meta.as_ref().map(|m| &m.ground_window), f.object_vars().len(), "ground")?;
    let params = window(&a.params, meta.as_ref().map(|m| &m.param_window), f.param_vars().len(), "params")?;
    let mut hints = meta.map(|m| m.hints).unwrap_or_default();
    for h in &a.hints {
        let (v, iv) = parse_hint(h)?;
        hints.insert(&v, iv.lo.into(), iv.hi.into());
    }
    let mode = match a.mode {
        Some(Mode::Bounded) => Mode::Bounded,
        Some(Mode::Qe) => Mode::Qe,
        None if !hints.is_empty() || f.formula().quantified_vars().is_empty() => Mode::Bounded,
        None => Mode::Qe,
    };
    let mode = match mode {
        Mode::Bounded => FamilyMode::Bounded(hints),
        Mode::Qe => FamilyMode::Qe(qe_config(a.max_atoms)),
    };
    inputs.add(
        "family",
        format!("{ground:?} {params:?} {mode:?} {} {}", a.cap, a.allow_div).as_bytes(),
    );
    Ok(Family { f, ground, params, mode })
}

fn mode_name(m: &FamilyMode) -> &'static str {
    match m {
        FamilyMode::Bounded(_) => "bounded",
        FamilyMode::Qe(_) => "qe",
    }
}

pub fn cmd_vc(a: &FamilyArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let fs = family_setup(&mut inputs, a)?;
    let cfg = VcConfig::default();
    let fam = family_from_formula(&fs.f, &fs.ground, &fs.params, &fs.mode, &cfg)?;
    let r = vc_dimension(&fam, a.cap, &cfg)?;
    let mut outputs = serde_json::to_value(&r)?;
    outputs["mode"] = json!(mode_name(&fs.mode));
    Ok(report("vc", inputs, None, start, vec![], outputs))
}

pub fn cmd_shatter(a: &ShatterArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let fs = family_setup(&mut inputs, &a.family)?;
    let cfg = VcConfig::default();
    let fam = family_from_formula(&fs.f, &fs.ground, &fs.params, &fs.mode, &cfg)?;
    if a.points.is_empty() {
        inputs.add("n", a.n.to_string().as_bytes());
        let top = a.n.min(fam.ground().len());
        let table: Vec<Value> = (0..=top)
            .map(|n| {
                shatter_function(&fam, n, &cfg).map(|pi| json!({"n": n, "pi": pi, "full": pi == 1u64 << n}))
            })
            .collect::<Result<_, _>>()?;
        let outputs = json!({"mode": mode_name(&fs.mode), "family_size": fam.distinct_count(), "pi": table});
        return Ok(report("shatter", inputs, None, start, vec![], outputs));
    }
    let points: Vec<Point> = a.points.iter().map(|p| parse_point(p)).collect::<Result<_>>()?;
    inputs.add("points", format!("{points:?}").as_bytes());
    let res = is_shattered(&fam, &points, &cfg)?;
    let check = Check::new(
        "shattered",
        res.is_some(),
        format!("{} points {}", points.len(), if res.is_some() { "shattered" } else { "not shattered" }),
    );
    let outputs = json!({"mode": mode_name(&fs.mode), "points": points, "witnesses": res});
    Ok(report("shatter", inputs, None, start, vec![check], outputs))
}

pub fn cmd_qe(a: &QeArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let (f, pf) = read_formula(&inputs.read(&a.formula)?, a.allow_div)?;
    let cfg = qe_config(a.max_atoms);
    inputs.add("cfg", format!("{cfg:?}").as_bytes());
    let out = eliminate_quantifiers_with(&f, &cfg)?;
    let qf = out.formula.into_formula();
    let text = match &pf {
        Some(pf) => print_partitioned(&PartitionedFormula::new(
            qf.clone(),
            pf.object_vars().to_vec(),
            pf.param_vars().to_vec(),
        )?),
        None => print(&qf),
    };
    let decided = match qf {
        Formula::True => Some(true),
        Formula::False => Some(false),
        _ => None,
    };
    let outputs = json!({"formula": text.trim_end(), "stats": out.stats, "sentence_value": decided});
    Ok(report("qe", inputs, None, start, vec![], outputs))
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let (f, pf) = read_formula(&inputs.read(&a.formula)?, a.allow_div)?;
    let s = shape(&f);
    let outputs = json!({
        "shape": s,
        "short_10_18": s.is_short(10, 18),
        "atoms": f.atom_count(),
        "free_vars": f.free_vars(),
        "quantified_vars": f.quantified_vars(),
        "object_vars": pf.as_ref().map(|p| p.object_vars().to_vec()),
        "param_vars": pf.as_ref().map(|p| p.param_vars().to_vec()),
    });
    Ok(report("analyze", inputs, None, start, vec![], outputs))
}

pub fn cmd_upperbound(a: &QeArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let pf = read_partitioned(&inputs.read(&a.formula)?, a.allow_div)?;
    let cfg = qe_config(a.max_atoms);
    inputs.add("cfg", format!("{cfg:?}").as_bytes());
    let r = upper_bound_via_qe(&pf, &cfg)?;
    Ok(report("upperbound", inputs, None, start, vec![], serde_json::to_value(&r)?))
}

pub fn cmd_convergents(a: &ConvergentsArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let cf = match (&a.terms, &a.rational) {
        (Some(t), _) => {
            inputs.add("terms", t.as_bytes());
            let terms = t
                .split(',')
                .map(|s| s.trim().parse::<BigInt>().with_context(|| format!("bad term {s:?}")))
                .collect::<Result<Vec<_>>>()?;
            ContinuedFraction::new(terms)?
        }
        (None, Some(r)) => {
            inputs.add("rational", r.as_bytes());
            let (p, q) = r.split_once('/').ok_or_else(|| anyhow!("expected p/q, got {r:?}"))?;
            ContinuedFraction::from_rational(&p.trim().parse()?, &q.trim().parse()?)?
        }
        (None, None) => bail!("pass --terms or --rational"),
    };
    let (p, q) = cf.to_rational();
    let outputs = json!({
        "fraction": cf,
        "convergents": cf.convergents(),
        "value": format!("{p}/{q}"),
    });
    Ok(report("convergents", inputs, None, start, vec![], outputs))
}

pub fn run_command(c: &Command) -> Result<RunReport> {
    match c {
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Vc(a) => cmd_vc(a),
        Command::Shatter(a) => cmd_shatter(a),
        Command::Qe(a) => cmd_qe(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Upperbound(a) => cmd_upperbound(a),
        Command::Convergents(a) => cmd_convergents(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_replicate_or_match() {
        assert_eq!(parse_windows("0..3", 2).unwrap(), vec![Interval::new(0, 3); 2]);
        assert_eq!(
            parse_windows("-1..1,2..5", 2).unwrap(),
            vec![Interval::new(-1, 1), Interval::new(2, 5)]
        );
        assert!(parse_windows("0..1,0..1,0..1", 2).is_err());
        assert!(parse_windows("3..1", 1).is_err());
        assert!(parse_windows("0-3", 1).is_err());
    }

    #[test]
    fn hints_and_points() {
        assert_eq!(parse_hint("z=-4..4").unwrap(), ("z".to_string(), Interval::new(-4, 4)));
        assert!(parse_hint("z:0..1").is_err());
        assert_eq!(parse_point("3,-2").unwrap(), vec![3, -2]);
        assert!(parse_point("3,x").is_err());
    }

    #[test]
    fn meta_next_to_formula() {
        assert_eq!(meta_path(Path::new("out/ft_d3.pa")), PathBuf::from("out/ft_d3.meta.json"));
    }

    #[test]
    fn digest_depends_on_inputs() {
        let digest = |parts: &[(&str, &str)]| {
            let mut i = Inputs::default();
            for (l, b) in parts {
                i.add(l, b.as_bytes());
            }
            i.finish()
        };
        assert_eq!(digest(&[("a", "x")]), digest(&[("a", "x")]));
        assert_ne!(digest(&[("a", "x")]), digest(&[("a", "y")]));
        // length prefixes keep label/body boundaries apart
        assert_ne!(digest(&[("ab", "c")]), digest(&[("a", "bc")]));
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["pavc", "vc", "--formula", "f.pa", "--ground", "-3..3"]).unwrap();
        assert!(matches!(c.command, Command::Vc(ref a) if a.ground.as_deref() == Some("-3..3")));
        assert!(Cli::try_parse_from(["pavc", "convergents"]).is_err());
    }
}
