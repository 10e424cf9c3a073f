//! `doper`: exact computations with dormant opers on the marked projective
//! line over small primes.
//!
//! Subcommands cover radius-class arithmetic, fusion rings and their degree
//! formulas, cyclotomic Verlinde sums, and construction and duality of
//! explicit opers. All arithmetic is exact; exit code 0 means success, 1 a
//! domain or validation failure, 2 a usage error.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Print a stdout line, swallowing broken-pipe errors so that piping into
/// `head` and friends ends the process quietly.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

use doper::fpcalc::{enumerate_radii, ExponentMultiset, Prime, RadiusClass};
use doper::funcfield::PointOnLine;
use doper::fusion::{
    self, build_fusion_ring, characters, genus_degree_with, sl2_table, transport_star,
    CharacterTable, FusionRingRep, ThreePointTable,
};
use doper::operengine::{
    brute_force_sl2_count, brute_force_sl2_oper, build_dpsi, determinant_data_construct,
    emit_oper, oper_check, oper_isomorphism, parse_oper, star_oper, unique_gl_pminus1,
    LineBundleDatum, MarkedLine, OperData, OperError,
};
use doper::verlinde::verlinde_degree;

#[derive(Parser)]
#[command(name = "doper", version, about = "Dormant-oper calculator over F_p")]
struct Cli {
    /// Emit JSON instead of aligned text where supported.
    #[arg(long, global = true)]
    json: bool,

    /// Emit degree results as CSV rows (columns p,n,genus,radii,method,value).
    #[arg(long, global = true)]
    csv: bool,

    /// Worker threads for the parallel summations (default: automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table cache directory (default: $DOPER_CACHE_DIR, then ./.doper-cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Recompute tables even when a cached copy exists.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Decimal digits carried by the real root isolation (default 35).
    #[arg(long, global = true)]
    digits: Option<u32>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Radius classes: enumeration, the star involution, exponent lifts.
    Radii {
        #[command(subcommand)]
        sub: RadiiCmd,
    },
    /// Fusion rings of radius classes and their degree formulas.
    Fusion {
        #[command(subcommand)]
        sub: FusionCmd,
    },
    /// Cyclotomic Verlinde sum (exact integer).
    Verlinde(VerlindeArgs),
    /// Construct, check, and dualize explicit opers.
    Oper {
        #[command(subcommand)]
        sub: OperCmd,
    },
}

#[derive(Subcommand)]
enum RadiiCmd {
    /// List radius classes of a given cardinality.
    Enumerate {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        /// Keep only classes with n distinct entries.
        #[arg(long)]
        distinct: bool,
    },
    /// Apply the star involution to one class.
    Star {
        #[arg(long)]
        p: u32,
        /// Class in bracket form, e.g. "[0,1]".
        #[arg(long)]
        rho: String,
    },
    /// Lift a class to the exponent multiset with a prescribed entry sum.
    Lift {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        rho: String,
        /// Required entry sum mod p.
        #[arg(long, default_value_t = 0)]
        sum: u32,
    },
}

#[derive(Subcommand)]
enum FusionCmd {
    /// Print (and cache) the three-point multiplicity table.
    Table {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Degree of the space attached to a genus and a tuple of insertions.
    Degree {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        genus: usize,
        /// Semicolon-separated insertion classes, e.g. "[0,1];[0,1];[0,1]".
        #[arg(long, default_value = "")]
        radii: String,
        #[arg(long, value_enum, default_value_t = Method::Character)]
        method: Method,
    },
    /// Check one separating factorization identity and print both sides.
    VerifyFactorization {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        g1: usize,
        #[arg(long)]
        g2: usize,
        /// Insertions on the first part.
        #[arg(long, default_value = "")]
        x: String,
        /// Insertions on the second part.
        #[arg(long, default_value = "")]
        y: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Character-sum formula (any genus).
    Character,
    /// Recursive reduction to three-point tables (genus 0 only).
    Factorization,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Character => "character",
            Method::Factorization => "factorization",
        }
    }
}

#[derive(Args)]
struct VerlindeArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    genus: usize,
    /// Also evaluate the sum at rank p-n and compare.
    #[arg(long)]
    check_duality: bool,
}

#[derive(Subcommand)]
enum OperCmd {
    /// Build the differential-operator oper of full rank p and validate it.
    Dpsi {
        #[arg(long)]
        p: u32,
        /// Comma-separated marked points, e.g. "0,1,inf".
        #[arg(long, default_value = "0,1,inf")]
        marked: String,
        /// Twisting divisor on marked points, e.g. "0:1,inf:-1".
        #[arg(long)]
        divisor: Option<String>,
        /// Log-tangent twist count of the seed bundle.
        #[arg(long, default_value_t = 0)]
        twist: i64,
        /// Write the certified oper to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star-dualize an oper file.
    Dualize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the result against this oper file for isomorphism.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Re-run every axiom on an oper file.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// The dormant rank-(p-1) oper attached to rank-1 determinant data.
    UniqueGlp1 {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value = "0,1,inf")]
        marked: String,
        /// Comma-separated residue exponents, one per marked point.
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count (0 or 1) rank-2 dormant opers with a prescribed radii triple.
    BruteSl2 {
        #[arg(long)]
        p: u32,
        /// Exactly three classes, e.g. "[0,1];[0,1];[0,1]".
        #[arg(long)]
        radii: String,
        /// Write the found oper (if any) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Settings shared by every command after argument resolution.
struct RunConfig {
    json: bool,
    csv: bool,
    cache_dir: PathBuf,
    no_cache: bool,
    digits: u32,
}

impl RunConfig {
    fn eps(&self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let cache_dir = cli
        .cache_dir
        .or_else(|| std::env::var_os("DOPER_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("./.doper-cache"));
    let digits = cli.digits.unwrap_or(35);
    if !(10..=300).contains(&digits) {
        return Err(format!("--digits {digits} out of range (10..=300)"));
    }
    let cfg = RunConfig {
        json: cli.json,
        csv: cli.csv,
        cache_dir,
        no_cache: cli.no_cache,
        digits,
    };
    match cli.cmd {
        Cmd::Radii { sub } => cmd_radii(&cfg, sub),
        Cmd::Fusion { sub } => cmd_fusion(&cfg, sub),
        Cmd::Verlinde(args) => cmd_verlinde(&cfg, args),
        Cmd::Oper { sub } => cmd_oper(&cfg, sub),
    }
}

// ---------------------------------------------------------------- parsing

fn parse_prime(p: u32) -> Result<Prime, String> {
    Prime::new(p).map_err(|e| e.to_string())
}

fn class_str(c: &RadiusClass) -> String {
    bracket(c.rep().entries())
}

fn bracket(entries: &[u32]) -> String {
    let inner: Vec<String> = entries.iter().map(|e| e.to_string()).collect();
    format!("[{}]", inner.join(","))
}

fn parse_class(p: Prime, s: &str) -> Result<RadiusClass, String> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|u| u.strip_suffix(']'))
        .ok_or_else(|| format!("class {t:?} is not in bracket form, e.g. \"[0,1]\""))?;
    let mut entries = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("class {t:?} has an empty entry"));
        }
        let v: u32 = part
            .parse()
            .map_err(|_| format!("class entry {part:?} is not a residue"))?;
        if v >= p.get() {
            return Err(format!("class entry {v} out of range for p={}", p.get()));
        }
        entries.push(v);
    }
    RadiusClass::from_entries(p, entries).map_err(|e| e.to_string())
}

fn parse_classes(p: Prime, s: &str) -> Result<Vec<RadiusClass>, String> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(';').map(|part| parse_class(p, part)).collect()
}

fn parse_points(p: Prime, s: &str) -> Result<Vec<PointOnLine>, String> {
    s.split(',')
        .map(|part| PointOnLine::parse(part, p).map_err(|e| e.to_string()))
        .collect()
}

fn parse_divisor(p: Prime, s: &str) -> Result<BTreeMap<PointOnLine, i64>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',') {
        let (pt, mult) = part
            .split_once(':')
            .ok_or_else(|| format!("divisor term {part:?} is not point:multiplicity"))?;
        let pt = PointOnLine::parse(pt, p).map_err(|e| e.to_string())?;
        let mult: i64 = mult
            .trim()
            .parse()
            .map_err(|_| format!("multiplicity {mult:?} is not an integer"))?;
        *out.entry(pt).or_insert(0) += mult;
    }
    Ok(out)
}

/// Name the first failed axiom when a batch check trips; otherwise pass the
/// error text through.
fn oper_err(e: OperError) -> String {
    match e {
        OperError::CheckFailed(list) if !list.is_empty() => {
            format!("oper check failed: {}", list[0])
        }
        other => other.to_string(),
    }
}

// ------------------------------------------------------------------ radii

fn cmd_radii(cfg: &RunConfig, sub: RadiiCmd) -> Result<(), String> {
    match sub {
        RadiiCmd::Enumerate { p, n, distinct } => {
            let p = parse_prime(p)?;
            if n == 0 || n > p.get() as usize {
                return Err(format!("cardinality {n} out of range for p={}", p.get()));
            }
            let classes = enumerate_radii(p, n, distinct);
            if cfg.json {
                let names: Vec<String> = classes.iter().map(class_str).collect();
                let doc = serde_json::json!({
                    "p": p.get(),
                    "n": n,
                    "distinct": distinct,
                    "classes": names,
                });
                out!("{doc}");
            } else {
                for c in &classes {
                    out!("{}", class_str(c));
                }
            }
            Ok(())
        }
        RadiiCmd::Star { p, rho } => {
            let p = parse_prime(p)?;
            let c = parse_class(p, &rho)?;
            let s = c.star().map_err(|e| e.to_string())?;
            if cfg.json {
                let doc = serde_json::json!({
                    "p": p.get(),
                    "rho": class_str(&c),
                    "star": class_str(&s),
                });
                out!("{doc}");
            } else {
                out!("{}", class_str(&s));
            }
            Ok(())
        }
        RadiiCmd::Lift { p, rho, sum } => {
            let p = parse_prime(p)?;
            let c = parse_class(p, &rho)?;
            let lifted = c.lift(sum).map_err(|e| e.to_string())?;
            if cfg.json {
                let doc = serde_json::json!({
                    "p": p.get(),
                    "rho": class_str(&c),
                    "sum": sum % p.get(),
                    "lift": bracket(lifted.entries()),
                });
                out!("{doc}");
            } else {
                out!("{}", bracket(lifted.entries()));
            }
            Ok(())
        }
    }
}

// ----------------------------------------------------------------- fusion

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn build_table(p: Prime, n: usize) -> Result<ThreePointTable, String> {
    let pv = p.get() as usize;
    if n == 2 {
        Ok(sl2_table(p))
    } else if pv >= 5 && n == pv - 2 {
        Ok(transport_star(&sl2_table(p)))
    } else {
        Err(format!(
            "three-point tables exist for cardinality 2 and p-2 (got n={n} at p={pv})"
        ))
    }
}

/// Fetch the (p, n) table from the cache when a content-verified copy
/// exists, else build it and write it back keyed by content hash.
fn load_or_build_table(cfg: &RunConfig, p: Prime, n: usize) -> Result<ThreePointTable, String> {
    let prefix = format!("table-p{}-n{}-", p.get(), n);
    if !cfg.no_cache {
        if let Ok(dir) = fs::read_dir(&cfg.cache_dir) {
            let mut names: Vec<String> = dir
                .flatten()
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|f| f.starts_with(&prefix) && f.ends_with(".json"))
                .collect();
            names.sort();
            for name in names {
                let path = cfg.cache_dir.join(&name);
                let Ok(text) = fs::read_to_string(&path) else {
                    continue;
                };
                let want = format!("{prefix}{:016x}.json", fnv1a64(text.as_bytes()));
                if name != want {
                    continue;
                }
                if let Ok(t) = fusion::table_from_json(&text) {
                    let same = t.prime() == p
                        && t.cardinality() == n
                        && fusion::table_to_json(&t) == text;
                    if same {
                        return Ok(t);
                    }
                }
            }
        }
    }
    let t = build_table(p, n)?;
    let text = fusion::table_to_json(&t);
    let name = format!("{prefix}{:016x}.json", fnv1a64(text.as_bytes()));
    fs::create_dir_all(&cfg.cache_dir)
        .map_err(|e| format!("cache dir {}: {e}", cfg.cache_dir.display()))?;
    let path = cfg.cache_dir.join(name);
    fs::write(&path, &text).map_err(|e| format!("cache write {}: {e}", path.display()))?;
    Ok(t)
}

fn ring_and_chars(
    cfg: &RunConfig,
    table: &ThreePointTable,
) -> Result<(FusionRingRep, CharacterTable), String> {
    let ring = build_fusion_ring(table).map_err(|e| e.to_string())?;
    let chars = characters(&ring, cfg.eps()).map_err(|e| e.to_string())?;
    Ok((ring, chars))
}

/// Genus-0 degree by repeated separating splits down to table lookups.
fn degree_by_factorization(table: &ThreePointTable, radii: &[usize]) -> u128 {
    let d = table.basis().len();
    match radii {
        [i, j, k] => table.value(*i, *j, *k) as u128,
        [i, j, rest @ ..] => {
            let mut total = 0u128;
            for lam in 0..d {
                let head = table.value(*i, *j, lam) as u128;
                if head == 0 {
                    continue;
                }
                let mut tail = Vec::with_capacity(rest.len() + 1);
                tail.push(lam);
                tail.extend_from_slice(rest);
                total += head * degree_by_factorization(table, &tail);
            }
            total
        }
        _ => unreachable!("callers pass at least three insertions"),
    }
}

fn print_degree(cfg: &RunConfig, p: Prime, n: usize, genus: usize, radii: &str, method: &str, value: u128) {
    if cfg.csv {
        out!("p,n,genus,radii,method,value");
        out!("{},{},{},\"{}\",{},{}", p.get(), n, genus, radii, method, value);
    } else {
        out!("{value}");
    }
}

fn cmd_fusion(cfg: &RunConfig, sub: FusionCmd) -> Result<(), String> {
    match sub {
        FusionCmd::Table { p, n } => {
            let p = parse_prime(p)?;
            let table = load_or_build_table(cfg, p, n)?;
            if cfg.json {
                out!("{}", fusion::table_to_json(&table));
            } else {
                out!("p {} n {}", p.get(), n);
                let names: Vec<String> = table.basis().iter().map(class_str).collect();
                out!("basis {}", names.join(" "));
                for ([i, j, k], v) in table.support() {
                    out!("{i} {j} {k} {v}");
                }
            }
            Ok(())
        }
        FusionCmd::Degree {
            p,
            n,
            genus,
            radii,
            method,
        } => {
            let p = parse_prime(p)?;
            let classes = parse_classes(p, &radii)?;
            let table = load_or_build_table(cfg, p, n)?;
            let value: u128 = match method {
                Method::Character => {
                    let (ring, chars) = ring_and_chars(cfg, &table)?;
                    genus_degree_with(&ring, &chars, genus, &classes)
                        .map_err(|e| e.to_string())? as u128
                }
                Method::Factorization => {
                    if genus != 0 {
                        return Err(
                            "the factorization method reduces to three-point tables and needs genus 0"
                                .into(),
                        );
                    }
                    if classes.len() < 3 {
                        return Err("genus 0 needs at least three insertions".into());
                    }
                    let mut idx = Vec::with_capacity(classes.len());
                    for c in &classes {
                        match table.index_of(c) {
                            Some(i) => idx.push(i),
                            // A class outside the basis kills the degree.
                            None => {
                                print_degree(cfg, p, n, genus, &radii, method.name(), 0);
                                return Ok(());
                            }
                        }
                    }
                    degree_by_factorization(&table, &idx)
                }
            };
            print_degree(cfg, p, n, genus, &radii, method.name(), value);
            Ok(())
        }
        FusionCmd::VerifyFactorization {
            p,
            n,
            g1,
            g2,
            x,
            y,
        } => {
            let p = parse_prime(p)?;
            let xs = parse_classes(p, &x)?;
            let ys = parse_classes(p, &y)?;
            let table = load_or_build_table(cfg, p, n)?;
            let (ring, chars) = ring_and_chars(cfg, &table)?;
            let ok = fusion::verify_factorization_with(&ring, &chars, g1, g2, &xs, &ys)
                .map_err(|e| e.to_string())?;
            let mut both = xs.clone();
            both.extend(ys.iter().cloned());
            let lhs = genus_degree_with(&ring, &chars, g1 + g2, &both)
                .map_err(|e| e.to_string())? as u128;
            let mut rhs = 0u128;
            for lam in table.basis() {
                let mut xl = xs.clone();
                xl.push(lam.clone());
                let mut yl = ys.clone();
                yl.push(lam.clone());
                let a = genus_degree_with(&ring, &chars, g1, &xl).map_err(|e| e.to_string())?;
                let b = genus_degree_with(&ring, &chars, g2, &yl).map_err(|e| e.to_string())?;
                rhs += a as u128 * b as u128;
            }
            if ok && lhs == rhs {
                out!("{lhs} == {rhs} OK");
                Ok(())
            } else {
                out!("{lhs} != {rhs} MISMATCH");
                Err("factorization identity failed".into())
            }
        }
    }
}

// --------------------------------------------------------------- verlinde

fn cmd_verlinde(cfg: &RunConfig, args: VerlindeArgs) -> Result<(), String> {
    let p = parse_prime(args.p)?;
    let value = verlinde_degree(p, args.n, args.genus).map_err(|e| e.to_string())?;
    if args.check_duality {
        let m = p.get() as usize - args.n;
        let dual = verlinde_degree(p, m, args.genus).map_err(|e| e.to_string())?;
        if value == dual {
            out!("{value} == {dual} OK");
            Ok(())
        } else {
            out!("{value} != {dual} MISMATCH");
            Err(format!(
                "rank duality failed at p={}, n={}, genus={}",
                p.get(),
                args.n,
                args.genus
            ))
        }
    } else {
        if cfg.csv {
            out!("p,n,genus,radii,method,value");
            out!(
                "{},{},{},\"\",cyclotomic,{}",
                p.get(),
                args.n,
                args.genus,
                value
            );
        } else {
            out!("{value}");
        }
        Ok(())
    }
}

// ------------------------------------------------------------------- oper

fn print_oper_summary(f: &OperData) -> Result<(), String> {
    let dormant = f.is_dormant().map_err(oper_err)?;
    out!(
        "rank {}, {}, degree {}",
        f.rank(),
        if dormant { "dormant" } else { "not dormant" },
        f.degree_reported()
    );
    let marked = f.base().marked().to_vec();
    let mut per_point: Vec<(PointOnLine, ExponentMultiset)> = Vec::new();
    for pt in &marked {
        per_point.push((*pt, f.exponents_at(*pt).map_err(oper_err)?));
    }
    let all_same = per_point.windows(2).all(|w| w[0].1 == w[1].1);
    if all_same && per_point.len() > 1 {
        out!(
            "exponents {} at all marked points",
            bracket(per_point[0].1.entries())
        );
    } else {
        for (pt, ex) in &per_point {
            out!("exponents at {pt}: {}", bracket(ex.entries()));
        }
    }
    Ok(())
}

fn write_oper(path: &PathBuf, f: &OperData) -> Result<(), String> {
    fs::write(path, emit_oper(f)).map_err(|e| format!("write {}: {e}", path.display()))
}

fn read_oper(path: &PathBuf) -> Result<OperData, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("read {}: {e}", path.display()))?;
    parse_oper(&text).map_err(oper_err)
}

fn cmd_oper(_cfg: &RunConfig, sub: OperCmd) -> Result<(), String> {
    match sub {
        OperCmd::Dpsi {
            p,
            marked,
            divisor,
            twist,
            out,
        } => {
            let p = parse_prime(p)?;
            let points = parse_points(p, &marked)?;
            let base = MarkedLine::new(p, &points).map_err(oper_err)?;
            let div = match divisor {
                Some(s) => parse_divisor(p, &s)?,
                None => BTreeMap::new(),
            };
            let mut b = LineBundleDatum::new(base.clone(), div, 0).map_err(oper_err)?;
            if twist != 0 {
                b = b.tensor(&LineBundleDatum::tangent_power(base, twist));
            }
            let f = build_dpsi(&b).map_err(oper_err)?;
            oper_check(&f).map_err(oper_err)?;
            print_oper_summary(&f)?;
            if let Some(path) = out {
                write_oper(&path, &f)?;
            }
            Ok(())
        }
        OperCmd::Dualize {
            input,
            out,
            compare,
        } => {
            let f = read_oper(&input)?;
            let s = star_oper(&f).map_err(oper_err)?;
            print_oper_summary(&s)?;
            if let Some(path) = out {
                write_oper(&path, &s)?;
            }
            if let Some(path) = compare {
                let g = read_oper(&path)?;
                let iso = oper_isomorphism(&s, &g).map_err(oper_err)?;
                let yes = iso.is_some();
                out!("isomorphic to original: {}", if yes { "yes" } else { "no" });
                if !yes {
                    return Err("the dual is not isomorphic to the comparison oper".into());
                }
            }
            Ok(())
        }
        OperCmd::Check { input } => {
            let f = read_oper(&input)?;
            oper_check(&f).map_err(oper_err)?;
            if !f.is_dormant().map_err(oper_err)? {
                return Err("the connection is not dormant".into());
            }
            print_oper_summary(&f)?;
            out!("all axioms hold");
            Ok(())
        }
        OperCmd::UniqueGlp1 {
            p,
            marked,
            exponents,
            out,
        } => {
            let p = parse_prime(p)?;
            let points = parse_points(p, &marked)?;
            let base = MarkedLine::new(p, &points).map_err(oper_err)?;
            let a: Vec<u32> = match exponents {
                Some(s) => {
                    let mut vals = Vec::new();
                    for part in s.split(',') {
                        let v: u32 = part
                            .trim()
                            .parse()
                            .map_err(|_| format!("exponent {part:?} is not a residue"))?;
                        vals.push(v % p.get());
                    }
                    vals
                }
                None => vec![0; base.r()],
            };
            let u = determinant_data_construct(&base, 1, &a).map_err(oper_err)?;
            let f = unique_gl_pminus1(&base, &u).map_err(oper_err)?;
            print_oper_summary(&f)?;
            if let Some(path) = out {
                write_oper(&path, &f)?;
            }
            Ok(())
        }
        OperCmd::BruteSl2 { p, radii, out } => {
            let p = parse_prime(p)?;
            let classes = parse_classes(p, &radii)?;
            let triple: [RadiusClass; 3] = classes
                .try_into()
                .map_err(|_| "expected exactly three classes".to_string())?;
            if let Some(path) = out {
                let found = brute_force_sl2_oper(p, &triple).map_err(oper_err)?;
                match found {
                    Some(f) => {
                        out!("1");
                        write_oper(&path, &f)?;
                    }
                    None => {
                        out!("0");
                        eprintln!("no oper with this radii triple; nothing written");
                    }
                }
            } else {
                let count = brute_force_sl2_count(p, &triple).map_err(oper_err)?;
                out!("{count}");
            }
            Ok(())
        }
    }
}
