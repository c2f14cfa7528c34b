//! Command implementations. Each returns a report or a classified error.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dcoset_core::abgroup::GroupElement;
use dcoset_core::affine::{check_restrict_properties, enumerate_orbits_capped, AffineError, PartitionComparison};
use dcoset_core::groupalg::{
    build_quotient_algebra, collision_poly_capped, evaluate_in_algebra, minimal_polynomial, FiniteDimAlgebra,
    GroupAlgError,
};
use dcoset_core::linalg::{self, ScalarField};
use dcoset_core::numfield::{coprimality_report, nu_scaled, resultant, Irreducibility};
use dcoset_core::poly::Poly;
use dcoset_core::semidirect::{
    double_cosets_bruteforce, double_cosets_via_orbits, verify_bijection, SdElement, SemidirectError, SemidirectGroup,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exit;
use crate::instance::{load_instance, parse_rational, Caps, Instance, LoadError};
use crate::report::{Report, Status};
use crate::selftest::{self, Mutation};

#[derive(Parser, Debug)]
#[command(
    name = "dcoset",
    version,
    about = "Affine orbits, double cosets in N x| A, group-ring quotients and number-field norms",
    after_help = exit::HELP
)]
pub struct Cli {
    /// Instance file (JSON, schema_version 1)
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,
    /// Seed for randomized commands; overrides the instance's seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest module or group size to enumerate; overrides the instance's caps
    #[arg(long, global = true)]
    pub cap_elements: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall-clock time in the report (makes it non-reproducible)
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Orbits,
    Bruteforce,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MutateArg {
    Untwisted,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orbits of the affine action of A on N
    Orbits {
        /// Include every orbit, not only representatives and sizes
        #[arg(long)]
        list: bool,
    },
    /// Double cosets A g B in N x| A, B the twin complement
    Doublecosets {
        #[arg(long, value_enum, default_value_t = Method::Orbits)]
        method: Method,
    },
    /// Match double cosets with affine orbits elementwise
    VerifyBijection,
    /// Minimal polynomial of the instance element in F[A]/J
    Minpoly,
    /// Polynomial killing the instance element, certified by orbit collisions
    CollisionPoly {
        /// Number of primes other than p to try
        #[arg(long)]
        prime_budget: Option<usize>,
    },
    /// Norms in the instance's number field
    Norm {
        /// Field element as comma-separated rationals in the generator, constant first;
        /// defaults to the images of the generators of A
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// (-n)^d mu(1/n) for a monic integral mu
    NuScaled {
        /// Comma-separated integer coefficients, constant first
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, allow_hyphen_values = true)]
        n: String,
    },
    /// Congruence and coprimality of nu_scaled(mu, n) for n = 1..=n_max
    Coprimality {
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long)]
        n_max: u64,
    },
    /// Restriction and quotient statements for the instance's submodule
    CheckRestrict,
    /// Randomized invariant suites
    Selftest {
        /// Cases per suite
        #[arg(long, default_value_t = selftest::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutateArg>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load(e) => e.exit_code(),
            CliError::Usage(_) => exit::USAGE,
            CliError::Refused(_) => exit::REFUSED,
            CliError::Inconclusive(_) => exit::INCONCLUSIVE,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<AffineError> for CliError {
    fn from(e: AffineError) -> Self {
        match e {
            AffineError::CapExceeded { .. } => CliError::Inconclusive(e.to_string()),
            _ => CliError::Refused(e.to_string()),
        }
    }
}

impl From<SemidirectError> for CliError {
    fn from(e: SemidirectError) -> Self {
        match e {
            SemidirectError::CapExceeded { .. } => CliError::Inconclusive(e.to_string()),
            SemidirectError::Affine(a) => a.into(),
            _ => CliError::Refused(e.to_string()),
        }
    }
}

impl From<GroupAlgError> for CliError {
    fn from(e: GroupAlgError) -> Self {
        match e {
            GroupAlgError::DimensionCapExceeded { .. } | GroupAlgError::BudgetExhausted { .. } => {
                CliError::Inconclusive(e.to_string())
            }
            GroupAlgError::Orbits(a) => a.into(),
            _ => CliError::Refused(e.to_string()),
        }
    }
}

pub fn status_code(s: Status) -> i32 {
    match s {
        Status::Ok => exit::OK,
        Status::Fail => exit::VERIFICATION_FAILED,
        Status::Inconclusive => exit::INCONCLUSIVE,
    }
}

fn num(x: &BigInt) -> Value {
    x.to_i64().map_or_else(|| Value::from(x.to_string()), Value::from)
}

fn coords(x: &GroupElement) -> Value {
    Value::Array(x.coords().iter().map(num).collect())
}

fn sd(x: &SdElement) -> Value {
    json!({"n": coords(&x.n), "a": coords(&x.a)})
}

fn poly_json(p: &Poly) -> Value {
    json!({"coeffs": p.coeff_strings(), "degree": p.degree(), "text": p.to_string()})
}

fn comparison(c: &PartitionComparison) -> Value {
    json!({
        "passed": c.passed,
        "expected_orbits": c.expected_orbits,
        "found_orbits": c.found_orbits,
        "witness": c.witness.as_ref().map(|w| w.iter().map(coords).collect::<Vec<_>>()),
    })
}

struct Context {
    instance: Option<Instance>,
    caps: Caps,
}

impl Context {
    fn instance(&self) -> Result<&Instance, CliError> {
        self.instance.as_ref().ok_or_else(|| CliError::Usage("this command needs --instance".into()))
    }
}

/// Runs one parsed command and builds its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let instance = cli.instance.as_deref().map(load_instance).transpose()?;
    let mut caps = instance.as_ref().map(|i| i.file.caps.clone()).unwrap_or_default();
    if let Some(c) = cli.cap_elements {
        caps.elements = c;
        caps.bruteforce = c;
    }
    let seed = cli.seed.or(instance.as_ref().and_then(|i| i.file.seed));
    let ctx = Context { instance, caps };
    let name = command_name(&cli.command);
    let (results, status) = match &cli.command {
        Command::Orbits { list } => orbits(&ctx, *list)?,
        Command::Doublecosets { method } => doublecosets(&ctx, *method)?,
        Command::VerifyBijection => bijection(&ctx)?,
        Command::Minpoly => minpoly(&ctx)?,
        Command::CollisionPoly { prime_budget } => collision(&ctx, prime_budget.unwrap_or(ctx.caps.prime_budget))?,
        Command::Norm { alpha } => norm(&ctx, alpha.as_deref())?,
        Command::NuScaled { mu, n } => nu_scaled_cmd(mu, n)?,
        Command::Coprimality { mu, n_max } => coprimality(mu, *n_max)?,
        Command::CheckRestrict => check_restrict(&ctx)?,
        Command::Selftest { budget, mutate } => {
            let opts = selftest::Options {
                seed: seed.unwrap_or(42),
                budget: *budget,
                mutation: mutate.map(|MutateArg::Untwisted| Mutation::Untwisted),
            };
            let (v, ok) = selftest::run(&opts);
            let mut r = Report::new(name, v, if ok { Status::Ok } else { Status::Fail });
            r.seed = Some(opts.seed);
            return Ok(r);
        }
    };
    let mut report = Report::new(name, results, status);
    report.seed = seed;
    report.instance_digest = ctx.instance.as_ref().map(|i| i.digest.clone());
    Ok(report)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Orbits { .. } => "orbits",
        Command::Doublecosets { .. } => "doublecosets",
        Command::VerifyBijection => "verify-bijection",
        Command::Minpoly => "minpoly",
        Command::CollisionPoly { .. } => "collision-poly",
        Command::Norm { .. } => "norm",
        Command::NuScaled { .. } => "nu-scaled",
        Command::Coprimality { .. } => "coprimality",
        Command::CheckRestrict => "check-restrict",
        Command::Selftest { .. } => "selftest",
    }
}

type Outcome = Result<(Value, Status), CliError>;

fn orbits(ctx: &Context, list: bool) -> Outcome {
    let inst = ctx.instance()?;
    let act = &inst.action;
    let p = enumerate_orbits_capped(act, ctx.caps.elements)?;
    let mut v = json!({
        "acting_group": act.acting().to_string(),
        "module": act.group().to_string(),
        "count": p.len(),
        "representatives": p.representatives().iter().map(coords).collect::<Vec<_>>(),
        "sizes": p.sizes(),
    });
    if list {
        v["orbits"] = p.orbits().iter().map(|o| o.iter().map(coords).collect::<Vec<_>>()).collect();
    }
    Ok((v, Status::Ok))
}

fn doublecosets(ctx: &Context, method: Method) -> Outcome {
    let inst = ctx.instance()?;
    let g = SemidirectGroup::from_action(&inst.action);
    let mut v = json!({"method": format!("{method:?}").to_lowercase()});
    let mut counts = Vec::new();
    if matches!(method, Method::Orbits | Method::Both) {
        let o = double_cosets_via_orbits(&g, ctx.caps.elements)?;
        counts.push(o.count);
        v["orbits"] = json!({
            "count": o.count,
            "representatives": o.representatives.iter().map(coords).collect::<Vec<_>>(),
        });
    }
    if matches!(method, Method::Bruteforce | Method::Both) {
        let b = double_cosets_bruteforce(&g, ctx.caps.bruteforce)?;
        counts.push(b.count());
        v["bruteforce"] = json!({
            "count": b.count(),
            "representatives": b.classes.iter().map(|c| sd(&c[0])).collect::<Vec<_>>(),
            "sizes": b.classes.iter().map(Vec::len).collect::<Vec<_>>(),
        });
    }
    let agree = counts.windows(2).all(|w| w[0] == w[1]);
    v["count"] = json!(counts[0]);
    if method == Method::Both {
        v["counts_agree"] = json!(agree);
    }
    Ok((v, if agree { Status::Ok } else { Status::Fail }))
}

fn bijection(ctx: &Context) -> Outcome {
    let inst = ctx.instance()?;
    let g = SemidirectGroup::from_action(&inst.action);
    let r = verify_bijection(&g, ctx.caps.bruteforce.min(ctx.caps.elements))?;
    let v = json!({
        "passed": r.passed,
        "coset_count": r.coset_count,
        "orbit_count": r.orbit_count,
        "matching": r.matching,
        "normal_form_holds": r.normal_form_holds,
        "failures": r.failures,
    });
    Ok((v, if r.passed { Status::Ok } else { Status::Fail }))
}

fn algebra(ctx: &Context) -> Result<(FiniteDimAlgebra, GroupElement), CliError> {
    let inst = ctx.instance()?;
    let (field, gens) = inst.ideal.as_ref().ok_or_else(|| CliError::Usage("instance has no ideal".into()))?;
    let a = inst.element.clone().ok_or_else(|| CliError::Usage("instance has no element".into()))?;
    let alg = build_quotient_algebra(inst.action.acting(), *field, gens, ctx.caps.dim)?;
    Ok((alg, a))
}

fn field_name(f: ScalarField) -> String {
    match f {
        ScalarField::Prime(p) => format!("Z_{p}"),
        ScalarField::Rational => "Q".into(),
    }
}

fn minpoly(ctx: &Context) -> Outcome {
    let (alg, a) = algebra(ctx)?;
    let f = minimal_polynomial(&alg, &a)?;
    let vanishes = linalg::is_zero_vec(&evaluate_in_algebra(&f, &a, &alg)?);
    let v = json!({
        "field": field_name(alg.field()),
        "dim": alg.dim(),
        "basis": alg.labels().iter().map(coords).collect::<Vec<_>>(),
        "element": coords(&a),
        "minimal_polynomial": poly_json(&f),
        "vanishes": vanishes,
    });
    Ok((v, if vanishes { Status::Ok } else { Status::Fail }))
}

fn collision(ctx: &Context, budget: usize) -> Outcome {
    let (alg, a) = algebra(ctx)?;
    let cert = match collision_poly_capped(&alg, &a, budget, ctx.caps.elements) {
        Ok(c) => c,
        Err(GroupAlgError::BudgetExhausted { tried }) => {
            return Ok((
                json!({"prime_budget": budget, "primes_tried": tried, "certificate": null}),
                Status::Inconclusive,
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let checks = cert.check(&alg);
    let v = json!({
        "prime_budget": budget,
        "field": field_name(alg.field()),
        "dim": alg.dim(),
        "certificate": {
            "element": coords(&cert.element),
            "q": cert.q,
            "r": cert.r,
            "witnesses": cert.witnesses.iter().map(coords).collect::<Vec<_>>(),
            "t": cert.t.iter().map(num).collect::<Vec<_>>(),
            "g1": poly_json(&cert.g1),
            "g2": poly_json(&cert.g2),
            "f": poly_json(&cert.f),
        },
        "checks": {
            "primes_distinct": checks.primes_distinct,
            "exponents_valid": checks.exponents_valid,
            "relation_holds": checks.relation_holds,
            "f_nonzero": checks.f_nonzero,
            "f_vanishes": checks.f_vanishes,
            "collisions_hold": checks.collisions_hold,
        },
    });
    Ok((v, if checks.all() { Status::Ok } else { Status::Fail }))
}

fn parse_list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CliError> {
    s.split(',').map(|t| parse(t.trim()).ok_or_else(|| CliError::Usage(format!("bad {what} entry '{t}'")))).collect()
}

fn norm(ctx: &Context, alpha: Option<&str>) -> Outcome {
    let inst = ctx.instance()?;
    let psi = inst.psi.as_ref().ok_or_else(|| CliError::Usage("instance has no number_field".into()))?;
    let k = psi.field();
    let elements = match alpha {
        Some(s) => vec![k.from_rationals(parse_list(s, "alpha", parse_rational)?)],
        None => psi.images().to_vec(),
    };
    let norms: Vec<Value> = elements
        .iter()
        .map(|x| {
            json!({
                "element": x.poly().coeff_strings(),
                "norm": k.norm(x).to_string(),
                "minimal_polynomial": poly_json(&k.minimal_polynomial(x)),
            })
        })
        .collect();
    let v = json!({
        "mu": poly_json(k.mu()),
        "degree": k.degree(),
        "irreducibility": match k.irreducibility() {
            Irreducibility::Verified => "verified",
            Irreducibility::Asserted => "asserted",
        },
        "norms": norms,
    });
    Ok((v, Status::Ok))
}

fn parse_mu(s: &str) -> Result<Vec<BigInt>, CliError> {
    let mu = parse_list(s, "mu", |t| t.parse::<BigInt>().ok())?;
    if mu.len() < 2 || mu.last() != Some(&BigInt::from(1)) {
        return Err(CliError::Usage("mu must be monic of degree >= 1, constant term first".into()));
    }
    Ok(mu)
}

fn nu_scaled_cmd(mu: &str, n: &str) -> Outcome {
    let mu = parse_mu(mu)?;
    let n: BigInt = n.parse().map_err(|_| CliError::Usage(format!("bad n '{n}'")))?;
    let value = nu_scaled(&mu, &n);
    // N(n alpha - 1) as a resultant with mu, computed independently
    let q = ScalarField::Rational;
    let lin = Poly::new(q, vec![BigRational::from_integer(BigInt::from(-1)), BigRational::from_integer(n.clone())]);
    let res = resultant(&Poly::from_bigints(q, &mu), &lin);
    let agree = res == BigRational::from_integer(value.clone());
    let v = json!({
        "mu": mu.iter().map(num).collect::<Vec<_>>(),
        "n": num(&n),
        "value": value.to_string(),
        "resultant": res.to_string(),
        "agree": agree,
    });
    Ok((v, if agree { Status::Ok } else { Status::Fail }))
}

fn coprimality(mu: &str, n_max: u64) -> Outcome {
    let mu = parse_mu(mu)?;
    let mut failures = Vec::new();
    let mut incomplete = 0usize;
    for n in 1..=n_max {
        let r = coprimality_report(&mu, &BigInt::from(n));
        if !r.complete {
            incomplete += 1;
        }
        if !r.passed() {
            failures.push(json!({
                "n": n,
                "value": r.value.to_string(),
                "residue": r.residue.to_string(),
                "expected_residue": r.expected_residue.to_string(),
                "gcd": r.gcd.to_string(),
            }));
        }
    }
    let ok = failures.is_empty();
    let v = json!({
        "mu": mu.iter().map(num).collect::<Vec<_>>(),
        "n_max": n_max,
        "checked": n_max,
        "failures": failures,
        "incompletely_factored": incomplete,
        "all_passed": ok,
    });
    Ok((v, if ok { Status::Ok } else { Status::Fail }))
}

fn check_restrict(ctx: &Context) -> Outcome {
    let inst = ctx.instance()?;
    let sub = inst.submodule.as_ref().ok_or_else(|| CliError::Usage("instance has no submodule".into()))?;
    let r = check_restrict_properties(&inst.action, sub, ctx.caps.elements)?;
    let v = json!({
        "passed": r.passed(),
        "stabilizer_index": num(&r.stabilizer_index),
        "intersections": comparison(&r.intersections),
        "images": comparison(&r.images),
    });
    Ok((v, if r.passed() { Status::Ok } else { Status::Fail }))
}
