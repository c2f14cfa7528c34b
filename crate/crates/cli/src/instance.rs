//! JSON instance files: schema, loading and validation.

use std::path::Path;

use dcoset_core::abgroup::{FgAbelianGroup, GroupElement, IntegerMatrix};
use dcoset_core::affine::AffineAction;
use dcoset_core::groupalg::{CoeffRing, GroupRingElement};
use dcoset_core::linalg::ScalarField;
use dcoset_core::modact::{Derivation, DerivationViolation, ModuleViolation, Submodule, ZAModule};
use dcoset_core::numfield::{AlgebraMapPsi, NumFieldError, NumberField};
use dcoset_core::poly::Poly;
use dcoset_core::primes::is_prime;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exit;

pub const SCHEMA_VERSION: u32 = 1;

/// An integer that may be written as a JSON number or, when large, a string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Small(i64),
    Big(String),
}

impl Int {
    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            Int::Small(v) => Some(BigInt::from(*v)),
            Int::Big(s) => s.trim().parse().ok(),
        }
    }
}

impl From<&BigInt> for Int {
    fn from(v: &BigInt) -> Self {
        v.to_i64().map_or_else(|| Int::Big(v.to_string()), Int::Small)
    }
}

/// A rational: a JSON integer or a string such as `"-3/4"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    Small(i64),
    Text(String),
}

impl Rational {
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Rational::Small(v) => Some(BigRational::from_integer(BigInt::from(*v))),
            Rational::Text(s) => parse_rational(s),
        }
    }
}

impl From<&BigRational> for Rational {
    fn from(v: &BigRational) -> Self {
        match (v.is_integer(), v.to_integer().to_i64()) {
            (true, Some(i)) => Rational::Small(i),
            _ => Rational::Text(v.to_string()),
        }
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub free_rank: usize,
    #[serde(default)]
    pub torsion: Vec<Int>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub group: GroupSpec,
    /// One square matrix per generator of `A`, acting on coordinate columns.
    pub action: Vec<Vec<Vec<Int>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationSpec {
    pub values: Vec<Vec<Int>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmoduleSpec {
    pub generators: Vec<Vec<Int>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingTag {
    Zp,
    Q,
}

/// A group ring element as a list of `[exponent vector, coefficient]` terms.
pub type TermList = Vec<(Vec<Int>, Rational)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealSpec {
    pub ring: RingTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub generators: Vec<TermList>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumberFieldSpec {
    /// Monic defining polynomial, constant term first.
    pub mu: Vec<Rational>,
    /// Image of each generator of `A`, as a polynomial in the field generator.
    pub psi: Vec<Vec<Rational>>,
    #[serde(default)]
    pub irreducible_asserted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "Caps::default_elements")]
    pub elements: u64,
    #[serde(default = "Caps::default_bruteforce")]
    pub bruteforce: u64,
    #[serde(default = "Caps::default_dim")]
    pub dim: usize,
    #[serde(default = "Caps::default_prime_budget")]
    pub prime_budget: usize,
}

impl Caps {
    fn default_elements() -> u64 {
        dcoset_core::affine::DEFAULT_ELEMENT_CAP
    }
    fn default_bruteforce() -> u64 {
        dcoset_core::semidirect::DEFAULT_BRUTEFORCE_CAP
    }
    fn default_dim() -> usize {
        dcoset_core::groupalg::DEFAULT_DIM_CAP
    }
    fn default_prime_budget() -> usize {
        25
    }
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            elements: Self::default_elements(),
            bruteforce: Self::default_bruteforce(),
            dim: Self::default_dim(),
            prime_budget: Self::default_prime_budget(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub acting_group: GroupSpec,
    pub module: ModuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submodule: Option<SubmoduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal: Option<IdealSpec>,
    /// An element of `A`, used by `minpoly` and `collision-poly`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<Int>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number_field: Option<NumberFieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violation at {path}: {message}")]
    Invariant { path: String, message: String },
}

impl LoadError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LoadError::Io { .. } => exit::IO,
            LoadError::Parse(_) => exit::PARSE,
            LoadError::Schema { .. } => exit::SCHEMA,
            LoadError::Invariant { .. } => exit::INVARIANT,
        }
    }

    /// JSON path of the offending field, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            LoadError::Schema { path, .. } | LoadError::Invariant { path, .. } => Some(path),
            _ => None,
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Schema { path: path.into(), message: message.into() }
}

fn invariant(path: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Invariant { path: path.into(), message: message.into() }
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub file: InstanceFile,
    /// Hex sha256 of the bytes the instance was read from.
    pub digest: String,
    pub action: AffineAction,
    pub submodule: Option<Submodule>,
    pub ideal: Option<(ScalarField, Vec<GroupRingElement>)>,
    pub element: Option<GroupElement>,
    pub psi: Option<AlgebraMapPsi>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_instance(path: &Path) -> Result<Instance, LoadError> {
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_instance(&bytes)
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance, LoadError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let file: InstanceFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            schema(path, inner.to_string())
        } else {
            LoadError::Parse(inner.to_string())
        }
    })?;
    de.end().map_err(|e| LoadError::Parse(e.to_string()))?;
    let mut inst = validate(file)?;
    inst.digest = digest(bytes);
    Ok(inst)
}

fn bigints(path: &str, xs: &[Int]) -> Result<Vec<BigInt>, LoadError> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| x.to_bigint().ok_or_else(|| schema(format!("{path}[{i}]"), "not an integer")))
        .collect()
}

fn group(path: &str, g: &GroupSpec) -> Result<FgAbelianGroup, LoadError> {
    let torsion = bigints(&format!("{path}.torsion"), &g.torsion)?;
    FgAbelianGroup::new(g.free_rank, torsion).map_err(|e| schema(format!("{path}.torsion"), e.to_string()))
}

fn element(path: &str, g: &FgAbelianGroup, xs: &[Int]) -> Result<GroupElement, LoadError> {
    g.element(bigints(path, xs)?).map_err(|e| schema(path, e.to_string()))
}

fn rationals(path: &str, xs: &[Rational]) -> Result<Vec<BigRational>, LoadError> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| x.to_rational().ok_or_else(|| schema(format!("{path}[{i}]"), "not a rational number")))
        .collect()
}

/// Checks every invariant and builds the core objects.
pub fn validate(file: InstanceFile) -> Result<Instance, LoadError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(schema(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        ));
    }
    let acting = group("acting_group", &file.acting_group)?;
    let ngroup = group("module.group", &file.module.group)?;
    let n = ngroup.ngens();
    if file.module.action.len() != acting.ngens() {
        return Err(schema(
            "module.action",
            format!("expected {} matrices, one per generator of A, found {}", acting.ngens(), file.module.action.len()),
        ));
    }
    let mut mats = Vec::new();
    for (i, m) in file.module.action.iter().enumerate() {
        let path = format!("module.action[{i}]");
        if m.len() != n {
            return Err(schema(path, format!("expected {n} rows, found {}", m.len())));
        }
        let mut rows = Vec::new();
        for (r, row) in m.iter().enumerate() {
            let rp = format!("{path}[{r}]");
            if row.len() != n {
                return Err(schema(rp, format!("expected {n} entries, found {}", row.len())));
            }
            rows.push(bigints(&rp, row)?);
        }
        mats.push(IntegerMatrix::from_rows_with_cols(&rows, n));
    }
    let module = ZAModule::new(acting.clone(), ngroup.clone(), mats).map_err(|e| {
        let path = match &e {
            ModuleViolation::Endomorphism { generator, .. }
            | ModuleViolation::NotInvertible { generator }
            | ModuleViolation::TorsionOrder { generator, .. } => format!("module.action[{generator}]"),
            ModuleViolation::NotCommuting { first, .. } => format!("module.action[{first}]"),
            ModuleViolation::GeneratorCount { .. } => "module.action".to_string(),
        };
        invariant(path, e.to_string())
    })?;

    let derivation = match &file.derivation {
        None => Derivation::zero(&module),
        Some(d) => {
            if d.values.len() != acting.ngens() {
                return Err(schema(
                    "derivation.values",
                    format!("expected {} values, one per generator of A, found {}", acting.ngens(), d.values.len()),
                ));
            }
            let values = d
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| element(&format!("derivation.values[{i}]"), &ngroup, v))
                .collect::<Result<Vec<_>, _>>()?;
            Derivation::new(&module, values).map_err(|e| {
                let path = match &e {
                    DerivationViolation::Value { generator, .. }
                    | DerivationViolation::TorsionNorm { generator, .. } => format!("derivation.values[{generator}]"),
                    DerivationViolation::Commutation { first, .. } => format!("derivation.values[{first}]"),
                    DerivationViolation::GeneratorCount { .. } => "derivation.values".to_string(),
                };
                invariant(path, format!("derivation: {e}"))
            })?
        }
    };

    let submodule = match &file.submodule {
        None => None,
        Some(s) => {
            let gens = s
                .generators
                .iter()
                .enumerate()
                .map(|(i, v)| element(&format!("submodule.generators[{i}]"), &ngroup, v))
                .collect::<Result<Vec<_>, _>>()?;
            Some(module.submodule_generated(&gens).map_err(|e| invariant("submodule.generators", e.to_string()))?)
        }
    };

    let ideal = match &file.ideal {
        None => None,
        Some(spec) => {
            let field = match (spec.ring, spec.p) {
                (RingTag::Zp, Some(p)) if is_prime(p) => ScalarField::Prime(p),
                (RingTag::Zp, Some(p)) => return Err(schema("ideal.p", format!("{p} is not prime"))),
                (RingTag::Zp, None) => return Err(schema("ideal.p", "ring Zp needs a prime p")),
                (RingTag::Q, None) => ScalarField::Rational,
                (RingTag::Q, Some(_)) => return Err(schema("ideal.p", "p is only allowed with ring Zp")),
            };
            let gens = spec
                .generators
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    group_ring_element(&format!("ideal.generators[{i}]"), &acting, CoeffRing::from_field(field), t)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some((field, gens))
        }
    };

    let element = file.element.as_ref().map(|e| element("element", &acting, e)).transpose()?;

    let psi = match &file.number_field {
        None => None,
        Some(spec) => {
            let mu = Poly::new(ScalarField::Rational, rationals("number_field.mu", &spec.mu)?);
            let field = NumberField::new(mu, spec.irreducible_asserted)
                .map_err(|e| invariant("number_field.mu", e.to_string()))?;
            if spec.psi.len() != acting.ngens() {
                return Err(schema(
                    "number_field.psi",
                    format!("expected {} images, one per generator of A, found {}", acting.ngens(), spec.psi.len()),
                ));
            }
            let images = spec
                .psi
                .iter()
                .enumerate()
                .map(|(i, c)| Ok(field.from_rationals(rationals(&format!("number_field.psi[{i}]"), c)?)))
                .collect::<Result<Vec<_>, LoadError>>()?;
            let killed = match &ideal {
                Some((ScalarField::Rational, gens)) => gens.clone(),
                _ => Vec::new(),
            };
            Some(AlgebraMapPsi::new(field, acting.clone(), images, killed).map_err(|e| {
                let path = match &e {
                    NumFieldError::NotInvertible(i) => format!("number_field.psi[{i}]"),
                    NumFieldError::TorsionOrder { generator, .. } => format!("number_field.psi[{generator}]"),
                    NumFieldError::IdealNotKilled(i) => format!("ideal.generators[{i}]"),
                    _ => "number_field.psi".to_string(),
                };
                invariant(path, e.to_string())
            })?)
        }
    };

    let action = AffineAction::new(module, derivation).map_err(|e| invariant("derivation", e.to_string()))?;
    Ok(Instance { file, digest: String::new(), action, submodule, ideal, element, psi })
}

fn group_ring_element(
    path: &str,
    acting: &FgAbelianGroup,
    ring: CoeffRing,
    terms: &TermList,
) -> Result<GroupRingElement, LoadError> {
    let mut parsed = Vec::new();
    for (j, (exp, c)) in terms.iter().enumerate() {
        let g = element(&format!("{path}[{j}][0]"), acting, exp)?;
        let c = c.to_rational().ok_or_else(|| schema(format!("{path}[{j}][1]"), "not a rational number"))?;
        parsed.push((g, c));
    }
    GroupRingElement::from_terms(acting, ring, parsed).map_err(|e| schema(path, e.to_string()))
}

fn group_spec(g: &FgAbelianGroup) -> GroupSpec {
    GroupSpec { free_rank: g.free_rank(), torsion: g.torsion().iter().map(Int::from).collect() }
}

fn ints(x: &GroupElement) -> Vec<Int> {
    x.coords().iter().map(Int::from).collect()
}

/// Serialises an affine action as an instance file.
pub fn instance_from_action(act: &AffineAction) -> InstanceFile {
    let m = act.module();
    InstanceFile {
        schema_version: SCHEMA_VERSION,
        acting_group: group_spec(m.acting()),
        module: ModuleSpec {
            group: group_spec(m.group()),
            action: m
                .actions()
                .iter()
                .map(|a| a.to_rows().iter().map(|r| r.iter().map(Int::from).collect()).collect())
                .collect(),
        },
        derivation: Some(DerivationSpec { values: act.derivation().values().iter().map(ints).collect() }),
        submodule: None,
        ideal: None,
        element: None,
        number_field: None,
        seed: None,
        caps: Caps::default(),
    }
}

pub fn submodule_spec(sub: &Submodule) -> SubmoduleSpec {
    SubmoduleSpec { generators: sub.generators().iter().map(ints).collect() }
}

/// Serialises a group ring element as a term list.
pub fn term_list(z: &GroupRingElement) -> TermList {
    z.terms().map(|(g, c)| (ints(g), Rational::from(c))).collect()
}
