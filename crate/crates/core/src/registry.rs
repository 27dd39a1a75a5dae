//! Service and formula registries.
//!
//! A [`Registry`] is loaded from a JSON file and holds three kinds of
//! records the composer draws from:
//!
//! * **base services** — exactly evaluable operations, indexed by
//!   [`Signature`] (operation name + arity);
//! * **approximation formulas** — rewrite rules `lhs → rhs` with a bound
//!   on their absolute error and an optional validity predicate, kept in
//!   file order;
//! * **numerical-method services** — fallback implementations of an
//!   operation, each carrying the asymptotic complexity of its method.
//!
//! Numeric services for the same signature are classified by growth rate
//! once at load time, so [`Registry::find_best_numeric`] is a plain lookup:
//! it returns the candidate from the slowest-growing Θ-class, breaking ties
//! by lexicographically smallest id.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::classifier::{classify, ClassifiedLibrary};
use crate::comparator::{ComparatorConfig, ComplexityFn};
use crate::expr::{
    decompose_top, eval, match_pattern, parse, substitute, Bindings, EvalMode, Expr, Signature,
};

/// An exactly evaluable operation.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseService {
    pub id: String,
    pub operation: String,
    pub arity: usize,
    /// Executable body over the parameter variables `p1 .. pArity`.
    pub implementation: Expr,
    pub description: Option<String>,
}

/// A rewrite rule `lhs → rhs` with an error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxFormula {
    pub id: String,
    /// Pattern the rule applies to, e.g. `sin(?x)`.
    pub lhs: Expr,
    /// Replacement, over the pattern variables of `lhs`.
    pub rhs: Expr,
    /// Absolute-error bound, over the pattern variables of `lhs`.
    pub error: Expr,
    /// Optional applicability predicate; the rule applies where it is
    /// positive.
    pub validity: Option<Expr>,
    pub description: Option<String>,
}

/// Outcome of checking an [`ApproxFormula`]'s validity predicate against a
/// concrete set of bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityStatus {
    /// No predicate, or the predicate evaluated to a positive number.
    Satisfied,
    /// The predicate evaluated to zero or a negative number.
    Violated,
    /// The bindings are not all literals, or evaluation failed; the rule
    /// may still be used, with the predicate recorded as an assumption.
    Undecidable,
}

/// A fallback implementation of an operation by a numerical method.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericService {
    pub id: String,
    pub operation: String,
    pub arity: usize,
    /// Asymptotic cost of the method, as a function of input size.
    pub complexity: ComplexityFn,
    /// Executable body over the parameter variables `p1 .. pArity`.
    pub implementation: Expr,
    pub description: Option<String>,
}

impl BaseService {
    pub fn signature(&self) -> Signature {
        Signature::op(self.operation.clone(), self.arity)
    }
}

impl NumericService {
    pub fn signature(&self) -> Signature {
        Signature::op(self.operation.clone(), self.arity)
    }
}

impl ApproxFormula {
    /// Classify the validity predicate under `bindings`.
    ///
    /// Decidable only when every binding is a number literal: the predicate
    /// is instantiated and evaluated, and counts as satisfied when the
    /// value is strictly positive. Anything short of that — free variables
    /// in the bindings, or an evaluation error — is [`Undecidable`], which
    /// callers surface as an assumption rather than a refusal.
    ///
    /// [`Undecidable`]: ValidityStatus::Undecidable
    pub fn validity_status(&self, bindings: &Bindings) -> ValidityStatus {
        let Some(pred) = &self.validity else {
            return ValidityStatus::Satisfied;
        };
        if !bindings.all_literal() {
            return ValidityStatus::Undecidable;
        }
        let instantiated = match substitute(pred, bindings) {
            Ok(e) => e,
            Err(_) => return ValidityStatus::Undecidable,
        };
        match eval(&instantiated, &Default::default(), EvalMode::Linear) {
            Ok(v) if v > 0.0 => ValidityStatus::Satisfied,
            Ok(_) => ValidityStatus::Violated,
            Err(_) => ValidityStatus::Undecidable,
        }
    }
}

/// Numeric services sharing one signature, with their load-time
/// classification by complexity.
#[derive(Debug, Clone, PartialEq)]
struct NumericGroup {
    /// File order, as loaded.
    services: Vec<NumericService>,
    /// Θ-classes of the candidates' complexity functions, slowest-growing
    /// first; member ids are service ids.
    classes: ClassifiedLibrary,
}

/// A loaded registry of base services, approximation formulas, and
/// numerical-method services.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    services: Vec<BaseService>,
    service_index: BTreeMap<Signature, usize>,
    formulas: Vec<ApproxFormula>,
    numeric: BTreeMap<Signature, NumericGroup>,
}

/// Error from loading or validating a registry file.
#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry: {0}")]
    Io(#[from] std::io::Error),
    #[error("registry is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate id \"{0}\"")]
    DuplicateId(String),
    #[error("{record}, field \"{field}\": {problem}")]
    Invalid {
        /// Which record, e.g. `service "add"`.
        record: String,
        /// Which field of that record.
        field: &'static str,
        problem: String,
    },
}

impl RegistryError {
    fn invalid(record: String, field: &'static str, problem: impl Into<String>) -> RegistryError {
        RegistryError::Invalid {
            record,
            field,
            problem: problem.into(),
        }
    }
}

// Raw shape of the JSON file. Expressions stay strings here and are parsed
// during validation so errors can name the record and field.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    services: Vec<RawService>,
    #[serde(default)]
    formulas: Vec<RawFormula>,
    #[serde(default)]
    numeric_services: Vec<RawNumeric>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawService {
    id: String,
    operation: String,
    arity: usize,
    #[serde(rename = "impl")]
    implementation: String,
    #[serde(default)]
    description: Option<String>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormula {
    id: String,
    lhs: String,
    rhs: String,
    error: String,
    #[serde(default)]
    validity: Option<String>,
    #[serde(default)]
    description: Option<String>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumeric {
    id: String,
    operation: String,
    arity: usize,
    complexity: String,
    #[serde(rename = "impl")]
    implementation: String,
    #[serde(default)]
    description: Option<String>,
}

/// Parse one expression field, mapping failure to a record-located error.
fn parse_field(record: &str, field: &'static str, src: &str) -> Result<Expr, RegistryError> {
    parse(src).map_err(|e| RegistryError::invalid(record.to_owned(), field, e.to_string()))
}

/// Check that an implementation body is executable given `arity` parameters:
/// no pattern variables, and free variables drawn from `p1 .. pArity`.
fn check_impl_vars(record: &str, e: &Expr, arity: usize) -> Result<(), RegistryError> {
    if let Some(p) = e.pattern_vars().iter().next() {
        return Err(RegistryError::invalid(
            record.to_owned(),
            "impl",
            format!("pattern variable ?{p} not allowed in an implementation"),
        ));
    }
    let params: BTreeSet<String> = (1..=arity).map(|i| format!("p{i}")).collect();
    for v in e.free_vars() {
        if !params.contains(v) {
            return Err(RegistryError::invalid(
                record.to_owned(),
                "impl",
                format!("variable {v} is not among the parameters p1..p{arity}"),
            ));
        }
    }
    Ok(())
}

/// Check that `e`'s pattern variables are a subset of the lhs's.
fn check_pattern_subset(
    record: &str,
    field: &'static str,
    e: &Expr,
    lhs_vars: &BTreeSet<&str>,
) -> Result<(), RegistryError> {
    // Collect first: the borrow of `e` must not escape into the error path.
    let extra: Vec<String> = e
        .pattern_vars()
        .iter()
        .filter(|v| !lhs_vars.contains(*v))
        .map(|v| (*v).to_owned())
        .collect();
    if let Some(v) = extra.first() {
        return Err(RegistryError::invalid(
            record.to_owned(),
            field,
            format!("pattern variable ?{v} does not occur in the lhs"),
        ));
    }
    Ok(())
}

impl Registry {
    /// Parse and validate a registry from JSON text.
    ///
    /// `cfg` drives the load-time classification of numeric services that
    /// share a signature.
    pub fn from_json(src: &str, cfg: &ComparatorConfig) -> Result<Registry, RegistryError> {
        let raw: RegistryFile = serde_json::from_str(src)?;

        let mut ids = BTreeSet::new();
        let mut claim = |id: &str| -> Result<(), RegistryError> {
            if !ids.insert(id.to_owned()) {
                return Err(RegistryError::DuplicateId(id.to_owned()));
            }
            Ok(())
        };
        for s in &raw.services {
            claim(&s.id)?;
        }
        for f in &raw.formulas {
            claim(&f.id)?;
        }
        for n in &raw.numeric_services {
            claim(&n.id)?;
        }

        let mut services: Vec<BaseService> = Vec::with_capacity(raw.services.len());
        let mut service_index = BTreeMap::new();
        for s in raw.services {
            let record = format!("service \"{}\"", s.id);
            let implementation = parse_field(&record, "impl", &s.implementation)?;
            check_impl_vars(&record, &implementation, s.arity)?;
            let svc = BaseService {
                id: s.id,
                operation: s.operation,
                arity: s.arity,
                implementation,
                description: s.description,
            };
            match service_index.entry(svc.signature()) {
                Entry::Vacant(slot) => {
                    slot.insert(services.len());
                }
                Entry::Occupied(prev) => {
                    let prev_id = &services[*prev.get()].id;
                    return Err(RegistryError::invalid(
                        record,
                        "operation",
                        format!(
                            "signature {} already provided by service \"{prev_id}\"",
                            svc.signature()
                        ),
                    ));
                }
            }
            services.push(svc);
        }

        let mut formulas = Vec::with_capacity(raw.formulas.len());
        for f in raw.formulas {
            let record = format!("formula \"{}\"", f.id);
            let lhs = parse_field(&record, "lhs", &f.lhs)?;
            let rhs = parse_field(&record, "rhs", &f.rhs)?;
            let error = parse_field(&record, "error", &f.error)?;
            let validity = match &f.validity {
                Some(src) => Some(parse_field(&record, "validity", src)?),
                None => None,
            };
            let lhs_vars = lhs.pattern_vars();
            check_pattern_subset(&record, "rhs", &rhs, &lhs_vars)?;
            check_pattern_subset(&record, "error", &error, &lhs_vars)?;
            if let Some(v) = &validity {
                check_pattern_subset(&record, "validity", v, &lhs_vars)?;
            }
            formulas.push(ApproxFormula {
                id: f.id,
                lhs,
                rhs,
                error,
                validity,
                description: f.description,
            });
        }

        let mut by_sig: BTreeMap<Signature, Vec<NumericService>> = BTreeMap::new();
        for n in raw.numeric_services {
            let record = format!("numeric service \"{}\"", n.id);
            let complexity = ComplexityFn::parse(&n.complexity)
                .map_err(|e| RegistryError::invalid(record.clone(), "complexity", e.to_string()))?;
            let implementation = parse_field(&record, "impl", &n.implementation)?;
            check_impl_vars(&record, &implementation, n.arity)?;
            let svc = NumericService {
                id: n.id,
                operation: n.operation,
                arity: n.arity,
                complexity,
                implementation,
                description: n.description,
            };
            by_sig.entry(svc.signature()).or_default().push(svc);
        }
        let mut numeric = BTreeMap::new();
        for (sig, group) in by_sig {
            let fns = group
                .iter()
                .map(|s| (s.id.clone(), s.complexity.clone()))
                .collect();
            // Ids are globally unique, so classification cannot fail.
            let classes = classify(fns, cfg).expect("numeric service ids are unique");
            numeric.insert(
                sig,
                NumericGroup {
                    services: group,
                    classes,
                },
            );
        }

        Ok(Registry {
            services,
            service_index,
            formulas,
            numeric,
        })
    }

    /// Load a registry from a JSON file.
    pub fn load(path: impl AsRef<Path>, cfg: &ComparatorConfig) -> Result<Registry, RegistryError> {
        let src = std::fs::read_to_string(path)?;
        Registry::from_json(&src, cfg)
    }

    /// Base services, in file order.
    pub fn services(&self) -> &[BaseService] {
        &self.services
    }

    /// Approximation formulas, in file order.
    pub fn formulas(&self) -> &[ApproxFormula] {
        &self.formulas
    }

    /// Numeric services for `sig`, in file order.
    pub fn numeric_services(&self, sig: &Signature) -> &[NumericService] {
        self.numeric.get(sig).map_or(&[], |g| &g.services)
    }

    /// Θ-classes of the numeric candidates for `sig`, slowest first.
    pub fn numeric_classes(&self, sig: &Signature) -> Option<&ClassifiedLibrary> {
        self.numeric.get(sig).map(|g| &g.classes)
    }

    /// Exact lookup of the base service for a signature.
    pub fn find_service(&self, sig: &Signature) -> Option<&BaseService> {
        self.service_index.get(sig).map(|&i| &self.services[i])
    }

    /// Base service by id.
    pub fn service_by_id(&self, id: &str) -> Option<&BaseService> {
        self.services.iter().find(|s| s.id == id)
    }

    /// Formula by id.
    pub fn formula_by_id(&self, id: &str) -> Option<&ApproxFormula> {
        self.formulas.iter().find(|f| f.id == id)
    }

    /// Numeric service by id.
    pub fn numeric_by_id(&self, id: &str) -> Option<&NumericService> {
        self.numeric
            .values()
            .flat_map(|g| g.services.iter())
            .find(|s| s.id == id)
    }

    /// First formula (in file order) whose lhs matches `e` at the root and
    /// whose validity predicate is not decidably violated, with the
    /// bindings of the match.
    pub fn find_formula(&self, e: &Expr) -> Option<(&ApproxFormula, Bindings)> {
        for f in &self.formulas {
            if let Some(b) = match_pattern(&f.lhs, e) {
                if f.validity_status(&b) != ValidityStatus::Violated {
                    return Some((f, b));
                }
            }
        }
        None
    }

    /// Cheapest numeric service for a signature: a member of the
    /// slowest-growing Θ-class among the candidates, ties broken by
    /// lexicographically smallest id.
    pub fn find_best_numeric(&self, sig: &Signature) -> Option<&NumericService> {
        let group = self.numeric.get(sig)?;
        let first = group.classes.classes().first()?;
        let best_id = first.ids().min()?.to_owned();
        group.services.iter().find(|s| s.id == best_id)
    }

    /// The signature of `e`'s root, for lookups against this registry.
    pub fn signature_of(e: &Expr) -> Signature {
        decompose_top(e).0
    }
}

/// Load a registry from a JSON file. See [`Registry::load`].
pub fn load_registry(
    path: impl AsRef<Path>,
    cfg: &ComparatorConfig,
) -> Result<Registry, RegistryError> {
    Registry::load(path, cfg)
}

/// Exact base-service lookup. See [`Registry::find_service`].
pub fn find_service<'r>(reg: &'r Registry, sig: &Signature) -> Option<&'r BaseService> {
    reg.find_service(sig)
}

/// First applicable formula with its bindings. See [`Registry::find_formula`].
pub fn find_formula<'r>(reg: &'r Registry, e: &Expr) -> Option<(&'r ApproxFormula, Bindings)> {
    reg.find_formula(e)
}

/// Cheapest numeric fallback. See [`Registry::find_best_numeric`].
pub fn find_best_numeric<'r>(reg: &'r Registry, sig: &Signature) -> Option<&'r NumericService> {
    reg.find_best_numeric(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparator::{comp, CompOutcome};

    fn cfg() -> ComparatorConfig {
        ComparatorConfig::default()
    }

    const DESK: &str = r#"{
        "services": [
            {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + p2"},
            {"id": "mul", "operation": "*", "arity": 2, "impl": "p1 * p2"},
            {"id": "neg", "operation": "-", "arity": 1, "impl": "-p1"},
            {"id": "square", "operation": "sq", "arity": 1, "impl": "p1 * p1",
             "description": "squaring as a named call"}
        ],
        "formulas": [
            {"id": "taylor_sin", "lhs": "sin(?x)", "rhs": "?x - ?x^3/6",
             "error": "abs(?x)^5/120", "validity": "1 - abs(?x)"},
            {"id": "wide_sin", "lhs": "sin(?x)", "rhs": "?x", "error": "abs(?x)^3/6"}
        ],
        "numeric_services": [
            {"id": "sin_cordic", "operation": "sin", "arity": 1,
             "complexity": "n^2", "impl": "p1 - p1^3/6"},
            {"id": "sin_argred", "operation": "sin", "arity": 1,
             "complexity": "n*log2(n)", "impl": "p1 - p1^3/6 + p1^5/120"},
            {"id": "sin_table", "operation": "sin", "arity": 1,
             "complexity": "2*n*log2(n)", "impl": "p1"}
        ]
    }"#;

    fn desk() -> Registry {
        Registry::from_json(DESK, &cfg()).unwrap()
    }

    #[test]
    fn loads_and_indexes_services() {
        let reg = desk();
        assert_eq!(reg.services().len(), 4);
        let add = reg.find_service(&Signature::op("+", 2)).unwrap();
        assert_eq!(add.id, "add");
        assert_eq!(add.implementation, parse("p1 + p2").unwrap());
        assert_eq!(reg.find_service(&Signature::op("-", 1)).unwrap().id, "neg");
        assert!(reg.find_service(&Signature::op("+", 3)).is_none());
        assert!(reg.find_service(&Signature::op("sin", 1)).is_none());
    }

    #[test]
    fn formula_matching_is_file_ordered() {
        let reg = desk();
        let e = parse("sin(n)").unwrap();
        let (f, b) = reg.find_formula(&e).unwrap();
        assert_eq!(f.id, "taylor_sin");
        assert_eq!(b.get("x"), Some(&parse("n").unwrap()));
        assert!(reg.find_formula(&parse("cos(n)").unwrap()).is_none());
        // Matching is at the root only.
        assert!(reg.find_formula(&parse("1 + sin(n)").unwrap()).is_none());
    }

    #[test]
    fn violated_validity_falls_through_to_next_formula() {
        let reg = desk();
        // |2| ≥ 1 violates taylor_sin's validity, so wide_sin applies.
        let (f, b) = reg.find_formula(&parse("sin(2)").unwrap()).unwrap();
        assert_eq!(f.id, "wide_sin");
        assert_eq!(b.get("x"), Some(&Expr::number(2.0)));
        // |0.1| < 1 keeps taylor_sin.
        let (f, _) = reg.find_formula(&parse("sin(0.1)").unwrap()).unwrap();
        assert_eq!(f.id, "taylor_sin");
    }

    #[test]
    fn validity_status_three_ways() {
        let reg = desk();
        let f = &reg.formulas()[0];
        let literal: Bindings = [("x", Expr::number(0.5))].into_iter().collect();
        assert_eq!(f.validity_status(&literal), ValidityStatus::Satisfied);
        let big: Bindings = [("x", Expr::number(3.0))].into_iter().collect();
        assert_eq!(f.validity_status(&big), ValidityStatus::Violated);
        let sym: Bindings = [("x", parse("n").unwrap())].into_iter().collect();
        assert_eq!(f.validity_status(&sym), ValidityStatus::Undecidable);
        // No predicate at all is trivially satisfied.
        assert_eq!(
            reg.formulas()[1].validity_status(&literal),
            ValidityStatus::Satisfied
        );
    }

    #[test]
    fn numeric_candidates_classified_at_load() {
        let reg = desk();
        let sig = Signature::op("sin", 1);
        let lib = reg.numeric_classes(&sig).unwrap();
        // n·log2(n) and 2·n·log2(n) share a class; n² grows strictly faster.
        assert_eq!(lib.len(), 2);
        let slow: Vec<&str> = lib.classes()[0].ids().collect();
        assert_eq!(slow, ["sin_argred", "sin_table"]);
        let fast: Vec<&str> = lib.classes()[1].ids().collect();
        assert_eq!(fast, ["sin_cordic"]);
    }

    #[test]
    fn best_numeric_is_lex_smallest_in_slowest_class() {
        let reg = desk();
        let sig = Signature::op("sin", 1);
        let best = reg.find_best_numeric(&sig).unwrap();
        assert_eq!(best.id, "sin_argred");
        assert!(reg.find_best_numeric(&Signature::op("cos", 1)).is_none());

        // Invariant: the winner's complexity compares <1> or <2> against
        // every other candidate's.
        for other in reg.numeric_services(&sig) {
            if other.id == best.id {
                continue;
            }
            let r = comp(&best.complexity, &other.complexity, &cfg());
            assert!(
                matches!(
                    r.outcome,
                    CompOutcome::Equivalent | CompOutcome::FirstSmaller
                ),
                "{} vs {}: {}",
                best.id,
                other.id,
                r.outcome
            );
        }
    }

    #[test]
    fn empty_and_partial_files_load() {
        let reg = Registry::from_json("{}", &cfg()).unwrap();
        assert!(reg.services().is_empty());
        assert!(reg.formulas().is_empty());
        assert!(reg.find_best_numeric(&Signature::op("sin", 1)).is_none());

        let reg = Registry::from_json(r#"{"formulas": []}"#, &cfg()).unwrap();
        assert!(reg.formulas().is_empty());
    }

    #[test]
    fn duplicate_ids_rejected_across_sections() {
        let src = r#"{
            "services": [{"id": "sin", "operation": "+", "arity": 2, "impl": "p1 + p2"}],
            "numeric_services": [{"id": "sin", "operation": "sin", "arity": 1,
                                  "complexity": "n", "impl": "p1"}]
        }"#;
        let err = Registry::from_json(src, &cfg()).unwrap_err();
        assert!(matches!(err, RegistryError::DuplicateId(id) if id == "sin"));
    }

    #[test]
    fn duplicate_signature_rejected() {
        let src = r#"{"services": [
            {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + p2"},
            {"id": "plus", "operation": "+", "arity": 2, "impl": "p2 + p1"}
        ]}"#;
        let err = Registry::from_json(src, &cfg()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("service \"plus\""), "{msg}");
        assert!(msg.contains("\"add\""), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let src = r#"{"services": [
            {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + p2", "cost": 3}
        ]}"#;
        let err = Registry::from_json(src, &cfg()).unwrap_err();
        assert!(matches!(err, RegistryError::Json(_)));
        assert!(err.to_string().contains("cost"));

        let err = Registry::from_json(r#"{"extras": []}"#, &cfg()).unwrap_err();
        assert!(matches!(err, RegistryError::Json(_)));
    }

    #[test]
    fn errors_name_record_and_field() {
        let bad_impl = r#"{"services": [
            {"id": "add", "operation": "+", "arity": 2, "impl": "p1 +"}
        ]}"#;
        let msg = Registry::from_json(bad_impl, &cfg())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("service \"add\""), "{msg}");
        assert!(msg.contains("\"impl\""), "{msg}");

        let stray_param = r#"{"services": [
            {"id": "neg", "operation": "-", "arity": 1, "impl": "p1 + p2"}
        ]}"#;
        let msg = Registry::from_json(stray_param, &cfg())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("p2"), "{msg}");
        assert!(msg.contains("p1..p1"), "{msg}");

        let stray_pattern = r#"{"formulas": [
            {"id": "f", "lhs": "sin(?x)", "rhs": "?x - ?y", "error": "1"}
        ]}"#;
        let msg = Registry::from_json(stray_pattern, &cfg())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("formula \"f\""), "{msg}");
        assert!(msg.contains("?y"), "{msg}");

        let bad_complexity = r#"{"numeric_services": [
            {"id": "s", "operation": "sin", "arity": 1, "complexity": "n + m", "impl": "p1"}
        ]}"#;
        let msg = Registry::from_json(bad_complexity, &cfg())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("numeric service \"s\""), "{msg}");
        assert!(msg.contains("\"complexity\""), "{msg}");

        let pattern_impl = r#"{"services": [
            {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + ?x"}
        ]}"#;
        let msg = Registry::from_json(pattern_impl, &cfg())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("?x"), "{msg}");
    }

    #[test]
    fn load_roundtrips_through_a_file() {
        let dir = std::env::temp_dir().join("ordo-registry-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("desk.json");
        std::fs::write(&path, DESK).unwrap();
        let from_file = load_registry(&path, &cfg()).unwrap();
        assert_eq!(from_file, desk());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn free_function_wrappers_delegate() {
        let reg = desk();
        let sig = Signature::op("sin", 1);
        assert_eq!(
            find_service(&reg, &Signature::op("+", 2)).map(|s| s.id.as_str()),
            Some("add")
        );
        assert_eq!(
            find_formula(&reg, &parse("sin(n)").unwrap()).map(|(f, _)| f.id.as_str()),
            Some("taylor_sin")
        );
        assert_eq!(
            find_best_numeric(&reg, &sig).map(|s| s.id.as_str()),
            Some("sin_argred")
        );
        assert_eq!(Registry::signature_of(&parse("sin(n)").unwrap()), sig);
    }
}
