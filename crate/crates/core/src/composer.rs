//! Composition of executable evaluation plans.
//!
//! [`compose`] recursively decomposes an expression and covers each node
//! through a fixed cascade: an exact base service first, then an
//! approximation formula (rewriting the node and composing the result),
//! then the cheapest numerical-method service. A node none of the three
//! can cover fails the whole composition, reporting the leftmost-innermost
//! uncoverable sub-expression.
//!
//! The resulting [`Plan`] is self-contained: nodes carry the implementation
//! expressions they invoke, so [`execute_plan`] needs no registry. Error
//! bounds introduced by formula rewrites are collected per plan — in
//! construction order, never combined — and formulas whose validity
//! predicate could not be decided at composition time are recorded as
//! assumptions.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::comparator::ComplexityFn;
use crate::expr::{decompose_top, eval, substitute, EvalError, EvalMode, Expr, Signature};
use crate::registry::Registry;

/// Maximum number of formula applications along one root-to-leaf path.
///
/// A formula's rhs may reintroduce its own lhs shape; the cap turns such
/// rewrite loops into a reported error instead of unbounded recursion.
pub const MAX_FORMULA_DEPTH: usize = 8;

/// One node of an evaluation plan.
///
/// Invoke-style nodes carry the invoked service's implementation
/// expression (over `p1 .. pArity`), so a plan executes without consulting
/// the registry it was composed from.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanNode {
    /// A numeric literal.
    LeafNumber(f64),
    /// A free variable, bound at execution time.
    LeafVar(String),
    /// Exact evaluation by a base service.
    Invoke {
        service: String,
        implementation: Expr,
        args: Vec<PlanNode>,
    },
    /// A formula rewrite: the inner plan evaluates the rhs instance.
    Approx {
        formula: String,
        /// The formula's error bound with the match's bindings substituted.
        error: Expr,
        inner: Box<PlanNode>,
    },
    /// Fallback evaluation by a numerical-method service.
    NumericInvoke {
        service: String,
        complexity: ComplexityFn,
        implementation: Expr,
        args: Vec<PlanNode>,
    },
}

/// Error bound introduced by one formula application.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorAnnotation {
    pub formula: String,
    /// Instantiated bound on the absolute error.
    pub error: Expr,
}

/// A validity predicate that could not be decided when the formula was
/// applied; the plan is correct provided the predicate is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Assumption {
    pub formula: String,
    /// Predicate assumed positive, with the match's bindings substituted.
    pub predicate: Expr,
}

/// An executable evaluation plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    root: PlanNode,
    errors: Vec<ErrorAnnotation>,
    assumptions: Vec<Assumption>,
}

impl Plan {
    pub fn root(&self) -> &PlanNode {
        &self.root
    }

    /// Error annotations, in the order the rewrites were applied.
    pub fn errors(&self) -> &[ErrorAnnotation] {
        &self.errors
    }

    /// Unchecked validity predicates, in application order.
    pub fn assumptions(&self) -> &[Assumption] {
        &self.assumptions
    }
}

/// Path from the plan root: 1-based argument positions.
pub type Path = Vec<usize>;

fn path_display(path: &[usize]) -> String {
    let mut s = String::from("root");
    for i in path {
        s.push('.');
        s.push_str(&i.to_string());
    }
    s
}

/// A sub-expression no service, formula, or numerical method covers.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionError {
    /// The uncoverable sub-expression.
    pub expr: Expr,
    pub signature: Signature,
    /// Argument positions from the root to the failing node.
    pub path: Path,
}

/// Why [`compose`] failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComposeError {
    #[error(
        "no service, formula, or numerical method covers {expr} \
         (signature {signature}) at {path}",
        expr = .0.expr,
        signature = .0.signature,
        path = path_display(&.0.path),
    )]
    Uncoverable(CompositionError),
    #[error(
        "formula \"{formula}\" exceeded the rewrite depth cap ({MAX_FORMULA_DEPTH}) \
         at {path} while covering {expr}",
        path = path_display(path),
    )]
    FormulaDepthExceeded {
        formula: String,
        expr: Expr,
        path: Path,
    },
}

struct Composer<'r> {
    reg: &'r Registry,
    errors: Vec<ErrorAnnotation>,
    assumptions: Vec<Assumption>,
}

impl Composer<'_> {
    fn node(&mut self, e: &Expr, depth: usize, path: &mut Path) -> Result<PlanNode, ComposeError> {
        let (sig, children) = decompose_top(e);
        if sig == Signature::Leaf {
            return match e {
                Expr::Number(v) => Ok(PlanNode::LeafNumber(*v)),
                Expr::Var(name) => Ok(PlanNode::LeafVar(name.clone())),
                // Pattern variables are rejected up front; substitution
                // never reintroduces them.
                _ => Err(self.uncoverable(e, path)),
            };
        }

        if let Some(svc) = self.reg.find_service(&sig) {
            let service = svc.id.clone();
            let implementation = svc.implementation.clone();
            let args = self.args(&children, depth, path)?;
            return Ok(PlanNode::Invoke {
                service,
                implementation,
                args,
            });
        }

        if let Some((f, b)) = self.reg.find_formula(e) {
            if depth >= MAX_FORMULA_DEPTH {
                return Err(ComposeError::FormulaDepthExceeded {
                    formula: f.id.clone(),
                    expr: e.clone(),
                    path: path.clone(),
                });
            }
            // Load-time validation guarantees rhs, error, and validity use
            // only lhs pattern variables, so these substitutions succeed.
            let error = substitute(&f.error, &b).expect("error vars bound by lhs match");
            let rewritten = substitute(&f.rhs, &b).expect("rhs vars bound by lhs match");
            let formula = f.id.clone();
            self.errors.push(ErrorAnnotation {
                formula: formula.clone(),
                error: error.clone(),
            });
            if let Some(pred) = &f.validity {
                use crate::registry::ValidityStatus;
                if f.validity_status(&b) == ValidityStatus::Undecidable {
                    self.assumptions.push(Assumption {
                        formula: formula.clone(),
                        predicate: substitute(pred, &b).expect("validity vars bound by lhs match"),
                    });
                }
            }
            let inner = self.node(&rewritten, depth + 1, path)?;
            return Ok(PlanNode::Approx {
                formula,
                error,
                inner: Box::new(inner),
            });
        }

        if let Some(svc) = self.reg.find_best_numeric(&sig) {
            let service = svc.id.clone();
            let complexity = svc.complexity.clone();
            let implementation = svc.implementation.clone();
            let args = self.args(&children, depth, path)?;
            return Ok(PlanNode::NumericInvoke {
                service,
                complexity,
                implementation,
                args,
            });
        }

        // Nothing covers this node. Report the leftmost-innermost failure:
        // if a descendant is itself uncoverable, blame it instead.
        for (i, c) in children.iter().enumerate() {
            path.push(i + 1);
            let probe = self.node(c, depth, path);
            path.pop();
            probe?;
        }
        Err(self.uncoverable(e, path))
    }

    fn args(
        &mut self,
        children: &[&Expr],
        depth: usize,
        path: &mut Path,
    ) -> Result<Vec<PlanNode>, ComposeError> {
        let mut out = Vec::with_capacity(children.len());
        for (i, c) in children.iter().enumerate() {
            path.push(i + 1);
            let node = self.node(c, depth, path);
            path.pop();
            out.push(node?);
        }
        Ok(out)
    }

    fn uncoverable(&self, e: &Expr, path: &[usize]) -> ComposeError {
        ComposeError::Uncoverable(CompositionError {
            expr: e.clone(),
            signature: decompose_top(e).0,
            path: path.to_vec(),
        })
    }
}

/// Path to the leftmost-innermost pattern variable, if any.
fn first_pattern_path(e: &Expr, path: &mut Path) -> Option<(Expr, Path)> {
    if let Expr::Pattern(_) = e {
        return Some((e.clone(), path.clone()));
    }
    let (_, children) = decompose_top(e);
    for (i, c) in children.iter().enumerate() {
        path.push(i + 1);
        let hit = first_pattern_path(c, path);
        path.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Build an evaluation plan for `e` against `reg`.
///
/// Each node is covered by the first stage of the cascade that applies:
/// exact base service, then approximation formula (the rewritten
/// expression is composed in place, at most [`MAX_FORMULA_DEPTH`] rewrites
/// deep per path), then cheapest numerical-method service. Expressions
/// containing pattern variables are not composable.
pub fn compose(e: &Expr, reg: &Registry) -> Result<Plan, ComposeError> {
    if let Some((pat, path)) = first_pattern_path(e, &mut Vec::new()) {
        return Err(ComposeError::Uncoverable(CompositionError {
            expr: pat,
            signature: Signature::Leaf,
            path,
        }));
    }
    let mut c = Composer {
        reg,
        errors: Vec::new(),
        assumptions: Vec::new(),
    };
    let root = c.node(e, 0, &mut Vec::new())?;
    Ok(Plan {
        root,
        errors: c.errors,
        assumptions: c.assumptions,
    })
}

/// Error from [`execute_plan`], locating the failing node.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at {path}: {source}")]
pub struct ExecError {
    /// `root`-prefixed argument path of the failing node.
    pub path: String,
    pub source: EvalError,
}

/// Evaluate a plan bottom-up at concrete variable values.
///
/// Invoke-style nodes bind their children's values to `p1 .. pArity` and
/// evaluate the carried implementation expression; Approx nodes evaluate
/// their inner plan.
pub fn execute_plan(p: &Plan, bindings: &HashMap<String, f64>) -> Result<f64, ExecError> {
    exec_node(&p.root, bindings, &mut Vec::new())
}

fn exec_node(
    node: &PlanNode,
    bindings: &HashMap<String, f64>,
    path: &mut Path,
) -> Result<f64, ExecError> {
    let fail = |path: &[usize], source: EvalError| ExecError {
        path: path_display(path),
        source,
    };
    match node {
        PlanNode::LeafNumber(v) => Ok(*v),
        PlanNode::LeafVar(name) => bindings
            .get(name)
            .copied()
            .ok_or_else(|| fail(path, EvalError::UnboundVariable(name.clone()))),
        PlanNode::Approx { inner, .. } => exec_node(inner, bindings, path),
        PlanNode::Invoke {
            implementation,
            args,
            ..
        }
        | PlanNode::NumericInvoke {
            implementation,
            args,
            ..
        } => {
            let mut params = HashMap::with_capacity(args.len());
            for (i, a) in args.iter().enumerate() {
                path.push(i + 1);
                let v = exec_node(a, bindings, path);
                path.pop();
                params.insert(format!("p{}", i + 1), v?);
            }
            eval(implementation, &params, EvalMode::Linear).map_err(|e| fail(path, e))
        }
    }
}

fn node_to_json(node: &PlanNode) -> Value {
    match node {
        PlanNode::LeafNumber(v) => json!({ "num": v.to_string() }),
        PlanNode::LeafVar(name) => json!({ "var": name }),
        PlanNode::Invoke { service, args, .. } => json!({
            "invoke": service,
            "args": args.iter().map(node_to_json).collect::<Vec<_>>(),
        }),
        PlanNode::Approx {
            formula,
            error,
            inner,
        } => json!({
            "approx": formula,
            "error": error.to_string(),
            "inner": node_to_json(inner),
        }),
        PlanNode::NumericInvoke {
            service,
            complexity,
            args,
            ..
        } => json!({
            "numeric": service,
            "complexity": complexity.to_string(),
            "args": args.iter().map(node_to_json).collect::<Vec<_>>(),
        }),
    }
}

/// Render a plan as JSON.
///
/// Keys are emitted in a stable (sorted) order, so equal plans render to
/// identical bytes. The `assumptions` array appears only when non-empty.
pub fn emit_plan(p: &Plan) -> String {
    let mut doc = json!({
        "root": node_to_json(&p.root),
        "errors": p
            .errors
            .iter()
            .map(|a| json!({ "formula": a.formula, "error": a.error.to_string() }))
            .collect::<Vec<_>>(),
    });
    if !p.assumptions.is_empty() {
        doc["assumptions"] = p
            .assumptions
            .iter()
            .map(|a| json!({ "formula": a.formula, "assumes": a.predicate.to_string() }))
            .collect::<Vec<_>>()
            .into();
    }
    serde_json::to_string_pretty(&doc).expect("plan serializes")
}

/// Error from [`read_plan`].
#[derive(Debug, thiserror::Error)]
pub enum PlanReadError {
    #[error("plan is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed plan: {0}")]
    Malformed(String),
    #[error("plan references unknown {kind} \"{id}\"")]
    UnknownId { kind: &'static str, id: String },
    #[error("plan disagrees with the registry: {0}")]
    Mismatch(String),
}

fn want_str<'v>(v: &'v Value, key: &str, ctx: &str) -> Result<&'v str, PlanReadError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| PlanReadError::Malformed(format!("{ctx}: missing string \"{key}\"")))
}

fn want_args<'v>(v: &'v Value, ctx: &str) -> Result<&'v [Value], PlanReadError> {
    v.get("args")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .ok_or_else(|| PlanReadError::Malformed(format!("{ctx}: missing array \"args\"")))
}

fn check_arity(ctx: &str, id: &str, want: usize, got: usize) -> Result<(), PlanReadError> {
    if want != got {
        return Err(PlanReadError::Mismatch(format!(
            "{ctx} \"{id}\" has arity {want} but the plan passes {got} args"
        )));
    }
    Ok(())
}

fn node_from_json(v: &Value, reg: &Registry) -> Result<PlanNode, PlanReadError> {
    let obj = v
        .as_object()
        .ok_or_else(|| PlanReadError::Malformed("plan node is not an object".into()))?;
    if obj.contains_key("num") {
        let s = want_str(v, "num", "number node")?;
        let value: f64 = s
            .parse()
            .map_err(|_| PlanReadError::Malformed(format!("\"{s}\" is not a number")))?;
        return Ok(PlanNode::LeafNumber(value));
    }
    if obj.contains_key("var") {
        return Ok(PlanNode::LeafVar(
            want_str(v, "var", "variable node")?.into(),
        ));
    }
    if obj.contains_key("invoke") {
        let id = want_str(v, "invoke", "invoke node")?;
        let svc = reg
            .service_by_id(id)
            .ok_or_else(|| PlanReadError::UnknownId {
                kind: "service",
                id: id.into(),
            })?;
        let raw = want_args(v, "invoke node")?;
        check_arity("service", id, svc.arity, raw.len())?;
        let args = raw
            .iter()
            .map(|a| node_from_json(a, reg))
            .collect::<Result<_, _>>()?;
        return Ok(PlanNode::Invoke {
            service: svc.id.clone(),
            implementation: svc.implementation.clone(),
            args,
        });
    }
    if obj.contains_key("numeric") {
        let id = want_str(v, "numeric", "numeric node")?;
        let svc = reg
            .numeric_by_id(id)
            .ok_or_else(|| PlanReadError::UnknownId {
                kind: "numeric service",
                id: id.into(),
            })?;
        let stated = want_str(v, "complexity", "numeric node")?;
        if stated != svc.complexity.to_string() {
            return Err(PlanReadError::Mismatch(format!(
                "numeric service \"{id}\" has complexity {} but the plan says {stated}",
                svc.complexity
            )));
        }
        let raw = want_args(v, "numeric node")?;
        check_arity("numeric service", id, svc.arity, raw.len())?;
        let args = raw
            .iter()
            .map(|a| node_from_json(a, reg))
            .collect::<Result<_, _>>()?;
        return Ok(PlanNode::NumericInvoke {
            service: svc.id.clone(),
            complexity: svc.complexity.clone(),
            implementation: svc.implementation.clone(),
            args,
        });
    }
    if obj.contains_key("approx") {
        let id = want_str(v, "approx", "approx node")?;
        if reg.formula_by_id(id).is_none() {
            return Err(PlanReadError::UnknownId {
                kind: "formula",
                id: id.into(),
            });
        }
        let error_src = want_str(v, "error", "approx node")?;
        let error = crate::expr::parse(error_src)
            .map_err(|e| PlanReadError::Malformed(format!("approx error bound: {e}")))?;
        let inner = v
            .get("inner")
            .ok_or_else(|| PlanReadError::Malformed("approx node: missing \"inner\"".into()))?;
        return Ok(PlanNode::Approx {
            formula: id.into(),
            error,
            inner: Box::new(node_from_json(inner, reg)?),
        });
    }
    Err(PlanReadError::Malformed(format!(
        "unrecognized plan node: {v}"
    )))
}

fn annotation_list<T>(
    doc: &Value,
    key: &str,
    required: bool,
    mut build: impl FnMut(&Value) -> Result<T, PlanReadError>,
) -> Result<Vec<T>, PlanReadError> {
    match doc.get(key) {
        Some(v) => v
            .as_array()
            .ok_or_else(|| PlanReadError::Malformed(format!("\"{key}\" is not an array")))?
            .iter()
            .map(&mut build)
            .collect(),
        None if required => Err(PlanReadError::Malformed(format!("missing \"{key}\" array"))),
        None => Ok(Vec::new()),
    }
}

/// Parse a plan emitted by [`emit_plan`], re-resolving implementation
/// expressions from `reg` (which must contain every referenced id).
pub fn read_plan(src: &str, reg: &Registry) -> Result<Plan, PlanReadError> {
    let doc: Value = serde_json::from_str(src)?;
    let root = doc
        .get("root")
        .ok_or_else(|| PlanReadError::Malformed("missing \"root\"".into()))?;
    let root = node_from_json(root, reg)?;
    let errors = annotation_list(&doc, "errors", true, |a| {
        let formula = want_str(a, "formula", "error annotation")?.to_owned();
        let error = crate::expr::parse(want_str(a, "error", "error annotation")?)
            .map_err(|e| PlanReadError::Malformed(format!("error annotation: {e}")))?;
        Ok(ErrorAnnotation { formula, error })
    })?;
    let assumptions = annotation_list(&doc, "assumptions", false, |a| {
        let formula = want_str(a, "formula", "assumption")?.to_owned();
        let predicate = crate::expr::parse(want_str(a, "assumes", "assumption")?)
            .map_err(|e| PlanReadError::Malformed(format!("assumption: {e}")))?;
        Ok(Assumption { formula, predicate })
    })?;
    Ok(Plan {
        root,
        errors,
        assumptions,
    })
}
