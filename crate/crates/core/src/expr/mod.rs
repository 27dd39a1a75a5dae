//! Arithmetic expression AST shared by every other module.
//!
//! Expressions are built from decimal numbers, variables, the five binary
//! operators `+ - * / ^`, unary minus, calls to a fixed set of builtin
//! functions, and pattern variables `?name` used by rewrite formulas.
//!
//! Concrete syntax (`^` binds tightest, then unary minus, then `*` `/`,
//! then `+` `-`; `^` is right-associative, the rest left-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' factor)?
//! atom   := NUMBER | IDENT | '?' IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//! IDENT  := [A-Za-z_][A-Za-z0-9_]*
//! NUMBER := [0-9]+ ('.' [0-9]+)? ([eE] [+-]? [0-9]+)?
//! ```

mod eval;
mod parse;

pub use eval::{eval, EvalError, EvalMode};
pub use parse::{parse, ParseError};

pub(crate) use eval::{eval_scoped, Scope};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// Unary operators; the grammar has exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
}

/// Binary operators of the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    /// The operator's source symbol, also used as its signature name.
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Expression tree.
///
/// `Pattern` nodes (`?name`) may appear only in formula templates; they are
/// rejected by evaluation and must be substituted away before an expression
/// is used as a function or plan input.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Pattern(String),
}

/// Builtin functions callable from expressions, with their arities.
pub const BUILTINS: &[(&str, usize)] = &[
    ("sin", 1),
    ("cos", 1),
    ("exp", 1),
    ("ln", 1),
    ("log2", 1),
    ("sqrt", 1),
    ("abs", 1),
    ("floor", 1),
    ("ceil", 1),
    ("min", 2),
    ("max", 2),
    ("mod", 2),
    ("factorial", 1),
];

/// Arity of a builtin function, or `None` if the name is not a builtin.
pub fn builtin_arity(name: &str) -> Option<usize> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|&(_, a)| a)
}

impl Expr {
    pub fn number(v: f64) -> Expr {
        Expr::Number(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn pattern(name: impl Into<String>) -> Expr {
        Expr::Pattern(name.into())
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Call(name.into(), args)
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// All pattern variable names occurring in the expression.
    pub fn pattern_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Pattern(name) = e {
                out.insert(name.as_str());
            }
        });
        out
    }

    /// All free variable names occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(name) = e {
                out.insert(name.as_str());
            }
        });
        out
    }

    /// True if any `?name` pattern variable occurs in the expression.
    pub fn contains_pattern(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Pattern(_)));
        found
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Number(_) | Expr::Var(_) | Expr::Pattern(_) => {}
            Expr::Unary(_, c) => c.walk(visit),
            Expr::Binary(_, l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.walk(visit);
                }
            }
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Root-node signature: either a distinguished leaf, or an operation name
/// (operator symbol or function name) paired with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signature {
    Leaf,
    Op { name: String, arity: usize },
}

impl Signature {
    pub fn op(name: impl Into<String>, arity: usize) -> Signature {
        Signature::Op {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signature::Leaf => write!(f, "leaf"),
            Signature::Op { name, arity } => write!(f, "{name}/{arity}"),
        }
    }
}

/// Signature of the root node plus its immediate children in order.
///
/// Leaves (numbers, variables, pattern variables) yield [`Signature::Leaf`]
/// and no children; unary minus yields `-/1`, binary operators their symbol
/// at arity 2, and calls the function name at its argument count.
pub fn decompose_top(e: &Expr) -> (Signature, Vec<&Expr>) {
    match e {
        Expr::Number(_) | Expr::Var(_) | Expr::Pattern(_) => (Signature::Leaf, Vec::new()),
        Expr::Unary(UnaryOp::Neg, c) => (Signature::op("-", 1), vec![c]),
        Expr::Binary(op, l, r) => (Signature::op(op.symbol(), 2), vec![l, r]),
        Expr::Call(name, args) => (
            Signature::op(name.clone(), args.len()),
            args.iter().collect(),
        ),
    }
}

/// Map from pattern-variable name to the expression it is bound to.
///
/// Iteration order is the lexicographic order of names, so bindings print
/// and serialize deterministically.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(BTreeMap<String, Expr>);

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Expr) -> Option<Expr> {
        self.0.insert(name.into(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if every bound expression is a plain number literal.
    pub fn all_literal(&self) -> bool {
        self.0.values().all(|e| matches!(e, Expr::Number(_)))
    }
}

impl<S: Into<String>> FromIterator<(S, Expr)> for Bindings {
    fn from_iter<T: IntoIterator<Item = (S, Expr)>>(iter: T) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Match `pattern` against `subject` at the root.
///
/// A `?name` pattern variable matches any subexpression; every other node
/// must agree on kind, operator / name, and arity, with children matched
/// recursively. A pattern variable occurring more than once must bind to
/// structurally equal subexpressions. `subject` must not itself contain
/// pattern variables.
pub fn match_pattern(pattern: &Expr, subject: &Expr) -> Option<Bindings> {
    let mut b = Bindings::new();
    if match_into(pattern, subject, &mut b) {
        Some(b)
    } else {
        None
    }
}

fn match_into(pattern: &Expr, subject: &Expr, b: &mut Bindings) -> bool {
    match (pattern, subject) {
        (Expr::Pattern(name), _) => match b.get(name) {
            Some(seen) => seen == subject,
            None => {
                b.insert(name.clone(), subject.clone());
                true
            }
        },
        (Expr::Number(a), Expr::Number(c)) => a == c,
        (Expr::Var(a), Expr::Var(c)) => a == c,
        (Expr::Unary(op_a, ca), Expr::Unary(op_b, cb)) => op_a == op_b && match_into(ca, cb, b),
        (Expr::Binary(op_a, la, ra), Expr::Binary(op_b, lb, rb)) => {
            op_a == op_b && match_into(la, lb, b) && match_into(ra, rb, b)
        }
        (Expr::Call(fa, aa), Expr::Call(fb, ab)) => {
            fa == fb && aa.len() == ab.len() && aa.iter().zip(ab).all(|(x, y)| match_into(x, y, b))
        }
        _ => false,
    }
}

/// Error from [`substitute`]: the template used a pattern variable that the
/// bindings do not cover.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unbound pattern variable ?{0}")]
pub struct UnboundPattern(pub String);

/// Replace every pattern variable in `template` by its binding.
pub fn substitute(template: &Expr, b: &Bindings) -> Result<Expr, UnboundPattern> {
    match template {
        Expr::Pattern(name) => b
            .get(name)
            .cloned()
            .ok_or_else(|| UnboundPattern(name.clone())),
        Expr::Number(_) | Expr::Var(_) => Ok(template.clone()),
        Expr::Unary(op, c) => Ok(Expr::unary(*op, substitute(c, b)?)),
        Expr::Binary(op, l, r) => Ok(Expr::binary(*op, substitute(l, b)?, substitute(r, b)?)),
        Expr::Call(name, args) => Ok(Expr::Call(
            name.clone(),
            args.iter()
                .map(|a| substitute(a, b))
                .collect::<Result<_, _>>()?,
        )),
    }
}

/// Render the expression with minimal parentheses and canonical whitespace.
///
/// Equivalent to `e.to_string()`; `parse(format(e))` reproduces `e`
/// structurally for every expression the parser can produce.
pub fn format(e: &Expr) -> String {
    e.to_string()
}

// Precedence levels used by the printer: higher binds tighter. Atoms sit
// above every operator so they never take parentheses.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Expr::Unary(..) => 3,
        Expr::Binary(BinaryOp::Pow, ..) => 4,
        Expr::Number(_) | Expr::Var(_) | Expr::Call(..) | Expr::Pattern(_) => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, c: &Expr, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }

        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Pattern(name) => write!(f, "?{name}"),
            Expr::Unary(UnaryOp::Neg, c) => {
                write!(f, "-")?;
                child(f, c, precedence(c) < 3)
            }
            Expr::Binary(op, l, r) => {
                let (spaced, prec) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (true, 1),
                    BinaryOp::Mul | BinaryOp::Div => (false, 2),
                    BinaryOp::Pow => (false, 4),
                };
                match op {
                    // Right-associative: the left operand must be an atom,
                    // the right operand may be another power or a negation.
                    BinaryOp::Pow => {
                        child(f, l, precedence(l) < 5)?;
                        write!(f, "^")?;
                        child(f, r, precedence(r) < 3)
                    }
                    _ => {
                        child(f, l, precedence(l) < prec)?;
                        if spaced {
                            write!(f, " {} ", op.symbol())?;
                        } else {
                            write!(f, "{}", op.symbol())?;
                        }
                        child(f, r, precedence(r) <= prec)
                    }
                }
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn decompose_leaf_and_operators() {
        assert_eq!(decompose_top(&p("n")), (Signature::Leaf, vec![]));
        assert_eq!(decompose_top(&p("7")).0, Signature::Leaf);

        let e = p("x + y");
        let (sig, children) = decompose_top(&e);
        assert_eq!(sig, Signature::op("+", 2));
        assert_eq!(children, vec![&Expr::var("x"), &Expr::var("y")]);

        let e = p("factorial(n)");
        let (sig, children) = decompose_top(&e);
        assert_eq!(sig, Signature::op("factorial", 1));
        assert_eq!(children.len(), 1);

        let e = p("-x");
        assert_eq!(decompose_top(&e).0, Signature::op("-", 1));
    }

    #[test]
    fn signature_display() {
        assert_eq!(Signature::Leaf.to_string(), "leaf");
        assert_eq!(Signature::op("+", 2).to_string(), "+/2");
        assert_eq!(Signature::op("factorial", 1).to_string(), "factorial/1");
    }

    #[test]
    fn match_binds_subexpression() {
        let b = match_pattern(&p("sin(?x)"), &p("sin(x+1)")).unwrap();
        assert_eq!(b.get("x"), Some(&p("x + 1")));
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn match_rejects_different_head() {
        assert!(match_pattern(&p("sin(?x)"), &p("cos(x)")).is_none());
    }

    #[test]
    fn match_rejects_inconsistent_repeat() {
        assert!(match_pattern(&p("?a + ?a"), &p("x + y")).is_none());
        let b = match_pattern(&p("?a + ?a"), &p("x + x")).unwrap();
        assert_eq!(b.get("a"), Some(&Expr::var("x")));
    }

    #[test]
    fn substitute_examples() {
        let b: Bindings = [("x", Expr::var("y"))].into_iter().collect();
        assert_eq!(substitute(&p("?x - ?x^3/6"), &b).unwrap(), p("y - y^3/6"));

        let b: Bindings = [("a", p("2*n"))].into_iter().collect();
        assert_eq!(substitute(&p("?a"), &b).unwrap(), p("2*n"));

        let b: Bindings = [("a", Expr::number(1.0))].into_iter().collect();
        assert_eq!(
            substitute(&p("?a + ?b"), &b),
            Err(UnboundPattern("b".into()))
        );
    }

    #[test]
    fn format_examples() {
        assert_eq!(Expr::var("n").to_string(), "n");
        let e = Expr::binary(
            BinaryOp::Add,
            Expr::binary(BinaryOp::Mul, Expr::number(2.0), Expr::var("n")),
            Expr::number(1.0),
        );
        assert_eq!(e.to_string(), "2*n + 1");
        let e = Expr::binary(
            BinaryOp::Pow,
            Expr::var("n"),
            Expr::binary(BinaryOp::Pow, Expr::number(2.0), Expr::number(3.0)),
        );
        assert_eq!(e.to_string(), "n^2^3");
    }

    #[test]
    fn format_inserts_required_parens() {
        assert_eq!(p("(a + b)*c").to_string(), "(a + b)*c");
        assert_eq!(p("a - (b - c)").to_string(), "a - (b - c)");
        assert_eq!(p("(a^b)^c").to_string(), "(a^b)^c");
        assert_eq!(p("(-a)^2").to_string(), "(-a)^2");
        assert_eq!(p("-(a + b)").to_string(), "-(a + b)");
        assert_eq!(p("a/(b*c)").to_string(), "a/(b*c)");
        assert_eq!(p("min(a, b)").to_string(), "min(a, b)");
    }

    #[test]
    fn free_and_pattern_vars() {
        let e = p("?a + x*sin(?b) - y");
        assert_eq!(
            e.pattern_vars().into_iter().collect::<Vec<_>>(),
            vec!["a", "b"]
        );
        assert_eq!(
            e.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["x", "y"]
        );
        assert!(e.contains_pattern());
        assert!(!p("x + 1").contains_pattern());
    }
}
