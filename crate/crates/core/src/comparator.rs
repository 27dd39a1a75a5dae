//! The approximate growth-order comparator.
//!
//! [`comp`] decides, for two positive complexity functions `f1`, `f2` on
//! `[1, ∞)`, which of four relations holds:
//!
//! * `<1>` [`CompOutcome::Equivalent`] — O(f1) = O(f2);
//! * `<2>` [`CompOutcome::FirstSmaller`] — O(f1) ⊂ O(f2);
//! * `<3>` [`CompOutcome::SecondSmaller`] — O(f2) ⊂ O(f1);
//! * `<4>` [`CompOutcome::Inconclusive`] — none of the above was
//!   established.
//!
//! The procedure treats both functions as black boxes. It first searches
//! for a start point beyond the last detectable root of the difference
//! function and of its low-order derivatives ([`find_root_free_start`]),
//! so that later samples are past the region where the functions cross.
//! From there it estimates the limit of the ratio `f1(n)/f2(n)` along a
//! geometric sequence of sample points ([`estimate_ratio_limit`]): a
//! stabilizing ratio means a finite limit, a persistently growing one
//! means divergence. A bounded forward ratio combined with a bounded
//! backward ratio means the limit is a positive constant (`<1>`); bounded
//! forward with unbounded backward means the limit is zero (`<2>`).
//!
//! All internal arithmetic runs on `ldif(x) = ln f1(x) − ln f2(x)` rather
//! than `f1(x) − f2(x)`. At order zero the sign and the roots coincide
//! (ln is strictly monotone on positive values), but the difference of
//! logarithms survives ranges where `f1 − f2` overflows — for example
//! `n!` against `2^n` at doubled sample points. Higher-order derivative
//! roots of `ldif` differ from those of `dif`; they are used only
//! heuristically, to push the start point past oscillating stretches.
//!
//! The comparison is a heuristic: it reads finitely many samples, so a
//! function that changes behaviour beyond the sampled horizon will fool
//! it. It is, however, deterministic, total (evaluation errors surface as
//! `<4>` with a note instead of aborting), and budget-bounded (see
//! [`ComparatorConfig::eval_budget`]).

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use crate::expr::{self, EvalError, EvalMode, Expr, Scope};

/// Hard cap on roots located in one sweep. A difference function with
/// infinitely many sign changes (oscillating factors) would otherwise keep
/// the sweep restarting forever; after this many roots the sweep gives up
/// and returns the point it has reached.
pub const MAX_LOCATED_ROOTS: usize = 128;

/// Increments allowed while skipping forward past points where the
/// difference (or a derivative order) vanishes or fails to evaluate;
/// exhausting the cap is taken as evidence that the difference is the
/// zero function.
const MAX_ZERO_SKIPS: usize = 10_000;

/// Natural-log threshold beyond which a ratio is clamped to the `+∞`
/// sentinel instead of being exponentiated (`exp` would overflow anyway).
const LN_RATIO_OVERFLOW: f64 = 700.0;

/// A positive-valued function of one variable on `[1, ∞)`, evaluated in
/// the log domain.
///
/// The body is an arithmetic expression in a single variable (a constant
/// body is also accepted). Positivity on the sampled domain is the
/// caller's contract — where it fails, evaluation reports a domain error
/// and the comparator degrades gracefully.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityFn {
    body: Expr,
    var: String,
}

/// Rejection reasons for [`ComplexityFn::new`] and [`ComplexityFn::parse`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexityFnError {
    #[error("complexity function must use a single variable, found {}", .0.join(", "))]
    MultipleVariables(Vec<String>),
    #[error("pattern variable ?{0} is not allowed in a complexity function")]
    PatternVariable(String),
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
}

impl ComplexityFn {
    /// Wrap an expression as a complexity function. The expression must
    /// mention at most one variable and no pattern variables; a constant
    /// body gets the conventional variable `n`.
    pub fn new(body: Expr) -> Result<Self, ComplexityFnError> {
        if let Some(p) = body.pattern_vars().into_iter().next() {
            return Err(ComplexityFnError::PatternVariable(p.to_string()));
        }
        let vars = body.free_vars();
        if vars.len() > 1 {
            return Err(ComplexityFnError::MultipleVariables(
                vars.into_iter().map(str::to_string).collect(),
            ));
        }
        let var = vars.into_iter().next().unwrap_or("n").to_string();
        Ok(ComplexityFn { body, var })
    }

    /// Parse source text into a complexity function.
    pub fn parse(src: &str) -> Result<Self, ComplexityFnError> {
        Self::new(expr::parse(src)?)
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    /// `ln f(x)`; `-∞` encodes a value of exactly zero.
    pub fn ln_at(&self, x: f64) -> Result<f64, EvalError> {
        expr::eval_scoped(&self.body, &Scope::One(&self.var, x), EvalMode::Log)
    }

    /// `f(x)` in the linear domain (errors on overflow).
    pub fn at(&self, x: f64) -> Result<f64, EvalError> {
        expr::eval_scoped(&self.body, &Scope::One(&self.var, x), EvalMode::Linear)
    }
}

impl FromStr for ComplexityFn {
    type Err = ComplexityFnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComplexityFn::parse(s)
    }
}

impl fmt::Display for ComplexityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Tuning parameters of the comparator.
///
/// The defaults are frozen; every documented result in this crate was
/// produced with them. `q = 2` and `max_samples = 64` let the geometric
/// sample sequence span arguments up to roughly `2^64` — far past any
/// crossing a realistic complexity pair exhibits — while the log-domain
/// evaluator keeps every sample representable. `max_order = 2` because
/// nested forward differences beyond the second order are dominated by
/// rounding noise at `fd_step = 1e-6`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorConfig {
    /// Ratio of the geometric sample sequence (`nv(i) = q·nv(i−1)`); ≥ 2.
    pub q: u32,
    /// Convergence window length; ≥ 2.
    pub k: usize,
    /// Convergence tolerance on ratio values; > 0.
    pub epsilon: f64,
    /// Maximum samples per ratio pass (`L`); ≥ `k`.
    pub max_samples: usize,
    /// Maximum doublings of the probe interval (`tmax`); ≥ 1.
    pub max_doublings: u32,
    /// Highest derivative order probed for sign changes (`pmax`).
    pub max_order: usize,
    /// Base step of the forward-difference derivative; > 0.
    pub fd_step: f64,
    /// Magnitudes at or below this count as zero in sign tests; > 0.
    pub zero_tol: f64,
    /// Relative width at which root bisection stops; > 0.
    pub bisect_tol: f64,
    /// Samples probed when testing whether a derivative order is
    /// identically zero; ≥ 2.
    pub zero_probe_samples: usize,
}

impl Default for ComparatorConfig {
    fn default() -> Self {
        ComparatorConfig {
            q: 2,
            k: 4,
            epsilon: 1e-3,
            max_samples: 64,
            max_doublings: 60,
            max_order: 2,
            fd_step: 1e-6,
            zero_tol: 1e-12,
            bisect_tol: 1e-9,
            zero_probe_samples: 16,
        }
    }
}

/// Violation of a [`ComparatorConfig`] invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid comparator configuration: {0}")]
pub struct ConfigError(String);

impl ComparatorConfig {
    /// Check the field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError(msg.to_string()));
        if self.q < 2 {
            return fail("q must be at least 2");
        }
        if self.k < 2 {
            return fail("k must be at least 2");
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return fail("epsilon must be a positive finite number");
        }
        if self.max_samples < self.k {
            return fail("max_samples must be at least k");
        }
        if self.max_doublings < 1 {
            return fail("max_doublings must be at least 1");
        }
        if !self.fd_step.is_finite() || self.fd_step <= 0.0 {
            return fail("fd_step must be a positive finite number");
        }
        if !self.zero_tol.is_finite() || self.zero_tol <= 0.0 {
            return fail("zero_tol must be a positive finite number");
        }
        if !self.bisect_tol.is_finite() || self.bisect_tol <= 0.0 {
            return fail("bisect_tol must be a positive finite number");
        }
        if self.zero_probe_samples < 2 {
            return fail("zero_probe_samples must be at least 2");
        }
        Ok(())
    }

    /// Upper bound on the ldif evaluations one [`comp`] call may spend
    /// given that its sweep located `located_roots` roots. Each located
    /// root restarts the sweep, so the sweep runs `located_roots + 1`
    /// rounds; a round costs at most one zero-order probe, the capped
    /// skip loop, the doubling phase, and one bisection. The two ratio
    /// passes add one evaluation per sample.
    pub fn eval_budget(&self, located_roots: usize) -> u64 {
        // Evaluations needed for all derivative orders at one point.
        let all_orders = (1u64 << (self.max_order as u32 + 1)) - 1;
        let bisection = 202 * (1u64 << self.max_order as u32);
        let per_round = self.zero_probe_samples as u64 * all_orders
            + MAX_ZERO_SKIPS as u64 * all_orders
            + 2 * (u64::from(self.max_doublings) + 1) * all_orders
            + bisection;
        (located_roots as u64 + 1) * per_round + 2 * self.max_samples as u64
    }
}

/// The four comparison outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompOutcome {
    /// `<1>`: O(f1) = O(f2).
    Equivalent,
    /// `<2>`: O(f1) ⊂ O(f2) strictly.
    FirstSmaller,
    /// `<3>`: O(f2) ⊂ O(f1) strictly.
    SecondSmaller,
    /// `<4>`: no relation established.
    Inconclusive,
}

impl CompOutcome {
    /// The conventional numeric code 1–4.
    pub fn code(self) -> u8 {
        match self {
            CompOutcome::Equivalent => 1,
            CompOutcome::FirstSmaller => 2,
            CompOutcome::SecondSmaller => 3,
            CompOutcome::Inconclusive => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CompOutcome::Equivalent => "EQUIVALENT",
            CompOutcome::FirstSmaller => "FIRST_SMALLER",
            CompOutcome::SecondSmaller => "SECOND_SMALLER",
            CompOutcome::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for CompOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (<{}>)", self.label(), self.code())
    }
}

/// A sign change located by the sweep: derivative order and root abscissa.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LocatedRoot {
    pub x: f64,
    pub order: usize,
}

/// Result of one ratio-limit pass.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitEstimate {
    /// The last `k` ratios agreed within ε; `value` is the last ratio.
    Bounded { value: f64, ratios: Vec<f64> },
    /// The ratios kept growing (or overflowed the `+∞` sentinel).
    Divergent { ratios: Vec<f64> },
    /// The sample budget ran out without either verdict.
    Inconclusive { ratios: Vec<f64> },
}

impl LimitEstimate {
    pub fn ratios(&self) -> &[f64] {
        match self {
            LimitEstimate::Bounded { ratios, .. }
            | LimitEstimate::Divergent { ratios }
            | LimitEstimate::Inconclusive { ratios } => ratios,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, LimitEstimate::Bounded { .. })
    }

    pub fn bounded_value(&self) -> Option<f64> {
        match self {
            LimitEstimate::Bounded { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LimitEstimate::Bounded { .. } => "bounded",
            LimitEstimate::Divergent { .. } => "divergent",
            LimitEstimate::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Diagnostics collected during one [`comp`] call.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CompTrace {
    /// Root-free start point the ratio passes sampled from.
    pub start: f64,
    /// Roots the sweep located, in discovery order.
    pub roots: Vec<LocatedRoot>,
    /// The difference was detected to be identically zero.
    pub zero_function: bool,
    /// Ratio pass for f1/f2, if it ran.
    pub forward: Option<LimitEstimate>,
    /// Ratio pass for f2/f1, if it ran.
    pub backward: Option<LimitEstimate>,
    /// Total ldif evaluations spent (each touches both functions once).
    pub evaluations: u64,
    /// Irregularities: evaluation errors, exhausted root budget, …
    pub notes: Vec<String>,
}

/// Outcome of [`comp`] plus its diagnostic trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CompResult {
    pub outcome: CompOutcome,
    pub trace: CompTrace,
}

/// `ln f1(x) − ln f2(x)`.
///
/// Shares sign and (order-zero) roots with `f1(x) − f2(x)` wherever both
/// functions are positive, but stays representable when the functions
/// themselves overflow. `±∞` appears when exactly one side is zero or
/// overflows; an indeterminate difference (both sides zero, or both
/// overflowing) is a domain error.
pub fn ldif(f1: &ComplexityFn, f2: &ComplexityFn, x: f64) -> Result<f64, EvalError> {
    let d = f1.ln_at(x)? - f2.ln_at(x)?;
    if d.is_nan() {
        return Err(EvalError::Domain(format!(
            "indeterminate log-difference at x = {x}"
        )));
    }
    Ok(d)
}

/// `p`-fold nested forward difference of `d` at `x`.
///
/// Order 0 returns `d(x)`. Order `p ≥ 1` returns
/// `(fd(p−1, x+h) − fd(p−1, x)) / h` where `h` is `base_step·max(1, |x|)`
/// snapped to the nearest power of two, recomputed at each recursion
/// level. The snapping makes `x + h` and the difference arithmetic exact
/// for low-degree polynomial fixtures, so the second difference of an
/// affine function comes out as exactly zero instead of rounding noise.
///
/// Costs `2^p` evaluations of `d`. `±∞` values flow through the
/// arithmetic; an `∞ − ∞` collision yields NaN, which callers must treat
/// as "no information".
pub fn fd_derivative<E>(
    d: &mut impl FnMut(f64) -> Result<f64, E>,
    p: usize,
    x: f64,
    base_step: f64,
) -> Result<f64, E> {
    if p == 0 {
        return d(x);
    }
    let h = snap_step(base_step * x.abs().max(1.0));
    let hi = fd_derivative(d, p - 1, x + h, base_step)?;
    let lo = fd_derivative(d, p - 1, x, base_step)?;
    Ok((hi - lo) / h)
}

// Nearest power of two — keeps x + h exactly representable and lets
// finite differences of affine functions cancel without rounding residue.
fn snap_step(h: f64) -> f64 {
    f64::exp2(h.log2().round())
}

/// Failures of [`bisect_root`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BisectError {
    #[error("no sign change on [{a}, {b}]")]
    SameSign { a: f64, b: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Binary-search a root of `d` on `[a, b]`.
///
/// Requires `a < b` and opposite (zero-tolerance-thresholded) signs at
/// the endpoints. Midpoint rule: a midpoint value within `zero_tol` of
/// zero is the root; when the midpoint and the right endpoint disagree
/// in sign, the interval `[c, b]` survives, otherwise `[a, c]`. Stops
/// when the interval width falls below `bisect_tol·max(1, |a|)` or after
/// 200 halvings, returning the interval midpoint.
pub fn bisect_root(
    d: &mut impl FnMut(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    cfg: &ComparatorConfig,
) -> Result<f64, BisectError> {
    let (da, db) = (d(a)?, d(b)?);
    if a.is_nan()
        || b.is_nan()
        || a >= b
        || sign_with_tol(da, cfg.zero_tol) * sign_with_tol(db, cfg.zero_tol) >= 0
    {
        return Err(BisectError::SameSign { a, b });
    }
    let (mut a, mut b, mut db) = (a, b, db);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let dc = d(c)?;
        if dc.abs() <= cfg.zero_tol {
            return Ok(c);
        }
        // NaN midpoint values fail this test and shrink toward the left
        // half, which keeps the search moving on noisy fixtures.
        if dc * db < 0.0 {
            a = c;
        } else {
            b = c;
            db = dc;
        }
        if b - a <= cfg.bisect_tol * a.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

fn sign_with_tol(v: f64, tol: f64) -> i32 {
    if v.is_nan() || v.abs() <= tol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

// Shared evaluation context for one comp call: the function pair plus the
// ldif call counter that backs the eval_budget assertion.
struct Pair<'a> {
    f1: &'a ComplexityFn,
    f2: &'a ComplexityFn,
    evals: Cell<u64>,
}

impl<'a> Pair<'a> {
    fn new(f1: &'a ComplexityFn, f2: &'a ComplexityFn) -> Self {
        Pair {
            f1,
            f2,
            evals: Cell::new(0),
        }
    }

    fn ldif(&self, x: f64) -> Result<f64, EvalError> {
        self.evals.set(self.evals.get() + 1);
        ldif(self.f1, self.f2, x)
    }

    // fd of ldif with eval errors and indeterminate (NaN) results folded
    // into None: the sweep treats both as "no usable sign here".
    fn fd(&self, p: usize, x: f64, cfg: &ComparatorConfig) -> Option<f64> {
        let v = fd_derivative(&mut |t| self.ldif(t), p, x, cfg.fd_step).ok()?;
        (!v.is_nan()).then_some(v)
    }
}

struct Sweep {
    start: f64,
    roots: Vec<LocatedRoot>,
    zero_function: bool,
    notes: Vec<String>,
}

/// Find a start point past the last detectable root of the difference.
///
/// Starting from `xmin = 1`, the sweep first probes which derivative
/// orders are identically zero near `xmin` (all probe samples within
/// `zero_tol`); if every order vanishes, the difference is the zero
/// function and the comparison degenerates. It then steps `xmin` forward
/// past points where some live order vanishes or fails to evaluate, and
/// doubles a probe point `xmax` from `xmin + 1` up to `max_doublings`
/// times, testing the orders `0..=max_order` for a sign change between
/// `xmin` and `xmax`. A sign change is bisected to a root, `xmin` restarts
/// just past it, and the process repeats; when the doubling budget runs
/// out without finding one, `xmin` is the start point.
///
/// Always terminates: each located root advances `xmin` by at least 1,
/// the root count is capped at [`MAX_LOCATED_ROOTS`], and every phase is
/// budget-bounded.
pub fn find_root_free_start(f1: &ComplexityFn, f2: &ComplexityFn, cfg: &ComparatorConfig) -> f64 {
    sweep(&Pair::new(f1, f2), cfg).start
}

#[derive(Clone, Copy, PartialEq)]
enum OrderState {
    /// The order carries sign information this round.
    Live,
    /// All evaluable probe samples vanished: identically-zero order.
    Zero,
    /// No probe sample evaluated: the order carries no information.
    Dead,
}

fn sweep(pair: &Pair<'_>, cfg: &ComparatorConfig) -> Sweep {
    let orders = cfg.max_order + 1;
    let mut xmin = 1.0f64;
    let mut roots: Vec<LocatedRoot> = Vec::new();
    let mut notes = Vec::new();

    'rounds: loop {
        // Probe which derivative orders near xmin are identically zero
        // (every evaluable sample within tolerance) or dead (no sample
        // evaluable at all); only the rest carry sign information.
        //
        // The order-0 samples run first: they decide the state of the
        // difference itself and give the magnitude scale that calibrates
        // the probe tolerance of the higher orders. ldif carries rounding
        // noise of a few ulps of its intermediate terms, and a p-fold
        // forward difference amplifies that noise by 1/h^p — far above
        // zero_tol — so an identically-zero derivative of a noisily
        // evaluated difference must be recognized against the noise
        // floor, not against zero_tol alone.
        let h0 = snap_step(cfg.fd_step * xmin.abs().max(1.0));
        let mut evaluable = 0usize;
        let mut scale = 0.0f64;
        let mut live0 = false;
        for j in 0..cfg.zero_probe_samples {
            if let Some(v) = pair.fd(0, xmin + j as f64, cfg) {
                evaluable += 1;
                if v.is_finite() {
                    scale = scale.max(v.abs());
                }
                if v.abs() > cfg.zero_tol {
                    live0 = true;
                }
            }
        }
        let mut tols = vec![cfg.zero_tol; orders];
        let mut state = vec![if live0 {
            OrderState::Live
        } else if evaluable > 0 {
            OrderState::Zero
        } else {
            OrderState::Dead
        }];
        const NOISE_SAFETY: f64 = 32.0;
        for (p, tol) in tols.iter_mut().enumerate().skip(1) {
            *tol = (NOISE_SAFETY * f64::EPSILON * scale / h0.powi(p as i32)).max(cfg.zero_tol);
            let mut evaluable = 0usize;
            let mut probe = OrderState::Dead;
            for j in 0..cfg.zero_probe_samples {
                match pair.fd(p, xmin + j as f64, cfg) {
                    Some(v) if v.abs() > *tol => {
                        probe = OrderState::Live;
                        break;
                    }
                    Some(_) => evaluable += 1,
                    None => {}
                }
            }
            if probe != OrderState::Live && evaluable > 0 {
                probe = OrderState::Zero;
            }
            state.push(probe);
        }
        if !state.contains(&OrderState::Live) {
            if state[0] == OrderState::Zero {
                return Sweep {
                    start: xmin,
                    roots,
                    zero_function: true,
                    notes,
                };
            }
            notes.push(format!(
                "difference could not be evaluated near x = {xmin}; start point is best-effort"
            ));
            return Sweep {
                start: xmin,
                roots,
                zero_function: false,
                notes,
            };
        }

        // Skip forward while any live order vanishes or fails at xmin.
        let mut skips = 0usize;
        while (0..orders).any(|p| {
            state[p] == OrderState::Live
                && !matches!(pair.fd(p, xmin, cfg), Some(v) if v.abs() > tols[p])
        }) {
            xmin += 1.0;
            skips += 1;
            if skips > MAX_ZERO_SKIPS {
                let vanishes = matches!(pair.ldif(xmin), Ok(v) if v.abs() <= cfg.zero_tol);
                if vanishes {
                    notes.push(format!(
                        "difference vanished over {MAX_ZERO_SKIPS} consecutive points; \
                         treating it as the zero function"
                    ));
                } else {
                    notes.push(format!(
                        "skip budget exhausted near x = {xmin}; start point is best-effort"
                    ));
                }
                return Sweep {
                    start: xmin,
                    roots,
                    zero_function: vanishes,
                    notes,
                };
            }
        }

        let at_xmin: Vec<Option<f64>> = (0..orders)
            .map(|p| {
                if state[p] == OrderState::Live {
                    pair.fd(p, xmin, cfg)
                } else {
                    None
                }
            })
            .collect();

        let mut xmax = xmin + 1.0;
        for _ in 0..=cfg.max_doublings {
            for (p, lo) in at_xmin.iter().enumerate() {
                let Some(lo) = *lo else { continue };
                let Some(hi) = pair.fd(p, xmax, cfg) else {
                    continue;
                };
                if sign_with_tol(lo, cfg.zero_tol) * sign_with_tol(hi, cfg.zero_tol) < 0 {
                    let root = bisect_root(
                        &mut |t| Ok(pair.fd(p, t, cfg).unwrap_or(f64::NAN)),
                        xmin,
                        xmax,
                        cfg,
                    )
                    .expect("endpoints were verified to have opposite signs");
                    roots.push(LocatedRoot { x: root, order: p });
                    xmin = root + 1.0;
                    if roots.len() >= MAX_LOCATED_ROOTS {
                        notes.push(format!(
                            "root budget exhausted after {MAX_LOCATED_ROOTS} roots; \
                             start point is best-effort"
                        ));
                        return Sweep {
                            start: xmin,
                            roots,
                            zero_function: false,
                            notes,
                        };
                    }
                    continue 'rounds;
                }
            }
            xmax *= 2.0;
        }

        return Sweep {
            start: xmin,
            roots,
            zero_function: false,
            notes,
        };
    }
}

/// Estimate the limit of `fnum(n)/fden(n)` along `nv(1) = start`,
/// `nv(i) = q·nv(i−1)`.
///
/// Each sample is `exp(ln fnum − ln fden)`; an exponent above 700 clamps
/// the ratio to the `+∞` sentinel, which immediately decides
/// [`LimitEstimate::Divergent`]. The pass returns
/// [`LimitEstimate::Bounded`] as soon as the last `k` ratios pairwise
/// agree within ε, and after `max_samples` samples settles for
/// `Divergent` when the last `k` are strictly increasing with total
/// relative growth at least ε, otherwise
/// [`LimitEstimate::Inconclusive`].
pub fn estimate_ratio_limit(
    fnum: &ComplexityFn,
    fden: &ComplexityFn,
    start: f64,
    cfg: &ComparatorConfig,
) -> Result<LimitEstimate, EvalError> {
    let pair = Pair::new(fnum, fden);
    estimate(&pair, false, start, cfg)
}

// `swapped` reuses the pair's ldif with the sign flipped, so both ratio
// passes share one evaluation counter.
fn estimate(
    pair: &Pair<'_>,
    swapped: bool,
    start: f64,
    cfg: &ComparatorConfig,
) -> Result<LimitEstimate, EvalError> {
    let sign = if swapped { -1.0 } else { 1.0 };
    let mut ratios: Vec<f64> = Vec::with_capacity(cfg.max_samples);
    let mut nv = start;
    for _ in 0..cfg.max_samples {
        let ld = sign * pair.ldif(nv)?;
        let rho = if ld > LN_RATIO_OVERFLOW {
            f64::INFINITY
        } else {
            ld.exp()
        };
        ratios.push(rho);
        if rho == f64::INFINITY {
            return Ok(LimitEstimate::Divergent { ratios });
        }
        if ratios.len() >= cfg.k {
            let window = &ratios[ratios.len() - cfg.k..];
            let spread = window.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
                - window.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            if spread <= cfg.epsilon {
                return Ok(LimitEstimate::Bounded { value: rho, ratios });
            }
        }
        nv *= f64::from(cfg.q);
    }
    let window = &ratios[ratios.len() - cfg.k..];
    let increasing = window.windows(2).all(|w| w[0] < w[1]);
    if increasing && window[cfg.k - 1] >= (1.0 + cfg.epsilon) * window[0] {
        Ok(LimitEstimate::Divergent { ratios })
    } else {
        Ok(LimitEstimate::Inconclusive { ratios })
    }
}

/// Compare the growth orders of `f1` and `f2`.
///
/// Runs [`find_root_free_start`], then up to two ratio passes from the
/// start point, and maps the estimates to an outcome:
///
/// * forward bounded — backward bounded ⇒ `<1>`, otherwise ⇒ `<2>`;
/// * forward divergent ⇒ `<3>`;
/// * forward inconclusive — backward divergent ⇒ `<2>`, backward bounded
///   above ε ⇒ `<1>`, otherwise ⇒ `<4>`.
///
/// A difference detected as the zero function short-circuits to `<1>`.
/// Evaluation errors never abort the call: they surface as `<4>` with a
/// note in the trace.
///
/// # Panics
///
/// Panics if `cfg` violates its invariants (see
/// [`ComparatorConfig::validate`]).
pub fn comp(f1: &ComplexityFn, f2: &ComplexityFn, cfg: &ComparatorConfig) -> CompResult {
    cfg.validate().expect("invalid comparator configuration");
    let pair = Pair::new(f1, f2);
    let sw = sweep(&pair, cfg);
    let mut trace = CompTrace {
        start: sw.start,
        roots: sw.roots,
        zero_function: sw.zero_function,
        forward: None,
        backward: None,
        evaluations: 0,
        notes: sw.notes,
    };

    let outcome = if trace.zero_function {
        trace
            .notes
            .push("difference is the zero function; the functions coincide".into());
        CompOutcome::Equivalent
    } else {
        decide(&pair, trace.start, cfg, &mut trace)
    };

    trace.evaluations = pair.evals.get();
    CompResult { outcome, trace }
}

fn decide(
    pair: &Pair<'_>,
    start: f64,
    cfg: &ComparatorConfig,
    trace: &mut CompTrace,
) -> CompOutcome {
    let forward = match estimate(pair, false, start, cfg) {
        Ok(e) => e,
        Err(err) => {
            trace
                .notes
                .push(format!("forward ratio pass failed: {err}"));
            return CompOutcome::Inconclusive;
        }
    };
    trace.forward = Some(forward.clone());

    if let LimitEstimate::Divergent { .. } = forward {
        return CompOutcome::SecondSmaller;
    }

    let backward = match estimate(pair, true, start, cfg) {
        Ok(e) => e,
        Err(err) => {
            trace
                .notes
                .push(format!("backward ratio pass failed: {err}"));
            return CompOutcome::Inconclusive;
        }
    };
    trace.backward = Some(backward.clone());

    match (&forward, &backward) {
        (LimitEstimate::Bounded { .. }, LimitEstimate::Bounded { .. }) => CompOutcome::Equivalent,
        (LimitEstimate::Bounded { .. }, _) => CompOutcome::FirstSmaller,
        (LimitEstimate::Inconclusive { .. }, LimitEstimate::Divergent { .. }) => {
            CompOutcome::FirstSmaller
        }
        (LimitEstimate::Inconclusive { .. }, LimitEstimate::Bounded { value, .. })
            if *value > cfg.epsilon =>
        {
            CompOutcome::Equivalent
        }
        _ => CompOutcome::Inconclusive,
    }
}
