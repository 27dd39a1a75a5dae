//! Θ-class organization of complexity-function libraries.
//!
//! [`classify`] partitions a list of named complexity functions into
//! Θ-equivalence classes using the comparator and keeps the classes
//! sorted by ascending asymptotic growth of their representatives.
//! [`insert_function`] adds one function to an existing library without
//! reclassifying, and [`refine`] merges classes that a better comparison
//! function recognizes as equivalent.
//!
//! The sweep order is normative: seeds are taken in input order, each
//! seed absorbs every later, still-unassigned function that compares
//! `<1>` against it, and the class list is then stable-sorted by
//! representative comparison, moving a class left only on a definite
//! `<3>` — an inconclusive `<4>` keeps the existing order. Because the
//! comparator is a heuristic, the partition can depend on the input
//! order; fixing the sweep makes the result reproducible.
//!
//! The pairwise comparisons inside one sweep round are independent pure
//! calls, so with the `parallel` feature (on by default) they run on a
//! rayon thread pool; [`classify_sequential`] always runs them on the
//! calling thread. Both produce identical results — assignment itself
//! stays in the normative order.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::comparator::{comp, CompOutcome, ComparatorConfig, ComplexityFn};

/// One Θ-equivalence class: the members in insertion order, the first
/// member acting as representative.
///
/// Membership means mutual `<1>` comparison under the comparator the
/// library was built with: each member is sandwiched between constant
/// multiples of the representative from some point on.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaClass {
    members: Vec<(String, ComplexityFn)>,
}

impl ThetaClass {
    fn new(members: Vec<(String, ComplexityFn)>) -> Self {
        assert!(!members.is_empty(), "a Theta class cannot be empty");
        ThetaClass { members }
    }

    /// The class representative: the first member.
    pub fn representative(&self) -> (&str, &ComplexityFn) {
        let (id, f) = &self.members[0];
        (id, f)
    }

    pub fn members(&self) -> &[(String, ComplexityFn)] {
        &self.members
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|(id, _)| id.as_str())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: never empty
    }
}

/// An ordered list of Θ-classes, ascending by asymptotic growth, plus
/// the comparator configuration they were built with.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedLibrary {
    classes: Vec<ThetaClass>,
    cfg: ComparatorConfig,
}

impl ClassifiedLibrary {
    /// An empty library classified under `cfg`.
    pub fn empty(cfg: ComparatorConfig) -> Self {
        ClassifiedLibrary {
            classes: Vec::new(),
            cfg,
        }
    }

    pub fn classes(&self) -> &[ThetaClass] {
        &self.classes
    }

    pub fn config(&self) -> &ComparatorConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Total members across all classes.
    pub fn member_count(&self) -> usize {
        self.classes.iter().map(ThetaClass::len).sum()
    }

    /// Locate an id: class index and its function.
    pub fn find(&self, id: &str) -> Option<(usize, &ComplexityFn)> {
        self.classes.iter().enumerate().find_map(|(k, class)| {
            class
                .members
                .iter()
                .find(|(mid, _)| mid == id)
                .map(|(_, f)| (k, f))
        })
    }

    fn contains_id(&self, id: &str) -> bool {
        self.find(id).is_some()
    }
}

impl fmt::Display for ClassifiedLibrary {
    /// One line per class: `class k: [id …] (representative: id)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, class) in self.classes.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            let ids: Vec<&str> = class.ids().collect();
            write!(
                f,
                "class {}: [{}] (representative: {})",
                k + 1,
                ids.join(" "),
                class.representative().0
            )?;
        }
        Ok(())
    }
}

/// Failures of [`classify`] and [`insert_function`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("duplicate function id {0}")]
    DuplicateId(String),
}

// Run the independent comparisons of one sweep round, on the rayon pool
// when requested and compiled in.
fn compare_many<F>(
    parallel: bool,
    jobs: &[(&ComplexityFn, &ComplexityFn)],
    f: F,
) -> Vec<CompOutcome>
where
    F: Fn(&ComplexityFn, &ComplexityFn) -> CompOutcome + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return jobs.par_iter().map(|(a, b)| f(a, b)).collect();
    }
    let _ = parallel;
    jobs.iter().map(|(a, b)| f(a, b)).collect()
}

// Stable insertion sort: a class moves left
// only while the class before it compares <3> (grows faster); <1> and <4>
// keep the existing order.
fn sort_classes<F>(classes: &mut [ThetaClass], better: &F)
where
    F: Fn(&ComplexityFn, &ComplexityFn) -> CompOutcome,
{
    for i in 1..classes.len() {
        let mut j = i;
        while j > 0
            && better(
                classes[j - 1].representative().1,
                classes[j].representative().1,
            ) == CompOutcome::SecondSmaller
        {
            classes.swap(j - 1, j);
            j -= 1;
        }
    }
}

fn ensure_unique_ids(fns: &[(String, ComplexityFn)]) -> Result<(), ClassifyError> {
    let mut seen = BTreeSet::new();
    for (id, _) in fns {
        if !seen.insert(id.as_str()) {
            return Err(ClassifyError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn classify_impl(
    fns: Vec<(String, ComplexityFn)>,
    cfg: &ComparatorConfig,
    parallel: bool,
) -> Result<ClassifiedLibrary, ClassifyError> {
    ensure_unique_ids(&fns)?;
    let n = fns.len();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if class_of[i].is_some() {
            continue;
        }
        class_of[i] = Some(i);
        let unassigned: Vec<usize> = (i + 1..n).filter(|&j| class_of[j].is_none()).collect();
        let jobs: Vec<(&ComplexityFn, &ComplexityFn)> =
            unassigned.iter().map(|&j| (&fns[i].1, &fns[j].1)).collect();
        let outcomes = compare_many(parallel, &jobs, |a, b| comp(a, b, cfg).outcome);
        for (&j, outcome) in unassigned.iter().zip(outcomes) {
            if outcome == CompOutcome::Equivalent {
                class_of[j] = Some(i);
            }
        }
    }

    let mut buckets: BTreeMap<usize, Vec<(String, ComplexityFn)>> = BTreeMap::new();
    for (j, entry) in fns.into_iter().enumerate() {
        buckets
            .entry(class_of[j].expect("every function was assigned"))
            .or_default()
            .push(entry);
    }
    let mut classes: Vec<ThetaClass> = buckets.into_values().map(ThetaClass::new).collect();
    sort_classes(&mut classes, &|a, b| comp(a, b, cfg).outcome);
    Ok(ClassifiedLibrary {
        classes,
        cfg: cfg.clone(),
    })
}

/// Partition `fns` into Θ-classes under `cfg` and sort them by growth.
///
/// Sweep: the first still-unassigned function seeds a class and absorbs
/// every later unassigned function comparing `<1>` against it; empty
/// seeds are dropped, the first member of each class becomes its
/// representative, and classes are stable-sorted by representative
/// comparison (`<2>` before, `<3>` after, `<1>`/`<4>` keep order).
///
/// With the `parallel` feature the comparisons of each round run on the
/// rayon pool; the result is identical to [`classify_sequential`].
pub fn classify(
    fns: Vec<(String, ComplexityFn)>,
    cfg: &ComparatorConfig,
) -> Result<ClassifiedLibrary, ClassifyError> {
    classify_impl(fns, cfg, true)
}

/// [`classify`] with all comparisons on the calling thread.
pub fn classify_sequential(
    fns: Vec<(String, ComplexityFn)>,
    cfg: &ComparatorConfig,
) -> Result<ClassifiedLibrary, ClassifyError> {
    classify_impl(fns, cfg, false)
}

/// Add one function to a classified library.
///
/// The function joins the first class whose representative compares
/// `<1>` against it. Otherwise it forms a new singleton class, placed
/// before the first class whose representative grows strictly faster
/// (compares `<3>` against the new function), or at the end when there
/// is none — in particular when every comparison was inconclusive.
pub fn insert_function(
    lib: ClassifiedLibrary,
    id: impl Into<String>,
    f: ComplexityFn,
) -> Result<ClassifiedLibrary, ClassifyError> {
    let id = id.into();
    if lib.contains_id(&id) {
        return Err(ClassifyError::DuplicateId(id));
    }
    let ClassifiedLibrary { mut classes, cfg } = lib;
    let jobs: Vec<(&ComplexityFn, &ComplexityFn)> = classes
        .iter()
        .map(|class| (&f, class.representative().1))
        .collect();
    let outcomes = compare_many(true, &jobs, |a, b| comp(a, b, &cfg).outcome);

    if let Some(k) = outcomes.iter().position(|&o| o == CompOutcome::Equivalent) {
        classes[k].members.push((id, f));
    } else {
        let at = outcomes
            .iter()
            .position(|&o| o == CompOutcome::FirstSmaller)
            .unwrap_or(classes.len());
        classes.insert(at, ThetaClass::new(vec![(id, f)]));
    }
    Ok(ClassifiedLibrary { classes, cfg })
}

/// Merge classes that a better comparison function recognizes as
/// Θ-equal, and re-sort under it.
///
/// `better` must not contradict the comparator the library was built
/// with on the outcomes `<1>`, `<2>`, `<3>` — it may only turn `<4>`
/// into a definite answer. That contract is documented, not checked.
/// Merging closes transitively: `<1>` links A–B and B–C put A, B, C in
/// one class, whose members keep ascending original-class order.
pub fn refine<F>(lib: ClassifiedLibrary, better: F) -> ClassifiedLibrary
where
    F: Fn(&ComplexityFn, &ComplexityFn) -> CompOutcome + Sync,
{
    let ClassifiedLibrary { classes, cfg } = lib;
    let m = classes.len();
    let index_pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
        .collect();
    let jobs: Vec<(&ComplexityFn, &ComplexityFn)> = index_pairs
        .iter()
        .map(|&(a, b)| (classes[a].representative().1, classes[b].representative().1))
        .collect();
    let outcomes = compare_many(true, &jobs, &better);

    let mut dsu: Vec<usize> = (0..m).collect();
    fn find(dsu: &mut [usize], mut a: usize) -> usize {
        while dsu[a] != a {
            dsu[a] = dsu[dsu[a]];
            a = dsu[a];
        }
        a
    }
    for (&(a, b), outcome) in index_pairs.iter().zip(outcomes) {
        if outcome == CompOutcome::Equivalent {
            let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
            // The smaller root wins, so the earliest class leads the
            // merged member list and keeps the representative.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            dsu[hi] = lo;
        }
    }

    let mut merged: BTreeMap<usize, Vec<(String, ComplexityFn)>> = BTreeMap::new();
    for (k, class) in classes.into_iter().enumerate() {
        merged
            .entry(find(&mut dsu, k))
            .or_default()
            .extend(class.members);
    }
    let mut classes: Vec<ThetaClass> = merged.into_values().map(ThetaClass::new).collect();
    sort_classes(&mut classes, &better);
    ClassifiedLibrary { classes, cfg }
}

/// Failures of [`parse_function_list`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionListError {
    #[error("line {line}: missing '=' between id and expression")]
    MissingSeparator { line: usize },
    #[error("line {line}: empty function id")]
    EmptyId { line: usize },
    #[error("line {line}: duplicate function id {id}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {source}")]
    BadFunction {
        line: usize,
        source: crate::comparator::ComplexityFnError,
    },
}

/// Parse a function-list file: one `id = expression` per line, with `#`
/// starting a comment and blank lines ignored.
pub fn parse_function_list(src: &str) -> Result<Vec<(String, ComplexityFn)>, FunctionListError> {
    let mut fns: Vec<(String, ComplexityFn)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((id, expr)) = text.split_once('=') else {
            return Err(FunctionListError::MissingSeparator { line });
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(FunctionListError::EmptyId { line });
        }
        if !seen.insert(id.to_string()) {
            return Err(FunctionListError::DuplicateId {
                line,
                id: id.to_string(),
            });
        }
        let f = ComplexityFn::parse(expr.trim())
            .map_err(|source| FunctionListError::BadFunction { line, source })?;
        fns.push((id.to_string(), f));
    }
    Ok(fns)
}
