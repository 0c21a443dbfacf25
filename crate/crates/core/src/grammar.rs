//! Pregroup types and contraction-only reduction.
//!
//! A simple type is an atom with an integer adjoint order: `n` is `(n, 0)`,
//! `n^r` is `(n, 1)`, `n^l` is `(n, -1)` and `n^rr` is `(n, 2)`. Two adjacent
//! simple types `x · y` contract to the unit when they share a base and
//! `order(y) = order(x) + 1`; this covers both `x · x^r → 1` and `x^l · x → 1`.
//!
//! A reduction of a sentence is recorded as a [`LinkDiagram`]: a nested,
//! non-crossing set of cups over the flattened factor positions. The open
//! positions spell the residual type. The same diagram is later executed as a
//! tensor-contraction plan.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest flattened string [`enumerate_reductions`] will accept.
pub const ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("invalid atom name {0:?}: expected one or more characters in [a-z]")]
    InvalidAtom(String),
    #[error("malformed factor {factor:?}: {reason}")]
    Parse { factor: String, reason: String },
    #[error("cannot reduce an empty sentence")]
    EmptySentence,
    #[error("sentence has {len} simple types; exhaustive enumeration is capped at {cap}")]
    TooLong { len: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("diagram spans {diagram} positions but the sentence has {sentence}")]
    PositionCount { diagram: usize, sentence: usize },
    #[error("link ({0}, {1}) is not ordered or is out of range")]
    BadLink(usize, usize),
    #[error("position {0} is used more than once")]
    Reused(usize),
    #[error("links ({0}, {1}) and ({2}, {3}) cross")]
    Crossing(usize, usize, usize, usize),
    #[error("link ({i}, {j}) joins {left} and {right}, which do not contract")]
    NotContractible {
        i: usize,
        j: usize,
        left: String,
        right: String,
    },
    #[error("position {inner} under link ({i}, {j}) is left open")]
    OpenUnderCup { i: usize, j: usize, inner: usize },
    #[error("open positions {0:?} are not the sorted complement of the linked positions")]
    OpenMismatch(Vec<usize>),
    #[error("links are not sorted ascending")]
    Unsorted,
}

/// A basic grammatical type such as `n` or `s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self, GrammarError> {
        let name = name.into();
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(GrammarError::InvalidAtom(name));
        }
        Ok(Atom(name))
    }

    pub fn noun() -> Self {
        Atom("n".into())
    }

    pub fn sentence() -> Self {
        Atom("s".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Atom {
    type Error = GrammarError;

    fn try_from(s: String) -> Result<Self, GrammarError> {
        Atom::new(s)
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atom together with its adjoint order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleType {
    pub base: Atom,
    pub adjoint_order: i32,
}

impl SimpleType {
    pub fn new(base: Atom, adjoint_order: i32) -> Self {
        SimpleType {
            base,
            adjoint_order,
        }
    }

    pub fn right(&self) -> Self {
        SimpleType::new(self.base.clone(), self.adjoint_order + 1)
    }

    pub fn left(&self) -> Self {
        SimpleType::new(self.base.clone(), self.adjoint_order - 1)
    }

    /// True when `self · next → 1`.
    pub fn contracts_with(&self, next: &SimpleType) -> bool {
        self.base == next.base && next.adjoint_order == self.adjoint_order + 1
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let z = self.adjoint_order;
        if z != 0 {
            let mark = if z > 0 { "r" } else { "l" };
            write!(f, "^{}", mark.repeat(z.unsigned_abs() as usize))?;
        }
        Ok(())
    }
}

impl FromStr for SimpleType {
    type Err = GrammarError;

    fn from_str(factor: &str) -> Result<Self, GrammarError> {
        let err = |reason: &str| GrammarError::Parse {
            factor: factor.to_string(),
            reason: reason.to_string(),
        };
        let (name, marks) = match factor.split_once('^') {
            Some((name, marks)) => {
                // accept the braced form n^{rr} as well as n^rr
                let marks = marks
                    .strip_prefix('{')
                    .and_then(|m| m.strip_suffix('}'))
                    .unwrap_or(marks);
                if marks.is_empty() {
                    return Err(err("empty adjoint marker after '^'"));
                }
                (name, marks)
            }
            None => (factor, ""),
        };
        if name.is_empty() {
            return Err(err("empty atom"));
        }
        let base = Atom::new(name).map_err(|_| err("atom must be lowercase ASCII letters"))?;
        let mut z = 0i32;
        for c in marks.chars() {
            match c {
                'r' => z += 1,
                'l' => z -= 1,
                other => return Err(err(&format!("unexpected adjoint marker {other:?}"))),
            }
        }
        Ok(SimpleType::new(base, z))
    }
}

/// A concatenation of simple types; the empty sequence is the unit type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PregroupType(Vec<SimpleType>);

impl PregroupType {
    pub fn new(factors: Vec<SimpleType>) -> Self {
        PregroupType(factors)
    }

    pub fn unit() -> Self {
        PregroupType(Vec::new())
    }

    pub fn atom(atom: Atom) -> Self {
        PregroupType(vec![SimpleType::new(atom, 0)])
    }

    pub fn factors(&self) -> &[SimpleType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        PregroupType(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// `(x y)^r = y^r x^r`.
    pub fn adjoint_right(&self) -> PregroupType {
        PregroupType(self.0.iter().rev().map(SimpleType::right).collect())
    }

    /// `(x y)^l = y^l x^l`.
    pub fn adjoint_left(&self) -> PregroupType {
        PregroupType(self.0.iter().rev().map(SimpleType::left).collect())
    }
}

impl FromIterator<SimpleType> for PregroupType {
    fn from_iter<I: IntoIterator<Item = SimpleType>>(iter: I) -> Self {
        PregroupType(iter.into_iter().collect())
    }
}

impl FromStr for PregroupType {
    type Err = GrammarError;

    /// Whitespace-separated factors such as `n^r s n^l`. The empty string and
    /// the lone token `1` both denote the unit type.
    fn from_str(text: &str) -> Result<Self, GrammarError> {
        let trimmed = text.trim();
        if trimmed == "1" {
            return Ok(PregroupType::unit());
        }
        trimmed
            .split_whitespace()
            .map(SimpleType::from_str)
            .collect::<Result<Vec<_>, _>>()
            .map(PregroupType)
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Parses the concrete type syntax, e.g. `"n^r s n^l"`.
pub fn parse_type(text: &str) -> Result<PregroupType, GrammarError> {
    text.parse()
}

/// Concatenates the word types of a sentence into one factor string.
pub fn flatten(sentence: &[PregroupType]) -> Vec<SimpleType> {
    sentence.iter().flat_map(|t| t.factors().iter().cloned()).collect()
}

/// A reduction of a flattened type string: cups between contracting
/// positions, plus the positions left open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDiagram", into = "RawDiagram")]
pub struct LinkDiagram {
    n_positions: usize,
    links: Vec<(usize, usize)>,
    open: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawDiagram {
    n: usize,
    links: Vec<(usize, usize)>,
    open: Vec<usize>,
}

impl TryFrom<RawDiagram> for LinkDiagram {
    type Error = DiagramError;

    fn try_from(raw: RawDiagram) -> Result<Self, DiagramError> {
        let d = LinkDiagram {
            n_positions: raw.n,
            links: raw.links,
            open: raw.open,
        };
        d.validate_structure()?;
        Ok(d)
    }
}

impl From<LinkDiagram> for RawDiagram {
    fn from(d: LinkDiagram) -> Self {
        RawDiagram {
            n: d.n_positions,
            links: d.links,
            open: d.open,
        }
    }
}

impl LinkDiagram {
    /// Builds a diagram from its links; the open positions are derived and the
    /// links sorted. Only structural checks run here (see [`Self::validate`]).
    pub fn from_links(n_positions: usize, mut links: Vec<(usize, usize)>) -> Result<Self, DiagramError> {
        links.sort_unstable();
        let mut linked = vec![false; n_positions];
        for &(i, j) in &links {
            if i >= j || j >= n_positions {
                return Err(DiagramError::BadLink(i, j));
            }
            for p in [i, j] {
                if linked[p] {
                    return Err(DiagramError::Reused(p));
                }
                linked[p] = true;
            }
        }
        let open = (0..n_positions).filter(|&p| !linked[p]).collect();
        let d = LinkDiagram {
            n_positions,
            links,
            open,
        };
        d.validate_structure()?;
        Ok(d)
    }

    pub fn n_positions(&self) -> usize {
        self.n_positions
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn open(&self) -> &[usize] {
        &self.open
    }

    /// Checks everything that does not depend on the factor types: ordering,
    /// disjointness, non-crossing, no open wire under a cup, and that `open`
    /// is the sorted complement of the linked positions.
    pub fn validate_structure(&self) -> Result<(), DiagramError> {
        let n = self.n_positions;
        if self.links.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DiagramError::Unsorted);
        }
        let mut partner: Vec<Option<usize>> = vec![None; n];
        for &(i, j) in &self.links {
            if i >= j || j >= n {
                return Err(DiagramError::BadLink(i, j));
            }
            for (p, q) in [(i, j), (j, i)] {
                if partner[p].is_some() {
                    return Err(DiagramError::Reused(p));
                }
                partner[p] = Some(q);
            }
        }
        for (x, &(i, j)) in self.links.iter().enumerate() {
            for &(k, l) in &self.links[x + 1..] {
                if (i < k && k < j && j < l) || (k < i && i < l && l < j) {
                    return Err(DiagramError::Crossing(i, j, k, l));
                }
            }
            for inner in i + 1..j {
                match partner[inner] {
                    Some(q) if q > i && q < j => {}
                    Some(_) => unreachable!("crossing already rejected"),
                    None => return Err(DiagramError::OpenUnderCup { i, j, inner }),
                }
            }
        }
        let expected: Vec<usize> = (0..n).filter(|&p| partner[p].is_none()).collect();
        if expected != self.open {
            return Err(DiagramError::OpenMismatch(self.open.clone()));
        }
        Ok(())
    }

    /// Full validation against the flattened factor string.
    pub fn validate(&self, factors: &[SimpleType]) -> Result<(), DiagramError> {
        if factors.len() != self.n_positions {
            return Err(DiagramError::PositionCount {
                diagram: self.n_positions,
                sentence: factors.len(),
            });
        }
        self.validate_structure()?;
        for &(i, j) in &self.links {
            if !factors[i].contracts_with(&factors[j]) {
                return Err(DiagramError::NotContractible {
                    i,
                    j,
                    left: factors[i].to_string(),
                    right: factors[j].to_string(),
                });
            }
        }
        Ok(())
    }

    /// The type spelled by the open positions.
    pub fn residual(&self, factors: &[SimpleType]) -> PregroupType {
        self.open.iter().map(|&p| factors[p].clone()).collect()
    }

    /// Draws the factors with their cups underneath, one row per nesting level.
    pub fn render_ascii(&self, factors: &[SimpleType]) -> String {
        let labels: Vec<String> = factors.iter().map(ToString::to_string).collect();
        let widths: Vec<usize> = labels.iter().map(|l| l.chars().count().max(1) + 2).collect();
        let mut centers = Vec::with_capacity(labels.len());
        let mut x = 0;
        for w in &widths {
            centers.push(x + w / 2);
            x += w;
        }
        let total = x;

        // height of a cup = 1 + tallest cup nested inside it
        let mut height = vec![0usize; self.links.len()];
        let mut order: Vec<usize> = (0..self.links.len()).collect();
        order.sort_by_key(|&x| self.links[x].1 - self.links[x].0);
        for &x in &order {
            let (i, j) = self.links[x];
            height[x] = 1 + self
                .links
                .iter()
                .zip(&height)
                .filter(|((k, l), _)| i < *k && *l < j)
                .map(|(_, &h)| h)
                .max()
                .unwrap_or(0);
        }
        let rows = height.iter().copied().max().unwrap_or(1);

        let mut out = String::new();
        let mut label_row = String::new();
        for (label, w) in labels.iter().zip(&widths) {
            let pad = w - label.chars().count();
            label_row.push_str(&" ".repeat(pad / 2));
            label_row.push_str(label);
            label_row.push_str(&" ".repeat(pad - pad / 2));
        }
        out.push_str(label_row.trim_end());
        out.push('\n');
        for row in 1..=rows {
            let mut line = vec![' '; total];
            for &p in &self.open {
                line[centers[p]] = '│';
            }
            for (&(i, j), &h) in self.links.iter().zip(&height) {
                let (a, b) = (centers[i], centers[j]);
                if row < h {
                    line[a] = '│';
                    line[b] = '│';
                } else if row == h {
                    line[a] = '└';
                    line[b] = '┘';
                    for c in line.iter_mut().take(b).skip(a + 1) {
                        *c = '─';
                    }
                }
            }
            let s: String = line.into_iter().collect();
            out.push_str(s.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Finds a contraction-only reduction of `sentence` to `target`.
///
/// Returns `Ok(None)` when no reduction exists. When several exist, the one
/// whose sorted link list is lexicographically least is returned.
///
/// The search is an interval dynamic program. `closed[i][j]` records whether
/// positions `i..j` reduce to the unit, with the smallest partner for `i`;
/// `tail[i][k]` records whether `i..n` reduces to `target[k..]`, preferring
/// to link `i` (to its nearest feasible partner) over leaving it open. Both
/// preferences are exactly the lexicographic order on sorted link lists,
/// because the number of links below any state is fixed.
pub fn reduce(sentence: &[PregroupType], target: &PregroupType) -> Result<Option<LinkDiagram>, GrammarError> {
    if sentence.is_empty() {
        return Err(GrammarError::EmptySentence);
    }
    let factors = flatten(sentence);
    Ok(reduce_factors(&factors, target.factors()))
}

/// [`reduce`] over an already flattened string.
pub fn reduce_factors(factors: &[SimpleType], target: &[SimpleType]) -> Option<LinkDiagram> {
    let n = factors.len();
    let t = target.len();
    if t > n || (n - t) % 2 != 0 {
        return None;
    }

    // closed[i][j]: Some(m) if i..j reduces to 1 with i linked to m; Some(i) marks the empty span.
    let mut closed: Vec<Vec<Option<usize>>> = vec![vec![None; n + 1]; n + 1];
    for (i, row) in closed.iter_mut().enumerate() {
        row[i] = Some(i);
    }
    for len in (2..=n).step_by(2) {
        for i in 0..=n - len {
            let j = i + len;
            closed[i][j] = (i + 1..j).step_by(2).find(|&m| {
                factors[i].contracts_with(&factors[m]) && closed[i + 1][m].is_some() && closed[m + 1][j].is_some()
            });
        }
    }

    #[derive(Clone, Copy)]
    enum Step {
        Link(usize),
        Open,
    }
    // tail[i][k]: how i..n reduces to target[k..]
    let mut tail: Vec<Vec<Option<Step>>> = vec![vec![None; t + 1]; n + 1];
    let mut done = vec![vec![false; t + 1]; n + 1];
    done[n][t] = true;
    for i in (0..n).rev() {
        for k in 0..=t {
            let link = (i + 1..n)
                .step_by(2)
                .find(|&m| factors[i].contracts_with(&factors[m]) && closed[i + 1][m].is_some() && done[m + 1][k]);
            let step = match link {
                Some(m) => Some(Step::Link(m)),
                None if k < t && factors[i] == target[k] && done[i + 1][k + 1] => Some(Step::Open),
                None => None,
            };
            tail[i][k] = step;
            done[i][k] = step.is_some();
        }
    }
    if !done[0][0] {
        return None;
    }

    fn expand(closed: &[Vec<Option<usize>>], i: usize, j: usize, links: &mut Vec<(usize, usize)>) {
        if i == j {
            return;
        }
        let m = closed[i][j].expect("reducible span");
        links.push((i, m));
        expand(closed, i + 1, m, links);
        expand(closed, m + 1, j, links);
    }

    let mut links = Vec::with_capacity((n - t) / 2);
    let (mut i, mut k) = (0, 0);
    while i < n {
        match tail[i][k].expect("feasible state") {
            Step::Link(m) => {
                links.push((i, m));
                expand(&closed, i + 1, m, &mut links);
                i = m + 1;
            }
            Step::Open => {
                i += 1;
                k += 1;
            }
        }
    }
    Some(LinkDiagram::from_links(n, links).expect("dynamic program yields a well-formed diagram"))
}

/// Every diagram reducing `sentence` to `target`, sorted by link list.
///
/// This is a brute-force oracle: it walks every partial matching of the
/// flattened positions and keeps the ones the validator accepts. It is
/// exponential, so strings longer than [`ENUMERATION_CAP`] are refused.
pub fn enumerate_reductions(
    sentence: &[PregroupType],
    target: &PregroupType,
) -> Result<Vec<LinkDiagram>, GrammarError> {
    let factors = flatten(sentence);
    if factors.len() > ENUMERATION_CAP {
        return Err(GrammarError::TooLong {
            len: factors.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let n = factors.len();
    let mut found = Vec::new();
    let mut used = vec![false; n];
    let mut links = Vec::new();
    enumerate_matchings(0, &mut used, &mut links, &mut |links| {
        if let Ok(d) = LinkDiagram::from_links(n, links.to_vec()) {
            if d.validate(&factors).is_ok() && d.residual(&factors) == *target {
                found.push(d);
            }
        }
    });
    found.sort_by(|a, b| a.links.cmp(&b.links));
    Ok(found)
}

fn enumerate_matchings(
    pos: usize,
    used: &mut [bool],
    links: &mut Vec<(usize, usize)>,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if pos == used.len() {
        visit(links);
        return;
    }
    if used[pos] {
        enumerate_matchings(pos + 1, used, links, visit);
        return;
    }
    // leave open
    enumerate_matchings(pos + 1, used, links, visit);
    used[pos] = true;
    for q in pos + 1..used.len() {
        if !used[q] {
            used[q] = true;
            links.push((pos, q));
            enumerate_matchings(pos + 1, used, links, visit);
            links.pop();
            used[q] = false;
        }
    }
    used[pos] = false;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> PregroupType {
        s.parse().unwrap()
    }

    fn st(name: &str, z: i32) -> SimpleType {
        SimpleType::new(Atom::new(name).unwrap(), z)
    }

    fn sentence(types: &[&str]) -> Vec<PregroupType> {
        types.iter().map(|s| ty(s)).collect()
    }

    #[test]
    fn parses_transitive_verb_type() {
        assert_eq!(ty("n^r s n^l").factors(), &[st("n", 1), st("s", 0), st("n", -1)]);
    }

    #[test]
    fn parses_unit() {
        assert!(ty("").is_empty());
        assert!(ty("   ").is_empty());
        assert!(ty("1").is_empty());
        assert_eq!(PregroupType::unit().to_string(), "1");
    }

    #[test]
    fn parses_reflexive_pronoun_type() {
        assert_eq!(
            ty("n s^r n^rr n^r s").factors(),
            &[st("n", 0), st("s", 1), st("n", 2), st("n", 1), st("s", 0)]
        );
        assert_eq!(ty("n^{rr}").factors(), &[st("n", 2)]);
        assert_eq!(ty("n^rl").factors(), &[st("n", 0)]);
    }

    #[test]
    fn parse_errors_name_the_factor() {
        for bad in ["N", "n^", "^r", "n^x", "n^r s^q", "n1"] {
            match parse_type(bad) {
                Err(GrammarError::Parse { factor, .. }) => assert!(bad.contains(&factor), "{bad} -> {factor}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["n^r s n^l", "n s^r n^rr n^r s", "s^ll", "1"] {
            assert_eq!(ty(s).to_string(), s);
        }
    }

    #[test]
    fn adjoints() {
        assert_eq!(ty("n").adjoint_right(), ty("n^r"));
        assert_eq!(ty("n s^l").adjoint_right(), ty("s n^r"));
        assert_eq!(ty("n s^l").adjoint_left(), ty("s^ll n^l"));
        let t = ty("n^r s n^l");
        assert_eq!(t.adjoint_right().adjoint_left(), t);
        assert_eq!(t.adjoint_left().adjoint_right(), t);
    }

    #[test]
    fn concat_unit_laws() {
        let t = ty("n^r s");
        assert_eq!(t.concat(&PregroupType::unit()), t);
        assert_eq!(PregroupType::unit().concat(&t), t);
    }

    #[test]
    fn dragons_breathe_fire() {
        let s = sentence(&["n", "n^r s n^l", "n"]);
        let d = reduce(&s, &ty("s")).unwrap().unwrap();
        assert_eq!(d.links(), &[(0, 1), (3, 4)]);
        assert_eq!(d.open(), &[2]);
        d.validate(&flatten(&s)).unwrap();
    }

    #[test]
    fn identity_and_failure() {
        let d = reduce(&sentence(&["n"]), &ty("n")).unwrap().unwrap();
        assert!(d.links().is_empty());
        assert_eq!(d.open(), &[0]);
        assert_eq!(reduce(&sentence(&["n", "s"]), &ty("s")).unwrap(), None);
        assert_eq!(reduce(&[], &ty("s")), Err(GrammarError::EmptySentence));
    }

    #[test]
    fn relative_clause_reduces_to_noun() {
        let s = sentence(&["n", "n^r n s^l n", "n^r s n^l", "n"]);
        let d = reduce(&s, &ty("n")).unwrap().unwrap();
        assert_eq!(d.links(), &[(0, 1), (3, 6), (4, 5), (7, 8)]);
        assert_eq!(d.open(), &[2]);
        let all = enumerate_reductions(&s, &ty("n")).unwrap();
        assert_eq!(all, vec![d]);
    }

    #[test]
    fn reflexive_sentence_reduces_to_s() {
        let s = sentence(&["n", "n^r s n^l", "n s^r n^rr n^r s"]);
        let d = reduce(&s, &ty("s")).unwrap().unwrap();
        assert_eq!(d.links(), &[(0, 7), (1, 6), (2, 5), (3, 4)]);
        assert_eq!(d.open(), &[8]);
        assert_eq!(enumerate_reductions(&s, &ty("s")).unwrap(), vec![d]);
    }

    #[test]
    fn picks_lexicographically_least() {
        let s = sentence(&["s s^r s s^r"]);
        let all = enumerate_reductions(&s, &PregroupType::unit()).unwrap();
        let d = reduce(&s, &PregroupType::unit()).unwrap().unwrap();
        assert_eq!(d, all[0]);
        assert_eq!(d.links(), &[(0, 1), (2, 3)]);

        let s = sentence(&["n n n^r n^r"]);
        let all = enumerate_reductions(&s, &PregroupType::unit()).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(reduce(&s, &PregroupType::unit()).unwrap().unwrap().links(), &[(0, 3), (1, 2)]);

        // {(0,1)} and {(2,3)} both leave "n^l n" open
        let s = sentence(&["n^l n n^l n"]);
        let all = enumerate_reductions(&s, &ty("n^l n")).unwrap();
        let d = reduce(&s, &ty("n^l n")).unwrap().unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(d, all[0]);
        assert_eq!(d.links(), &[(0, 1)]);
    }

    #[test]
    fn adjoint_contraction_law() {
        for t in ["n", "s^l", "n^rr", "s^r"] {
            let t = ty(t);
            assert!(reduce(&[t.clone(), t.adjoint_right()], &PregroupType::unit()).unwrap().is_some());
            assert!(reduce(&[t.adjoint_left(), t.clone()], &PregroupType::unit()).unwrap().is_some());
        }
    }

    #[test]
    fn enumeration_cap() {
        let s = sentence(&["n n n n n n n n n n n n n"]);
        assert_eq!(
            enumerate_reductions(&s, &ty("s")),
            Err(GrammarError::TooLong { len: 13, cap: ENUMERATION_CAP })
        );
        let one = enumerate_reductions(&sentence(&["n", "n^r"]), &PregroupType::unit()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].links(), &[(0, 1)]);
    }

    #[test]
    fn validator_rejects_bad_diagrams() {
        let f = flatten(&sentence(&["n", "n^r s n^l", "n"]));
        assert!(matches!(
            LinkDiagram::from_links(5, vec![(0, 3), (1, 4)]),
            Err(DiagramError::Crossing(..))
        ));
        assert!(matches!(
            LinkDiagram::from_links(5, vec![(0, 4)]),
            Err(DiagramError::OpenUnderCup { .. })
        ));
        let d = LinkDiagram::from_links(5, vec![(0, 1), (2, 3)]).unwrap();
        assert!(matches!(d.validate(&f), Err(DiagramError::NotContractible { i: 2, j: 3, .. })));
        assert!(matches!(d.validate(&f[..4]), Err(DiagramError::PositionCount { .. })));
        assert!(matches!(
            LinkDiagram::from_links(3, vec![(0, 1), (1, 2)]),
            Err(DiagramError::Reused(1))
        ));
    }

    #[test]
    fn diagram_json_shape() {
        let d = LinkDiagram::from_links(5, vec![(3, 4), (0, 1)]).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"n":5,"links":[[0,1],[3,4]],"open":[2]}"#);
        let back: LinkDiagram = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<LinkDiagram>(r#"{"n":5,"links":[[0,1]],"open":[3]}"#).is_err());
    }

    #[test]
    fn ascii_rendering() {
        let s = sentence(&["n", "n^r s n^l", "n"]);
        let f = flatten(&s);
        let d = reduce(&s, &ty("s")).unwrap().unwrap();
        let art = d.render_ascii(&f);
        let lines: Vec<&str> = art.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].matches('└').count(), 2);
        assert_eq!(lines[1].matches('│').count(), 1);
    }
}
