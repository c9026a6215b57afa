//! A small SMARTS-like query language and a backtracking subgraph matcher.
//!
//! Pattern syntax:
//!
//! * atoms: organic symbols (`C`, `Cl`, aromatic `c`, `n`, ...), `*`, `A`
//!   (aliphatic), `a` (aromatic), or bracket expressions;
//! * inside brackets: `#n`, element symbols, `A`, `a`, `*`, `R` / `R0`
//!   (ring membership), `Hn` (total hydrogens), `Dn` (heavy degree),
//!   charges `+ - +n -n ++ +0`, each optionally negated with `!`, combined
//!   with `&` or juxtaposition (and), `,` (or) and `;` (low-precedence and);
//! * bonds: `- = # : ~ @` with the same `! & , ;` operators; an omitted bond
//!   means single or aromatic;
//! * branches `( )` and ring closures `1`..`9`, `%nn`.
//!
//! Expressions must reduce to a conjunction of disjunctions; anything else,
//! and every primitive not listed above, fails at parse time.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::elements;
use crate::smiles::{Bond, BondOrder, MolecularGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unsupported query primitive '{token}'")]
    UnsupportedPrimitive { token: String },
    #[error("malformed pattern at byte {position}")]
    MalformedPattern { position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrimitive {
    Any,
    /// Element with an optional aromaticity requirement.
    Element {
        atomic_number: u8,
        aromatic: Option<bool>,
    },
    Aliphatic,
    Aromatic,
    InRing,
    TotalH(u32),
    HeavyDegree(u32),
    Charge(i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term<P> {
    pub negated: bool,
    pub primitive: P,
}

/// Conjunction of disjunctions of (possibly negated) atom primitives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAtom {
    pub clauses: Vec<Vec<Term<AtomPrimitive>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
}

/// Conjunction of disjunctions of bond terms.
pub type BondClauses = Vec<Vec<Term<BondPrimitive>>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub clauses: BondClauses,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPattern {
    atoms: Vec<QueryAtom>,
    bonds: Vec<QueryBond>,
    name: String,
    adjacency: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// Distinct matched atom sets.
    pub count: usize,
    /// Query atom `i` maps to graph atom `first_mapping[i]`.
    pub first_mapping: Option<Vec<usize>>,
}

impl AtomPrimitive {
    fn test(&self, graph: &MolecularGraph, atom: usize) -> bool {
        let a = graph.atom(atom);
        match *self {
            AtomPrimitive::Any => true,
            AtomPrimitive::Element {
                atomic_number,
                aromatic,
            } => a.element == atomic_number && aromatic.is_none_or(|ar| ar == a.aromatic),
            AtomPrimitive::Aliphatic => !a.aromatic,
            AtomPrimitive::Aromatic => a.aromatic,
            AtomPrimitive::InRing => a.in_ring,
            AtomPrimitive::TotalH(n) => a.total_h() == n,
            AtomPrimitive::HeavyDegree(n) => graph.heavy_degree(atom) == n as usize,
            AtomPrimitive::Charge(c) => a.formal_charge == c,
        }
    }
}

impl BondPrimitive {
    fn test(&self, bond: &Bond) -> bool {
        match self {
            BondPrimitive::Single => bond.order == BondOrder::Single,
            BondPrimitive::Double => bond.order == BondOrder::Double,
            BondPrimitive::Triple => bond.order == BondOrder::Triple,
            BondPrimitive::Aromatic => bond.order == BondOrder::Aromatic,
            BondPrimitive::Any => true,
            BondPrimitive::Ring => bond.in_ring,
        }
    }
}

impl QueryAtom {
    pub fn matches(&self, graph: &MolecularGraph, atom: usize) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|t| t.primitive.test(graph, atom) != t.negated))
    }
}

impl QueryBond {
    pub fn matches(&self, bond: &Bond) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|t| t.primitive.test(bond) != t.negated))
    }
}

impl QueryPattern {
    pub fn atoms(&self) -> &[QueryAtom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[QueryBond] {
        &self.bonds
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `(query neighbor, query bond index)` pairs.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }
}

fn simple_clause<P>(p: P) -> Vec<Vec<Term<P>>> {
    vec![vec![Term {
        negated: false,
        primitive: p,
    }]]
}

fn default_bond() -> BondClauses {
    vec![vec![
        Term {
            negated: false,
            primitive: BondPrimitive::Single,
        },
        Term {
            negated: false,
            primitive: BondPrimitive::Aromatic,
        },
    ]]
}

/// Converts `a;b,c&d` style text into conjunctive normal form. `alt` parses
/// one '&'-free alternative into a sequence of terms (juxtaposition = and).
fn to_cnf<P: Copy>(
    text: &str,
    mut alt: impl FnMut(&str) -> Result<Vec<Term<P>>, QueryError>,
) -> Result<Vec<Vec<Term<P>>>, QueryError> {
    let mut clauses = Vec::new();
    for group in text.split(';') {
        let alternatives: Vec<&str> = group.split(',').collect();
        if alternatives.len() == 1 {
            for part in group.split('&') {
                for term in alt(part)? {
                    clauses.push(vec![term]);
                }
            }
        } else {
            let mut clause = Vec::new();
            for a in alternatives {
                let terms = alt(a)?;
                if terms.len() != 1 || a.contains('&') {
                    return Err(QueryError::UnsupportedPrimitive {
                        token: group.to_string(),
                    });
                }
                clause.push(terms[0]);
            }
            clauses.push(clause);
        }
    }
    Ok(clauses)
}

fn read_number(b: &[u8], i: &mut usize) -> Option<u32> {
    let start = *i;
    while *i < b.len() && b[*i].is_ascii_digit() {
        *i += 1;
    }
    if *i == start {
        None
    } else {
        std::str::from_utf8(&b[start..*i]).ok()?.parse().ok()
    }
}

fn parse_atom_alternative(text: &str, whole_bracket: &str) -> Result<Vec<Term<AtomPrimitive>>, QueryError> {
    let unsupported = |t: &str| QueryError::UnsupportedPrimitive { token: t.to_string() };
    if text.is_empty() {
        return Err(unsupported(whole_bracket));
    }
    if whole_bracket == "H" {
        return Ok(vec![Term {
            negated: false,
            primitive: AtomPrimitive::Element {
                atomic_number: elements::HYDROGEN,
                aromatic: None,
            },
        }]);
    }
    let b = text.as_bytes();
    let mut i = 0;
    let mut terms = Vec::new();
    while i < b.len() {
        let mut negated = false;
        while i < b.len() && b[i] == b'!' {
            negated = !negated;
            i += 1;
        }
        if i >= b.len() {
            return Err(unsupported(text));
        }
        let c = b[i];
        let primitive = match c {
            b'*' => {
                i += 1;
                AtomPrimitive::Any
            }
            b'#' => {
                i += 1;
                let z = read_number(b, &mut i).ok_or_else(|| unsupported(text))?;
                if !(1..=118).contains(&z) {
                    return Err(unsupported(text));
                }
                AtomPrimitive::Element {
                    atomic_number: z as u8,
                    aromatic: None,
                }
            }
            b'+' | b'-' => {
                let sign = if c == b'+' { 1 } else { -1 };
                i += 1;
                let magnitude = match read_number(b, &mut i) {
                    Some(n) => n as i32,
                    None => {
                        let mut m = 1;
                        while i < b.len() && b[i] == c {
                            m += 1;
                            i += 1;
                        }
                        m
                    }
                };
                AtomPrimitive::Charge(sign * magnitude)
            }
            b'A' if text.get(i..i + 2).and_then(elements::atomic_number).is_none()
                || b.get(i + 1).is_none_or(|n| !n.is_ascii_lowercase()) =>
            {
                i += 1;
                AtomPrimitive::Aliphatic
            }
            b'R' if b.get(i + 1).is_none_or(|n| !n.is_ascii_lowercase()) => {
                i += 1;
                match read_number(b, &mut i) {
                    None => AtomPrimitive::InRing,
                    Some(0) => {
                        negated = !negated;
                        AtomPrimitive::InRing
                    }
                    Some(_) => return Err(unsupported(text)),
                }
            }
            b'D' if b.get(i + 1).is_none_or(|n| !n.is_ascii_lowercase()) => {
                i += 1;
                AtomPrimitive::HeavyDegree(read_number(b, &mut i).unwrap_or(1))
            }
            b'H' if b.get(i + 1).is_none_or(|n| !n.is_ascii_lowercase()) => {
                i += 1;
                AtomPrimitive::TotalH(read_number(b, &mut i).unwrap_or(1))
            }
            b'A'..=b'Z' => {
                let two = text
                    .get(i..i + 2)
                    .filter(|s| s.as_bytes()[1].is_ascii_lowercase())
                    .and_then(elements::atomic_number);
                let (z, len) = match two {
                    Some(z) => (z, 2),
                    None => {
                        let one = &text[i..i + 1];
                        match one {
                            "X" => return Err(unsupported(one)),
                            _ => (elements::atomic_number(one).ok_or_else(|| unsupported(one))?, 1),
                        }
                    }
                };
                i += len;
                AtomPrimitive::Element {
                    atomic_number: z,
                    aromatic: Some(false),
                }
            }
            b'a' if !matches!(text.get(i..i + 2), Some("as")) => {
                i += 1;
                AtomPrimitive::Aromatic
            }
            b'a'..=b'z' => {
                let (sym, len) = match text.get(i..i + 2) {
                    Some(s @ ("se" | "as" | "te")) => (s, 2),
                    _ => (&text[i..i + 1], 1),
                };
                if !matches!(sym, "b" | "c" | "n" | "o" | "p" | "s" | "se" | "as" | "te") {
                    return Err(unsupported(sym));
                }
                let cap = sym[..1].to_ascii_uppercase() + &sym[1..];
                i += len;
                AtomPrimitive::Element {
                    atomic_number: elements::atomic_number(&cap).unwrap(),
                    aromatic: Some(true),
                }
            }
            _ => return Err(unsupported(&text[i..])),
        };
        terms.push(Term { negated, primitive });
    }
    Ok(terms)
}

fn parse_bond_alternative(text: &str) -> Result<Vec<Term<BondPrimitive>>, QueryError> {
    let mut terms = Vec::new();
    let mut negated = false;
    for c in text.chars() {
        let primitive = match c {
            '!' => {
                negated = !negated;
                continue;
            }
            '-' | '/' | '\\' => BondPrimitive::Single,
            '=' => BondPrimitive::Double,
            '#' => BondPrimitive::Triple,
            ':' => BondPrimitive::Aromatic,
            '~' => BondPrimitive::Any,
            '@' => BondPrimitive::Ring,
            other => {
                return Err(QueryError::UnsupportedPrimitive {
                    token: other.to_string(),
                })
            }
        };
        terms.push(Term { negated, primitive });
        negated = false;
    }
    if negated || terms.is_empty() {
        return Err(QueryError::UnsupportedPrimitive {
            token: text.to_string(),
        });
    }
    Ok(terms)
}

fn is_bond_char(c: u8) -> bool {
    matches!(
        c,
        b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b';' | b'&' | b',' | b'/' | b'\\'
    )
}

/// Parses a pattern in the documented SMARTS subset.
pub fn parse_query(pattern: &str) -> Result<QueryPattern, QueryError> {
    let b = pattern.as_bytes();
    let malformed = |position| QueryError::MalformedPattern { position };
    let mut atoms: Vec<QueryAtom> = Vec::new();
    let mut bonds: Vec<QueryBond> = Vec::new();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondClauses, usize)> = None;
    let mut branches: Vec<Option<usize>> = Vec::new();
    let mut open: BTreeMap<u32, (usize, Option<(String, BondClauses)>)> = BTreeMap::new();
    let mut pending_text: Option<String> = None;

    let mut add_bond =
        |bonds: &mut Vec<QueryBond>, a: usize, b: usize, clauses: BondClauses, pos: usize| -> Result<(), QueryError> {
            if a == b || !pairs.insert((a.min(b), a.max(b))) {
                return Err(malformed(pos));
            }
            bonds.push(QueryBond { a, b, clauses });
            Ok(())
        };

    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let start = i;
        let atom_clauses = match c {
            b'[' => {
                let close = b[i..].iter().position(|&x| x == b']').ok_or(malformed(i))?;
                let inner = &pattern[i + 1..i + close];
                i += close + 1;
                if inner.contains('$') {
                    return Err(QueryError::UnsupportedPrimitive {
                        token: "$(".to_string(),
                    });
                }
                Some(to_cnf(inner, |alt| parse_atom_alternative(alt, inner))?)
            }
            b'C' if b.get(i + 1) == Some(&b'l') => {
                i += 2;
                Some(simple_clause(AtomPrimitive::Element {
                    atomic_number: elements::CHLORINE,
                    aromatic: Some(false),
                }))
            }
            b'B' if b.get(i + 1) == Some(&b'r') => {
                i += 2;
                Some(simple_clause(AtomPrimitive::Element {
                    atomic_number: elements::BROMINE,
                    aromatic: Some(false),
                }))
            }
            b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => {
                i += 1;
                Some(simple_clause(AtomPrimitive::Element {
                    atomic_number: elements::atomic_number(&(c as char).to_string()).unwrap(),
                    aromatic: Some(false),
                }))
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                i += 1;
                Some(simple_clause(AtomPrimitive::Element {
                    atomic_number: elements::atomic_number(&(c as char).to_ascii_uppercase().to_string()).unwrap(),
                    aromatic: Some(true),
                }))
            }
            b'*' => {
                i += 1;
                Some(simple_clause(AtomPrimitive::Any))
            }
            b'A' => {
                i += 1;
                Some(simple_clause(AtomPrimitive::Aliphatic))
            }
            b'a' => {
                i += 1;
                Some(simple_clause(AtomPrimitive::Aromatic))
            }
            _ => None,
        };
        if let Some(clauses) = atom_clauses {
            let idx = atoms.len();
            atoms.push(QueryAtom { clauses });
            if let Some(p) = prev {
                let bond = pending.take().map(|(b, _)| b).unwrap_or_else(default_bond);
                add_bond(&mut bonds, p, idx, bond, start)?;
            } else if pending.is_some() {
                return Err(malformed(start));
            }
            pending_text = None;
            prev = Some(idx);
            continue;
        }
        match c {
            _ if is_bond_char(c) => {
                if prev.is_none() || pending.is_some() {
                    return Err(malformed(i));
                }
                let mut j = i;
                while j < b.len() && is_bond_char(b[j]) {
                    j += 1;
                }
                let text = &pattern[i..j];
                pending = Some((to_cnf(text, parse_bond_alternative)?, i));
                pending_text = Some(text.to_string());
                i = j;
            }
            b'(' => {
                if prev.is_none() || pending.is_some() {
                    return Err(malformed(i));
                }
                branches.push(prev);
                i += 1;
            }
            b')' => {
                if pending.is_some() {
                    return Err(malformed(i));
                }
                prev = branches.pop().ok_or(malformed(i))?;
                i += 1;
            }
            b'0'..=b'9' | b'%' => {
                let digit = if c == b'%' {
                    let d = b.get(i + 1..i + 3).ok_or(malformed(i))?;
                    if !d.iter().all(u8::is_ascii_digit) {
                        return Err(malformed(i));
                    }
                    i += 3;
                    ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32
                } else {
                    i += 1;
                    (c - b'0') as u32
                };
                let current = prev.ok_or(malformed(start))?;
                let here = pending
                    .take()
                    .map(|(clauses, _)| (pending_text.take().unwrap_or_default(), clauses));
                match open.remove(&digit) {
                    Some((other, there)) => {
                        let clauses = match (there, here) {
                            (Some((ta, ca)), Some((tb, cb))) => {
                                if ta != tb {
                                    return Err(malformed(start));
                                }
                                let _ = ca;
                                cb
                            }
                            (Some((_, ca)), None) => ca,
                            (None, Some((_, cb))) => cb,
                            (None, None) => default_bond(),
                        };
                        add_bond(&mut bonds, other, current, clauses, start)?;
                    }
                    None => {
                        open.insert(digit, (current, here));
                    }
                }
            }
            b'.' => return Err(QueryError::UnsupportedPrimitive { token: ".".to_string() }),
            _ => {
                return Err(QueryError::UnsupportedPrimitive {
                    token: (c as char).to_string(),
                })
            }
        }
    }
    if pending.is_some() || !branches.is_empty() || !open.is_empty() || atoms.is_empty() {
        return Err(malformed(b.len()));
    }
    let mut adjacency = vec![Vec::new(); atoms.len()];
    for (bi, bond) in bonds.iter().enumerate() {
        adjacency[bond.a].push((bond.b, bi));
        adjacency[bond.b].push((bond.a, bi));
    }
    Ok(QueryPattern {
        atoms,
        bonds,
        name: pattern.to_string(),
        adjacency,
    })
}

/// Query atom visiting order (most connected first, then breadth-first) and,
/// for each position after the first, an earlier query neighbor to anchor on.
fn search_order(query: &QueryPattern) -> Vec<(usize, Option<usize>)> {
    let n = query.atoms.len();
    let start = (0..n)
        .max_by_key(|&i| (query.adjacency[i].len(), std::cmp::Reverse(i)))
        .unwrap_or(0);
    let mut order = vec![(start, None)];
    let mut placed = vec![false; n];
    placed[start] = true;
    let mut head = 0;
    while head < order.len() {
        let (u, _) = order[head];
        head += 1;
        let mut next: Vec<usize> = query.adjacency[u]
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| !placed[v])
            .collect();
        next.sort_by_key(|&v| (std::cmp::Reverse(query.adjacency[v].len()), v));
        next.dedup();
        for v in next {
            if !placed[v] {
                placed[v] = true;
                order.push((v, Some(u)));
            }
        }
    }
    order
}

struct Search<'a> {
    graph: &'a MolecularGraph,
    query: &'a QueryPattern,
    order: Vec<(usize, Option<usize>)>,
    mapping: Vec<usize>,
    used: Vec<bool>,
    seen: BTreeSet<Vec<usize>>,
    first: Option<Vec<usize>>,
    limit: usize,
}

impl Search<'_> {
    fn feasible(&self, q: usize, atom: usize) -> bool {
        if self.used[atom] || self.graph.degree(atom) < self.query.adjacency[q].len() {
            return false;
        }
        if !self.query.atoms[q].matches(self.graph, atom) {
            return false;
        }
        for &(qn, qb) in &self.query.adjacency[q] {
            let mapped = self.mapping[qn];
            if mapped == usize::MAX {
                continue;
            }
            match self.graph.bond_between(atom, mapped) {
                Some(b) if self.query.bonds[qb].matches(self.graph.bond(b)) => {}
                _ => return false,
            }
        }
        true
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            let mut set = self.mapping.clone();
            set.sort_unstable();
            if self.seen.insert(set) && self.first.is_none() {
                self.first = Some(self.mapping.clone());
            }
            return self.seen.len() >= self.limit;
        }
        let (q, anchor) = self.order[depth];
        let candidates: Vec<usize> = match anchor {
            Some(p) => self.graph.neighbors(self.mapping[p]).iter().map(|&(n, _)| n).collect(),
            None => (0..self.graph.atom_count()).collect(),
        };
        for atom in candidates {
            if !self.feasible(q, atom) {
                continue;
            }
            self.mapping[q] = atom;
            self.used[atom] = true;
            let done = self.extend(depth + 1);
            self.used[atom] = false;
            self.mapping[q] = usize::MAX;
            if done {
                return true;
            }
        }
        false
    }
}

/// Counts distinct matched atom sets, stopping early once `limit` is reached.
pub fn count_matches(graph: &MolecularGraph, query: &QueryPattern, limit: Option<usize>) -> MatchResult {
    let limit = limit.unwrap_or(usize::MAX);
    if query.atoms.is_empty() || limit == 0 {
        return MatchResult {
            count: 0,
            first_mapping: None,
        };
    }
    let mut search = Search {
        graph,
        query,
        order: search_order(query),
        mapping: vec![usize::MAX; query.atoms.len()],
        used: vec![false; graph.atom_count()],
        seen: BTreeSet::new(),
        first: None,
        limit,
    };
    search.extend(0);
    MatchResult {
        count: search.seen.len(),
        first_mapping: search.first,
    }
}

/// All distinct matches of `query` in `graph`, deduplicated by atom set.
pub fn match_subgraph(graph: &MolecularGraph, query: &QueryPattern) -> MatchResult {
    count_matches(graph, query, None)
}
