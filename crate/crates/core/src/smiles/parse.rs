use std::collections::BTreeMap;

use crate::elements;

use super::graph::{AtomSpec, BondOrder, GraphBuilder, MolecularGraph};
use super::tokenize::{tokenize, TokenKind};
use super::SmilesError;

fn bond_from_char(c: char) -> BondOrder {
    match c {
        '=' => BondOrder::Double,
        '#' => BondOrder::Triple,
        ':' => BondOrder::Aromatic,
        // '-', and the directional '/' '\' markers, which only carry stereo
        _ => BondOrder::Single,
    }
}

/// Parses bracket-atom contents: isotope? symbol chirality? hcount? charge? class?
fn parse_bracket(inner: &str, position: usize) -> Result<AtomSpec, SmilesError> {
    let b = inner.as_bytes();
    let bad = || SmilesError::InvalidBracketAtom { position };
    let mut i = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i >= b.len() {
        return Err(bad());
    }

    let (element, aromatic, sym_len) = if b[i].is_ascii_uppercase() {
        let two = inner
            .get(i..i + 2)
            .filter(|s| s.as_bytes()[1].is_ascii_lowercase() && elements::atomic_number(s).is_some());
        match two {
            Some(s) => (elements::atomic_number(s).unwrap(), false, 2),
            None => {
                let s = &inner[i..i + 1];
                let z = elements::atomic_number(s).ok_or_else(|| SmilesError::UnsupportedElement {
                    symbol: s.to_string(),
                    position,
                })?;
                (z, false, 1)
            }
        }
    } else if b[i].is_ascii_lowercase() {
        let two = inner.get(i..i + 2);
        match two {
            Some(s @ ("se" | "as" | "te")) => {
                let cap = s[..1].to_ascii_uppercase() + &s[1..];
                (elements::atomic_number(&cap).unwrap(), true, 2)
            }
            _ => {
                let s = &inner[i..i + 1];
                match s {
                    "b" | "c" | "n" | "o" | "p" | "s" => {
                        let z = elements::atomic_number(&s.to_ascii_uppercase()).unwrap();
                        (z, true, 1)
                    }
                    _ => {
                        return Err(SmilesError::UnsupportedElement {
                            symbol: s.to_string(),
                            position,
                        })
                    }
                }
            }
        }
    } else if b[i] == b'*' {
        return Err(SmilesError::UnsupportedElement {
            symbol: "*".to_string(),
            position,
        });
    } else {
        return Err(bad());
    };
    i += sym_len;

    // Chirality: @, @@, or @TH1 / @AL2 / @SP3 / @TB12 / @OH30.
    if i < b.len() && b[i] == b'@' {
        i += 1;
        if i < b.len() && b[i] == b'@' {
            i += 1;
        } else if i + 1 < b.len() && b[i].is_ascii_uppercase() && b[i + 1].is_ascii_uppercase() {
            i += 2;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
    }

    let mut hydrogens = 0;
    if i < b.len() && b[i] == b'H' {
        i += 1;
        hydrogens = 1;
        if i < b.len() && b[i].is_ascii_digit() {
            hydrogens = (b[i] - b'0') as u32;
            i += 1;
        }
    }

    let mut charge: i32 = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        let sign = if b[i] == b'+' { 1 } else { -1 };
        let sym = b[i];
        i += 1;
        let mut magnitude = 1;
        if i < b.len() && b[i].is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            magnitude = inner[start..i].parse::<i32>().map_err(|_| bad())?;
            if magnitude > 15 {
                return Err(bad());
            }
        } else {
            while i < b.len() && b[i] == sym {
                magnitude += 1;
                i += 1;
            }
        }
        charge = sign * magnitude;
    }

    if i < b.len() && b[i] == b':' {
        i += 1;
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(bad());
        }
    }
    if i != b.len() {
        return Err(bad());
    }
    if aromatic && !elements::aromatic_capable(element) {
        return Err(bad());
    }
    Ok(AtomSpec::bracket(element, aromatic, hydrogens, charge))
}

struct OpenRing {
    atom: usize,
    bond: Option<char>,
}

/// Parses one SMILES string into an annotated molecular graph.
pub fn parse_smiles(smiles: &str) -> Result<MolecularGraph, SmilesError> {
    let tokens = tokenize(smiles)?;
    let mut builder = GraphBuilder::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(char, usize)> = None;
    let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
    let mut open_rings: BTreeMap<u32, OpenRing> = BTreeMap::new();
    let mut last_kind: Option<&TokenKind> = None;

    let default_order = |b: &GraphBuilder, x: usize, y: usize| {
        if b.atom_spec(x).aromatic && b.atom_spec(y).aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    };

    for token in &tokens {
        let pos = token.start;
        match &token.kind {
            TokenKind::Atom { symbol, aromatic } => {
                if symbol == "*" {
                    return Err(SmilesError::UnsupportedElement {
                        symbol: symbol.clone(),
                        position: pos,
                    });
                }
                let canonical = if *aromatic {
                    symbol.to_ascii_uppercase()
                } else {
                    symbol.clone()
                };
                let z = elements::atomic_number(&canonical).ok_or_else(|| SmilesError::UnsupportedElement {
                    symbol: symbol.clone(),
                    position: pos,
                })?;
                let idx = builder.add_atom(AtomSpec::organic(z, *aromatic));
                connect(&mut builder, prev, idx, pending.take(), pos, &default_order)?;
                prev = Some(idx);
            }
            TokenKind::BracketAtom(inner) => {
                let spec = parse_bracket(inner, pos)?;
                let idx = builder.add_atom(spec);
                connect(&mut builder, prev, idx, pending.take(), pos, &default_order)?;
                prev = Some(idx);
            }
            TokenKind::Bond(c) => {
                if prev.is_none() || pending.is_some() {
                    return Err(SmilesError::UnexpectedToken { position: pos });
                }
                pending = Some((*c, pos));
            }
            TokenKind::BranchOpen => {
                if prev.is_none() || pending.is_some() {
                    return Err(SmilesError::UnbalancedBranch { position: pos });
                }
                branches.push((prev, pos));
            }
            TokenKind::BranchClose => {
                if pending.is_some() || matches!(last_kind, Some(TokenKind::BranchOpen)) {
                    return Err(SmilesError::UnexpectedToken { position: pos });
                }
                let (atom, _) = branches.pop().ok_or(SmilesError::UnbalancedBranch { position: pos })?;
                prev = atom;
            }
            TokenKind::RingClosure(n) => {
                let Some(current) = prev else {
                    return Err(SmilesError::UnexpectedToken { position: pos });
                };
                let bond_here = pending.take().map(|(c, _)| c);
                match open_rings.remove(n) {
                    Some(open) => {
                        let symbol = match (open.bond, bond_here) {
                            (Some(a), Some(b)) if bond_from_char(a) != bond_from_char(b) => {
                                return Err(SmilesError::UnexpectedToken { position: pos })
                            }
                            (a, b) => b.or(a),
                        };
                        if open.atom == current {
                            return Err(SmilesError::UnexpectedToken { position: pos });
                        }
                        let order = symbol
                            .map(bond_from_char)
                            .unwrap_or_else(|| default_order(&builder, open.atom, current));
                        if !builder.add_bond(open.atom, current, order) {
                            return Err(SmilesError::DuplicateBond { position: pos });
                        }
                    }
                    None => {
                        open_rings.insert(
                            *n,
                            OpenRing {
                                atom: current,
                                bond: bond_here,
                            },
                        );
                    }
                }
            }
            TokenKind::Dot => {
                if pending.is_some() || prev.is_none() {
                    return Err(SmilesError::UnexpectedToken { position: pos });
                }
                prev = None;
            }
        }
        last_kind = Some(&token.kind);
    }

    if let Some((_, pos)) = pending {
        return Err(SmilesError::UnexpectedToken { position: pos });
    }
    if let Some(&(_, pos)) = branches.last() {
        return Err(SmilesError::UnbalancedBranch { position: pos });
    }
    if let Some((&digit, _)) = open_rings.iter().next() {
        return Err(SmilesError::UnclosedRingBond { digit });
    }
    if builder.atom_count() == 0 {
        return Err(SmilesError::Empty);
    }
    builder.build()
}

fn connect(
    builder: &mut GraphBuilder,
    prev: Option<usize>,
    idx: usize,
    pending: Option<(char, usize)>,
    pos: usize,
    default_order: &dyn Fn(&GraphBuilder, usize, usize) -> BondOrder,
) -> Result<(), SmilesError> {
    match prev {
        Some(p) => {
            let order = pending
                .map(|(c, _)| bond_from_char(c))
                .unwrap_or_else(|| default_order(builder, p, idx));
            if !builder.add_bond(p, idx, order) {
                return Err(SmilesError::DuplicateBond { position: pos });
            }
            Ok(())
        }
        None => match pending {
            Some((_, bpos)) => Err(SmilesError::UnexpectedToken { position: bpos }),
            None => Ok(()),
        },
    }
}
