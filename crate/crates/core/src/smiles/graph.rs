use std::collections::{BTreeSet, VecDeque};

use crate::elements;

use super::{aromaticity, rings, SmilesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's valence; aromatic bonds count as one with
    /// the shared pi electron accounted for separately.
    pub fn valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Stable one-byte code used by the fingerprint hash.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: u8,
    pub formal_charge: i32,
    pub explicit_h: u32,
    pub implicit_h: u32,
    pub aromatic: bool,
    pub in_ring: bool,
    pub index: usize,
}

impl Atom {
    pub fn total_h(&self) -> u32 {
        self.explicit_h + self.implicit_h
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// An annotated molecular graph. Hydrogens are implicit except where they
/// cannot be folded onto a heavy atom (e.g. `[H][H]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolecularGraph {
    pub(crate) atoms: Vec<Atom>,
    pub(crate) bonds: Vec<Bond>,
    pub(crate) rings: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub(crate) fn from_raw(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        MolecularGraph {
            atoms,
            bonds,
            rings: Vec::new(),
            adjacency,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, index: usize) -> &Bond {
        &self.bonds[index]
    }

    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != elements::HYDROGEN).count()
    }

    /// `(neighbor, bond index)` pairs sorted by neighbor index.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|&&(n, _)| self.atoms[n].element != elements::HYDROGEN)
            .count()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, bond)| bond)
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// Cyclomatic number: bonds - atoms + components.
    pub fn cyclomatic_number(&self) -> usize {
        (self.bonds.len() + self.component_count()).saturating_sub(self.atoms.len())
    }

    /// Relabels atoms so that old atom `i` becomes atom `perm[i]`, then
    /// re-runs ring and aromaticity perception on the relabeled graph.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length");
        let mut atoms = self.atoms.clone();
        for (old, atom) in self.atoms.iter().enumerate() {
            let mut moved = atom.clone();
            moved.index = perm[old];
            moved.in_ring = false;
            atoms[perm[old]] = moved;
        }
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
                in_ring: false,
            })
            .collect();
        bonds.sort_by_key(|b| (b.a.min(b.b), b.a.max(b.b)));
        let mut graph = MolecularGraph::from_raw(atoms, bonds);
        rings::perceive_rings(&mut graph);
        aromaticity::perceive_aromaticity(&mut graph);
        graph
    }

    /// Number of SSSR rings of exactly `size` atoms.
    pub fn ring_count_of_size(&self, size: usize) -> usize {
        self.rings.iter().filter(|r| r.len() == size).count()
    }

    pub(crate) fn rings_mut(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.rings
    }
}

/// Description of an atom handed to [`GraphBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSpec {
    pub element: u8,
    pub formal_charge: i32,
    /// `Some` for bracket atoms, whose hydrogen count is explicit. `None`
    /// asks the builder to fill hydrogens up to a standard valence.
    pub explicit_h: Option<u32>,
    pub aromatic: bool,
}

impl AtomSpec {
    pub fn organic(element: u8, aromatic: bool) -> Self {
        AtomSpec {
            element,
            formal_charge: 0,
            explicit_h: None,
            aromatic,
        }
    }

    pub fn bracket(element: u8, aromatic: bool, hydrogens: u32, charge: i32) -> Self {
        AtomSpec {
            element,
            formal_charge: charge,
            explicit_h: Some(hydrogens),
            aromatic,
        }
    }
}

/// Incremental graph construction; [`GraphBuilder::build`] fills hydrogens,
/// checks valences and perceives rings and aromaticity.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    atoms: Vec<AtomSpec>,
    bonds: Vec<(usize, usize, BondOrder)>,
    pairs: BTreeSet<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_spec(&self, index: usize) -> &AtomSpec {
        &self.atoms[index]
    }

    pub fn add_atom(&mut self, spec: AtomSpec) -> usize {
        self.atoms.push(spec);
        self.atoms.len() - 1
    }

    /// Returns `false` if the bond is a self loop, repeats an existing pair,
    /// or references a missing atom.
    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> bool {
        if a == b || a >= self.atoms.len() || b >= self.atoms.len() {
            return false;
        }
        if !self.pairs.insert((a.min(b), a.max(b))) {
            return false;
        }
        self.bonds.push((a, b, order));
        true
    }

    pub fn has_bond(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    pub fn build(self) -> Result<MolecularGraph, SmilesError> {
        let n = self.atoms.len();
        let mut bond_sum = vec![0u32; n];
        let mut has_multiple = vec![false; n];
        for &(a, b, order) in &self.bonds {
            for x in [a, b] {
                bond_sum[x] += order.valence();
                if matches!(order, BondOrder::Double | BondOrder::Triple) {
                    has_multiple[x] = true;
                }
            }
        }

        let mut atoms: Vec<Atom> = Vec::with_capacity(n);
        for (i, spec) in self.atoms.iter().enumerate() {
            let implicit_h = match spec.explicit_h {
                Some(_) => 0,
                None => {
                    let mut used = bond_sum[i];
                    if spec.aromatic
                        && !has_multiple[i]
                        && matches!(
                            spec.element,
                            elements::CARBON | elements::NITROGEN | elements::PHOSPHORUS | elements::BORON
                        )
                    {
                        used += 1;
                    }
                    let valences = elements::default_valences(spec.element);
                    match valences.iter().find(|&&v| v >= used) {
                        Some(&v) => v - used,
                        None if valences.is_empty() => 0,
                        None => return Err(SmilesError::InvalidValence { atom: i }),
                    }
                }
            };
            let explicit_h = spec.explicit_h.unwrap_or(0);
            if let Some(max) = elements::max_valence(spec.element, spec.formal_charge) {
                if bond_sum[i] + explicit_h + implicit_h > max {
                    return Err(SmilesError::InvalidValence { atom: i });
                }
            }
            atoms.push(Atom {
                element: spec.element,
                formal_charge: spec.formal_charge,
                explicit_h,
                implicit_h,
                aromatic: spec.aromatic,
                in_ring: false,
                index: i,
            });
        }

        // Fold neutral single-bonded hydrogens onto their heavy neighbor.
        let mut neighbors: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
        for &(a, b, order) in &self.bonds {
            neighbors[a].push((b, order));
            neighbors[b].push((a, order));
        }
        let mut removed = vec![false; n];
        for i in 0..n {
            let atom = &atoms[i];
            if atom.element != elements::HYDROGEN || atom.formal_charge != 0 {
                continue;
            }
            if atom.total_h() != 0 || neighbors[i].len() != 1 {
                continue;
            }
            let (host, order) = neighbors[i][0];
            if order != BondOrder::Single || atoms[host].element == elements::HYDROGEN {
                continue;
            }
            removed[i] = true;
            atoms[host].explicit_h += 1;
        }

        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::with_capacity(n);
        for (i, atom) in atoms.into_iter().enumerate() {
            if !removed[i] {
                remap[i] = kept.len();
                let mut atom = atom;
                atom.index = kept.len();
                kept.push(atom);
            }
        }
        let bonds: Vec<Bond> = self
            .bonds
            .iter()
            .filter(|&&(a, b, _)| !removed[a] && !removed[b])
            .map(|&(a, b, order)| Bond {
                a: remap[a],
                b: remap[b],
                order,
                in_ring: false,
            })
            .collect();

        let mut graph = MolecularGraph::from_raw(kept, bonds);
        rings::perceive_rings(&mut graph);
        aromaticity::perceive_aromaticity(&mut graph);
        Ok(graph)
    }
}

impl MolecularGraph {
    pub(crate) fn atoms_mut(&mut self) -> &mut [Atom] {
        &mut self.atoms
    }

    pub(crate) fn bonds_mut(&mut self) -> &mut [Bond] {
        &mut self.bonds
    }
}
