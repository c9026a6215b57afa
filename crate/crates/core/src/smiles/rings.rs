//! Smallest-set-of-smallest-rings perception.
//!
//! Candidate cycles are built from BFS shortest-path trees rooted at every
//! ring atom (shortest path to each end of an edge, closed by that edge).
//! Candidates are sorted by length and accepted greedily when they are
//! linearly independent over GF(2) of the edge space, which yields a minimum
//! cycle basis of exactly `bonds - atoms + components` rings.

use std::collections::{HashSet, VecDeque};

use super::graph::MolecularGraph;

#[derive(Clone, PartialEq, Eq, Hash)]
struct EdgeSet(Vec<u64>);

impl EdgeSet {
    fn new(edges: usize) -> Self {
        EdgeSet(vec![0; edges.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn xor(&mut self, other: &EdgeSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn lowest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

/// Bonds that lie on at least one cycle (i.e. are not bridges).
fn cyclic_bonds(graph: &MolecularGraph) -> Vec<bool> {
    let n = graph.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; graph.bond_count()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS: (atom, bond used to enter, next neighbor position).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (u, via, pos) = stack[top];
            let nbrs = graph.neighbors(u);
            if pos < nbrs.len() {
                let (v, bond) = nbrs[pos];
                stack[top].2 += 1;
                if bond == via {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bond, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge.into_iter().map(|b| !b).collect()
}

/// Orders the atoms of a simple cycle given as a bond set.
fn cycle_atoms(graph: &MolecularGraph, edges: &[usize]) -> Vec<usize> {
    let start_bond = graph.bond(edges[0]);
    let mut order = vec![start_bond.a.min(start_bond.b)];
    let in_cycle: HashSet<usize> = edges.iter().copied().collect();
    let mut prev_bond = usize::MAX;
    let mut current = order[0];
    loop {
        let next = graph
            .neighbors(current)
            .iter()
            .filter(|&&(_, b)| b != prev_bond && in_cycle.contains(&b))
            .min_by_key(|&&(n, _)| n)
            .copied();
        let Some((n, b)) = next else { break };
        if n == order[0] {
            break;
        }
        order.push(n);
        prev_bond = b;
        current = n;
        if order.len() > edges.len() {
            break;
        }
    }
    order
}

/// Annotates `graph` with its SSSR and ring membership flags.
pub fn perceive_rings(graph: &mut MolecularGraph) {
    let n = graph.atom_count();
    let m = graph.bond_count();
    let target = graph.cyclomatic_number();
    for atom in graph.atoms_mut() {
        atom.in_ring = false;
    }
    for bond in graph.bonds_mut() {
        bond.in_ring = false;
    }
    graph.rings_mut().clear();
    if target == 0 {
        return;
    }

    let cyclic = cyclic_bonds(graph);
    let ring_atom: Vec<bool> = (0..n)
        .map(|a| graph.neighbors(a).iter().any(|&(_, b)| cyclic[b]))
        .collect();

    let mut seen: HashSet<EdgeSet> = HashSet::new();
    let mut candidates: Vec<(usize, Vec<usize>, EdgeSet)> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); n];

    for root in (0..n).filter(|&a| ring_atom[a]) {
        dist.fill(usize::MAX);
        parent.fill((usize::MAX, usize::MAX));
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, b) in graph.neighbors(u) {
                if cyclic[b] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = (u, b);
                    queue.push_back(v);
                }
            }
        }
        let path_to_root = |mut x: usize| {
            let mut atoms = vec![x];
            let mut bonds = Vec::new();
            while x != root {
                let (p, b) = parent[x];
                bonds.push(b);
                atoms.push(p);
                x = p;
            }
            (atoms, bonds)
        };
        for (bi, bond) in graph.bonds().iter().enumerate() {
            if !cyclic[bi] {
                continue;
            }
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].1 == bi || parent[y].1 == bi {
                continue;
            }
            let (px, bx) = path_to_root(x);
            let (py, by) = path_to_root(y);
            // Paths may only share the root.
            let sx: HashSet<usize> = px[..px.len() - 1].iter().copied().collect();
            if py[..py.len() - 1].iter().any(|a| sx.contains(a)) {
                continue;
            }
            let mut edges = EdgeSet::new(m);
            for &b in bx.iter().chain(by.iter()) {
                edges.set(b);
            }
            edges.set(bi);
            if seen.contains(&edges) {
                continue;
            }
            seen.insert(edges.clone());
            let mut atoms: Vec<usize> = px.iter().chain(py.iter()).copied().collect();
            atoms.sort_unstable();
            atoms.dedup();
            candidates.push((atoms.len(), atoms, edges));
        }
    }
    candidates.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    // Greedy GF(2) basis selection; `basis` rows are kept with distinct pivots.
    let mut basis: Vec<(usize, EdgeSet)> = Vec::new();
    let mut chosen: Vec<EdgeSet> = Vec::new();
    for (_, _, edges) in candidates {
        let mut reduced = edges.clone();
        for (pivot, row) in &basis {
            if reduced.get(*pivot) {
                reduced.xor(row);
            }
        }
        if let Some(pivot) = reduced.lowest() {
            for (_, row) in basis.iter_mut() {
                if row.get(pivot) {
                    row.xor(&reduced);
                }
            }
            basis.push((pivot, reduced));
            chosen.push(edges);
            if chosen.len() == target {
                break;
            }
        }
    }

    let mut rings = Vec::with_capacity(chosen.len());
    for edges in &chosen {
        let list: Vec<usize> = (0..m).filter(|&i| edges.get(i)).collect();
        for &b in &list {
            graph.bonds_mut()[b].in_ring = true;
        }
        let atoms = cycle_atoms(graph, &list);
        for &a in &atoms {
            graph.atoms_mut()[a].in_ring = true;
        }
        rings.push(atoms);
    }
    *graph.rings_mut() = rings;
}

#[cfg(test)]
mod tests {
    use crate::smiles::parse_smiles;

    #[test]
    fn acyclic_has_no_rings() {
        let g = parse_smiles("CCO").unwrap();
        assert!(g.rings().is_empty());
        assert!(g.atoms().iter().all(|a| !a.in_ring));
    }

    #[test]
    fn cyclohexane_single_six_ring() {
        let g = parse_smiles("C1CCCCC1").unwrap();
        assert_eq!(g.rings().len(), 1);
        assert_eq!(g.rings()[0].len(), 6);
    }

    #[test]
    fn bicyclic_basis_matches_cyclomatic_number() {
        // 8 atoms, 9 bonds, 1 component: 9 - 8 + 1 = 2.
        let g = parse_smiles("C1CC2CCC1CC2").unwrap();
        assert_eq!(g.atom_count(), 8);
        assert_eq!(g.bond_count(), 9);
        assert_eq!(g.rings().len(), 2);
        let mut sizes: Vec<usize> = g.rings().iter().map(|r| r.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![6, 6]);
    }

    #[test]
    fn cubane_has_five_four_rings() {
        let g = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        assert_eq!(g.rings().len(), 5);
        assert!(g.rings().iter().all(|r| r.len() == 4));
    }

    #[test]
    fn substituent_atoms_not_in_ring() {
        let g = parse_smiles("CC1CC1").unwrap();
        assert!(!g.atom(0).in_ring);
        assert!(g.atom(1).in_ring);
        assert!(!g.bond(0).in_ring);
    }

    #[test]
    fn ring_atoms_are_ordered_cycles() {
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        for ring in g.rings() {
            for i in 0..ring.len() {
                let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                assert!(g.bond_between(a, b).is_some());
            }
        }
    }
}
