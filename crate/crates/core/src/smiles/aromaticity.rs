//! Simplified Hückel aromaticity over SSSR rings.

use crate::elements;

use super::graph::{BondOrder, MolecularGraph};

/// Pi electrons an atom donates to a ring, or `None` if it cannot take part
/// in a conjugated ring (e.g. an sp3 carbon).
fn pi_electrons(graph: &MolecularGraph, atom: usize) -> Option<u32> {
    let a = graph.atom(atom);
    let mut ring_double = false;
    let mut exo_double = false;
    let mut aromatic_bonds = 0;
    for &(n, b) in graph.neighbors(atom) {
        let bond = graph.bond(b);
        match bond.order {
            BondOrder::Double | BondOrder::Triple => {
                if bond.in_ring && graph.atom(n).in_ring {
                    ring_double = true;
                } else {
                    exo_double = true;
                }
            }
            BondOrder::Aromatic => aromatic_bonds += 1,
            BondOrder::Single => {}
        }
    }
    if ring_double {
        return Some(1);
    }
    if exo_double {
        // Exocyclic C=O, C=N, C=S: the ring atom is sp2 with an empty p orbital.
        return Some(0);
    }
    let heavy = graph.heavy_degree(atom) as u32;
    match a.element {
        elements::CARBON => match a.formal_charge {
            -1 => Some(2),
            1 => Some(0),
            _ if a.aromatic && aromatic_bonds >= 2 => Some(1),
            _ => None,
        },
        elements::NITROGEN | elements::PHOSPHORUS => {
            let pyridine_like = a.total_h() == 0 && heavy == 2 && a.formal_charge == 0;
            let pyridinium_like = a.formal_charge == 1 && a.total_h() + heavy == 3;
            if a.aromatic && (pyridine_like || pyridinium_like) {
                Some(1)
            } else if a.formal_charge <= 0 && a.total_h() + heavy == 3 {
                Some(2)
            } else {
                None
            }
        }
        elements::OXYGEN | elements::SULFUR | 34 | 52 => {
            if heavy == 2 && a.formal_charge == 0 {
                Some(2)
            } else if a.aromatic && a.formal_charge == 1 {
                Some(1)
            } else {
                None
            }
        }
        elements::BORON => Some(0),
        _ => None,
    }
}

/// Marks 4n+2 rings aromatic and normalizes their bonds; clears aromatic
/// flags that ended up outside any ring.
pub fn perceive_aromaticity(graph: &mut MolecularGraph) {
    let rings = graph.rings().to_vec();
    let mut aromatic_rings = Vec::new();
    for ring in &rings {
        let ring_bonds: Vec<usize> = (0..ring.len())
            .filter_map(|i| graph.bond_between(ring[i], ring[(i + 1) % ring.len()]))
            .collect();
        let already = ring.iter().all(|&a| graph.atom(a).aromatic)
            && ring_bonds.iter().all(|&b| graph.bond(b).order == BondOrder::Aromatic);
        if already {
            continue;
        }
        let mut total = 0;
        let mut ok = true;
        for &a in ring {
            match pi_electrons(graph, a) {
                Some(e) => total += e,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && total % 4 == 2 {
            aromatic_rings.push((ring.clone(), ring_bonds));
        }
    }
    for (ring, ring_bonds) in aromatic_rings {
        for a in ring {
            graph.atoms_mut()[a].aromatic = true;
        }
        for b in ring_bonds {
            graph.bonds_mut()[b].order = BondOrder::Aromatic;
        }
    }

    for atom in graph.atoms_mut() {
        if !atom.in_ring {
            atom.aromatic = false;
        }
    }
    let n_bonds = graph.bond_count();
    for b in 0..n_bonds {
        let bond = graph.bond(b).clone();
        if bond.order == BondOrder::Aromatic
            && (!bond.in_ring || !graph.atom(bond.a).aromatic || !graph.atom(bond.b).aromatic)
        {
            graph.bonds_mut()[b].order = BondOrder::Single;
        }
    }
}
