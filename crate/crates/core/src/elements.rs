//! Periodic table lookups used by the parser, the query language and the
//! rasterizer.

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
    "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce",
    "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc",
    "Lv", "Ts", "Og",
];

pub const HYDROGEN: u8 = 1;
pub const BORON: u8 = 5;
pub const CARBON: u8 = 6;
pub const NITROGEN: u8 = 7;
pub const OXYGEN: u8 = 8;
pub const FLUORINE: u8 = 9;
pub const PHOSPHORUS: u8 = 15;
pub const SULFUR: u8 = 16;
pub const CHLORINE: u8 = 17;
pub const BROMINE: u8 = 35;
pub const IODINE: u8 = 53;

/// Atomic number for a case-sensitive element symbol.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    SYMBOLS.iter().position(|&s| s == symbol).map(|i| (i + 1) as u8)
}

pub fn symbol(atomic_number: u8) -> &'static str {
    match atomic_number {
        1..=118 => SYMBOLS[atomic_number as usize - 1],
        _ => "?",
    }
}

/// Standard valences used to fill implicit hydrogens on organic-subset atoms.
pub fn default_valences(atomic_number: u8) -> &'static [u32] {
    match atomic_number {
        BORON => &[3],
        CARBON => &[4],
        NITROGEN => &[3],
        OXYGEN => &[2],
        PHOSPHORUS => &[3, 5],
        SULFUR => &[2, 4, 6],
        FLUORINE | CHLORINE | BROMINE | IODINE => &[1],
        _ => &[],
    }
}

/// Upper bound on (bond order sum + hydrogens) for the elements whose
/// valence is checked. `None` means the element is not checked.
pub fn max_valence(atomic_number: u8, charge: i32) -> Option<u32> {
    let v: i32 = match atomic_number {
        BORON => 3 - charge,
        CARBON => 4 - charge.abs(),
        NITROGEN => 3 + charge,
        PHOSPHORUS => 5 + charge,
        OXYGEN => 2 + charge,
        SULFUR => 6 + charge.max(0),
        FLUORINE => 1 + charge,
        CHLORINE | BROMINE | IODINE => 7,
        _ => return None,
    };
    Some(v.max(0) as u32)
}

/// Members of the SMILES organic subset that may appear without brackets.
pub fn is_organic_subset(atomic_number: u8) -> bool {
    matches!(
        atomic_number,
        BORON | CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR | FLUORINE | CHLORINE | BROMINE | IODINE
    )
}

/// Elements that may be written in lowercase (aromatic) form.
pub fn aromatic_capable(atomic_number: u8) -> bool {
    matches!(
        atomic_number,
        BORON | CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR | 33 | 34 | 52
    )
}
