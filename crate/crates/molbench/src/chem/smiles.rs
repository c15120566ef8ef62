//! SMILES parser for the supported subset.

use super::{Atom, Bond, BondOrder, ChemError, Molecule};
use std::collections::BTreeMap;

const ORGANIC_AROMATIC: [&str; 6] = ["b", "c", "n", "o", "p", "s"];
const BRACKET_AROMATIC: [&str; 8] = ["b", "c", "n", "o", "p", "s", "as", "se"];

/// Parse a SMILES string into a [`Molecule`].
///
/// Ring closures are resolved, branches matched, lowercase atoms flagged
/// aromatic and implicit hydrogens assigned by standard valence. Stereo
/// markers (`/`, `\`, `@`) parse and drop; isotopes and atom classes in
/// brackets parse and store/drop respectively.
pub fn parse_smiles(text: &str) -> Result<Molecule, ChemError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let chars: Vec<char> = trimmed.chars().collect();

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut branch_stack: Vec<usize> = Vec::new();
    let mut prev_atom: Option<usize> = None;
    let mut pending_bond: Option<BondOrder> = None;
    // ring number -> (atom index, explicit order at the opening, if any)
    let mut open_rings: BTreeMap<u16, (usize, Option<BondOrder>)> = BTreeMap::new();

    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '-' | '=' | '#' | ':' | '/' | '\\' => {
                if pending_bond.is_some() {
                    return Err(ChemError::DanglingBond);
                }
                pending_bond = Some(match c {
                    '=' => BondOrder::Double,
                    '#' => BondOrder::Triple,
                    ':' => BondOrder::Aromatic,
                    _ => BondOrder::Single, // '-', '/' and '\' (stereo dropped)
                });
                i += 1;
            }
            '(' => {
                let prev = prev_atom.ok_or(ChemError::UnbalancedParenthesis)?;
                branch_stack.push(prev);
                i += 1;
            }
            ')' => {
                prev_atom = Some(branch_stack.pop().ok_or(ChemError::UnbalancedParenthesis)?);
                if pending_bond.is_some() {
                    return Err(ChemError::DanglingBond);
                }
                i += 1;
            }
            '.' => {
                if pending_bond.is_some() {
                    return Err(ChemError::DanglingBond);
                }
                prev_atom = None;
                i += 1;
            }
            '%' => {
                if i + 2 >= chars.len()
                    || !chars[i + 1].is_ascii_digit()
                    || !chars[i + 2].is_ascii_digit()
                {
                    return Err(ChemError::InvalidRingClosure);
                }
                let num = (chars[i + 1].to_digit(10).unwrap() * 10
                    + chars[i + 2].to_digit(10).unwrap()) as u16;
                ring_closure(
                    num,
                    &mut open_rings,
                    &mut bonds,
                    &atoms,
                    prev_atom,
                    &mut pending_bond,
                )?;
                i += 3;
            }
            d if d.is_ascii_digit() => {
                let num = d.to_digit(10).unwrap() as u16;
                ring_closure(
                    num,
                    &mut open_rings,
                    &mut bonds,
                    &atoms,
                    prev_atom,
                    &mut pending_bond,
                )?;
                i += 1;
            }
            '[' => {
                let close = chars[i..]
                    .iter()
                    .position(|&c| c == ']')
                    .map(|p| i + p)
                    .ok_or_else(|| ChemError::MalformedBracket("missing ']'".into()))?;
                let inner: String = chars[i + 1..close].iter().collect();
                let atom = parse_bracket_atom(&inner)?;
                attach_atom(atom, &mut atoms, &mut bonds, &mut prev_atom, &mut pending_bond)?;
                i = close + 1;
            }
            c if c.is_ascii_alphabetic() => {
                let (atom, consumed) = parse_organic_atom(&chars[i..])?;
                attach_atom(atom, &mut atoms, &mut bonds, &mut prev_atom, &mut pending_bond)?;
                i += consumed;
            }
            c if c.is_whitespace() => {
                // SMILES lines sometimes carry trailing titles; stop at the
                // first whitespace after at least one atom.
                break;
            }
            other => {
                return Err(ChemError::UnknownAtomSymbol(other.to_string()));
            }
        }
    }

    if pending_bond.is_some() {
        return Err(ChemError::DanglingBond);
    }
    if !branch_stack.is_empty() {
        return Err(ChemError::UnbalancedParenthesis);
    }
    if let Some((&num, _)) = open_rings.iter().next() {
        return Err(ChemError::UnmatchedRingBond(num));
    }
    if atoms.is_empty() {
        return Err(ChemError::EmptyInput);
    }

    let mol = Molecule::from_parts(atoms, bonds, trimmed.to_string())?;
    // Trusted-lowercase aromaticity still has to be geometrically plausible.
    for (idx, atom) in mol.atoms.iter().enumerate() {
        if atom.aromatic && !atom.in_ring {
            return Err(ChemError::AromaticAtomOutsideRing(idx));
        }
    }
    Ok(mol)
}

fn attach_atom(
    atom: Atom,
    atoms: &mut Vec<Atom>,
    bonds: &mut Vec<Bond>,
    prev_atom: &mut Option<usize>,
    pending_bond: &mut Option<BondOrder>,
) -> Result<(), ChemError> {
    atoms.push(atom);
    let idx = atoms.len() - 1;
    if let Some(prev) = *prev_atom {
        let order = pending_bond.take().unwrap_or_else(|| {
            if atoms[prev].aromatic && atoms[idx].aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            }
        });
        bonds.push(Bond {
            a: prev,
            b: idx,
            order,
            in_ring: false,
        });
    } else if pending_bond.is_some() {
        // A bond symbol with no atom on its left ("=C", "C.=C").
        return Err(ChemError::DanglingBond);
    }
    *prev_atom = Some(idx);
    Ok(())
}

fn ring_closure(
    num: u16,
    open_rings: &mut BTreeMap<u16, (usize, Option<BondOrder>)>,
    bonds: &mut Vec<Bond>,
    atoms: &[Atom],
    prev_atom: Option<usize>,
    pending_bond: &mut Option<BondOrder>,
) -> Result<(), ChemError> {
    let current = prev_atom.ok_or(ChemError::InvalidRingClosure)?;
    match open_rings.remove(&num) {
        None => {
            open_rings.insert(num, (current, pending_bond.take()));
            Ok(())
        }
        Some((partner, open_order)) => {
            if partner == current {
                return Err(ChemError::InvalidRingClosure);
            }
            if bonds
                .iter()
                .any(|b| (b.a == partner && b.b == current) || (b.a == current && b.b == partner))
            {
                return Err(ChemError::InvalidRingClosure);
            }
            let order = open_order.or(pending_bond.take()).unwrap_or_else(|| {
                if atoms[partner].aromatic && atoms[current].aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }
            });
            bonds.push(Bond {
                a: partner,
                b: current,
                order,
                in_ring: false,
            });
            Ok(())
        }
    }
}

/// Organic-subset atom at the head of `chars`. Returns the atom and how many
/// characters were consumed (2 for Cl/Br).
fn parse_organic_atom(chars: &[char]) -> Result<(Atom, usize), ChemError> {
    let c = chars[0];
    if c.is_ascii_uppercase() {
        // Two-letter symbols first.
        if chars.len() > 1 {
            let two: String = chars[..2].iter().collect();
            if two == "Cl" || two == "Br" {
                return Ok((Atom::new(&two, false), 2));
            }
        }
        let sym = c.to_string();
        if matches!(sym.as_str(), "B" | "C" | "N" | "O" | "P" | "S" | "F" | "I") {
            return Ok((Atom::new(&sym, false), 1));
        }
        return Err(ChemError::UnknownAtomSymbol(sym));
    }
    let sym = c.to_string();
    if ORGANIC_AROMATIC.contains(&sym.as_str()) {
        return Ok((Atom::new(&sym.to_uppercase(), true), 1));
    }
    Err(ChemError::UnknownAtomSymbol(sym))
}

/// Bracket atom body (between '[' and ']'):
/// `isotope? symbol chiral? hcount? charge? class?`
fn parse_bracket_atom(body: &str) -> Result<Atom, ChemError> {
    if body.is_empty() {
        return Err(ChemError::MalformedBracket("empty".into()));
    }
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;

    let mut isotope: Option<u16> = None;
    let mut digits = String::new();
    while i < chars.len() && chars[i].is_ascii_digit() {
        digits.push(chars[i]);
        i += 1;
    }
    if !digits.is_empty() {
        isotope = digits.parse().ok();
    }

    if i >= chars.len() {
        return Err(ChemError::MalformedBracket(body.to_string()));
    }
    let (symbol, aromatic) = if chars[i].is_ascii_uppercase() {
        let mut sym = chars[i].to_string();
        i += 1;
        // Second lowercase letter extends the symbol, but a trailing 'H'
        // spec or other field characters do not.
        if i < chars.len() && chars[i].is_ascii_lowercase() {
            sym.push(chars[i]);
            i += 1;
        }
        (sym, false)
    } else if chars[i].is_ascii_lowercase() {
        let mut sym = chars[i].to_string();
        i += 1;
        if i < chars.len() && chars[i].is_ascii_lowercase() {
            let two = format!("{}{}", sym, chars[i]);
            if BRACKET_AROMATIC.contains(&two.as_str()) {
                sym = two;
                i += 1;
            }
        }
        if !BRACKET_AROMATIC.contains(&sym.as_str()) {
            return Err(ChemError::UnknownAtomSymbol(sym));
        }
        let mut s = sym.chars();
        let first = s.next().unwrap().to_ascii_uppercase();
        (format!("{}{}", first, s.as_str()), true)
    } else {
        return Err(ChemError::MalformedBracket(body.to_string()));
    };

    let mut atom = Atom::new(&symbol, aromatic);
    atom.bracket = true;
    atom.isotope = isotope;

    while i < chars.len() {
        match chars[i] {
            '@' => i += 1, // chirality parsed and dropped
            'H' => {
                i += 1;
                let mut digits = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    digits.push(chars[i]);
                    i += 1;
                }
                atom.explicit_h = if digits.is_empty() {
                    1
                } else {
                    digits
                        .parse()
                        .map_err(|_| ChemError::MalformedBracket(body.to_string()))?
                };
            }
            '+' | '-' => {
                let sign: i8 = if chars[i] == '+' { 1 } else { -1 };
                let symbol_char = chars[i];
                i += 1;
                let mut magnitude = 1i8;
                let mut digits = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    digits.push(chars[i]);
                    i += 1;
                }
                if !digits.is_empty() {
                    magnitude = digits
                        .parse()
                        .map_err(|_| ChemError::MalformedBracket(body.to_string()))?;
                } else {
                    // Repeated ++ / -- form.
                    while i < chars.len() && chars[i] == symbol_char {
                        magnitude += 1;
                        i += 1;
                    }
                }
                atom.formal_charge = sign * magnitude;
            }
            ':' => {
                // Atom class: parse and drop.
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            _ => return Err(ChemError::MalformedBracket(body.to_string())),
        }
    }
    Ok(atom)
}
