//! Fixed-column PDB-subset reader for ATOM/HETATM records.

use super::{ChargeClass, MoleculeRole, StructAtom, StructBioError, Structure};

/// Slice a 1-based inclusive column range out of a record, tolerating short
/// lines.
fn cols(line: &str, start: usize, end: usize) -> &str {
    let bytes = line.as_bytes();
    let lo = (start - 1).min(bytes.len());
    let hi = end.min(bytes.len());
    std::str::from_utf8(&bytes[lo..hi]).unwrap_or("")
}

fn parse_coord(line: &str, lineno: usize, start: usize, end: usize) -> Result<f64, StructBioError> {
    cols(line, start, end)
        .trim()
        .parse()
        .map_err(|_| StructBioError::MalformedRecord {
            line: lineno,
            message: format!("bad float in columns {start}-{end}"),
        })
}

/// Charge class from the residue/atom-name table: ASP/GLU carboxylate
/// oxygens are anionic; LYS NZ, ARG NH1/NH2/NE and HIS ring nitrogens are
/// cationic. Explicit charge columns (79-80, e.g. "1-") take precedence.
fn charge_class(residue: &str, atom_name: &str, charge_field: &str) -> ChargeClass {
    let cf = charge_field.trim();
    if cf.len() == 2 {
        let (digit, sign) = (cf.as_bytes()[0], cf.as_bytes()[1]);
        if digit.is_ascii_digit() && digit != b'0' {
            match sign {
                b'+' => return ChargeClass::Cationic,
                b'-' => return ChargeClass::Anionic,
                _ => {}
            }
        }
    }
    match (residue, atom_name) {
        ("ASP", "OD1") | ("ASP", "OD2") | ("GLU", "OE1") | ("GLU", "OE2") => ChargeClass::Anionic,
        ("LYS", "NZ")
        | ("ARG", "NH1")
        | ("ARG", "NH2")
        | ("ARG", "NE")
        | ("HIS", "ND1")
        | ("HIS", "NE2") => ChargeClass::Cationic,
        _ => ChargeClass::Neutral,
    }
}

/// Element from columns 77-78, falling back to the first alphabetic
/// character of the atom name when the element field is blank.
fn element_of(line: &str, atom_name: &str) -> String {
    let field = cols(line, 77, 78).trim();
    if !field.is_empty() {
        return field.to_string();
    }
    atom_name
        .chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase().to_string())
        .unwrap_or_default()
}

/// Parse ATOM/HETATM fixed columns: record name 1-6, atom name 13-16,
/// residue 18-20, chain 22, x/y/z 31-54, element 77-78, charge 79-80.
pub fn parse_structure(text: &str, role: MoleculeRole) -> Result<Structure, StructBioError> {
    let mut atoms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let record = cols(line, 1, 6).trim_end();
        if record != "ATOM" && record != "HETATM" {
            continue;
        }
        let atom_name = cols(line, 13, 16).trim().to_string();
        let residue = cols(line, 18, 20).trim().to_string();
        let chain = cols(line, 22, 22).chars().next().unwrap_or(' ');
        let x = parse_coord(line, lineno + 1, 31, 38)?;
        let y = parse_coord(line, lineno + 1, 39, 46)?;
        let z = parse_coord(line, lineno + 1, 47, 54)?;
        let element = element_of(line, &atom_name);
        let charge_class = charge_class(&residue, &atom_name, cols(line, 79, 80));
        atoms.push(StructAtom {
            element,
            pos: [x, y, z],
            residue,
            atom_name,
            chain,
            charge_class,
        });
    }
    if atoms.is_empty() {
        return Err(StructBioError::NoAtoms);
    }
    Ok(Structure { atoms, role })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom_line(name: &str, res: &str, x: f64, y: f64, z: f64, elem: &str) -> String {
        // Columns per the PDB fixed format: name 13-16, residue 18-20,
        // chain 22, coords 31-54, element 77-78.
        format!(
            "ATOM  {:>5} {:<4} {:<3} A{:>4}    {:8.3}{:8.3}{:8.3}{:6.2}{:6.2}          {:>2}",
            1, name, res, 1, x, y, z, 1.0, 0.0, elem
        )
    }

    #[test]
    fn single_record_coordinates() {
        let text = atom_line("CA", "ALA", 1.0, 2.0, 3.0, "C");
        let s = parse_structure(&text, MoleculeRole::Protein).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.atoms[0].pos, [1.0, 2.0, 3.0]);
        assert_eq!(s.atoms[0].element, "C");
        assert_eq!(s.atoms[0].residue, "ALA");
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Neutral);
    }

    #[test]
    fn unknown_element_verbatim() {
        let text = atom_line("Q1", "LIG", 0.0, 0.0, 0.0, "XX");
        let s = parse_structure(&text, MoleculeRole::Ligand).unwrap();
        assert_eq!(s.atoms[0].element, "XX");
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Neutral);
    }

    #[test]
    fn empty_file_rejected() {
        assert_eq!(
            parse_structure("", MoleculeRole::Protein),
            Err(StructBioError::NoAtoms)
        );
        assert_eq!(
            parse_structure("HEADER    NOTHING\n", MoleculeRole::Protein),
            Err(StructBioError::NoAtoms)
        );
    }

    #[test]
    fn malformed_float_rejected() {
        let mut line = atom_line("CA", "ALA", 1.0, 2.0, 3.0, "C");
        line.replace_range(30..38, "  xx.xxx");
        assert!(matches!(
            parse_structure(&line, MoleculeRole::Protein),
            Err(StructBioError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn charge_table() {
        let asp = atom_line("OD1", "ASP", 0.0, 0.0, 0.0, "O");
        let s = parse_structure(&asp, MoleculeRole::Protein).unwrap();
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Anionic);

        let lys = atom_line("NZ", "LYS", 0.0, 0.0, 0.0, "N");
        let s = parse_structure(&lys, MoleculeRole::Protein).unwrap();
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Cationic);

        let arg = atom_line("NH1", "ARG", 0.0, 0.0, 0.0, "N");
        let s = parse_structure(&arg, MoleculeRole::Protein).unwrap();
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Cationic);

        let his = atom_line("ND1", "HIS", 0.0, 0.0, 0.0, "N");
        let s = parse_structure(&his, MoleculeRole::Protein).unwrap();
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Cationic);
    }

    #[test]
    fn explicit_charge_columns() {
        let mut line = atom_line("O1", "LIG", 0.0, 0.0, 0.0, "O");
        while line.len() < 78 {
            line.push(' ');
        }
        line.push_str("1-");
        let s = parse_structure(&line, MoleculeRole::Ligand).unwrap();
        assert_eq!(s.atoms[0].charge_class, ChargeClass::Anionic);
    }

    #[test]
    fn element_fallback_from_atom_name() {
        // Short line without element columns.
        let line = "ATOM      1  CA  ALA A   1       1.000   2.000   3.000";
        let s = parse_structure(line, MoleculeRole::Protein).unwrap();
        assert_eq!(s.atoms[0].element, "C");
    }
}
