//! SMILES reader.
//!
//! Supported: organic-subset atoms (aliphatic and aromatic), bracket atoms
//! with isotope, hydrogen count, charge and atom class, branches, ring
//! closures (`0`-`9` and `%nn`), bond symbols `- = # :` and `.` separators.
//! Stereo markers (`/ \ @ @@`) and isotopes are accepted and dropped.

use super::element::Element;
use super::molecule::{implicit_hydrogens, Atom, Bond, BondOrder, Molecule};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    NonAscii,
    UnclosedRing,
    UnbalancedParenthesis,
    UnknownElement,
    BadCharge,
    UnclosedBracket,
    UnexpectedCharacter,
    /// Bond symbol or ring digit with no atom to attach to.
    DanglingBond,
    RingBondMismatch,
    DuplicateBond,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES parse error at offset {position}: {kind:?}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }
}

/// A molecule together with the atom-class (map) numbers found in the text;
/// zero means unmapped.
#[derive(Debug, Clone)]
pub struct MappedMolecule {
    pub molecule: Molecule,
    pub maps: Vec<u32>,
}

/// Parses a SMILES string into a single graph. Dot-separated components end
/// up as disconnected parts of the same molecule; see [`parse_components`].
pub fn parse_smiles(text: &str) -> Result<Molecule, ParseError> {
    Ok(parse_mapped(text)?.molecule)
}

/// Parses a SMILES string and returns one molecule per connected component.
pub fn parse_components(text: &str) -> Result<Vec<Molecule>, ParseError> {
    Ok(parse_smiles(text)?.components())
}

pub fn parse_mapped(text: &str) -> Result<MappedMolecule, ParseError> {
    let raw = Parser::new(text, false).parse()?;
    let molecule = Molecule::new(raw.atoms, raw.bonds).expect("parser emits valid bonds");
    Ok(MappedMolecule {
        molecule,
        maps: raw.maps,
    })
}

/// Output of the pattern dialect, where a bracket atom without `H` leaves
/// the hydrogen count unconstrained.
pub(crate) struct ParsedPattern {
    pub molecule: Molecule,
    pub hydrogens: Vec<Option<u8>>,
    pub labels: Vec<u32>,
}

pub(crate) fn parse_pattern(text: &str) -> Result<ParsedPattern, ParseError> {
    let raw = Parser::new(text, true).parse()?;
    let hydrogens = raw
        .atoms
        .iter()
        .zip(&raw.h_given)
        .map(|(a, &given)| given.then_some(a.hydrogens))
        .collect();
    let molecule = Molecule::new(raw.atoms, raw.bonds).expect("parser emits valid bonds");
    Ok(ParsedPattern {
        molecule,
        hydrogens,
        labels: raw.maps,
    })
}

struct Raw {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    maps: Vec<u32>,
    h_given: Vec<bool>,
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    pattern: bool,
    atoms: Vec<Atom>,
    maps: Vec<u32>,
    bracketed: Vec<bool>,
    h_given: Vec<bool>,
    // order None = default (aromatic between aromatic atoms, else single)
    bonds: Vec<(usize, usize, Option<BondOrder>)>,
    rings: HashMap<u32, (usize, Option<BondOrder>, usize)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, pattern: bool) -> Parser<'a> {
        Parser {
            input: text.as_bytes(),
            pos: 0,
            pattern,
            atoms: Vec::new(),
            maps: Vec::new(),
            bracketed: Vec::new(),
            h_given: Vec::new(),
            bonds: Vec::new(),
            rings: HashMap::new(),
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.pos, kind)
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Raw, ParseError> {
        use ParseErrorKind::*;
        if self.input.is_empty() {
            return Err(self.err(EmptyInput));
        }
        if let Some(i) = self.input.iter().position(|b| !b.is_ascii()) {
            return Err(ParseError::new(i, NonAscii));
        }
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
        let mut pending: Option<(Option<BondOrder>, usize)> = None;

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.err(UnexpectedCharacter));
                    }
                    branches.push((prev, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(self.err(UnbalancedParenthesis));
                    };
                    if pending.is_some() {
                        return Err(self.err(DanglingBond));
                    }
                    prev = p;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.err(DanglingBond));
                    }
                    let order = match c {
                        b'=' => Some(BondOrder::Double),
                        b'#' => Some(BondOrder::Triple),
                        b':' => Some(BondOrder::Aromatic),
                        b'-' => Some(BondOrder::Single),
                        // directional bonds carry no order information
                        _ => None,
                    };
                    pending = Some((order, self.pos));
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.err(UnexpectedCharacter));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let start = self.pos;
                    let Some(atom) = prev else {
                        return Err(self.err(DanglingBond));
                    };
                    let number = self.ring_number()?;
                    let order = pending.take().and_then(|p| p.0);
                    if let Some((open_atom, open_order, _)) = self.rings.remove(&number) {
                        let merged = match (open_order, order) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(ParseError::new(start, RingBondMismatch))
                            }
                            (a, b) => a.or(b),
                        };
                        if open_atom == atom {
                            return Err(ParseError::new(start, DuplicateBond));
                        }
                        self.add_bond(open_atom, atom, merged, start)?;
                    } else {
                        self.rings.insert(number, (atom, order, start));
                    }
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.attach(&mut prev, &mut pending, atom)?;
                }
                b'A'..=b'Z' | b'a'..=b'z' => {
                    let atom = self.organic_atom()?;
                    self.attach(&mut prev, &mut pending, atom)?;
                }
                _ => return Err(self.err(UnexpectedCharacter)),
            }
        }

        if let Some((_, at)) = pending {
            return Err(ParseError::new(at, DanglingBond));
        }
        if let Some(&(_, at)) = branches.first() {
            return Err(ParseError::new(at, UnbalancedParenthesis));
        }
        if let Some(at) = self.rings.values().map(|r| r.2).min() {
            return Err(ParseError::new(at, UnclosedRing));
        }
        Ok(self.finish())
    }

    fn attach(
        &mut self,
        prev: &mut Option<usize>,
        pending: &mut Option<(Option<BondOrder>, usize)>,
        atom: usize,
    ) -> Result<(), ParseError> {
        if let Some(p) = *prev {
            let (order, at) = pending.take().unwrap_or((None, self.pos));
            self.add_bond(p, atom, order, at)?;
        }
        *prev = Some(atom);
        Ok(())
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        order: Option<BondOrder>,
        at: usize,
    ) -> Result<(), ParseError> {
        let dup = self
            .bonds
            .iter()
            .any(|&(x, y, _)| (x == a && y == b) || (x == b && y == a));
        if dup {
            return Err(ParseError::new(at, ParseErrorKind::DuplicateBond));
        }
        self.bonds.push((a, b, order));
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, ParseError> {
        let c = self.input[self.pos];
        if c == b'%' {
            let digits = self.input.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => Err(self.err(ParseErrorKind::UnexpectedCharacter)),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn push_atom(&mut self, atom: Atom, map: u32, bracketed: bool, h_given: bool) -> usize {
        self.atoms.push(atom);
        self.maps.push(map);
        self.bracketed.push(bracketed);
        self.h_given.push(h_given);
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        let c = self.input[self.pos];
        let next = self.input.get(self.pos + 1).copied();
        let (symbol, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", false, 2),
            (b'B', Some(b'r')) => ("Br", false, 2),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                (std::str::from_utf8(&self.input[start..start + 1]).unwrap(), false, 1)
            }
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ => return Err(ParseError::new(start, ParseErrorKind::UnknownElement)),
        };
        let element = Element::from_symbol(symbol).expect("organic subset symbol");
        self.pos += len;
        let atom = Atom {
            element,
            charge: 0,
            aromatic,
            hydrogens: 0,
        };
        Ok(self.push_atom(atom, 0, false, false))
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.input[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
    }

    fn bracket_atom(&mut self) -> Result<usize, ParseError> {
        use ParseErrorKind::*;
        let open = self.pos;
        self.pos += 1;
        let _isotope = self.digits();

        let sym_start = self.pos;
        let (element, aromatic) = self.bracket_symbol().ok_or(ParseError::new(sym_start, UnknownElement))?;

        // chirality
        while self.peek() == Some(b'@') {
            self.pos += 1;
        }
        for tag in [&b"TH"[..], b"AL", b"SP", b"TB", b"OH"] {
            if self.input[self.pos..].starts_with(tag) {
                self.pos += 2;
                self.digits();
            }
        }

        let mut hydrogens = 0u8;
        let mut h_given = !self.pattern;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.digits().unwrap_or(1).min(u8::MAX as u32) as u8;
            h_given = true;
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let charge_start = self.pos;
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.digits() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
            if matches!(self.peek(), Some(b'+' | b'-')) || !(-15..=15).contains(&charge) {
                return Err(ParseError::new(charge_start, BadCharge));
            }
        }

        let mut map = 0;
        if self.peek() == Some(b':') {
            self.pos += 1;
            map = self.digits().ok_or(self.err(UnexpectedCharacter))?;
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(_) => return Err(self.err(UnexpectedCharacter)),
            None => return Err(ParseError::new(open, UnclosedBracket)),
        }

        let atom = Atom {
            element,
            charge: charge as i8,
            aromatic,
            hydrogens,
        };
        Ok(self.push_atom(atom, map, true, h_given))
    }

    fn bracket_symbol(&mut self) -> Option<(Element, bool)> {
        let rest = &self.input[self.pos..];
        let first = *rest.first()?;
        if first.is_ascii_lowercase() {
            for (text, symbol) in [("se", "Se"), ("as", "As"), ("te", "Te")] {
                if rest.starts_with(text.as_bytes()) {
                    self.pos += 2;
                    return Some((Element::from_symbol(symbol)?, true));
                }
            }
            let upper = (first as char).to_ascii_uppercase().to_string();
            let element = Element::from_symbol(&upper).filter(|e| e.can_be_aromatic())?;
            self.pos += 1;
            return Some((element, true));
        }
        if !first.is_ascii_uppercase() {
            return None;
        }
        if let Some(&second) = rest.get(1) {
            if second.is_ascii_lowercase() {
                let two = std::str::from_utf8(&rest[..2]).ok()?;
                if let Some(e) = Element::from_symbol(two) {
                    self.pos += 2;
                    return Some((e, false));
                }
            }
        }
        let one = std::str::from_utf8(&rest[..1]).ok()?;
        let e = Element::from_symbol(one)?;
        self.pos += 1;
        Some((e, false))
    }

    fn finish(self) -> Raw {
        let Parser {
            mut atoms,
            maps,
            bracketed,
            h_given,
            bonds,
            ..
        } = self;
        let bonds: Vec<Bond> = bonds
            .into_iter()
            .map(|(a, b, order)| Bond {
                begin: a,
                end: b,
                order: order.unwrap_or(if atoms[a].aromatic && atoms[b].aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }),
            })
            .collect();
        let mut orders: Vec<Vec<BondOrder>> = vec![Vec::new(); atoms.len()];
        for b in &bonds {
            orders[b.begin].push(b.order);
            orders[b.end].push(b.order);
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            if !bracketed[i] {
                atom.hydrogens =
                    implicit_hydrogens(atom.element, atom.aromatic, orders[i].iter().copied());
            }
        }
        Raw {
            atoms,
            bonds,
            maps,
            h_given,
        }
    }
}
