//! Binary serialization of compiled lexicons.
//!
//! Little-endian throughout. Letters, tags, and letter strings are
//! interned into sorted tables once per file; automata store flat edge
//! arrays with a first-edge index per state, so loading is one pass and
//! lookup never chases pointers.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hangul::{Letter, LetterString};
use crate::resource::Tag;
use crate::rtn::Morpheme;

use super::{AEdge, AState, CompiledAutomaton, CompiledLexicon, StemPayload, NO_PAYLOADS};

const MAGIC: &[u8; 4] = b"KWLX";
const VERSION: u32 = 1;

struct Tables {
    alphabet: Vec<Letter>,
    tags: Vec<String>,
    strings: Vec<LetterString>,
}

impl Tables {
    fn collect(lex: &CompiledLexicon) -> Tables {
        let mut letters = BTreeSet::new();
        let mut tags = BTreeSet::new();
        let mut strings = BTreeSet::new();
        let mut automaton = |a: &CompiledAutomaton| {
            for edge in &a.edges {
                letters.insert(edge.letter);
            }
        };
        automaton(&lex.stems);
        for ending in lex.endings.iter().flatten() {
            automaton(ending);
        }
        let mut string = |s: &LetterString| {
            letters.extend(s.iter().copied());
            strings.insert(s.clone());
        };
        for payload in &lex.stem_payloads {
            string(&payload.base);
            tags.insert(payload.tag.render());
        }
        for annotation in &lex.annotations {
            for m in annotation {
                string(&m.surface);
                string(&m.base);
                tags.insert(m.tag.render());
            }
        }
        Tables {
            alphabet: letters.into_iter().collect(),
            tags: tags.into_iter().collect(),
            strings: strings.into_iter().collect(),
        }
    }

    fn letter_id(&self, letter: Letter) -> u16 {
        self.alphabet.binary_search(&letter).unwrap() as u16
    }

    fn tag_id(&self, tag: &Tag) -> u32 {
        self.tags.binary_search(&tag.render()).unwrap() as u32
    }

    fn string_id(&self, s: &LetterString) -> u32 {
        self.strings.binary_search(s).unwrap() as u32
    }
}

pub fn serialize(lex: &CompiledLexicon) -> Vec<u8> {
    let tables = Tables::collect(lex);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);

    put_u32(&mut out, tables.alphabet.len() as u32);
    for &letter in &tables.alphabet {
        put_u32(&mut out, letter.0 as u32);
    }
    put_u32(&mut out, lex.cs_names.len() as u32);
    for name in &lex.cs_names {
        put_str(&mut out, name);
    }
    put_u32(&mut out, tables.tags.len() as u32);
    for tag in &tables.tags {
        put_str(&mut out, tag);
    }
    put_u32(&mut out, tables.strings.len() as u32);
    for s in &tables.strings {
        put_u32(&mut out, s.len() as u32);
        for &letter in s {
            put_u16(&mut out, tables.letter_id(letter));
        }
    }

    put_u32(&mut out, lex.stem_payloads.len() as u32);
    for payload in &lex.stem_payloads {
        put_u32(&mut out, tables.string_id(&payload.base));
        put_u32(&mut out, tables.tag_id(&payload.tag));
        put_u32(&mut out, payload.cs);
    }
    put_u32(&mut out, lex.annotations.len() as u32);
    for annotation in &lex.annotations {
        put_u32(&mut out, annotation.len() as u32);
        for m in annotation {
            put_u32(&mut out, tables.string_id(&m.surface));
            put_u32(&mut out, tables.string_id(&m.base));
            put_u32(&mut out, tables.tag_id(&m.tag));
        }
    }

    put_automaton(&mut out, &lex.stems, &tables);
    let present: Vec<u32> = (0..lex.endings.len() as u32)
        .filter(|&i| lex.endings[i as usize].is_some())
        .collect();
    put_u32(&mut out, present.len() as u32);
    for cs in present {
        put_u32(&mut out, cs);
        put_automaton(&mut out, lex.endings[cs as usize].as_ref().unwrap(), &tables);
    }
    out
}

pub fn deserialize(bytes: &[u8]) -> Result<CompiledLexicon> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::VersionMismatch { found: version, expected: VERSION });
    }

    let alphabet: Vec<Letter> = r.vec(|r| {
        let code = r.u32()?;
        char::from_u32(code).map(Letter).ok_or(Error::Truncated(r.pos as u64))
    })?;
    let cs_names: Vec<String> = r.vec(Reader::string)?;
    let tags: Vec<Tag> = r.vec(|r| {
        let text = r.string()?;
        Tag::parse(&text).map_err(|_| Error::Truncated(r.pos as u64))
    })?;
    let strings: Vec<LetterString> = r.vec(|r| {
        let len = r.u32()? as usize;
        (0..len)
            .map(|_| {
                let id = r.u16()? as usize;
                alphabet.get(id).copied().ok_or(Error::Truncated(r.pos as u64))
            })
            .collect()
    })?;

    let string_at = |r: &mut Reader| -> Result<LetterString> {
        let id = r.u32()? as usize;
        strings.get(id).cloned().ok_or(Error::Truncated(r.pos as u64))
    };
    let tag_at = |r: &mut Reader| -> Result<Tag> {
        let id = r.u32()? as usize;
        tags.get(id).cloned().ok_or(Error::Truncated(r.pos as u64))
    };

    let stem_payloads: Vec<StemPayload> = r.vec(|r| {
        let base = string_at(r)?;
        let tag = tag_at(r)?;
        let cs = r.u32()?;
        if cs as usize >= cs_names.len() {
            return Err(Error::Truncated(r.pos as u64));
        }
        Ok(StemPayload { base, tag, cs })
    })?;
    let annotations: Vec<Vec<Morpheme>> = r.vec(|r| {
        r.vec(|r| {
            Ok(Morpheme {
                surface: string_at(r)?,
                base: string_at(r)?,
                tag: tag_at(r)?,
            })
        })
    })?;

    let stems = read_automaton(&mut r, &alphabet)?;
    let mut endings: Vec<Option<CompiledAutomaton>> = vec![None; cs_names.len()];
    let present = r.u32()?;
    for _ in 0..present {
        let cs = r.u32()? as usize;
        if cs >= endings.len() || endings[cs].is_some() {
            return Err(Error::Truncated(r.pos as u64));
        }
        endings[cs] = Some(read_automaton(&mut r, &alphabet)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Truncated(r.pos as u64));
    }
    // Payload ids must land inside their tables or later lookups would
    // index out of bounds.
    let end = bytes.len() as u64;
    for set in &stems.payload_sets {
        if set.iter().any(|&p| p as usize >= stem_payloads.len()) {
            return Err(Error::Truncated(end));
        }
    }
    for ending in endings.iter().flatten() {
        for set in &ending.payload_sets {
            if set.iter().any(|&p| p as usize >= annotations.len()) {
                return Err(Error::Truncated(end));
            }
        }
    }
    super::link(stems, stem_payloads, endings, cs_names, annotations)
}

pub fn write_file(lex: &CompiledLexicon, path: &Path) -> Result<()> {
    std::fs::write(path, serialize(lex))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<CompiledLexicon> {
    deserialize(&std::fs::read(path)?)
}

fn put_automaton(out: &mut Vec<u8>, a: &CompiledAutomaton, tables: &Tables) {
    put_u32(out, a.states.len() as u32);
    put_u32(out, a.edges.len() as u32);
    put_u32(out, a.payload_sets.len() as u32);
    for set in &a.payload_sets {
        put_u32(out, set.len() as u32);
        for &p in set {
            put_u32(out, p);
        }
    }
    for state in &a.states {
        put_u32(out, state.first_edge);
        put_u32(out, state.edge_count);
        put_u32(out, state.payload_set);
    }
    for edge in &a.edges {
        put_u16(out, tables.letter_id(edge.letter));
        put_u32(out, edge.target);
    }
}

fn read_automaton(r: &mut Reader, alphabet: &[Letter]) -> Result<CompiledAutomaton> {
    let state_count = r.u32()? as usize;
    let edge_count = r.u32()? as usize;
    let payload_sets: Vec<Vec<u32>> = r.vec(|r| r.vec(Reader::u32))?;
    let mut states = Vec::with_capacity(state_count);
    for _ in 0..state_count {
        let first_edge = r.u32()?;
        let count = r.u32()?;
        let payload_set = r.u32()?;
        if first_edge as usize + count as usize > edge_count
            || (payload_set != NO_PAYLOADS && payload_set as usize >= payload_sets.len())
        {
            return Err(Error::Truncated(r.pos as u64));
        }
        states.push(AState { first_edge, edge_count: count, payload_set });
    }
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let letter_id = r.u16()? as usize;
        let target = r.u32()?;
        let letter = *alphabet.get(letter_id).ok_or(Error::Truncated(r.pos as u64))?;
        if target as usize >= state_count {
            return Err(Error::Truncated(r.pos as u64));
        }
        edges.push(AEdge { letter, target });
    }
    if state_count == 0 {
        return Err(Error::Truncated(r.pos as u64));
    }
    Ok(CompiledAutomaton { states, edges, payload_sets })
}

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated(self.pos as u64))?;
        if end > self.bytes.len() {
            return Err(Error::Truncated(self.bytes.len() as u64));
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let at = self.pos;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Truncated(at as u64))
    }

    /// Length-prefixed sequence. Every element encoding takes at least
    /// two bytes, so a length beyond the remaining byte count is corrupt;
    /// rejecting it early avoids looping over garbage.
    fn vec<T>(&mut self, mut read: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let len = self.u32()? as usize;
        if len > self.bytes.len().saturating_sub(self.pos) {
            return Err(Error::Truncated(self.pos as u64));
        }
        (0..len).map(|_| read(self)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::mini_for_format;
    use super::*;

    #[test]
    fn round_trip_identity() {
        let lex = mini_for_format();
        let bytes = serialize(&lex);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(lex, back);
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn round_trip_preserves_lookups() {
        let lex = mini_for_format();
        let back = deserialize(&serialize(&lex)).unwrap();
        for word in lex.words() {
            assert_eq!(lex.lookup(&word), back.lookup(&word));
        }
    }

    #[test]
    fn bad_magic_detected() {
        let mut bytes = serialize(&mini_for_format());
        bytes[0] = b'x';
        assert!(matches!(deserialize(&bytes), Err(Error::BadMagic)));
    }

    #[test]
    fn version_mismatch_detected() {
        let mut bytes = serialize(&mini_for_format());
        bytes[4] = 99;
        assert!(matches!(
            deserialize(&bytes),
            Err(Error::VersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn truncation_detected() {
        let bytes = serialize(&mini_for_format());
        for cut in [5, 11, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(deserialize(&bytes[..cut]), Err(Error::Truncated(_))),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn trailing_garbage_detected() {
        let mut bytes = serialize(&mini_for_format());
        bytes.push(0);
        assert!(matches!(deserialize(&bytes), Err(Error::Truncated(_))));
    }
}
