//! The compiled word lexicon: a minimal stem automaton joined to one
//! minimal ending automaton per compatibility symbol.
//!
//! Linking validates that every stem payload's CS has an ending
//! automaton; the join itself is performed at lookup time by a small
//! thread walk. The stem automaton is deterministic, so the word has at
//! most one stem state per split position; each final stem state fans
//! out into the ending automata of the CSs its payloads carry, and those
//! are deterministic again. No stored epsilon arcs, no subset
//! construction: just one extra walk per viable split point.

mod automaton;
mod format;

pub use automaton::{compile, AEdge, AState, CompiledAutomaton, NO_PAYLOADS};
pub use format::{deserialize, read_file, serialize, write_file};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hangul::{Letter, LetterString};
use crate::resource::Tag;
use crate::rtn::Morpheme;

/// What a stem surface means: its dictionary form, tag, and the CS
/// selecting which endings may follow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StemPayload {
    pub base: LetterString,
    pub tag: Tag,
    /// Index into the CS name table.
    pub cs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledLexicon {
    pub stems: CompiledAutomaton,
    /// One ending automaton per CS index; None for a CS no stem uses.
    pub endings: Vec<Option<CompiledAutomaton>>,
    pub cs_names: Vec<String>,
    pub stem_payloads: Vec<StemPayload>,
    /// Annotation table shared by all ending automata; ending payload ids
    /// index into it.
    pub annotations: Vec<Vec<Morpheme>>,
}

/// One way of reading a word: stem payload id, annotation id, and the
/// number of letters the stem covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Analysis {
    pub split: u32,
    pub stem: u32,
    pub ending: u32,
}

/// Join the stem automaton with the per-CS ending automata.
pub fn link(
    stems: CompiledAutomaton,
    stem_payloads: Vec<StemPayload>,
    endings: Vec<Option<CompiledAutomaton>>,
    cs_names: Vec<String>,
    annotations: Vec<Vec<Morpheme>>,
) -> Result<CompiledLexicon> {
    assert_eq!(endings.len(), cs_names.len());
    for payload in &stem_payloads {
        let cs = payload.cs as usize;
        if cs >= endings.len() || endings[cs].is_none() {
            let name = cs_names
                .get(cs)
                .cloned()
                .unwrap_or_else(|| format!("#{cs}"));
            return Err(Error::MissingEndingAutomaton(name));
        }
    }
    Ok(CompiledLexicon {
        stems,
        endings,
        cs_names,
        stem_payloads,
        annotations,
    })
}

impl CompiledLexicon {
    /// All analyses of a word, ordered by split position, then stem
    /// payload id, then annotation id. Empty when the word is not in the
    /// lexicon; that is not an error.
    pub fn lookup(&self, word: &[Letter]) -> Vec<Analysis> {
        let mut out = Vec::new();
        let mut state = 0u32;
        for split in 0..=word.len() {
            self.endings_from(state, &word[split..], split as u32, &mut out);
            if split == word.len() {
                break;
            }
            match self.stems.step(state, word[split]) {
                Some(next) => state = next,
                None => break,
            }
        }
        out
    }

    /// Fan out from one stem state over the rest of the word.
    fn endings_from(&self, stem_state: u32, rest: &[Letter], split: u32, out: &mut Vec<Analysis>) {
        let payloads = self.stems.payloads_at(stem_state);
        if payloads.is_empty() {
            return;
        }
        let mut by_cs: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &p in payloads {
            by_cs.entry(self.stem_payloads[p as usize].cs).or_default().push(p);
        }
        for (cs, stems) in by_cs {
            let ending = self.endings[cs as usize].as_ref().unwrap();
            let mut state = 0u32;
            let mut alive = true;
            for &letter in rest {
                match ending.step(state, letter) {
                    Some(next) => state = next,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if !alive {
                continue;
            }
            for &stem in &stems {
                for &annotation in ending.payloads_at(state) {
                    out.push(Analysis { split, stem, ending: annotation });
                }
            }
        }
    }

    pub fn stem_payload(&self, analysis: Analysis) -> &StemPayload {
        &self.stem_payloads[analysis.stem as usize]
    }

    pub fn annotation(&self, analysis: Analysis) -> &[Morpheme] {
        &self.annotations[analysis.ending as usize]
    }

    /// Every word the lexicon accepts, derived from the compiled automata
    /// (stem surfaces joined to the ending surfaces their CS allows).
    /// Deduplicated and sorted; for oracle comparisons and reports.
    pub fn words(&self) -> Vec<LetterString> {
        let mut out = std::collections::BTreeSet::new();
        for (surface, payloads) in self.stems.entries() {
            let css: std::collections::BTreeSet<u32> = payloads
                .iter()
                .map(|&p| self.stem_payloads[p as usize].cs)
                .collect();
            for cs in css {
                let ending = self.endings[cs as usize].as_ref().unwrap();
                for (ending_surface, _) in ending.entries() {
                    let mut word = surface.clone();
                    word.extend(ending_surface);
                    out.insert(word);
                }
            }
        }
        out.into_iter().collect()
    }
}
