//! Tokenization and annotation: from raw text to one morpheme DAG per
//! sentence.
//!
//! Annotation is a pure lexicon search. Words are decomposed to letters,
//! looked up, and every analysis becomes one parallel path of morpheme
//! arcs; unknown words get a single UNK arc. No morphological rules run
//! here.

pub mod dag;

use std::io::Write;

use crate::error::{Error, Result};
use crate::hangul::{compose, decompose};
use crate::lexicon::CompiledLexicon;
use crate::rtn::Morpheme;

pub use dag::{DagArc, MorphemeDag, TAG_PUNCT, TAG_SEPARATOR, TAG_UNKNOWN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// Maximal run of Hangul or other alphanumeric characters.
    Word,
    /// Maximal run of whitespace.
    Separator,
    /// Any single other character.
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
}

/// Split text into words, separators and punctuation. Concatenating the
/// token texts reproduces the input exactly.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    for c in text.chars() {
        let kind = if c.is_alphanumeric() {
            TokenKind::Word
        } else if c.is_whitespace() {
            TokenKind::Separator
        } else {
            TokenKind::Punct
        };
        match tokens.last_mut() {
            Some(last) if last.kind == kind && kind != TokenKind::Punct => {
                last.text.push(c);
            }
            _ => tokens.push(Token { kind, text: c.to_string() }),
        }
    }
    tokens
}

/// Sentence boundaries fall after a separator that follows terminal
/// punctuation (. ? !) or contains a newline; the separator stays with
/// the sentence it closes, so no text is lost between DAGs.
pub fn split_sentences(tokens: Vec<Token>) -> Vec<Vec<Token>> {
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut after_terminal = false;
    for token in tokens {
        let break_here = token.kind == TokenKind::Separator
            && (after_terminal || token.text.contains('\n'));
        after_terminal =
            token.kind == TokenKind::Punct && matches!(token.text.as_str(), "." | "?" | "!");
        current.push(token);
        if break_here {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// All analyses of one word as full morpheme sequences (stem first), each
/// sequence's surfaces concatenating to the word's letters. Sorted by
/// tag sequence, then base, then surface; duplicates (same rendering via
/// different payloads) removed. Empty when the word is unknown.
pub fn analyze_word(lexicon: &CompiledLexicon, word: &str) -> Vec<Vec<Morpheme>> {
    let letters = decompose(word);
    let mut analyses: Vec<Vec<Morpheme>> = Vec::new();
    for analysis in lexicon.lookup(&letters) {
        let payload = lexicon.stem_payload(analysis);
        let mut morphemes = vec![Morpheme {
            surface: letters[..analysis.split as usize].to_vec(),
            base: payload.base.clone(),
            tag: payload.tag.clone(),
        }];
        morphemes.extend(lexicon.annotation(analysis).iter().cloned());
        analyses.push(morphemes);
    }
    analyses.sort_by_key(|a| analysis_key(a));
    analyses.dedup();
    analyses
}

type AnalysisKey = Vec<(String, Vec<crate::hangul::Letter>, Vec<crate::hangul::Letter>)>;

fn analysis_key(morphemes: &[Morpheme]) -> AnalysisKey {
    morphemes
        .iter()
        .map(|m| (m.tag.render(), m.base.clone(), m.surface.clone()))
        .collect()
}

/// Build the DAG for one sentence. Nodes: 0 is the source; each token
/// contributes its internal nodes (in analysis order) and then one join
/// node, so ids are topological.
pub fn build_dag(lexicon: &CompiledLexicon, sentence: u64, tokens: &[Token]) -> MorphemeDag {
    let mut arcs = Vec::new();
    let mut at = 0u32;
    let mut next = 1u32;
    for token in tokens {
        match token.kind {
            TokenKind::Separator | TokenKind::Punct => {
                let tag = if token.kind == TokenKind::Separator {
                    TAG_SEPARATOR
                } else {
                    TAG_PUNCT
                };
                arcs.push(DagArc {
                    from: at,
                    to: next,
                    surface: token.text.clone(),
                    base: token.text.clone(),
                    tag: tag.to_string(),
                });
                at = next;
                next += 1;
            }
            TokenKind::Word => {
                let analyses = analyze_word(lexicon, &token.text);
                if analyses.is_empty() {
                    arcs.push(DagArc {
                        from: at,
                        to: next,
                        surface: token.text.clone(),
                        base: token.text.clone(),
                        tag: TAG_UNKNOWN.to_string(),
                    });
                    at = next;
                    next += 1;
                    continue;
                }
                // Intermediate nodes first, then the join node; arc
                // targets inside an analysis chain are patched to the
                // join once it is known.
                let mut chains: Vec<Vec<DagArc>> = Vec::new();
                for analysis in &analyses {
                    let mut chain = Vec::new();
                    let mut from = at;
                    for morpheme in analysis {
                        let to = next;
                        next += 1;
                        chain.push(DagArc {
                            from,
                            to,
                            surface: compose(&morpheme.surface),
                            base: compose(&morpheme.base),
                            tag: morpheme.tag.render(),
                        });
                        from = to;
                    }
                    next -= 1;
                    chains.push(chain);
                }
                let join = next;
                next += 1;
                for mut chain in chains {
                    chain.last_mut().unwrap().to = join;
                    arcs.extend(chain);
                }
                at = join;
            }
        }
    }
    MorphemeDag { sentence, node_count: next.max(1), arcs }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnnotateStats {
    pub sentences: u64,
    pub words: u64,
    pub unknown_words: u64,
    pub arcs: u64,
}

/// Annotate a whole text, writing DAGs to `sink` as they are built.
pub fn annotate_text(
    lexicon: &CompiledLexicon,
    text: &str,
    sink: &mut impl Write,
) -> Result<AnnotateStats> {
    let mut stats = AnnotateStats::default();
    for (idx, tokens) in split_sentences(tokenize(text)).into_iter().enumerate() {
        let dag = build_dag(lexicon, idx as u64 + 1, &tokens);
        stats.sentences += 1;
        stats.arcs += dag.arcs.len() as u64;
        for token in &tokens {
            if token.kind == TokenKind::Word {
                stats.words += 1;
            }
        }
        stats.unknown_words += dag.arcs.iter().filter(|a| a.tag == TAG_UNKNOWN).count() as u64;
        sink.write_all(dag.render().as_bytes())?;
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Utf8,
    Utf16le,
}

/// Decode input bytes, reporting the byte offset of the first bad unit.
/// A UTF-16LE byte-order mark is skipped.
pub fn decode_input(bytes: &[u8], encoding: Encoding) -> Result<String> {
    match encoding {
        Encoding::Utf8 => match std::str::from_utf8(bytes) {
            Ok(s) => Ok(s.to_string()),
            Err(e) => Err(Error::Decode { encoding: "UTF-8", offset: e.valid_up_to() }),
        },
        Encoding::Utf16le => {
            if !bytes.len().is_multiple_of(2) {
                return Err(Error::Decode { encoding: "UTF-16LE", offset: bytes.len() - 1 });
            }
            let mut units: Vec<u16> = bytes
                .chunks_exact(2)
                .map(|pair| u16::from_le_bytes([pair[0], pair[1]]))
                .collect();
            let mut skipped = 0;
            if units.first() == Some(&0xFEFF) {
                units.remove(0);
                skipped = 1;
            }
            let mut out = String::with_capacity(units.len());
            for (i, r) in char::decode_utf16(units.iter().copied()).enumerate() {
                match r {
                    Ok(c) => out.push(c),
                    Err(_) => {
                        return Err(Error::Decode {
                            encoding: "UTF-16LE",
                            offset: (i + skipped) * 2,
                        })
                    }
                }
            }
            Ok(out)
        }
    }
}
