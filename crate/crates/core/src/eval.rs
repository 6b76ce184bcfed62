//! Corpus evaluation: recall and precision of annotation output against a
//! reference word list, after downgrading fine tags to a coarse tagset.
//!
//! Recall is measured over reference words marked with a single stem: the
//! fraction whose reference analysis appears among the word's downgraded
//! system analyses. Precision averages, over the same words, 1/n when the
//! reference analysis is among the n system analyses and 0 otherwise.
//! Both are exact rationals; no floating point enters the computation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num::rational::Ratio;
use num::Zero;

use crate::annotate::dag::{DagArc, MorphemeDag, TAG_PUNCT, TAG_SEPARATOR};
use crate::error::{Error, ParseError, Result};
use crate::hangul::{compose, decompose};
use crate::resource::strip_comment;

/// Maps rendered fine tags to coarse tag symbols.
///
/// An entry whose left side carries features (`npost+ca=nom`) matches only
/// that exact rendering; a bare left side (`npost`) matches any tag with
/// that general symbol. Exact entries take priority.
#[derive(Debug, Clone, Default)]
pub struct DowngradeMap {
    exact: BTreeMap<String, String>,
    general: BTreeMap<String, String>,
}

impl DowngradeMap {
    /// Parses the tab-separated map format: `fine<TAB>coarse` per line,
    /// with `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<DowngradeMap> {
        let mut map = DowngradeMap::default();
        let mut errors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let mut err = |message: String| errors.push(ParseError::new(idx + 1, message));
            let mut fields = line.split('\t');
            let (fine, coarse) = match (fields.next(), fields.next(), fields.next()) {
                (Some(f), Some(c), None) => (f.trim(), c.trim()),
                _ => {
                    err(format!("expected `fine<TAB>coarse`, got `{line}`"));
                    continue;
                }
            };
            if fine.is_empty() || coarse.is_empty() {
                err(format!("empty field in `{line}`"));
                continue;
            }
            let table = if fine.contains('+') { &mut map.exact } else { &mut map.general };
            if table.insert(fine.to_string(), coarse.to_string()).is_some() {
                err(format!("duplicate entry for `{fine}`"));
            }
        }
        if errors.is_empty() {
            Ok(map)
        } else {
            Err(Error::Parse(errors))
        }
    }

    pub fn load(path: &Path) -> Result<DowngradeMap> {
        let text = std::fs::read_to_string(path)?;
        DowngradeMap::parse(&text).map_err(|e| e.in_file(path))
    }

    /// All coarse symbols this map can produce.
    pub fn coarse_symbols(&self) -> BTreeSet<String> {
        self.exact.values().chain(self.general.values()).cloned().collect()
    }

    /// Downgrades one rendered fine tag.
    pub fn apply(&self, rendered: &str) -> Result<String> {
        if let Some(coarse) = self.exact.get(rendered) {
            return Ok(coarse.clone());
        }
        let general = rendered.split('+').next().unwrap_or(rendered);
        match self.general.get(general) {
            Some(coarse) => Ok(coarse.clone()),
            None => Err(Error::UnmappedTag(rendered.to_string())),
        }
    }
}

/// One reference corpus word: its text, coarse analysis, and how many
/// stems the reference annotation assigns it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceWord {
    pub text: String,
    /// Morphemes as (surface, coarse tag) pairs.
    pub analysis: Vec<(String, String)>,
    pub stem_count: u32,
}

/// Parses the reference corpus format: one word per line,
/// `word<TAB>surface/tag+surface/tag…<TAB>stem_count`, with `#` comment
/// lines. Coarse tags must belong to `coarse`.
pub fn parse_reference(text: &str, coarse: &BTreeSet<String>) -> Result<Vec<ReferenceWord>> {
    let mut words = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim_end();
        if line.trim().is_empty() {
            continue;
        }
        match parse_reference_line(line, coarse) {
            Ok(word) => words.push(word),
            Err(message) => errors.push(ParseError::new(idx + 1, message)),
        }
    }
    if errors.is_empty() {
        Ok(words)
    } else {
        Err(Error::Parse(errors))
    }
}

fn parse_reference_line(line: &str, coarse: &BTreeSet<String>) -> std::result::Result<ReferenceWord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [text, analysis_field, count_field] = fields.as_slice() else {
        return Err(format!("expected 3 tab-separated fields, got {}", fields.len()));
    };
    if text.is_empty() {
        return Err("empty word text".into());
    }
    let mut analysis = Vec::new();
    for morpheme in analysis_field.split('+') {
        let Some((surface, tag)) = morpheme.rsplit_once('/') else {
            return Err(format!("morpheme `{morpheme}` is not `surface/tag`"));
        };
        if surface.is_empty() || surface.contains('/') {
            return Err(format!("bad morpheme surface in `{morpheme}`"));
        }
        if !coarse.contains(tag) {
            return Err(format!("unknown coarse tag `{tag}`"));
        }
        analysis.push((surface.to_string(), tag.to_string()));
    }
    let stem_count: u32 = count_field
        .parse()
        .map_err(|_| format!("bad stem count `{count_field}`"))?;
    if stem_count == 0 {
        return Err("stem count must be at least 1".into());
    }
    Ok(ReferenceWord { text: text.to_string(), analysis, stem_count })
}

pub fn load_reference(path: &Path, coarse: &BTreeSet<String>) -> Result<Vec<ReferenceWord>> {
    let text = std::fs::read_to_string(path)?;
    parse_reference(&text, coarse).map_err(|e| e.in_file(path))
}

/// One word recovered from annotation output, with every analysis the
/// word's parallel DAG paths spell out. Tags are still fine-grained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemWord {
    pub text: String,
    pub analyses: Vec<Vec<(String, String)>>,
}

/// Extracts the word sequence from annotation DAGs.
///
/// Separator and punctuation arcs delimit words; the arcs between two
/// consecutive delimiter endpoints form one word segment, and each path
/// through that segment is one analysis. The tokenizer never emits two
/// adjacent words, so every word is bounded by delimiters or the
/// sentence ends.
pub fn system_words(dags: &[MorphemeDag]) -> Result<Vec<SystemWord>> {
    let mut words = Vec::new();
    for dag in dags {
        let mut boundaries: BTreeSet<u32> = BTreeSet::new();
        boundaries.insert(0);
        boundaries.insert(dag.node_count.saturating_sub(1));
        for arc in &dag.arcs {
            if arc.tag == TAG_SEPARATOR || arc.tag == TAG_PUNCT {
                boundaries.insert(arc.from);
                boundaries.insert(arc.to);
            }
        }
        let bounds: Vec<u32> = boundaries.into_iter().collect();
        for pair in bounds.windows(2) {
            let (x, y) = (pair[0], pair[1]);
            let segment: Vec<&DagArc> = dag
                .arcs
                .iter()
                .filter(|a| a.from >= x && a.to <= y)
                .collect();
            if segment.is_empty() {
                continue;
            }
            let delimiter = segment
                .iter()
                .all(|a| a.tag == TAG_SEPARATOR || a.tag == TAG_PUNCT);
            if delimiter {
                continue;
            }
            if segment.iter().any(|a| a.tag == TAG_SEPARATOR || a.tag == TAG_PUNCT) {
                return Err(malformed(dag, x, y, "mixes word and delimiter arcs"));
            }
            words.push(segment_word(dag, &segment, x, y)?);
        }
    }
    Ok(words)
}

fn malformed(dag: &MorphemeDag, x: u32, y: u32, what: &str) -> Error {
    Error::Parse(vec![ParseError::new(
        0,
        format!("sentence {}: segment {x}..{y} {what}", dag.sentence),
    )])
}

fn segment_word(dag: &MorphemeDag, segment: &[&DagArc], x: u32, y: u32) -> Result<SystemWord> {
    let mut by_from: BTreeMap<u32, Vec<&DagArc>> = BTreeMap::new();
    for arc in segment {
        by_from.entry(arc.from).or_default().push(arc);
    }
    let mut analyses: Vec<Vec<(String, String)>> = Vec::new();
    let mut used: BTreeSet<(u32, u32, &str)> = BTreeSet::new();
    let mut path: Vec<&DagArc> = Vec::new();
    walk_paths(&by_from, x, y, &mut path, &mut |p| {
        analyses.push(p.iter().map(|a| (a.surface.clone(), a.tag.clone())).collect());
        for a in p {
            used.insert((a.from, a.to, a.surface.as_str()));
        }
    });
    if analyses.is_empty() {
        return Err(malformed(dag, x, y, "has no path between its endpoints"));
    }
    if used.len() != segment.len() {
        return Err(malformed(dag, x, y, "contains arcs on no complete path"));
    }
    let mut text = None;
    for analysis in &analyses {
        let letters: Vec<_> = analysis
            .iter()
            .flat_map(|(surface, _)| decompose(surface))
            .collect();
        let composed = compose(&letters);
        match &text {
            None => text = Some(composed),
            Some(t) if *t == composed => {}
            Some(_) => return Err(malformed(dag, x, y, "paths spell different words")),
        }
    }
    Ok(SystemWord { text: text.unwrap(), analyses })
}

fn walk_paths<'a>(
    by_from: &BTreeMap<u32, Vec<&'a DagArc>>,
    at: u32,
    target: u32,
    path: &mut Vec<&'a DagArc>,
    emit: &mut impl FnMut(&[&'a DagArc]),
) {
    if at == target {
        emit(path);
        return;
    }
    let Some(arcs) = by_from.get(&at) else { return };
    for arc in arcs {
        path.push(arc);
        walk_paths(by_from, arc.to, target, path, emit);
        path.pop();
    }
}

/// Aggregate evaluation counters and the two derived rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    pub total_words: u64,
    pub single_stem_words: u64,
    pub matched_words: u64,
    pub recall: Ratio<u64>,
    pub precision: Ratio<u64>,
}

impl Metrics {
    /// Fixed key=value rendering, one pair per line, fractions kept exact.
    pub fn render(&self) -> String {
        format!(
            "total_words={}\nsingle_stem_words={}\nmatched_words={}\nrecall={}\nprecision={}\n",
            self.total_words, self.single_stem_words, self.matched_words, self.recall, self.precision,
        )
    }
}

/// Scores system output against the reference, word by word.
///
/// Alignment is positional: word texts must agree at every position and
/// the counts must match, otherwise evaluation aborts reporting the first
/// divergence.
pub fn evaluate(
    system: &[SystemWord],
    reference: &[ReferenceWord],
    map: &DowngradeMap,
) -> Result<Metrics> {
    let len = system.len().max(reference.len());
    let mut single = 0u64;
    let mut matched_words = 0u64;
    let mut precision_sum: Ratio<u64> = Ratio::zero();
    for i in 0..len {
        let (sys, rf) = match (system.get(i), reference.get(i)) {
            (Some(s), Some(r)) => (s, r),
            (s, r) => {
                return Err(Error::Misaligned {
                    position: i + 1,
                    system: s.map_or("<missing>".into(), |w| w.text.clone()),
                    reference: r.map_or("<missing>".into(), |w| w.text.clone()),
                })
            }
        };
        if sys.text != rf.text {
            return Err(Error::Misaligned {
                position: i + 1,
                system: sys.text.clone(),
                reference: rf.text.clone(),
            });
        }
        if rf.stem_count != 1 {
            continue;
        }
        single += 1;
        let mut matched = false;
        for analysis in &sys.analyses {
            let mut coarse = Vec::with_capacity(analysis.len());
            for (surface, tag) in analysis {
                coarse.push((surface.clone(), map.apply(tag)?));
            }
            if coarse == rf.analysis {
                matched = true;
            }
        }
        if matched {
            matched_words += 1;
            precision_sum += Ratio::new(1, sys.analyses.len() as u64);
        }
    }
    let over_single = |n: u64| {
        if single == 0 {
            Ratio::zero()
        } else {
            Ratio::new(n, single)
        }
    };
    let precision = if single == 0 {
        Ratio::zero()
    } else {
        precision_sum / Ratio::from_integer(single)
    };
    Ok(Metrics {
        total_words: len as u64,
        single_stem_words: single,
        matched_words,
        recall: over_single(matched_words),
        precision,
    })
}
