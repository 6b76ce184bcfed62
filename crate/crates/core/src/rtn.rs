//! Flattening of suffix networks into finite ending lists.
//!
//! A suffix network is a set of transducer graphs whose arcs may call
//! named sub-graphs. The enumerator walks every accepting path; an arc
//! `CALL(g)` is followed only while `g` has been expanded fewer than
//! `unroll_bound` times on the current path, which keeps the walk finite
//! on cyclic call graphs whether the re-entry is nested or sequential.
//! Cycles among the states of a single graph that close without a CALL
//! arc are rejected outright: no unrolling bound applies to them, so even
//! one expansion would be infinite.
//!
//! On a path, pair arcs accumulate the current morpheme (input side is
//! surface letters, output side is base letters) and a `{TAG}` token
//! closes it. An accepting path must close every morpheme it opened.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Label, StateId, TransducerGraph};
use crate::hangul::LetterString;
use crate::resource::{Tag, Tagset};

/// One morpheme of an ending: its spelling in the word, its dictionary
/// form, and its tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Morpheme {
    pub surface: LetterString,
    pub base: LetterString,
    pub tag: Tag,
}

/// One complete suffix sequence a stem class accepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EndingEntry {
    pub surface: LetterString,
    pub annotation: Vec<Morpheme>,
}

struct Walker<'a> {
    graphs: &'a BTreeMap<String, TransducerGraph>,
    tagset: &'a Tagset,
    unroll_bound: u32,
    /// How often each graph has been expanded on the current path.
    expansions: BTreeMap<&'a str, u32>,
    surface: LetterString,
    base: LetterString,
    morphemes: Vec<Morpheme>,
    entries: BTreeSet<EndingEntry>,
}

/// Enumerate every ending the network rooted at `root` accepts.
///
/// Entries come back deduplicated and sorted by surface, then annotation.
pub fn enumerate(
    root: &TransducerGraph,
    graphs: &BTreeMap<String, TransducerGraph>,
    tagset: &Tagset,
    unroll_bound: u32,
) -> Result<Vec<EndingEntry>> {
    for graph in reachable_graphs(root, graphs)? {
        if let Some(state) = graph.find_state_cycle(false) {
            return Err(Error::CyclicGraph {
                graph: graph.name.clone(),
                state,
            });
        }
    }
    let mut walker = Walker {
        graphs,
        tagset,
        unroll_bound,
        expansions: BTreeMap::new(),
        surface: Vec::new(),
        base: Vec::new(),
        morphemes: Vec::new(),
        entries: BTreeSet::new(),
    };
    walker.walk(root, root.initial, &mut Vec::new())?;
    Ok(walker.entries.into_iter().collect())
}

/// The root graph plus everything transitively called from it.
pub fn reachable_graphs<'a>(
    root: &'a TransducerGraph,
    graphs: &'a BTreeMap<String, TransducerGraph>,
) -> Result<Vec<&'a TransducerGraph>> {
    let mut seen = BTreeSet::from([root.name.as_str()]);
    let mut todo = vec![root];
    let mut found = vec![root];
    while let Some(graph) = todo.pop() {
        for callee in graph.callees() {
            if seen.insert(callee) {
                let target = graphs.get(callee).ok_or_else(|| Error::UnknownGraph {
                    caller: graph.name.clone(),
                    callee: callee.to_string(),
                })?;
                todo.push(target);
                found.push(target);
            }
        }
    }
    Ok(found)
}

impl<'a> Walker<'a> {
    /// Depth-first over arcs with backtracking. `conts` holds the return
    /// points of the calls currently being expanded, innermost last.
    fn walk(
        &mut self,
        graph: &'a TransducerGraph,
        state: StateId,
        conts: &mut Vec<(&'a TransducerGraph, StateId)>,
    ) -> Result<()> {
        if graph.finals.contains(&state) {
            match conts.pop() {
                Some((caller, resume)) => {
                    self.walk(caller, resume, conts)?;
                    conts.push((caller, resume));
                }
                None => {
                    self.emit(graph)?;
                }
            }
        }
        for arc in graph.arcs_from(state) {
            match &arc.label {
                Label::Epsilon => {
                    self.walk(graph, arc.to, conts)?;
                }
                Label::Pair { input, output } => {
                    if let Some(l) = input {
                        self.surface.push(*l);
                    }
                    if let Some(l) = output {
                        self.base.push(*l);
                    }
                    self.walk(graph, arc.to, conts)?;
                    if output.is_some() {
                        self.base.pop();
                    }
                    if input.is_some() {
                        self.surface.pop();
                    }
                }
                Label::Token(text) => {
                    let tag = Tag::parse(text)
                        .and_then(|t| self.tagset.validate(&t).map(|()| t))
                        .map_err(|message| Error::Graph {
                            graph: graph.name.clone(),
                            message: format!("bad tag token {{{text}}}: {message}"),
                        })?;
                    if self.surface.is_empty() {
                        return Err(Error::Graph {
                            graph: graph.name.clone(),
                            message: format!("token {{{text}}} closes a morpheme with empty surface"),
                        });
                    }
                    self.morphemes.push(Morpheme {
                        surface: std::mem::take(&mut self.surface),
                        base: std::mem::take(&mut self.base),
                        tag,
                    });
                    self.walk(graph, arc.to, conts)?;
                    let m = self.morphemes.pop().unwrap();
                    self.surface = m.surface;
                    self.base = m.base;
                }
                Label::Call(name) => {
                    let spent = self.expansions.get(name.as_str()).copied().unwrap_or(0);
                    if spent >= self.unroll_bound {
                        continue;
                    }
                    let callee = &self.graphs[name.as_str()];
                    self.expansions.insert(name, spent + 1);
                    conts.push((graph, arc.to));
                    self.walk(callee, callee.initial, conts)?;
                    conts.pop();
                    self.expansions.insert(name, spent);
                }
                Label::RemoveLast => {
                    return Err(Error::Graph {
                        graph: graph.name.clone(),
                        message: "edit instruction <R> outside an allomorph graph".into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, graph: &TransducerGraph) -> Result<()> {
        if !self.surface.is_empty() || !self.base.is_empty() {
            return Err(Error::Graph {
                graph: graph.name.clone(),
                message: "accepting path ends inside a morpheme (missing {TAG} token)".into(),
            });
        }
        let surface = self
            .morphemes
            .iter()
            .flat_map(|m| m.surface.iter().copied())
            .collect();
        self.entries.insert(EndingEntry {
            surface,
            annotation: self.morphemes.clone(),
        });
        Ok(())
    }
}
