//! Minimal acyclic automata over letters, built incrementally from
//! sorted entry lists.
//!
//! Payload-set identity is part of state identity: two states merge only
//! if their outgoing transitions AND their payload sets agree, so every
//! accepted surface retrieves exactly its own payloads.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hangul::{compose, Letter, LetterString};

pub const NO_PAYLOADS: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AState {
    pub first_edge: u32,
    pub edge_count: u32,
    /// Index into the payload-set table, or NO_PAYLOADS for a non-final
    /// state.
    pub payload_set: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AEdge {
    pub letter: Letter,
    pub target: u32,
}

/// A frozen automaton. State 0 is initial; states are numbered in
/// breadth-first discovery order with edges sorted by letter, so equal
/// input always produces an identical structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledAutomaton {
    pub states: Vec<AState>,
    pub edges: Vec<AEdge>,
    pub payload_sets: Vec<Vec<u32>>,
}

impl CompiledAutomaton {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edges_from(&self, state: u32) -> &[AEdge] {
        let s = &self.states[state as usize];
        &self.edges[s.first_edge as usize..(s.first_edge + s.edge_count) as usize]
    }

    pub fn step(&self, state: u32, letter: Letter) -> Option<u32> {
        let edges = self.edges_from(state);
        edges
            .binary_search_by(|e| e.letter.cmp(&letter))
            .ok()
            .map(|i| edges[i].target)
    }

    /// Payload ids at a state; empty for non-final states.
    pub fn payloads_at(&self, state: u32) -> &[u32] {
        match self.states[state as usize].payload_set {
            NO_PAYLOADS => &[],
            set => &self.payload_sets[set as usize],
        }
    }

    /// Payloads of a full surface, or None if not accepted.
    pub fn accepts(&self, surface: &[Letter]) -> Option<&[u32]> {
        let mut state = 0;
        for &letter in surface {
            state = self.step(state, letter)?;
        }
        match self.payloads_at(state) {
            [] => None,
            payloads => Some(payloads),
        }
    }

    /// Every accepted surface with its payload ids, in lexicographic
    /// order. Intended for reports and oracle comparisons, not hot paths.
    pub fn entries(&self) -> Vec<(LetterString, Vec<u32>)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect(0, &mut path, &mut out);
        out
    }

    fn collect(&self, state: u32, path: &mut LetterString, out: &mut Vec<(LetterString, Vec<u32>)>) {
        let payloads = self.payloads_at(state);
        if !payloads.is_empty() {
            out.push((path.clone(), payloads.to_vec()));
        }
        for edge in self.edges_from(state) {
            path.push(edge.letter);
            self.collect(edge.target, path, out);
            path.pop();
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    edges: Vec<(Letter, u32)>,
    payloads: Vec<u32>,
}

struct Builder {
    arena: Vec<Node>,
    register: HashMap<Node, u32>,
    /// path[i] is the state after consuming i letters of the previous
    /// surface; path[0] is the root, which never enters the register.
    path: Vec<u32>,
    prev: LetterString,
    started: bool,
}

/// Build the minimal automaton for a sorted entry list. Surfaces must be
/// strictly increasing; payload lists are deduplicated and sorted here.
pub fn compile(entries: &[(LetterString, Vec<u32>)]) -> Result<CompiledAutomaton> {
    let mut b = Builder {
        arena: vec![Node { edges: Vec::new(), payloads: Vec::new() }],
        register: HashMap::new(),
        path: vec![0],
        prev: Vec::new(),
        started: false,
    };
    for (surface, payloads) in entries {
        assert!(!payloads.is_empty(), "entry without payloads");
        b.add(surface, payloads)?;
    }
    b.freeze_from(0);
    Ok(b.renumber())
}

impl Builder {
    fn add(&mut self, surface: &[Letter], payloads: &[u32]) -> Result<()> {
        let common = self
            .prev
            .iter()
            .zip(surface)
            .take_while(|(a, b)| a == b)
            .count();
        if self.started {
            if common == surface.len() && surface.len() == self.prev.len() {
                return Err(Error::DuplicateEntry(compose(surface)));
            }
            if self.prev.as_slice() >= surface {
                return Err(Error::UnsortedInput(compose(surface)));
            }
        }
        self.started = true;
        self.freeze_from(common);
        for &letter in &surface[common..] {
            let node = self.arena.len() as u32;
            self.arena.push(Node { edges: Vec::new(), payloads: Vec::new() });
            let parent = *self.path.last().unwrap();
            self.arena[parent as usize].edges.push((letter, node));
            self.path.push(node);
        }
        let last = *self.path.last().unwrap();
        let mut set: Vec<u32> = payloads.to_vec();
        set.sort_unstable();
        set.dedup();
        self.arena[last as usize].payloads = set;
        self.prev = surface.to_vec();
        Ok(())
    }

    /// Register every unfrozen state deeper than `depth`, merging each
    /// into an existing equivalent state when the register has one.
    fn freeze_from(&mut self, depth: usize) {
        while self.path.len() > depth + 1 {
            let child = self.path.pop().unwrap();
            let node = self.arena[child as usize].clone();
            let parent = *self.path.last().unwrap();
            let existing = *self.register.entry(node).or_insert(child);
            if existing != child {
                let edge = self.arena[parent as usize].edges.last_mut().unwrap();
                edge.1 = existing;
            }
        }
    }

    /// Renumber reachable states in breadth-first letter order and lay
    /// edges out flat.
    fn renumber(self) -> CompiledAutomaton {
        let mut new_id: HashMap<u32, u32> = HashMap::from([(0, 0)]);
        let mut order = vec![0u32];
        let mut cursor = 0;
        while cursor < order.len() {
            let old = order[cursor];
            cursor += 1;
            let mut edges = self.arena[old as usize].edges.clone();
            edges.sort_by_key(|(letter, _)| *letter);
            for (_, target) in edges {
                if let std::collections::hash_map::Entry::Vacant(slot) = new_id.entry(target) {
                    slot.insert(order.len() as u32);
                    order.push(target);
                }
            }
        }

        let mut states = Vec::with_capacity(order.len());
        let mut edges = Vec::new();
        let mut payload_sets: Vec<Vec<u32>> = Vec::new();
        let mut set_ids: HashMap<Vec<u32>, u32> = HashMap::new();
        for &old in &order {
            let node = &self.arena[old as usize];
            let first_edge = edges.len() as u32;
            let mut out: Vec<(Letter, u32)> = node.edges.clone();
            out.sort_by_key(|(letter, _)| *letter);
            for (letter, target) in out {
                edges.push(AEdge { letter, target: new_id[&target] });
            }
            let payload_set = if node.payloads.is_empty() {
                NO_PAYLOADS
            } else {
                *set_ids.entry(node.payloads.clone()).or_insert_with(|| {
                    payload_sets.push(node.payloads.clone());
                    (payload_sets.len() - 1) as u32
                })
            };
            states.push(AState {
                first_edge,
                edge_count: edges.len() as u32 - first_edge,
                payload_set,
            });
        }
        CompiledAutomaton { states, edges, payload_sets }
    }
}
