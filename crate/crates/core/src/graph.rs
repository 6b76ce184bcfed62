//! Transducer graphs and the call graph between them.
//!
//! Graphs are kept in a line-oriented text format so they stay diffable:
//!
//! ```text
//! # states are declared before arcs may reference them
//! state 0 initial
//! state 1
//! state 2 final
//! 0 -> 1 : ㄷ/ㄷ
//! 1 -> 2 : {ef+mo=decl}
//! ```
//!
//! Arc labels:
//!
//! * `a/b` consumes input letter `a` and emits output letter `b`; either
//!   side may be `<E>` for nothing.
//! * `<E>` is a pure epsilon transition.
//! * `<R>` is the REMOVE_LAST edit instruction (allomorph graphs only).
//! * `{text}` emits the annotation token `text` and consumes no input.
//! * `CALL(name)` invokes the named sub-graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ParseError, Result};
use crate::hangul::Letter;

pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Epsilon,
    RemoveLast,
    Pair {
        input: Option<Letter>,
        output: Option<Letter>,
    },
    Token(String),
    Call(String),
}

impl Label {
    pub fn parse(text: &str) -> std::result::Result<Label, String> {
        if let Some(rest) = text.strip_prefix("CALL(") {
            let name = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unterminated CALL in {text:?}"))?;
            if !crate::resource::is_name(name) {
                return Err(format!("invalid graph name {name:?}"));
            }
            return Ok(Label::Call(name.to_string()));
        }
        if text == "<R>" {
            return Ok(Label::RemoveLast);
        }
        if let Some(rest) = text.strip_prefix('{') {
            let inner = rest
                .strip_suffix('}')
                .ok_or_else(|| format!("unterminated token in {text:?}"))?;
            if inner.is_empty() || inner.contains(['{', '}']) {
                return Err(format!("invalid token {text:?}"));
            }
            return Ok(Label::Token(inner.to_string()));
        }
        if text == "<E>" {
            return Ok(Label::Epsilon);
        }
        if let Some((lhs, rhs)) = text.split_once('/') {
            let input = parse_side(lhs)?;
            let output = parse_side(rhs)?;
            if input.is_none() && output.is_none() {
                return Ok(Label::Epsilon);
            }
            return Ok(Label::Pair { input, output });
        }
        Err(format!("unrecognized label {text:?}"))
    }

    /// Arcs that consume no input letter.
    pub fn is_input_epsilon(&self) -> bool {
        match self {
            Label::Epsilon | Label::RemoveLast | Label::Token(_) => true,
            Label::Pair { input, .. } => input.is_none(),
            Label::Call(_) => false,
        }
    }
}

fn parse_side(side: &str) -> std::result::Result<Option<Letter>, String> {
    if side == "<E>" {
        return Ok(None);
    }
    let mut chars = side.chars();
    match (chars.next(), chars.next()) {
        // A precomposed syllable would never match decomposed input, so
        // force authors to spell arcs letter by letter.
        (Some(c), None) if ('\u{AC00}'..='\u{D7A3}').contains(&c) => Err(format!(
            "label side {side:?} is a composed syllable; write its letters as separate arcs"
        )),
        (Some(c), None) => Ok(Some(Letter(c))),
        _ => Err(format!("label side {side:?} must be one letter or <E>")),
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Epsilon => f.write_str("<E>"),
            Label::RemoveLast => f.write_str("<R>"),
            Label::Pair { input, output } => {
                match input {
                    Some(l) => write!(f, "{}", l.0)?,
                    None => f.write_str("<E>")?,
                }
                f.write_str("/")?;
                match output {
                    Some(l) => write!(f, "{}", l.0),
                    None => f.write_str("<E>"),
                }
            }
            Label::Token(t) => write!(f, "{{{t}}}"),
            Label::Call(n) => write!(f, "CALL({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphArc {
    pub from: StateId,
    pub to: StateId,
    pub label: Label,
}

/// One transducer graph. State ids are as declared in the file; arcs keep
/// file order so serialization round-trips exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransducerGraph {
    pub name: String,
    pub states: BTreeSet<StateId>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
    pub arcs: Vec<GraphArc>,
}

impl TransducerGraph {
    pub fn arcs_from(&self, state: StateId) -> impl Iterator<Item = &GraphArc> {
        self.arcs.iter().filter(move |a| a.from == state)
    }

    /// Names of all sub-graphs this graph calls.
    pub fn callees(&self) -> BTreeSet<&str> {
        self.arcs
            .iter()
            .filter_map(|a| match &a.label {
                Label::Call(name) => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Find a state lying on a from→to cycle. With `through_calls` the
    /// endpoints of CALL arcs count as edges too; without it only
    /// non-call arcs do, since a cycle closed by a CALL arc is bounded by
    /// call unrolling rather than being inherently infinite.
    pub fn find_state_cycle(&self, through_calls: bool) -> Option<StateId> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut marks: BTreeMap<StateId, Mark> =
            self.states.iter().map(|&s| (s, Mark::New)).collect();
        // Iterative DFS with an explicit stack; (state, next-arc-cursor).
        let mut order: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for arc in &self.arcs {
            if through_calls || !matches!(arc.label, Label::Call(_)) {
                order.entry(arc.from).or_default().push(arc.to);
            }
        }
        for &start in &self.states {
            if marks[&start] != Mark::New {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            marks.insert(start, Mark::Open);
            while let Some(&mut (state, ref mut cursor)) = stack.last_mut() {
                let succs = order.get(&state).map(Vec::as_slice).unwrap_or(&[]);
                if *cursor < succs.len() {
                    let next = succs[*cursor];
                    *cursor += 1;
                    match marks[&next] {
                        Mark::Open => return Some(next),
                        Mark::New => {
                            marks.insert(next, Mark::Open);
                            stack.push((next, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    marks.insert(state, Mark::Done);
                    stack.pop();
                }
            }
        }
        None
    }

    /// States unreachable from the initial state or unable to reach a
    /// final state. Such states are legal but useless, so they warrant a
    /// warning rather than an error.
    pub fn connectivity_warnings(&self) -> Vec<String> {
        let mut fwd: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        let mut bwd: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for arc in &self.arcs {
            fwd.entry(arc.from).or_default().push(arc.to);
            bwd.entry(arc.to).or_default().push(arc.from);
        }
        let reach = |starts: Vec<StateId>, edges: &BTreeMap<StateId, Vec<StateId>>| {
            let mut seen: BTreeSet<StateId> = starts.iter().copied().collect();
            let mut todo = starts;
            while let Some(s) = todo.pop() {
                for &t in edges.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(t) {
                        todo.push(t);
                    }
                }
            }
            seen
        };
        let forward = reach(vec![self.initial], &fwd);
        let backward = reach(self.finals.iter().copied().collect(), &bwd);
        let mut warnings = Vec::new();
        for &s in &self.states {
            if !forward.contains(&s) {
                warnings.push(format!("{}: state {s} unreachable from initial", self.name));
            } else if !backward.contains(&s) {
                warnings.push(format!("{}: state {s} cannot reach a final state", self.name));
            }
        }
        warnings
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for &s in &self.states {
            out.push_str("state ");
            out.push_str(&s.to_string());
            if s == self.initial {
                out.push_str(" initial");
            }
            if self.finals.contains(&s) {
                out.push_str(" final");
            }
            out.push('\n');
        }
        for arc in &self.arcs {
            out.push_str(&format!("{} -> {} : {}\n", arc.from, arc.to, arc.label));
        }
        out
    }
}

/// Parse one graph file. The graph's name comes from the caller (normally
/// the file stem), not from the file contents.
pub fn parse_graph(name: &str, text: &str) -> Result<(TransducerGraph, Vec<String>)> {
    let mut states = BTreeSet::new();
    let mut initial = None;
    let mut finals = BTreeSet::new();
    let mut arcs = Vec::new();
    let mut errors = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = crate::resource::strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("state ") {
            let mut words = rest.split_whitespace();
            let id = match words.next().map(str::parse::<StateId>) {
                Some(Ok(id)) => id,
                _ => {
                    errors.push(ParseError::new(lineno, "bad state id"));
                    continue;
                }
            };
            if !states.insert(id) {
                errors.push(ParseError::new(lineno, format!("duplicate state {id}")));
                continue;
            }
            for flag in words {
                match flag {
                    "initial" => {
                        if initial.replace(id).is_some() {
                            errors.push(ParseError::new(lineno, "second initial state"));
                        }
                    }
                    "final" => {
                        finals.insert(id);
                    }
                    other => {
                        errors.push(ParseError::new(
                            lineno,
                            format!("unknown state flag {other:?}"),
                        ));
                    }
                }
            }
        } else if let Some((endpoints, label_text)) = line.split_once(':') {
            let Some((from_text, to_text)) = endpoints.split_once("->") else {
                errors.push(ParseError::new(lineno, "arc without `->`"));
                continue;
            };
            let from = from_text.trim().parse::<StateId>();
            let to = to_text.trim().parse::<StateId>();
            let (Ok(from), Ok(to)) = (from, to) else {
                errors.push(ParseError::new(lineno, "bad arc state id"));
                continue;
            };
            match Label::parse(label_text.trim()) {
                Ok(label) => arcs.push(GraphArc { from, to, label }),
                Err(message) => errors.push(ParseError::new(lineno, message)),
            }
        } else {
            errors.push(ParseError::new(
                lineno,
                "expected `state ...` or `from -> to : label`",
            ));
        }
    }

    for arc in &arcs {
        for id in [arc.from, arc.to] {
            if !states.contains(&id) {
                errors.push(ParseError::new(0, format!("arc references undeclared state {id}")));
            }
        }
    }
    let initial = match initial {
        Some(s) => s,
        None => {
            errors.push(ParseError::new(0, "no initial state"));
            0
        }
    };
    if finals.is_empty() {
        errors.push(ParseError::new(0, "no final state"));
    }
    if !errors.is_empty() {
        return Err(Error::Parse(
            errors.into_iter().map(|e| e.in_file(name)).collect(),
        ));
    }

    let graph = TransducerGraph {
        name: name.to_string(),
        states,
        initial,
        finals,
        arcs,
    };
    let warnings = graph.connectivity_warnings();
    Ok((graph, warnings))
}

/// The directed graph of CALL references between named graphs.
#[derive(Debug, Clone)]
pub struct CallGraph {
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

/// Build the call graph over a bundle's graphs, failing on calls to names
/// outside the bundle.
pub fn build_call_graph(graphs: &BTreeMap<String, TransducerGraph>) -> Result<CallGraph> {
    let mut edges = BTreeMap::new();
    for (name, graph) in graphs {
        let mut callees = BTreeSet::new();
        for callee in graph.callees() {
            if !graphs.contains_key(callee) {
                return Err(Error::UnknownGraph {
                    caller: name.clone(),
                    callee: callee.to_string(),
                });
            }
            callees.insert(callee.to_string());
        }
        edges.insert(name.clone(), callees);
    }
    Ok(CallGraph { edges })
}

impl CallGraph {
    /// Strongly connected components, Tarjan's algorithm, iterative so
    /// deep call chains cannot overflow the stack. Component order is by
    /// smallest member name; members are sorted.
    pub fn sccs(&self) -> Vec<Vec<String>> {
        let names: Vec<&String> = self.edges.keys().collect();
        let index_of: BTreeMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let succs: Vec<Vec<usize>> = names
            .iter()
            .map(|n| {
                self.edges[n.as_str()]
                    .iter()
                    .map(|c| index_of[c.as_str()])
                    .collect()
            })
            .collect();

        let n = names.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next_index = 0usize;
        let mut components: Vec<Vec<String>> = Vec::new();

        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            while let Some(&mut (v, ref mut cursor)) = work.last_mut() {
                if *cursor == 0 {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                }
                if *cursor < succs[v].len() {
                    let w = succs[v][*cursor];
                    *cursor += 1;
                    if index[w] == usize::MAX {
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    if low[v] == index[v] {
                        let mut component = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            component.push(names[w].clone());
                            if w == v {
                                break;
                            }
                        }
                        component.sort();
                        components.push(component);
                    }
                    work.pop();
                    if let Some(&mut (parent, _)) = work.last_mut() {
                        low[parent] = low[parent].min(low[v]);
                    }
                }
            }
        }
        components.sort();
        components
    }

    /// Graph names lying on any call cycle (including self-calls).
    pub fn cyclic_names(&self) -> BTreeSet<String> {
        let mut cyclic = BTreeSet::new();
        for component in self.sccs() {
            if component.len() > 1 {
                cyclic.extend(component);
            } else {
                let name = &component[0];
                if self.edges[name].contains(name) {
                    cyclic.insert(name.clone());
                }
            }
        }
        cyclic
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(text: &str) -> TransducerGraph {
        parse_graph("t", text).unwrap().0
    }

    #[test]
    fn smallest_graph_one_pair_arc() {
        let g = graph("state 0 initial\nstate 1 final\n0 -> 1 : ㄱ/ㄱ\n");
        assert_eq!(g.states.len(), 2);
        assert_eq!(g.arcs.len(), 1);
        assert_eq!(
            g.arcs[0].label,
            Label::Pair {
                input: Some(Letter('ㄱ')),
                output: Some(Letter('ㄱ')),
            }
        );
    }

    #[test]
    fn call_arc_recorded_unresolved() {
        let g = graph("state 0 initial\nstate 1 final\n0 -> 1 : CALL(end_V01)\n");
        assert_eq!(g.arcs[0].label, Label::Call("end_V01".into()));
        assert_eq!(g.callees().into_iter().collect::<Vec<_>>(), vec!["end_V01"]);
    }

    #[test]
    fn undeclared_state_is_an_error() {
        let err = parse_graph("t", "state 0 initial final\n0 -> 7 : <E>\n").unwrap_err();
        assert!(err.to_string().contains("undeclared state 7"));
    }

    #[test]
    fn missing_initial_is_an_error() {
        assert!(parse_graph("t", "state 0 final\n").is_err());
    }

    #[test]
    fn label_syntax() {
        assert_eq!(Label::parse("<E>").unwrap(), Label::Epsilon);
        assert_eq!(Label::parse("<E>/<E>").unwrap(), Label::Epsilon);
        assert_eq!(Label::parse("<R>").unwrap(), Label::RemoveLast);
        assert_eq!(
            Label::parse("ㅆ/<E>").unwrap(),
            Label::Pair {
                input: Some(Letter('ㅆ')),
                output: None
            }
        );
        assert_eq!(
            Label::parse("<E>/ㅓ").unwrap(),
            Label::Pair {
                input: None,
                output: Some(Letter('ㅓ'))
            }
        );
        assert_eq!(
            Label::parse("{ef+mo=decl}").unwrap(),
            Label::Token("ef+mo=decl".into())
        );
        assert!(Label::parse("xy/z").is_err());
        assert!(Label::parse("CALL(x").is_err());
        assert!(Label::parse("plain").is_err());
    }

    #[test]
    fn parse_serialize_round_trip() {
        let text = "state 0 initial\nstate 1\nstate 2 final\n\
                    0 -> 1 : ㄷ/ㄷ\n1 -> 2 : {ef}\n0 -> 2 : CALL(sub)\n1 -> 1 : <E>/ㅏ\n";
        let g = graph(text);
        let (reparsed, _) = parse_graph("t", &g.serialize()).unwrap();
        assert_eq!(g, reparsed);
    }

    #[test]
    fn connectivity_warnings_flag_orphans() {
        let (g, warnings) =
            parse_graph("t", "state 0 initial\nstate 1 final\nstate 2\n0 -> 1 : <E>\n").unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("state 2 unreachable"));
        assert_eq!(g.connectivity_warnings(), warnings);
    }

    #[test]
    fn state_cycle_detected() {
        let g = graph(
            "state 0 initial\nstate 1 final\n0 -> 1 : ㄱ/ㄱ\n1 -> 0 : <E>\n",
        );
        assert!(g.find_state_cycle(false).is_some());
        let acyclic = graph("state 0 initial\nstate 1 final\n0 -> 1 : ㄱ/ㄱ\n");
        assert!(acyclic.find_state_cycle(false).is_none());
    }

    #[test]
    fn call_closed_cycle_only_counts_through_calls() {
        let g = graph(
            "state 0 initial\nstate 1 final\n0 -> 1 : ㄱ/ㄱ\n1 -> 0 : CALL(sub)\n",
        );
        assert!(g.find_state_cycle(false).is_none());
        assert!(g.find_state_cycle(true).is_some());
    }

    fn toy_graphs(edges: &[(&str, &[&str])]) -> BTreeMap<String, TransducerGraph> {
        edges
            .iter()
            .map(|(name, callees)| {
                let mut text = String::from("state 0 initial\nstate 1 final\n");
                for callee in *callees {
                    text.push_str(&format!("0 -> 1 : CALL({callee})\n"));
                }
                if callees.is_empty() {
                    text.push_str("0 -> 1 : <E>\n");
                }
                (name.to_string(), graph(&text))
            })
            .map(|(name, mut g)| {
                g.name = name.clone();
                (name, g)
            })
            .collect()
    }

    #[test]
    fn call_graph_linear_chain() {
        let graphs = toy_graphs(&[("A", &["B"]), ("B", &[])]);
        let cg = build_call_graph(&graphs).unwrap();
        assert_eq!(cg.edges["A"], BTreeSet::from(["B".to_string()]));
        assert!(cg.cyclic_names().is_empty());
    }

    #[test]
    fn call_graph_self_loop() {
        let graphs = toy_graphs(&[("A", &["A"])]);
        let cg = build_call_graph(&graphs).unwrap();
        assert_eq!(cg.cyclic_names(), BTreeSet::from(["A".to_string()]));
        assert_eq!(cg.sccs(), vec![vec!["A".to_string()]]);
    }

    #[test]
    fn call_to_missing_graph() {
        let graphs = toy_graphs(&[("A", &["nowhere"])]);
        assert!(matches!(
            build_call_graph(&graphs),
            Err(Error::UnknownGraph { .. })
        ));
    }

    /// Two nodes share an SCC iff each reaches the other.
    fn oracle_sccs(cg: &CallGraph) -> Vec<Vec<String>> {
        let names: Vec<&String> = cg.edges.keys().collect();
        let reaches = |from: &str, to: &str| -> bool {
            let mut seen = BTreeSet::from([from.to_string()]);
            let mut todo = vec![from.to_string()];
            while let Some(s) = todo.pop() {
                if s == to {
                    return true;
                }
                for t in &cg.edges[&s] {
                    if seen.insert(t.clone()) {
                        todo.push(t.clone());
                    }
                }
            }
            false
        };
        let mut used = BTreeSet::new();
        let mut components = Vec::new();
        for &a in &names {
            if used.contains(a) {
                continue;
            }
            let mut component: Vec<String> = names
                .iter()
                .filter(|&&b| reaches(a, b) && reaches(b, a))
                .map(|b| (*b).clone())
                .collect();
            component.sort();
            used.extend(component.iter().cloned());
            components.push(component);
        }
        components.sort();
        components
    }

    #[test]
    fn scc_matches_reachability_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let names: Vec<String> = (0..8).map(|i| format!("g{i}")).collect();
        for _ in 0..200 {
            let mut shape: Vec<(String, Vec<String>)> = Vec::new();
            for name in &names {
                let callees: Vec<String> = names
                    .iter()
                    .filter(|_| rng.gen_bool(0.2))
                    .cloned()
                    .collect();
                shape.push((name.clone(), callees));
            }
            let refs: Vec<(&str, Vec<&str>)> = shape
                .iter()
                .map(|(n, cs)| (n.as_str(), cs.iter().map(String::as_str).collect()))
                .collect();
            let graphs: BTreeMap<String, TransducerGraph> = refs
                .iter()
                .map(|(name, callees)| {
                    let mut text = String::from("state 0 initial\nstate 1 final\n");
                    for callee in callees {
                        text.push_str(&format!("0 -> 1 : CALL({callee})\n"));
                    }
                    text.push_str("0 -> 1 : <E>\n");
                    (name.to_string(), graph(&text))
                })
                .collect();
            let cg = build_call_graph(&graphs).unwrap();
            assert_eq!(cg.sccs(), oracle_sccs(&cg));
        }
    }
}
