//! Oracles written independently of the library's algorithms.

use std::collections::{BTreeMap, HashSet};

use serde_json::Value;

use sct_pe::lincons::{ConstraintStore, LinConstraint};
use sct_pe::pe::QueryResult;
use sct_pe::scg::{concat, SizeChangeGraph};
use sct_pe::syntax::Term;

/// Every composition of a non-empty path of base graphs, found by extending
/// known paths on the right with one base graph until nothing new appears.
/// Idsets are ignored.
pub fn closure_by_paths(base: &[SizeChangeGraph]) -> HashSet<SizeChangeGraph> {
    let mut seen: HashSet<SizeChangeGraph> = base.iter().cloned().collect();
    let mut frontier: Vec<SizeChangeGraph> = seen.iter().cloned().collect();
    while let Some(g) = frontier.pop() {
        for b in base {
            if g.target() == b.source() {
                let h = concat(&g, b).unwrap();
                if seen.insert(h.clone()) {
                    frontier.push(h);
                }
            }
        }
    }
    seen
}

/// An integer point of `[0, bound]^vars` satisfying `store` but not `goal`.
pub fn grid_counterexample(
    store: &ConstraintStore,
    goal: &LinConstraint,
    vars: &[String],
    bound: i64,
) -> Option<BTreeMap<String, i64>> {
    let mut point = vec![0i64; vars.len()];
    loop {
        let assign = |v: &str| {
            vars.iter()
                .position(|x| x == v)
                .map(|i| point[i])
                .unwrap_or(0)
        };
        if store.holds(&assign) && !goal.holds(&assign) {
            return Some(vars.iter().cloned().zip(point.iter().copied()).collect());
        }
        let mut i = 0;
        loop {
            if i == point.len() {
                return None;
            }
            point[i] += 1;
            if point[i] <= bound {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

/// Answers as canonical tuples, sorted, so runs that differ only in
/// variable names and answer order compare equal.
pub fn normalized_answers(r: &QueryResult, vars: &[String]) -> Vec<Term> {
    let mut out: Vec<Term> = r
        .answers
        .iter()
        .map(|s| {
            let tuple = Term::app("ans", vars.iter().map(|v| Term::var(v.clone())).collect());
            s.apply(&tuple).canonical("A")
        })
        .collect();
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// DOT grammar check (graph, subgraph, node, edge and attribute statements;
// ports are not needed).

#[derive(Debug, Clone, PartialEq)]
enum DotTok {
    Id(String),
    Sym(char),
    Arrow(&'static str),
}

fn dot_lex(s: &str) -> Result<Vec<DotTok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && cs.get(i + 1) == Some(&'/') || c == '#' {
            while i < cs.len() && cs[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && cs.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < cs.len() && !(cs[i] == '*' && cs[i + 1] == '/') {
                i += 1;
            }
            if i + 1 >= cs.len() {
                return Err("unterminated comment".into());
            }
            i += 2;
        } else if c == '-' && cs.get(i + 1) == Some(&'>') {
            out.push(DotTok::Arrow("->"));
            i += 2;
        } else if c == '-' && cs.get(i + 1) == Some(&'-') {
            out.push(DotTok::Arrow("--"));
            i += 2;
        } else if "{}[]=;,:".contains(c) {
            out.push(DotTok::Sym(c));
            i += 1;
        } else if c == '"' {
            let mut v = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if i + 1 < cs.len() => {
                        v.push(cs[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        v.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(DotTok::Id(v));
        } else if c == '<' {
            let mut depth = 0;
            let start = i;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated HTML string".into()),
                    Some('<') => depth += 1,
                    Some('>') => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            i += 1;
            out.push(DotTok::Id(cs[start..i].iter().collect()));
        } else if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let start = i;
            let numeral = c.is_ascii_digit() || c == '.' || c == '-';
            while i < cs.len()
                && (if numeral {
                    cs[i].is_ascii_digit() || cs[i] == '.' || (i == start && cs[i] == '-')
                } else {
                    cs[i].is_alphanumeric() || cs[i] == '_'
                })
            {
                i += 1;
            }
            out.push(DotTok::Id(cs[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct DotParser {
    toks: Vec<DotTok>,
    pos: usize,
    edgeop: &'static str,
}

impl DotParser {
    fn peek(&self) -> Option<&DotTok> {
        self.toks.get(self.pos)
    }

    fn keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(DotTok::Id(s)) if s.eq_ignore_ascii_case(k))
    }

    fn sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&DotTok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.sym(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}` at token {}, found {:?}", self.pos, self.peek()))
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(DotTok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(format!("expected an ID at token {}, found {other:?}", self.pos)),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        if self.keyword("strict") {
            self.pos += 1;
        }
        if self.keyword("digraph") {
            self.edgeop = "->";
        } else if self.keyword("graph") {
            self.edgeop = "--";
        } else {
            return Err("expected `graph` or `digraph`".into());
        }
        self.pos += 1;
        if !matches!(self.peek(), Some(DotTok::Sym('{'))) {
            self.id()?;
        }
        self.block()?;
        if self.pos != self.toks.len() {
            return Err("trailing input after graph".into());
        }
        Ok(())
    }

    fn block(&mut self) -> Result<(), String> {
        self.expect('{')?;
        while !self.sym('}') {
            if self.peek().is_none() {
                return Err("unterminated block".into());
            }
            self.stmt()?;
            self.sym(';');
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<(), String> {
        while self.sym('[') {
            while !self.sym(']') {
                self.id()?;
                self.expect('=')?;
                self.id()?;
                if !self.sym(',') {
                    self.sym(';');
                }
            }
        }
        Ok(())
    }

    fn subgraph_or_node(&mut self) -> Result<(), String> {
        if self.keyword("subgraph") {
            self.pos += 1;
            if !matches!(self.peek(), Some(DotTok::Sym('{'))) {
                self.id()?;
            }
            self.block()
        } else if matches!(self.peek(), Some(DotTok::Sym('{'))) {
            self.block()
        } else {
            self.id()?;
            if self.sym(':') {
                self.id()?;
                if self.sym(':') {
                    self.id()?;
                }
            }
            Ok(())
        }
    }

    fn stmt(&mut self) -> Result<(), String> {
        if self.keyword("graph") || self.keyword("node") || self.keyword("edge") {
            self.pos += 1;
            return self.attr_list();
        }
        let is_assign = matches!(self.peek(), Some(DotTok::Id(_)))
            && self.toks.get(self.pos + 1) == Some(&DotTok::Sym('='));
        if is_assign {
            self.id()?;
            self.expect('=')?;
            self.id()?;
            return Ok(());
        }
        self.subgraph_or_node()?;
        while let Some(DotTok::Arrow(op)) = self.peek() {
            if *op != self.edgeop {
                return Err(format!("edge operator `{op}` in a graph using `{}`", self.edgeop));
            }
            self.pos += 1;
            self.subgraph_or_node()?;
        }
        self.attr_list()
    }
}

/// Checks `text` against the DOT language grammar.
pub fn check_dot(text: &str) -> Result<(), String> {
    let mut p = DotParser {
        toks: dot_lex(text)?,
        pos: 0,
        edgeop: "->",
    };
    p.graph()
}

// ---------------------------------------------------------------------------
// JSON Schema check for the keyword subset used by the published schema:
// type, properties, required, additionalProperties, items, enum, const,
// minimum, minItems, oneOf and local `$ref`s.

pub fn validate_json(schema: &Value, doc: &Value) -> Result<(), String> {
    validate_at(schema, schema, doc, "$")
}

fn resolve<'a>(root: &'a Value, s: &'a Value) -> Result<&'a Value, String> {
    match s.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let ptr = r.strip_prefix('#').ok_or_else(|| format!("non-local $ref {r}"))?;
            root.pointer(ptr).ok_or_else(|| format!("unresolved $ref {r}"))
        }
        None => Ok(s),
    }
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_u64() || v.is_i64(),
        "number" => v.is_number(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

fn validate_at(root: &Value, schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    let s = resolve(root, schema)?;
    if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
        let ok = alts
            .iter()
            .filter(|a| validate_at(root, a, v, path).is_ok())
            .count();
        if ok != 1 {
            return Err(format!("{path}: matches {ok} oneOf alternatives"));
        }
    }
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_matches(t, v),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_matches(t, v)),
            _ => return Err(format!("{path}: bad type keyword")),
        };
        if !ok {
            return Err(format!("{path}: expected type {t}, found {v}"));
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return Err(format!("{path}: expected {c}, found {v}"));
        }
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{path}: {v} not in enum"));
        }
    }
    if let (Some(m), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < m {
            return Err(format!("{path}: {x} below minimum {m}"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(req) = s.get("required").and_then(Value::as_array) {
            for r in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(r) {
                    return Err(format!("{path}: missing required `{r}`"));
                }
            }
        }
        for (k, x) in obj {
            let sub = format!("{path}.{k}");
            match props.and_then(|p| p.get(k)) {
                Some(ps) => validate_at(root, ps, x, &sub)?,
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{path}: unexpected `{k}`")),
                    Some(ap @ Value::Object(_)) => validate_at(root, ap, x, &sub)?,
                    _ => {}
                },
            }
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(m) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < m {
                return Err(format!("{path}: fewer than {m} items"));
            }
        }
        if let Some(is) = s.get("items") {
            for (i, x) in items.iter().enumerate() {
                validate_at(root, is, x, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}
