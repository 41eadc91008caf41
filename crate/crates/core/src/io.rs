//! Line-oriented model files and exact rational rendering.
//!
//! One model per file. The first content line names the kind and the model;
//! the remaining directives may come in any order. `#` starts a comment,
//! blank lines are ignored. Serialization is canonical: fixed directive
//! order, single spaces, sorted bodies, trailing newline; parsing canonical
//! text and re-serializing reproduces it byte for byte.

use std::collections::BTreeSet;

use crate::alphabet::{Alphabet, EventId, EventSet, Label, EPS_TOKEN, FAULT_TOKEN};
use crate::cost::Rational;
use crate::error::{Error, Result};
use crate::game::{Player, WeightedGraphGame};
use crate::observer::{Observer, RawObserver};
use crate::plant::{Plant, StateId, Transition};
use crate::synthesis::{EvenNode, MostPermissiveObserver, OddNode};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelDocument {
    Plant(Plant),
    Observer(Observer),
    Mpo(MostPermissiveObserver),
    Game(WeightedGraphGame),
}

impl ModelDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelDocument::Plant(_) => "plant",
            ModelDocument::Observer(_) => "observer",
            ModelDocument::Mpo(_) => "mpo",
            ModelDocument::Game(_) => "game",
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Content lines: (1-based line number, whitespace-split tokens), comments
/// and blanks removed. Detects an explicit version stamp.
fn content_lines(text: &str) -> Result<Vec<(usize, Vec<&str>)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(rest) = raw.trim().strip_prefix('#') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("dynobs") && words.next() == Some("model") {
                if let Some(v) = words.next().and_then(|w| w.strip_prefix('v')) {
                    let v: u32 = v.parse().map_err(|_| err(line, "bad version stamp"))?;
                    if v > MODEL_VERSION {
                        return Err(err(line, format!("unsupported model version v{v}")));
                    }
                }
            }
            continue;
        }
        let body = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if !tokens.is_empty() {
            out.push((line, tokens));
        }
    }
    Ok(out)
}

/// Kind token of the first content line, without parsing the body.
pub fn sniff_kind(text: &str) -> Result<String> {
    let lines = content_lines(text)?;
    let &(line, ref tokens) = lines.first().ok_or_else(|| err(0, "empty model file"))?;
    match tokens[0] {
        k @ ("plant" | "observer" | "mpo" | "game") => Ok(k.to_string()),
        other => Err(err(line, format!("unknown directive `{other}`"))),
    }
}

struct Section<'a> {
    header_line: usize,
    name: String,
    lines: Vec<(usize, Vec<&'a str>)>,
}

fn split_header<'a>(text: &'a str, kind: &str) -> Result<Section<'a>> {
    let mut lines = content_lines(text)?;
    if lines.is_empty() {
        return Err(err(0, "empty model file"));
    }
    let (header_line, header) = lines.remove(0);
    if header[0] != kind {
        return Err(err(
            header_line,
            format!("expected a {kind} file, found `{}`", header[0]),
        ));
    }
    if header.len() != 2 {
        return Err(err(header_line, format!("usage: {kind} <name>")));
    }
    Ok(Section {
        header_line,
        name: header[1].to_string(),
        lines,
    })
}

/// Collect the single occurrence of a directive, or None.
fn take_one<'a>(
    lines: &[(usize, Vec<&'a str>)],
    directive: &str,
) -> Result<Option<(usize, Vec<&'a str>)>> {
    let mut found: Option<(usize, Vec<&'a str>)> = None;
    for (line, tokens) in lines {
        if tokens[0] == directive {
            if found.is_some() {
                return Err(err(*line, format!("duplicate `{directive}` directive")));
            }
            found = Some((*line, tokens[1..].to_vec()));
        }
    }
    Ok(found)
}

fn take_all<'a>(lines: &[(usize, Vec<&'a str>)], directive: &str) -> Vec<(usize, Vec<&'a str>)> {
    lines
        .iter()
        .filter(|(_, t)| t[0] == directive)
        .map(|(l, t)| (*l, t[1..].to_vec()))
        .collect()
}

fn reject_unknown(lines: &[(usize, Vec<&str>)], known: &[&str]) -> Result<()> {
    for (line, tokens) in lines {
        if !known.contains(&tokens[0]) {
            return Err(err(*line, format!("unknown directive `{}`", tokens[0])));
        }
    }
    Ok(())
}

fn parse_alphabet(sec: &Section) -> Result<Alphabet> {
    let names: Vec<String> = match take_one(&sec.lines, "alphabet")? {
        Some((_, tokens)) => tokens.iter().map(|s| s.to_string()).collect(),
        None => Vec::new(),
    };
    Alphabet::new(names)
}

struct StateTable {
    names: Vec<String>,
}

impl StateTable {
    fn parse(sec: &Section) -> Result<StateTable> {
        let mut names = Vec::new();
        let mut seen = BTreeSet::new();
        for (line, tokens) in take_all(&sec.lines, "states") {
            for t in tokens {
                if !seen.insert(t.to_string()) {
                    return Err(err(line, format!("duplicate state `{t}`")));
                }
                names.push(t.to_string());
            }
        }
        Ok(StateTable { names })
    }

    fn id(&self, line: usize, name: &str) -> Result<StateId> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| err(line, format!("unknown state `{name}`")))
    }
}

fn parse_initial(sec: &Section, states: &StateTable) -> Result<StateId> {
    match take_one(&sec.lines, "initial")? {
        Some((line, tokens)) => {
            if tokens.len() != 1 {
                return Err(err(line, "usage: initial <state>"));
            }
            states.id(line, tokens[0])
        }
        None => Err(err(sec.header_line, "missing `initial` directive")),
    }
}

fn event_id(alphabet: &Alphabet, line: usize, token: &str) -> Result<EventId> {
    alphabet
        .id(token)
        .ok_or_else(|| err(line, format!("unknown event `{token}`")))
}

pub fn parse_plant(text: &str) -> Result<Plant> {
    let sec = split_header(text, "plant")?;
    reject_unknown(&sec.lines, &["alphabet", "states", "initial", "trans"])?;
    let alphabet = parse_alphabet(&sec)?;
    let states = StateTable::parse(&sec)?;
    let initial = parse_initial(&sec, &states)?;
    let mut transitions = Vec::new();
    for (line, tokens) in take_all(&sec.lines, "trans") {
        let [src, label, dst] = tokens[..] else {
            return Err(err(line, "usage: trans <src> <label> <dst>"));
        };
        let label = match label {
            EPS_TOKEN => Label::Epsilon,
            FAULT_TOKEN => Label::Fault,
            name => Label::Event(event_id(&alphabet, line, name)?),
        };
        transitions.push(Transition {
            src: states.id(line, src)?,
            label,
            dst: states.id(line, dst)?,
        });
    }
    Plant::new(sec.name, alphabet, states.names, initial, transitions)
}

/// Observer file down to its raw parts, before determinism and stutter
/// checks; `validate` reports defects from here.
pub fn parse_raw_observer(text: &str) -> Result<RawObserver> {
    let sec = split_header(text, "observer")?;
    reject_unknown(
        &sec.lines,
        &["alphabet", "states", "initial", "watch", "trans"],
    )?;
    let alphabet = parse_alphabet(&sec)?;
    let states = StateTable::parse(&sec)?;
    let initial = parse_initial(&sec, &states)?;
    let mut watch = vec![EventSet::EMPTY; states.names.len()];
    let mut watched_line = vec![None; states.names.len()];
    for (line, tokens) in take_all(&sec.lines, "watch") {
        let Some((state, events)) = tokens.split_first() else {
            return Err(err(line, "usage: watch <state> [events...]"));
        };
        let s = states.id(line, state)?;
        if watched_line[s].replace(line).is_some() {
            return Err(err(line, format!("duplicate watch line for `{state}`")));
        }
        for e in events {
            watch[s] = watch[s].with(event_id(&alphabet, line, e)?);
        }
    }
    let mut transitions = Vec::new();
    for (line, tokens) in take_all(&sec.lines, "trans") {
        let [src, label, dst] = tokens[..] else {
            return Err(err(line, "usage: trans <src> <event> <dst>"));
        };
        if label == EPS_TOKEN || label == FAULT_TOKEN {
            return Err(err(line, "observers move on observable events only"));
        }
        transitions.push((
            states.id(line, src)?,
            event_id(&alphabet, line, label)?,
            states.id(line, dst)?,
        ));
    }
    Ok(RawObserver {
        name: sec.name,
        alphabet,
        states: states.names,
        initial,
        watch,
        transitions,
    })
}

pub fn parse_observer(text: &str) -> Result<Observer> {
    parse_raw_observer(text)?.build()
}

pub fn parse_mpo(text: &str) -> Result<MostPermissiveObserver> {
    let sec = split_header(text, "mpo")?;
    reject_unknown(
        &sec.lines,
        &["alphabet", "k", "evens", "odds", "initial", "choice", "obs"],
    )?;
    let alphabet = parse_alphabet(&sec)?;
    let number = |d: &str| -> Result<usize> {
        match take_one(&sec.lines, d)? {
            Some((line, tokens)) => match tokens[..] {
                [n] => n.parse().map_err(|_| err(line, format!("bad `{d}` count"))),
                _ => Err(err(line, format!("usage: {d} <count>"))),
            },
            None => Err(err(sec.header_line, format!("missing `{d}` directive"))),
        }
    };
    let k = number("k")? as u32;
    let n_even = number("evens")?;
    let n_odd = number("odds")?;
    let initial = number("initial")?;
    if initial >= n_even {
        return Err(err(sec.header_line, "initial choice node out of range"));
    }
    let mut evens: Vec<EvenNode> = vec![
        EvenNode {
            choices: Vec::new()
        };
        n_even
    ];
    let mut odds: Vec<OddNode> = vec![
        OddNode {
            watch: EventSet::EMPTY,
            obs: Vec::new(),
        };
        n_odd
    ];
    let mut odd_owner = vec![false; n_odd];
    for (line, tokens) in take_all(&sec.lines, "choice") {
        let Some((&e, rest)) = tokens.split_first() else {
            return Err(err(line, "usage: choice <even> <odd> [events...]"));
        };
        let Some((&o, events)) = rest.split_first() else {
            return Err(err(line, "usage: choice <even> <odd> [events...]"));
        };
        let e: usize = e.parse().map_err(|_| err(line, "bad choice-node index"))?;
        let o: usize = o.parse().map_err(|_| err(line, "bad wait-node index"))?;
        if e >= n_even {
            return Err(err(line, format!("choice node {e} out of range")));
        }
        if o >= n_odd {
            return Err(err(line, format!("wait node {o} out of range")));
        }
        if odd_owner[o] {
            return Err(err(line, format!("wait node {o} already assigned")));
        }
        odd_owner[o] = true;
        let mut x = EventSet::EMPTY;
        for t in events {
            x = x.with(event_id(&alphabet, line, t)?);
        }
        odds[o].watch = x;
        evens[e].choices.push((x, o));
    }
    if let Some(o) = odd_owner.iter().position(|&b| !b) {
        return Err(err(
            sec.header_line,
            format!("wait node {o} has no choice line"),
        ));
    }
    for (line, tokens) in take_all(&sec.lines, "obs") {
        let [o, ev, e2] = tokens[..] else {
            return Err(err(line, "usage: obs <odd> <event> <even>"));
        };
        let o: usize = o.parse().map_err(|_| err(line, "bad wait-node index"))?;
        let e2: usize = e2.parse().map_err(|_| err(line, "bad choice-node index"))?;
        if o >= n_odd {
            return Err(err(line, format!("wait node {o} out of range")));
        }
        if e2 >= n_even {
            return Err(err(line, format!("choice node {e2} out of range")));
        }
        let ev = event_id(&alphabet, line, ev)?;
        if odds[o].obs.iter().any(|&(x, _)| x == ev) {
            return Err(err(
                line,
                format!("duplicate observation for wait node {o}"),
            ));
        }
        odds[o].obs.push((ev, e2));
    }
    Ok(MostPermissiveObserver {
        name: sec.name,
        alphabet,
        k,
        evens,
        odds,
        initial,
    })
}

pub fn parse_game(text: &str) -> Result<WeightedGraphGame> {
    let sec = split_header(text, "game")?;
    reject_unknown(&sec.lines, &["vertex", "source", "edge"])?;
    let mut names: Vec<String> = Vec::new();
    let mut owner: Vec<Player> = Vec::new();
    for (line, tokens) in take_all(&sec.lines, "vertex") {
        let [name, side] = tokens[..] else {
            return Err(err(line, "usage: vertex <name> <max|min>"));
        };
        if names.iter().any(|n| n == name) {
            return Err(err(line, format!("duplicate vertex `{name}`")));
        }
        names.push(name.to_string());
        owner.push(match side {
            "max" => Player::Max,
            "min" => Player::Min,
            other => return Err(err(line, format!("unknown side `{other}`"))),
        });
    }
    let index = |line: usize, name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| err(line, format!("unknown vertex `{name}`")))
    };
    let source = match take_one(&sec.lines, "source")? {
        Some((line, tokens)) => match tokens[..] {
            [v] => index(line, v)?,
            _ => return Err(err(line, "usage: source <vertex>")),
        },
        None => return Err(err(sec.header_line, "missing `source` directive")),
    };
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); names.len()];
    for (line, tokens) in take_all(&sec.lines, "edge") {
        let [u, v, w] = tokens[..] else {
            return Err(err(line, "usage: edge <from> <to> <weight>"));
        };
        let w: i64 = w.parse().map_err(|_| err(line, "bad edge weight"))?;
        adj[index(line, u)?].push((index(line, v)?, w));
    }
    WeightedGraphGame::new(names, owner, adj, source)
}

pub fn parse_model(text: &str) -> Result<ModelDocument> {
    match sniff_kind(text)?.as_str() {
        "plant" => Ok(ModelDocument::Plant(parse_plant(text)?)),
        "observer" => Ok(ModelDocument::Observer(parse_observer(text)?)),
        "mpo" => Ok(ModelDocument::Mpo(parse_mpo(text)?)),
        _ => Ok(ModelDocument::Game(parse_game(text)?)),
    }
}

fn push_header(out: &mut String, kind: &str, name: &str, alphabet: Option<&Alphabet>) {
    out.push_str(&format!("# dynobs model v{MODEL_VERSION}\n{kind} {name}\n"));
    if let Some(al) = alphabet {
        out.push_str("alphabet");
        for n in al.names() {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
    }
}

fn label_token(alphabet: &Alphabet, label: Label) -> String {
    match label {
        Label::Event(e) => alphabet.name(e).to_string(),
        Label::Epsilon => EPS_TOKEN.to_string(),
        Label::Fault => FAULT_TOKEN.to_string(),
    }
}

pub fn serialize_plant(plant: &Plant) -> String {
    let mut out = String::new();
    push_header(&mut out, "plant", plant.name(), Some(plant.alphabet()));
    out.push_str("states");
    for n in plant.state_names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    out.push_str(&format!("initial {}\n", plant.state_name(plant.initial())));
    for t in plant.transitions() {
        out.push_str(&format!(
            "trans {} {} {}\n",
            plant.state_name(t.src),
            label_token(plant.alphabet(), t.label),
            plant.state_name(t.dst),
        ));
    }
    out
}

pub fn serialize_observer(obs: &Observer) -> String {
    let mut out = String::new();
    push_header(&mut out, "observer", obs.name(), Some(obs.alphabet()));
    out.push_str("states");
    for n in obs.state_names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    out.push_str(&format!("initial {}\n", obs.state_name(obs.initial())));
    for s in 0..obs.num_states() {
        out.push_str(&format!("watch {}", obs.state_name(s)));
        for e in obs.watch(s).iter() {
            out.push(' ');
            out.push_str(obs.alphabet().name(e));
        }
        out.push('\n');
    }
    for s in 0..obs.num_states() {
        for e in obs.watch(s).iter() {
            out.push_str(&format!(
                "trans {} {} {}\n",
                obs.state_name(s),
                obs.alphabet().name(e),
                obs.state_name(obs.step(s, e)),
            ));
        }
    }
    out
}

pub fn serialize_mpo(mpo: &MostPermissiveObserver) -> String {
    let mut out = String::new();
    push_header(&mut out, "mpo", &mpo.name, Some(&mpo.alphabet));
    out.push_str(&format!("k {}\n", mpo.k));
    out.push_str(&format!("evens {}\n", mpo.evens.len()));
    out.push_str(&format!("odds {}\n", mpo.odds.len()));
    out.push_str(&format!("initial {}\n", mpo.initial));
    for (e, node) in mpo.evens.iter().enumerate() {
        for &(x, o) in &node.choices {
            out.push_str(&format!("choice {e} {o}"));
            for ev in x.iter() {
                out.push(' ');
                out.push_str(mpo.alphabet.name(ev));
            }
            out.push('\n');
        }
    }
    for (o, node) in mpo.odds.iter().enumerate() {
        for &(ev, e2) in &node.obs {
            out.push_str(&format!("obs {o} {} {e2}\n", mpo.alphabet.name(ev)));
        }
    }
    out
}

pub fn serialize_game(game: &WeightedGraphGame) -> String {
    let mut out = String::new();
    push_header(&mut out, "game", "game", None);
    let mut fixed = String::new();
    for v in 0..game.len() {
        let side = match game.owner(v) {
            Player::Max => "max",
            Player::Min => "min",
        };
        fixed.push_str(&format!("vertex {} {side}\n", game.name(v)));
    }
    out.push_str(&fixed);
    out.push_str(&format!("source {}\n", game.name(game.source())));
    for v in 0..game.len() {
        for &(u, w) in game.edges(v) {
            out.push_str(&format!("edge {} {} {w}\n", game.name(v), game.name(u)));
        }
    }
    out
}

pub fn serialize_model(model: &ModelDocument) -> String {
    match model {
        ModelDocument::Plant(p) => serialize_plant(p),
        ModelDocument::Observer(o) => serialize_observer(o),
        ModelDocument::Mpo(m) => serialize_mpo(m),
        ModelDocument::Game(g) => serialize_game(g),
    }
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        line: 0,
        msg: format!("`{s}` is not a rational (use p or p/q)"),
    };
    match s.split_once('/') {
        None => {
            let n: i64 = s.trim().parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Renders exactly: integers bare, everything else as `p/q`.
pub fn render_rational(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
