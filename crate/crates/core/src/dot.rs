//! Deterministic DOT export for every model kind.
//!
//! Node order follows state indices, edge order follows the stored
//! transition order, so the same model always renders the same bytes.

use crate::alphabet::Label;
use crate::game::{Player, WeightedGraphGame};
use crate::io::ModelDocument;
use crate::observer::Observer;
use crate::plant::Plant;
use crate::synthesis::MostPermissiveObserver;

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", esc(s))
}

/// Two-line DOT label: name above, annotation below.
fn stacked(top: &str, bottom: &str) -> String {
    format!("\"{}\\n{}\"", esc(top), esc(bottom))
}

fn label_text(label: Label, alphabet: &crate::alphabet::Alphabet) -> String {
    match label {
        Label::Event(e) => alphabet.name(e).to_string(),
        Label::Epsilon => "ε".to_string(),
        Label::Fault => "f".to_string(),
    }
}

pub fn plant_dot(plant: &Plant) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {} {{\n", quoted(plant.name())));
    out.push_str("  rankdir=LR;\n  __init [shape=point];\n");
    for name in plant.state_names() {
        out.push_str(&format!("  {} [shape=circle];\n", quoted(name)));
    }
    out.push_str(&format!(
        "  __init -> {};\n",
        quoted(plant.state_name(plant.initial()))
    ));
    for t in plant.transitions() {
        out.push_str(&format!(
            "  {} -> {} [label={}];\n",
            quoted(plant.state_name(t.src)),
            quoted(plant.state_name(t.dst)),
            quoted(&label_text(t.label, plant.alphabet())),
        ));
    }
    out.push_str("}\n");
    out
}

pub fn observer_dot(obs: &Observer) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {} {{\n", quoted(obs.name())));
    out.push_str("  rankdir=LR;\n  __init [shape=point];\n");
    for s in 0..obs.num_states() {
        out.push_str(&format!(
            "  {} [shape=circle, label={}];\n",
            quoted(obs.state_name(s)),
            stacked(obs.state_name(s), &obs.alphabet().fmt_set(obs.watch(s))),
        ));
    }
    out.push_str(&format!(
        "  __init -> {};\n",
        quoted(obs.state_name(obs.initial()))
    ));
    for s in 0..obs.num_states() {
        for e in obs.watch(s).iter() {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                quoted(obs.state_name(s)),
                quoted(obs.state_name(obs.step(s, e))),
                quoted(obs.alphabet().name(e)),
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Choice nodes are boxes, wait nodes are ellipses annotated with their
/// watch set; choice edges carry the watch set, observation edges the event.
pub fn mpo_dot(mpo: &MostPermissiveObserver) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {} {{\n", quoted(&mpo.name)));
    out.push_str("  rankdir=LR;\n  __init [shape=point];\n");
    for e in 0..mpo.evens.len() {
        out.push_str(&format!("  \"e{e}\" [shape=box, label=\"e{e}\"];\n"));
    }
    for (o, node) in mpo.odds.iter().enumerate() {
        out.push_str(&format!(
            "  \"o{o}\" [shape=ellipse, label={}];\n",
            stacked(&format!("o{o}"), &mpo.alphabet.fmt_set(node.watch)),
        ));
    }
    out.push_str(&format!("  __init -> \"e{}\";\n", mpo.initial));
    for (e, node) in mpo.evens.iter().enumerate() {
        for &(x, o) in &node.choices {
            out.push_str(&format!(
                "  \"e{e}\" -> \"o{o}\" [label={}];\n",
                quoted(&mpo.alphabet.fmt_set(x))
            ));
        }
    }
    for (o, node) in mpo.odds.iter().enumerate() {
        for &(ev, e2) in &node.obs {
            out.push_str(&format!(
                "  \"o{o}\" -> \"e{e2}\" [label={}];\n",
                quoted(mpo.alphabet.name(ev))
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Max vertices are boxes, Min vertices ellipses; edges carry weights.
pub fn game_dot(game: &WeightedGraphGame) -> String {
    let mut out = String::new();
    out.push_str("digraph game {\n  rankdir=LR;\n  __init [shape=point];\n");
    for v in 0..game.len() {
        let shape = match game.owner(v) {
            Player::Max => "box",
            Player::Min => "ellipse",
        };
        out.push_str(&format!("  {} [shape={shape}];\n", quoted(game.name(v))));
    }
    out.push_str(&format!(
        "  __init -> {};\n",
        quoted(game.name(game.source()))
    ));
    for v in 0..game.len() {
        for &(u, w) in game.edges(v) {
            out.push_str(&format!(
                "  {} -> {} [label=\"{w}\"];\n",
                quoted(game.name(v)),
                quoted(game.name(u)),
            ));
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(model: &ModelDocument) -> String {
    match model {
        ModelDocument::Plant(p) => plant_dot(p),
        ModelDocument::Observer(o) => observer_dot(o),
        ModelDocument::Mpo(m) => mpo_dot(m),
        ModelDocument::Game(g) => game_dot(g),
    }
}
