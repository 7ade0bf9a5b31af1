//! Registry of transcendental atoms such as `exp`.
//!
//! Each atom carries a derivative rule written as an expression in the
//! placeholder `arg`. Distinct atom applications are treated as algebraically
//! independent indeterminates: `exp(u)` and `exp(2*u)` are unrelated symbols,
//! and identities such as `sin(u)^2 + cos(u)^2 = 1` are not recognized.

use std::sync::{LazyLock, RwLock};

use super::expr::Expr;
use super::parse::parse_template;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u16);

#[derive(Clone, Debug)]
struct AtomDef {
    name: String,
    rule: Option<Expr>,
}

static REGISTRY: LazyLock<RwLock<Vec<AtomDef>>> = LazyLock::new(|| {
    let names = ["exp", "log", "sin", "cos"];
    let defs: Vec<AtomDef> = names
        .iter()
        .map(|n| AtomDef {
            name: n.to_string(),
            rule: None,
        })
        .collect();
    RwLock::new(defs)
});

fn builtin_rule(name: &str) -> Option<&'static str> {
    match name {
        "exp" => Some("exp(arg)"),
        "log" => Some("1/arg"),
        "sin" => Some("cos(arg)"),
        "cos" => Some("-sin(arg)"),
        _ => None,
    }
}

pub fn atom_by_name(name: &str) -> Option<AtomId> {
    let reg = REGISTRY.read().expect("atom registry poisoned");
    reg.iter()
        .position(|d| d.name == name)
        .map(|i| AtomId(i as u16))
}

pub fn atom_name(id: AtomId) -> String {
    let reg = REGISTRY.read().expect("atom registry poisoned");
    reg[id.0 as usize].name.clone()
}

/// Derivative of the atom with respect to its argument, in the placeholder
/// `arg`.
pub fn atom_rule(id: AtomId) -> Expr {
    {
        let reg = REGISTRY.read().expect("atom registry poisoned");
        if let Some(rule) = &reg[id.0 as usize].rule {
            return rule.clone();
        }
    }
    let name = atom_name(id);
    let text = builtin_rule(&name).expect("non-builtin atoms are registered with a rule");
    let rule = parse_template(text).expect("builtin rules parse");
    let mut reg = REGISTRY.write().expect("atom registry poisoned");
    reg[id.0 as usize].rule = Some(rule.clone());
    rule
}

/// Registers a new atom. The rule may reference `arg` and any atom already
/// registered (including the new one).
pub fn register_atom(name: &str, rule: &str) -> Result<AtomId> {
    if name.is_empty()
        || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        || !name.chars().all(|c| c.is_ascii_alphanumeric())
    {
        return Err(Error::InvalidArgument(format!("bad atom name `{name}`")));
    }
    if super::coord::Coord::from_name(name).is_some() {
        return Err(Error::InvalidArgument(format!("`{name}` is a coordinate")));
    }
    if let Some(id) = atom_by_name(name) {
        return Ok(id);
    }
    let id = {
        let mut reg = REGISTRY.write().expect("atom registry poisoned");
        reg.push(AtomDef {
            name: name.to_string(),
            rule: None,
        });
        AtomId((reg.len() - 1) as u16)
    };
    match parse_template(rule) {
        Ok(expr) => {
            let mut reg = REGISTRY.write().expect("atom registry poisoned");
            reg[id.0 as usize].rule = Some(expr);
            Ok(id)
        }
        Err(e) => {
            // leave the name reserved with a zero rule so ids stay stable
            let mut reg = REGISTRY.write().expect("atom registry poisoned");
            reg[id.0 as usize].rule = Some(Expr::zero());
            Err(e)
        }
    }
}
