use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::atom::{atom_name, AtomId};
use super::ratfunc::CanonicalForm;

/// A named coordinate of the ambient chart.
///
/// The chart is the union of the `f`-jet over `(u, sigma)` with passengers
/// `(t, x)`, the symbolic family `phi(u)` and its derivatives, and the
/// second-order jet of `u` over `(t, x)` used when inducing generators from
/// point actions. `Slot` is the placeholder used by atom derivative rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    T,
    X,
    U,
    Sigma,
    /// `f` differentiated `a` times by `u` and `b` times by `sigma`.
    Jet(u8, u8),
    /// `phi` differentiated `n` times by `u`.
    Phi(u8),
    Ut,
    Ux,
    Utt,
    Utx,
    Uxx,
    Slot,
}

impl Coord {
    pub const F: Coord = Coord::Jet(0, 0);

    fn sort_key(self) -> (u8, u32, u32) {
        match self {
            Coord::T => (0, 0, 0),
            Coord::X => (1, 0, 0),
            Coord::U => (2, 0, 0),
            Coord::Sigma => (3, 0, 0),
            // total order first, then more u-derivatives first
            Coord::Jet(a, b) => (4, a as u32 + b as u32, 255 - a as u32),
            Coord::Phi(n) => (5, n as u32, 0),
            Coord::Ut => (6, 0, 0),
            Coord::Ux => (6, 1, 0),
            Coord::Utt => (6, 2, 0),
            Coord::Utx => (6, 3, 0),
            Coord::Uxx => (6, 4, 0),
            Coord::Slot => (7, 0, 0),
        }
    }

    /// Order of an `f`-jet coordinate; `None` for everything else.
    pub fn jet_order(self) -> Option<u32> {
        match self {
            Coord::Jet(a, b) => Some(a as u32 + b as u32),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            Coord::T => "t".into(),
            Coord::X => "x".into(),
            Coord::U => "u".into(),
            Coord::Sigma => "sigma".into(),
            Coord::Jet(0, 0) => "f".into(),
            Coord::Jet(a, b) => {
                format!("f_{}{}", "u".repeat(a as usize), "sigma".repeat(b as usize))
            }
            Coord::Phi(0) => "phi".into(),
            Coord::Phi(n) => format!("phi_{}", "u".repeat(n as usize)),
            Coord::Ut => "u_t".into(),
            Coord::Ux => "u_x".into(),
            Coord::Utt => "u_tt".into(),
            Coord::Utx => "u_tx".into(),
            Coord::Uxx => "u_xx".into(),
            Coord::Slot => "arg".into(),
        }
    }

    pub fn from_name(name: &str) -> Option<Coord> {
        let c = match name {
            "t" => Coord::T,
            "x" => Coord::X,
            "u" => Coord::U,
            "sigma" => Coord::Sigma,
            "f" => Coord::F,
            "phi" => Coord::Phi(0),
            "u_t" => Coord::Ut,
            "u_x" => Coord::Ux,
            "u_tt" => Coord::Utt,
            "u_tx" => Coord::Utx,
            "u_xx" => Coord::Uxx,
            _ => {
                if let Some(rest) = name.strip_prefix("f_") {
                    let a = rest.len() - rest.trim_start_matches('u').len();
                    let tail = &rest[a..];
                    if tail.len() % 5 != 0 || tail.is_empty() && a == 0 {
                        return None;
                    }
                    let b = tail.len() / 5;
                    if tail != "sigma".repeat(b) || a > 32 || b > 32 {
                        return None;
                    }
                    return Some(Coord::Jet(a as u8, b as u8));
                }
                if let Some(rest) = name.strip_prefix("phi_") {
                    if !rest.is_empty() && rest.bytes().all(|c| c == b'u') && rest.len() <= 32 {
                        return Some(Coord::Phi(rest.len() as u8));
                    }
                }
                return None;
            }
        };
        Some(c)
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An atom applied to a canonical argument, e.g. `exp(u)`.
///
/// Identity is by atom id and the printed canonical argument, so the same
/// application reached along different paths compares equal.
#[derive(Clone, Debug)]
pub struct AtomApp {
    pub id: AtomId,
    pub arg: Arc<CanonicalForm>,
    key: Arc<str>,
}

impl AtomApp {
    pub fn new(id: AtomId, arg: CanonicalForm) -> Self {
        let key: Arc<str> = arg.to_string().into();
        AtomApp {
            id,
            arg: Arc::new(arg),
            key,
        }
    }

    pub fn arg_string(&self) -> &str {
        &self.key
    }
}

impl PartialEq for AtomApp {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.key == other.key
    }
}

impl Eq for AtomApp {}

impl Hash for AtomApp {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
        self.key.hash(state);
    }
}

impl PartialOrd for AtomApp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomApp {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.id, &self.key).cmp(&(other.id, &other.key))
    }
}

impl fmt::Display for AtomApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", atom_name(self.id), self.key)
    }
}

/// A polynomial indeterminate: either a chart coordinate or an atom
/// application. Coordinates order before atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Coord(Coord),
    Atom(AtomApp),
}

impl From<Coord> for Var {
    fn from(c: Coord) -> Self {
        Var::Coord(c)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Coord(c) => c.fmt(f),
            Var::Atom(a) => a.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in [
            Coord::T,
            Coord::Sigma,
            Coord::F,
            Coord::Jet(1, 0),
            Coord::Jet(0, 2),
            Coord::Jet(1, 1),
            Coord::Jet(3, 2),
            Coord::Phi(0),
            Coord::Phi(3),
            Coord::Utx,
        ] {
            assert_eq!(Coord::from_name(&c.name()), Some(c));
        }
        assert_eq!(Coord::Jet(1, 1).name(), "f_usigma");
        assert_eq!(Coord::from_name("f_sigmau"), None);
        assert_eq!(Coord::from_name("f_"), None);
        assert_eq!(Coord::from_name("g"), None);
    }

    #[test]
    fn jet_order_follows_total_then_lex() {
        let mut v = vec![
            Coord::Jet(0, 2),
            Coord::Jet(1, 0),
            Coord::F,
            Coord::Jet(1, 1),
            Coord::Jet(0, 1),
            Coord::Jet(2, 0),
            Coord::Sigma,
            Coord::T,
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Coord::T,
                Coord::Sigma,
                Coord::F,
                Coord::Jet(1, 0),
                Coord::Jet(0, 1),
                Coord::Jet(2, 0),
                Coord::Jet(1, 1),
                Coord::Jet(0, 2),
            ]
        );
    }
}
