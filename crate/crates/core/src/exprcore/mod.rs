//! Exact symbolic expressions with a canonical rational normal form.

mod atom;
mod coord;
mod expr;
mod parse;
mod poly;
mod ratfunc;

use std::collections::BTreeSet;

pub use atom::{atom_by_name, atom_name, register_atom, AtomId};
pub use coord::{AtomApp, Coord, Var};
pub use expr::{Expr, Node};
pub use parse::{parse, parse_with};
pub use poly::{gcd, Monomial, Poly};
pub use ratfunc::CanonicalForm;

pub type Rational = num_rational::BigRational;

/// The set of coordinates an expression may reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    coords: BTreeSet<Coord>,
}

impl Chart {
    pub fn new(coords: impl IntoIterator<Item = Coord>) -> Self {
        Chart {
            coords: coords.into_iter().collect(),
        }
    }

    /// `t, x, u, sigma` and every `f`-jet up to `order`.
    pub fn jet(order: u32) -> Self {
        let mut coords = vec![Coord::T, Coord::X, Coord::U, Coord::Sigma];
        for n in 0..=order {
            for a in (0..=n).rev() {
                coords.push(Coord::Jet(a as u8, (n - a) as u8));
            }
        }
        Chart::new(coords)
    }

    /// The jet chart extended by the symbolic `phi` family up to its
    /// `phi_order`-th derivative.
    pub fn jet_with_phi(order: u32, phi_order: u8) -> Self {
        let mut c = Chart::jet(order);
        c.coords.extend((0..=phi_order).map(Coord::Phi));
        c
    }

    /// `t, x, u` with the second-order jet of `u` over `(t, x)`.
    pub fn point_jet() -> Self {
        Chart::new([
            Coord::T,
            Coord::X,
            Coord::U,
            Coord::Ut,
            Coord::Ux,
            Coord::Utt,
            Coord::Utx,
            Coord::Uxx,
        ])
    }

    pub fn contains(&self, c: Coord) -> bool {
        self.coords.contains(&c)
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coords.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn union(&self, other: &Chart) -> Chart {
        Chart {
            coords: self.coords.union(&other.coords).copied().collect(),
        }
    }
}

/// Shorthand for `Rational::from_integer`.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Shorthand for the rational `p/q`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

#[cfg(test)]
mod tests;
