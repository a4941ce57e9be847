//! JSON expression grammar for symbols.
//!
//! `{"kind":"mobius","a":[re,im],"b":[..],"c":[..],"d":[..]}`,
//! `{"kind":"poly","coeffs":[[re,im],..]}`, `{"kind":"exp","arg":..}`,
//! `{"kind":"product","left":..,"right":..}`, `{"kind":"scale","factor":[re,im],"arg":..}`,
//! `{"kind":"kernel","w":[re,im]}`, `{"kind":"const","value":[re,im]}`,
//! `{"kind":"sum","terms":[..]}`, `{"kind":"compose","outer":..,"inner":..}`,
//! `{"kind":"iterate","map":..,"n":k}`, `{"kind":"log","arg":..}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::expr::{Node, Symbol};
use super::mobius::MobiusMap;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Repr {
    Mobius { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    Poly { coeffs: Vec<Complex64> },
    Exp { arg: Box<Repr> },
    Product { left: Box<Repr>, right: Box<Repr> },
    Scale { factor: Complex64, arg: Box<Repr> },
    Kernel { w: Complex64 },
    Const { value: Complex64 },
    Sum { terms: Vec<Repr> },
    Compose { outer: Box<Repr>, inner: Box<Repr> },
    Iterate { map: Box<Repr>, n: usize },
    Log { arg: Box<Repr> },
}

impl From<&Symbol> for Repr {
    fn from(s: &Symbol) -> Self {
        match s.node() {
            Node::Mobius(m) => {
                let [a, b, c, d] = m.coefficients();
                Repr::Mobius { a, b, c, d }
            }
            Node::Poly(p) => Repr::Poly { coeffs: p.clone() },
            Node::Exp(u) => Repr::Exp { arg: Box::new(u.into()) },
            Node::Product(l, r) => Repr::Product { left: Box::new(l.into()), right: Box::new(r.into()) },
            Node::Scale(k, a) => Repr::Scale { factor: *k, arg: Box::new(a.into()) },
            Node::Kernel(w) => Repr::Kernel { w: *w },
            Node::Const(v) => Repr::Const { value: *v },
            Node::Sum(t) => Repr::Sum { terms: t.iter().map(Repr::from).collect() },
            Node::Compose { outer, inner } => {
                Repr::Compose { outer: Box::new(outer.into()), inner: Box::new(inner.into()) }
            }
            Node::Iterate { map, n } => Repr::Iterate { map: Box::new(map.into()), n: *n },
            Node::Log { arg, .. } => Repr::Log { arg: Box::new(arg.into()) },
        }
    }
}

impl TryFrom<Repr> for Symbol {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Symbol> {
        Ok(match r {
            Repr::Mobius { a, b, c, d } => Symbol::mobius(MobiusMap::new(a, b, c, d)?),
            Repr::Poly { coeffs } => Symbol::poly(coeffs),
            Repr::Exp { arg } => Symbol::exp(Symbol::try_from(*arg)?),
            Repr::Product { left, right } => {
                Symbol::product(Symbol::try_from(*left)?, Symbol::try_from(*right)?)
            }
            Repr::Scale { factor, arg } => Symbol::scale(factor, Symbol::try_from(*arg)?),
            Repr::Kernel { w } => Symbol::kernel(w)?,
            Repr::Const { value } => Symbol::constant(value),
            Repr::Sum { terms } => {
                Symbol::sum(terms.into_iter().map(Symbol::try_from).collect::<Result<_>>()?)
            }
            Repr::Compose { outer, inner } => {
                Symbol::compose(Symbol::try_from(*outer)?, Symbol::try_from(*inner)?)?
            }
            Repr::Iterate { map, n } => Symbol::iterate_lazy(Symbol::try_from(*map)?, n),
            Repr::Log { arg } => log_node(Symbol::try_from(*arg)?)?,
        })
    }
}

// `Symbol::log` collapses log∘exp; a serialized log node must stay a log node.
fn log_node(arg: Symbol) -> Result<Symbol> {
    if let Node::Exp(_) = arg.node() {
        return Err(Error::Parse("log of exp is stored as its argument".into()));
    }
    Symbol::log(arg)
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Repr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = Repr::deserialize(deserializer)?;
        Symbol::try_from(repr).map_err(serde::de::Error::custom)
    }
}

impl Symbol {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Symbol> {
        Ok(serde_json::from_str(s)?)
    }
}
