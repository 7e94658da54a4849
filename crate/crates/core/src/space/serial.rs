//! JSON documents for the function representations.
//!
//! Multi-indices are integer arrays and complex numbers `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CoherentState, MixedState, MultiIndex, PolyFunction, SpaceParams, State};
use crate::geometry::Point;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub m: MultiIndex,
    pub c: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateDoc {
    Poly { params: SpaceParams, coeffs: Vec<CoeffEntry> },
    Coherent { params: SpaceParams, z0: Point, theta: f64 },
    Mixed { params: SpaceParams, weights: Vec<f64>, states: Vec<Vec<CoeffEntry>> },
}

fn entries(f: &PolyFunction) -> Vec<CoeffEntry> {
    f.coeffs().iter().map(|(m, c)| CoeffEntry { m: m.clone(), c: [c.re, c.im] }).collect()
}

fn poly_from(params: &SpaceParams, coeffs: Vec<CoeffEntry>) -> Result<PolyFunction> {
    let cap = coeffs.iter().map(|e| e.m.degree()).max().unwrap_or(0).max(params.degree_cap());
    PolyFunction::new(
        params.with_degree_cap(cap),
        coeffs.into_iter().map(|e| (e.m, Complex64::new(e.c[0], e.c[1]))),
    )
}

impl From<&State> for StateDoc {
    fn from(s: &State) -> Self {
        match s {
            State::Poly(f) => StateDoc::Poly { params: f.params().clone(), coeffs: entries(f) },
            State::Coherent(c) => {
                StateDoc::Coherent { params: c.params().clone(), z0: c.center().clone(), theta: c.theta() }
            }
            State::Mixed(m) => StateDoc::Mixed {
                params: m.params().clone(),
                weights: m.weights().to_vec(),
                states: m.states().iter().map(entries).collect(),
            },
        }
    }
}

impl TryFrom<StateDoc> for State {
    type Error = Error;

    fn try_from(doc: StateDoc) -> Result<Self> {
        match doc {
            StateDoc::Poly { params, coeffs } => Ok(State::Poly(poly_from(&params, coeffs)?)),
            StateDoc::Coherent { params, z0, theta } => Ok(State::Coherent(CoherentState::new(params, z0, theta)?)),
            StateDoc::Mixed { params, weights, states } => {
                let states = states.into_iter().map(|c| poly_from(&params, c)).collect::<Result<Vec<_>>>()?;
                Ok(State::Mixed(MixedState::new(weights, states)?))
            }
        }
    }
}

impl State {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<State> {
        let doc: StateDoc = serde_json::from_str(s)?;
        State::try_from(doc)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn documented_shape() {
        let p = SpaceParams::new(1, 2.0).unwrap();
        let f = PolyFunction::new(p.clone(), [(MultiIndex::new(vec![1]), c(0.5, -1.0))]).unwrap();
        let s = State::Poly(f).to_json().unwrap();
        assert_eq!(s, r#"{"kind":"poly","params":{"n":1,"alpha":2.0},"coeffs":[{"m":[1],"c":[0.5,-1.0]}]}"#);
        let cs = CoherentState::new(p, Point::new(vec![c(0.25, 0.5)]).unwrap(), 0.125).unwrap();
        let s = State::Coherent(cs).to_json().unwrap();
        assert_eq!(s, r#"{"kind":"coherent","params":{"n":1,"alpha":2.0},"z0":[[0.25,0.5]],"theta":0.125}"#);
    }

    #[test]
    fn mixed_round_trip() {
        let p = SpaceParams::new(2, 3.0).unwrap();
        let a = PolyFunction::constant(p.clone(), c(1.0, 0.0));
        let b = PolyFunction::new(p, [(MultiIndex::new(vec![0, 1]), c(0.0, 3.0))]).unwrap();
        let m = State::Mixed(MixedState::new(vec![0.3, 0.7], vec![a, b]).unwrap());
        let back = State::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_invalid_documents() {
        assert!(State::from_json(r#"{"kind":"poly","params":{"n":1,"alpha":0.5},"coeffs":[]}"#).is_err());
        assert!(State::from_json(r#"{"kind":"coherent","params":{"n":1,"alpha":2},"z0":[[1.0,0.0]],"theta":0}"#)
            .is_err());
    }

    proptest! {
        #[test]
        fn poly_round_trip_is_bit_faithful(
            coeffs in prop::collection::vec((0u32..8, -1e6f64..1e6, -1e6f64..1e6), 1..8),
            alpha in 1.0001f64..40.0,
        ) {
            let p = SpaceParams::new(1, alpha).unwrap();
            let f = PolyFunction::new(p, coeffs.iter().map(|&(e, re, im)| (MultiIndex::new(vec![e]), c(re, im)))).unwrap();
            let s = State::Poly(f.clone());
            let back = State::from_json(&s.to_json().unwrap()).unwrap();
            match back {
                State::Poly(g) => {
                    prop_assert_eq!(g.params().alpha().to_bits(), alpha.to_bits());
                    for ((m1, c1), (m2, c2)) in f.coeffs().iter().zip(g.coeffs()) {
                        prop_assert_eq!(m1, m2);
                        prop_assert_eq!(c1.re.to_bits(), c2.re.to_bits());
                        prop_assert_eq!(c1.im.to_bits(), c2.im.to_bits());
                    }
                }
                _ => prop_assert!(false),
            }
        }
    }
}
