//! Parsing of the function and set specifications accepted on the command line.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bergman_core::bounds::SetSpec;
use bergman_core::random::{random_mixed, random_polynomial};
use bergman_core::space::MixedState;
use bergman_core::{CoherentState, Complex64, Point, SpaceParams, State};

/// Bad command-line input; reported with exit status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

macro_rules! usage {
    ($($arg:tt)*) => { anyhow::Error::new(Usage(format!($($arg)*))) };
}

fn number(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| usage!("not a number: {s:?}"))
}

fn integer(s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| usage!("not a nonnegative integer: {s:?}"))
}

/// Comma-separated complex components such as `0.3+0.1i,-0.2i`.
pub fn parse_point(s: &str, n: usize) -> Result<Point> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<Complex64>().map_err(|_| usage!("not a complex number: {c:?}")))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != n {
        bail!(Usage(format!("point {s:?} has {} components, expected {n}", coords.len())));
    }
    Point::new(coords).map_err(|e| usage!("{e}"))
}

/// `coherent:<z0>`, `poly:<path>` or `random:<degree>:<seed>`.
pub fn parse_function(spec: &str, params: &SpaceParams, rank: usize) -> Result<State> {
    let (tag, rest) = spec.split_once(':').ok_or_else(|| usage!("bad function spec {spec:?}"))?;
    let state = match tag {
        "coherent" => State::Coherent(CoherentState::new(params.clone(), parse_point(rest, params.n())?, 0.0)?),
        "poly" => {
            let text = std::fs::read_to_string(Path::new(rest)).with_context(|| format!("reading {rest}"))?;
            let state = State::from_json(&text).map_err(|e| usage!("{rest}: {e}"))?;
            if !bergman_core::Husimi::params(&state).same_space(params) {
                bail!(Usage(format!("{rest} lives in a different space than --n/--alpha")));
            }
            state
        }
        "random" => {
            let (d, seed) = rest.split_once(':').ok_or_else(|| usage!("expected random:<degree>:<seed>"))?;
            let (d, seed) = (integer(d)? as usize, integer(seed)?);
            if rank > 1 {
                State::Mixed(random_mixed(params, d, rank, seed)?)
            } else {
                State::Poly(random_polynomial(params, d, seed)?)
            }
        }
        _ => bail!(Usage(format!("unknown function kind {tag:?}"))),
    };
    Ok(state)
}

/// Mixed states pass through; pure polynomials become rank-one mixtures.
pub fn as_mixture(state: State) -> Result<MixedState> {
    match state {
        State::Mixed(m) => Ok(m),
        State::Poly(f) => Ok(MixedState::pure(f)?),
        State::Coherent(_) => bail!(Usage("mixture needs a polynomial or mixed state".into())),
    }
}

/// `ball:<s>[:<center>]`, `annulus:<r1>:<r2>` or `superlevel:<t>`.
pub fn parse_set(spec: &str, n: usize) -> Result<SetSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    let set = match parts.as_slice() {
        ["ball", s] => SetSpec::centered_ball(n, number(s)?),
        ["ball", s, c] => SetSpec::GeodesicBall { center: parse_point(c, n)?, measure: number(s)? },
        ["annulus", r1, r2] => SetSpec::EuclideanAnnulus { r1: number(r1)?, r2: number(r2)? },
        ["superlevel", t] => SetSpec::Superlevel { level: number(t)? },
        _ => bail!(Usage(format!("bad set spec {spec:?}"))),
    };
    set.exact_measure().map_err(|e| usage!("{e}"))?;
    Ok(set)
}
