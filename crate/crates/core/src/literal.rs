//! Sequence literals: the JSON record form and the short command-line form.

use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, qstr, qvec, ScalarField, Q};
use crate::seqcore::{LazySequence, VecNorm, VectorSpaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    #[default]
    Zero,
    Periodic,
}

fn one() -> Q {
    Q::one()
}

/// A sequence description that builds a [`LazySequence`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceLiteral {
    /// `c·j^(-a)·log^(-b)(j+1)`.
    Powlog {
        #[serde(with = "qstr")]
        a: Q,
        #[serde(with = "qstr", default = "Q::zero")]
        b: Q,
        #[serde(with = "qstr", default = "one")]
        c: Q,
    },
    /// `ratio^j`.
    Geometric {
        #[serde(with = "qstr")]
        ratio: Q,
    },
    Explicit {
        #[serde(with = "qvec")]
        values: Vec<Q>,
        #[serde(default)]
        tail: Tail,
    },
    Unit { n: u64 },
    Zero,
    /// `Y`-valued sequence from scalar coordinate sequences.
    Vector {
        space: VectorSpaceSpec,
        components: Vec<SequenceLiteral>,
    },
}

impl SequenceLiteral {
    pub fn build(&self, field: ScalarField) -> Result<LazySequence> {
        match self {
            SequenceLiteral::Powlog { a, b, c } => {
                LazySequence::powlog(field, a.clone(), b.clone(), c.clone())
            }
            SequenceLiteral::Geometric { ratio } => Ok(LazySequence::geometric(field, ratio.clone())),
            SequenceLiteral::Explicit { values, tail } => {
                LazySequence::explicit(field, values.clone(), *tail == Tail::Periodic)
            }
            SequenceLiteral::Unit { n } => {
                if *n == 0 {
                    return Err(Error::Parse("unit vectors start at e1".into()));
                }
                Ok(LazySequence::unit(field, *n))
            }
            SequenceLiteral::Zero => Ok(LazySequence::zero_scalar()),
            SequenceLiteral::Vector { space, components } => {
                let comps = components
                    .iter()
                    .map(|c| c.build(field))
                    .collect::<Result<Vec<_>>>()?;
                LazySequence::from_components(space.clone(), comps)
            }
        }
    }

    /// This scalar literal placed in coordinate `k` (1-based) of `space`.
    pub fn along_axis(self, space: VectorSpaceSpec, k: usize) -> Result<Self> {
        if k == 0 || k > space.dim {
            return Err(Error::Parse(format!("coordinate {k} outside 1..={}", space.dim)));
        }
        let components = (1..=space.dim)
            .map(|i| if i == k { self.clone() } else { SequenceLiteral::Zero })
            .collect();
        Ok(SequenceLiteral::Vector { space, components })
    }
}

fn list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_q).collect()
}

/// Short syntax: `powlog:a,b[,c]`, `geometric:r`, `explicit:1,2,3`,
/// `periodic:1,-1`, `unit:n`, `zero`.
impl FromStr for SequenceLiteral {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "powlog" => match list(arg)?.as_slice() {
                [a] => Ok(SequenceLiteral::Powlog {
                    a: a.clone(),
                    b: Q::zero(),
                    c: Q::one(),
                }),
                [a, b] => Ok(SequenceLiteral::Powlog {
                    a: a.clone(),
                    b: b.clone(),
                    c: Q::one(),
                }),
                [a, b, c] => Ok(SequenceLiteral::Powlog {
                    a: a.clone(),
                    b: b.clone(),
                    c: c.clone(),
                }),
                _ => Err(Error::Parse(format!("powlog takes a,b[,c]: {s:?}"))),
            },
            "geometric" => Ok(SequenceLiteral::Geometric { ratio: parse_q(arg)? }),
            "explicit" => Ok(SequenceLiteral::Explicit {
                values: list(arg)?,
                tail: Tail::Zero,
            }),
            "periodic" => Ok(SequenceLiteral::Explicit {
                values: list(arg)?,
                tail: Tail::Periodic,
            }),
            "unit" | "e" => Ok(SequenceLiteral::Unit {
                n: arg.parse().map_err(|_| Error::Parse(format!("bad unit index {arg:?}")))?,
            }),
            "zero" => Ok(SequenceLiteral::Zero),
            _ => Err(Error::Parse(format!("unknown sequence {s:?}"))),
        }
    }
}

/// `sup:2`, `p:1:3` (the 1-norm on `K³`), `p:3/2:2`.
pub fn parse_value_space(s: &str) -> Result<VectorSpaceSpec> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let dim = |d: &str| {
        d.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad dimension {d:?}")))
    };
    match parts.as_slice() {
        ["sup", d] => VectorSpaceSpec::new(dim(d)?, VecNorm::Sup),
        ["p", p, d] => VectorSpaceSpec::new(dim(d)?, VecNorm::P(parse_q(p)?)),
        _ => Err(Error::Parse(format!("unknown value space {s:?}"))),
    }
}

pub fn format_value_space(v: &VectorSpaceSpec) -> String {
    match &v.norm {
        VecNorm::Sup => format!("sup:{}", v.dim),
        VecNorm::P(p) => format!("p:{}:{}", format_q(p), v.dim),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn json_forms() {
        let p: SequenceLiteral =
            serde_json::from_str(r#"{"kind":"powlog","a":"1/2","b":"4","c":"1"}"#).unwrap();
        assert_eq!(
            p,
            SequenceLiteral::Powlog {
                a: q(1, 2),
                b: qi(4),
                c: qi(1)
            }
        );
        let g: SequenceLiteral = serde_json::from_str(r#"{"kind":"geometric","ratio":"1/2"}"#).unwrap();
        assert_eq!(g, SequenceLiteral::Geometric { ratio: q(1, 2) });
        let e: SequenceLiteral =
            serde_json::from_str(r#"{"kind":"explicit","values":["1","-1/2",3],"tail":"zero"}"#).unwrap();
        let x = e.build(ScalarField::rational()).unwrap();
        assert_eq!(x.eval_scalar(2).to_rational(), Some(q(-1, 2)));
        assert!(x.eval(4).is_zero());
    }

    #[test]
    fn short_forms() {
        let p: SequenceLiteral = "powlog:1,0".parse().unwrap();
        assert_eq!(p.build(ScalarField::rational()).unwrap().eval_scalar(4).to_rational(), Some(q(1, 4)));
        let per: SequenceLiteral = "periodic:1,-1".parse().unwrap();
        let x = per.build(ScalarField::rational()).unwrap();
        assert_eq!(x.eval_scalar(5).to_rational(), Some(qi(1)));
        assert!("powlog:".parse::<SequenceLiteral>().is_err());
        let y = parse_value_space("sup:2").unwrap();
        let v = p.along_axis(y.clone(), 1).unwrap().build(ScalarField::rational()).unwrap();
        assert_eq!(v.kind().dim(), 2);
        assert_eq!(format_value_space(&y), "sup:2");
    }
}
