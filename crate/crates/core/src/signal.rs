//! Named test signals on [0, 1], parseable from short strings such as
//! `t`, `exp`, `const:2.5`, `cos:3` or `step:0.4`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::CsrError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Signal {
    Zero,
    Constant(f64),
    /// `f(t) = t`
    Ramp,
    /// `f(t) = e^t`
    Exp,
    /// `√2 cos(lπt)`, the cosine basis function of frequency `l`.
    Cosine(u32),
    /// `√2 sin(lπt)`
    Sine(u32),
    /// 0 before the jump location, 1 from it on.
    Step(f64),
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Signal::Zero => 0.0,
            Signal::Constant(c) => c,
            Signal::Ramp => t,
            Signal::Exp => t.exp(),
            Signal::Cosine(0) => 1.0,
            Signal::Cosine(l) => SQRT_2 * (l as f64 * PI * t).cos(),
            Signal::Sine(l) => SQRT_2 * (l as f64 * PI * t).sin(),
            Signal::Step(at) => {
                if t < at {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Zero => write!(f, "zero"),
            Signal::Constant(c) => write!(f, "const:{c}"),
            Signal::Ramp => write!(f, "t"),
            Signal::Exp => write!(f, "exp"),
            Signal::Cosine(l) => write!(f, "cos:{l}"),
            Signal::Sine(l) => write!(f, "sin:{l}"),
            Signal::Step(at) => write!(f, "step:{at}"),
        }
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Signal {
    type Err = CsrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| CsrError::invalid("signal", reason);
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64, CsrError> {
            let a = a.ok_or_else(|| bad(format!("{name} needs an argument, e.g. {name}:1")))?;
            a.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("cannot parse {a:?} as a number")))
        };
        let frequency = |a: Option<&str>| -> Result<u32, CsrError> {
            let a = a.ok_or_else(|| bad(format!("{name} needs a frequency, e.g. {name}:3")))?;
            a.parse::<u32>()
                .map_err(|_| bad(format!("cannot parse {a:?} as a frequency")))
        };
        match (name, arg) {
            ("zero", None) => Ok(Signal::Zero),
            ("t" | "ramp" | "linear", None) => Ok(Signal::Ramp),
            ("exp", None) => Ok(Signal::Exp),
            ("const" | "constant", a) => Ok(Signal::Constant(match a {
                None => 1.0,
                some => number(some)?,
            })),
            ("cos", a) => Ok(Signal::Cosine(frequency(a)?)),
            ("sin", a) => Ok(Signal::Sine(frequency(a)?)),
            ("step", a) => Ok(Signal::Step(match a {
                None => 0.5,
                some => number(some)?,
            })),
            _ => Err(bad(format!(
                "unknown signal {s:?} (expected zero, t, exp, const[:c], cos:L, sin:L or step[:at])"
            ))),
        }
    }
}
