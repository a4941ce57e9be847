//! Flag mini-syntax for symbols and grids.
//!
//! ```text
//! identity | z
//! mobius:a,b,c,d        entries as `re`, `re+imi`, `imi`
//! semigroup:t
//! kernel:w | const:c
//! poly:c0,c1,...
//! exp:<symbol>
//! {...}                 JSON expression
//! @path                 file holding either form
//! ```

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use wco_core::{MobiusMap, Symbol};

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        let re: f64 = s.parse().with_context(|| format!("bad number {s:?}"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().with_context(|| format!("bad imaginary part in {s:?}"))?,
    };
    let re: f64 = re.parse().with_context(|| format!("bad real part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

fn complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_symbol(s: &str) -> Result<Symbol> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(Symbol::from_json(s)?);
    }
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return parse_symbol(&text);
    }
    if s == "identity" || s == "z" {
        return Ok(Symbol::identity());
    }
    let (kind, rest) = s.split_once(':').ok_or_else(|| anyhow!("unrecognized symbol {s:?}"))?;
    Ok(match kind {
        "mobius" => {
            let v = complex_list(rest)?;
            if v.len() != 4 {
                bail!("mobius needs four coefficients, got {}", v.len());
            }
            Symbol::mobius(MobiusMap::new(v[0], v[1], v[2], v[3])?)
        }
        "semigroup" => Symbol::mobius(MobiusMap::parabolic_semigroup(rest.trim().parse()?)?),
        "kernel" => Symbol::kernel(parse_complex(rest)?)?,
        "const" => Symbol::constant(parse_complex(rest)?),
        "poly" => Symbol::poly(complex_list(rest)?),
        "exp" => Symbol::exp(parse_symbol(rest)?),
        other => bail!("unknown symbol kind {other:?}"),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridArg {
    /// Circle of radius `factor` times the predicted spectral radius.
    Circle { factor: f64, count: usize },
    /// `nx × ny` lattice over `[re0, re1] × [im0, im1]`.
    Box { re: (f64, f64), im: (f64, f64), nx: usize, ny: usize },
    Points(Vec<Complex64>),
}

pub const DEFAULT_CIRCLE_POINTS: usize = 64;

pub fn parse_grid(s: &str) -> Result<GridArg> {
    let (kind, rest) = s.trim().split_once(':').ok_or_else(|| anyhow!("unrecognized grid {s:?}"))?;
    let nums = || rest.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
    match kind {
        "circle" => {
            let v = nums()?;
            let count = match v.get(1) {
                Some(&n) if n >= 1.0 && n.fract() == 0.0 => n as usize,
                Some(n) => bail!("circle point count must be a positive integer, got {n}"),
                None => DEFAULT_CIRCLE_POINTS,
            };
            if v.is_empty() || v.len() > 2 || !(v[0] > 0.0) {
                bail!("circle grid is circle:<factor>[,count] with factor > 0");
            }
            Ok(GridArg::Circle { factor: v[0], count })
        }
        "box" => {
            let v = nums()?;
            if v.len() != 6 || v[4] < 1.0 || v[5] < 1.0 {
                bail!("box grid is box:re0,re1,im0,im1,nx,ny");
            }
            Ok(GridArg::Box { re: (v[0], v[1]), im: (v[2], v[3]), nx: v[4] as usize, ny: v[5] as usize })
        }
        "points" => Ok(GridArg::Points(rest.split(';').map(parse_complex).collect::<Result<_>>()?)),
        other => bail!("unknown grid kind {other:?}"),
    }
}

impl GridArg {
    pub fn points(&self, radius: f64) -> Vec<Complex64> {
        match self {
            GridArg::Circle { factor, count } => wco_core::spectra::circle_grid(Complex64::new(0.0, 0.0), factor * radius, *count),
            GridArg::Box { re, im, nx, ny } => {
                let step = |lo: f64, hi: f64, n: usize, k: usize| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
                (0..*ny)
                    .flat_map(|j| (0..*nx).map(move |i| Complex64::new(step(re.0, re.1, *nx, i), step(im.0, im.1, *ny, j))))
                    .collect()
            }
            GridArg::Points(p) => p.clone(),
        }
    }
}
