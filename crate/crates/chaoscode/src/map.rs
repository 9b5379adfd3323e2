//! Piecewise-linear chaotic map kernels: the tent map and the folded baker's map.
//!
//! Both maps branch on the sign of the evolving x state, with the convention
//! `sign(0) = +1` used everywhere (encoding, symbolic coding extraction and
//! branch selection). Forward orbits produce codewords; the tent map inverse
//! supports backward encoding and genie-aided decoding.

use crate::error::{Error, Result};

/// Tolerance on map inputs, absorbing floating-point drift from repeated
/// iteration. Inputs farther outside the domain are rejected.
pub const DOMAIN_TOL: f64 = 1e-9;

/// Slope of the tent map `F(x) = beta - 1 - beta*|x|`, restricted to
/// `1 < beta <= 2` so the map sends `[-1, beta-1]` into itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentParam {
    beta: f64,
}

impl TentParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::InvalidInput(format!(
                "tent slope must satisfy 1 < beta <= 2, got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(self) -> f64 {
        self.beta
    }

    /// Upper end of the map domain `[-1, beta - 1]`.
    pub fn x_max(self) -> f64 {
        self.beta - 1.0
    }
}

impl Default for TentParam {
    /// `beta = 2`, the slope used by every code in the experiments. At this
    /// value the tent map sends `[-1, 1]` onto itself.
    fn default() -> Self {
        Self { beta: 2.0 }
    }
}

/// Sign of a state, with `sign(0) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The branch (sign) sequence an orbit takes: signs of states `x_0 .. x_{n-2}`.
///
/// Fixing the symbolic coding makes a piecewise-linear map affine in its seed,
/// which is what both the backward encoder and the ML decoder exploit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCoding {
    signs: Vec<Sign>,
}

impl SymbolicCoding {
    pub fn new(signs: Vec<Sign>) -> Self {
        Self { signs }
    }

    /// Signs of every orbit state except the last. The final state's sign
    /// never selects a branch, so it is not part of the coding.
    pub fn from_orbit(orbit: &[f64]) -> Self {
        assert!(orbit.len() >= 2, "orbit must contain at least two states");
        Self {
            signs: orbit[..orbit.len() - 1].iter().map(|&x| Sign::of(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }
}

impl std::ops::Index<usize> for SymbolicCoding {
    type Output = Sign;

    fn index(&self, i: usize) -> &Sign {
        &self.signs[i]
    }
}

fn check_range(x: f64, lo: f64, hi: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x < lo - DOMAIN_TOL || x > hi + DOMAIN_TOL {
        return Err(Error::Domain(format!("{what} = {x} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// One forward tent step `x -> beta - 1 - beta*|x|`.
pub fn tent_forward(x: f64, p: TentParam) -> Result<f64> {
    check_range(x, -1.0, p.x_max(), "tent state")?;
    Ok(p.beta() - 1.0 - p.beta() * x.abs())
}

/// Preimage of `x_next` under the tent map on the branch selected by `s`:
/// `s * (beta - 1 - x_next) / beta`.
///
/// Every point has two preimages of equal magnitude and opposite sign; `s`
/// picks between them.
pub fn tent_inverse(x_next: f64, s: Sign, p: TentParam) -> Result<f64> {
    check_range(x_next, -1.0, p.x_max(), "tent state")?;
    Ok(s.value() * (p.beta() - 1.0 - x_next) / p.beta())
}

/// Forward orbit `(x_0, F(x_0), ..., F^{n-1}(x_0))` of length `n`.
pub fn tent_orbit(x0: f64, n: usize, p: TentParam) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be at least 1".into()));
    }
    check_range(x0, -1.0, p.x_max(), "tent seed")?;
    let mut orbit = Vec::with_capacity(n);
    let mut x = x0;
    orbit.push(x);
    for _ in 1..n {
        x = tent_forward(x, p)?;
        orbit.push(x);
    }
    Ok(orbit)
}

/// Extract the symbolic coding (signs of all states but the last) of an orbit.
pub fn symbolic_coding(orbit: &[f64]) -> SymbolicCoding {
    SymbolicCoding::from_orbit(orbit)
}

/// A point of the baker state space `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// One step of the folded baker's map, branch-selected by `sign(x)`:
///
/// * `x < 0`: `{2x + 1, y/2 - 1/2}`
/// * `x >= 0`: `{1 - 2x, 1/2 - y/2}`
///
/// The x coordinate evolves as a tent map with slope 2, and the y coordinate
/// contracts by the matching inverse-tent step.
pub fn baker_forward(pt: PlanePoint) -> Result<PlanePoint> {
    check_range(pt.x, -1.0, 1.0, "baker x")?;
    check_range(pt.y, -1.0, 1.0, "baker y")?;
    Ok(if pt.x < 0.0 {
        PlanePoint::new(2.0 * pt.x + 1.0, pt.y / 2.0 - 0.5)
    } else {
        PlanePoint::new(1.0 - 2.0 * pt.x, 0.5 - pt.y / 2.0)
    })
}

/// Forward baker orbit of length `n` starting at `seed`.
pub fn baker_orbit(seed: PlanePoint, n: usize) -> Result<Vec<PlanePoint>> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be at least 1".into()));
    }
    let mut orbit = Vec::with_capacity(n);
    let mut p = seed;
    check_range(p.x, -1.0, 1.0, "baker seed x")?;
    check_range(p.y, -1.0, 1.0, "baker seed y")?;
    orbit.push(p);
    for _ in 1..n {
        p = baker_forward(p)?;
        orbit.push(p);
    }
    Ok(orbit)
}
