//! The four analog code families: encoders, codeword layouts, puncturing and
//! rate accounting.
//!
//! Every family is systematic: the source symbols appear verbatim at the
//! start of the codeword. Turbo families concatenate two component maps so
//! that the weakly protected branch decisions of one are covered by the
//! other.

use crate::error::{Error, Result};
use crate::map::{self, PlanePoint, Sign, TentParam, DOMAIN_TOL};
use num_rational::Ratio;

/// Which component-map state a codeword position carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolSlot {
    /// Component map index (turbo families use maps 0 and 1).
    pub map: u8,
    /// Orbit index within the component map.
    pub step: u16,
    /// State dimension; the baker's map is two-dimensional.
    pub dim: Dim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    X,
    Y,
}

/// Code family plus the parameters that determine rate and codeword layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodeSpec {
    /// Forward tent orbit of length `n`; the seed is the source symbol.
    Tent { n: usize, beta: TentParam },
    /// Two tent maps: the forward orbit of the source, plus a second map
    /// encoded backward from the source under the reversed symbolic coding.
    /// Puncturing drops the duplicate systematic symbol.
    TentTurbo { n: usize, beta: TentParam, punctured: bool },
    /// Forward baker orbit; the seed is the source pair `{u, v}`.
    Baker { n: usize },
    /// Two baker maps seeded with the mirrored pairs `{u, v}` and `{v, u}`.
    /// Puncturing drops the duplicate systematic pair of the second map.
    BakerTurbo { n: usize, punctured: bool },
}

impl CodeSpec {
    /// Tent code with the default slope `beta = 2`.
    pub fn tent(n: usize) -> Result<Self> {
        let spec = CodeSpec::Tent { n, beta: TentParam::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tent_with_beta(n: usize, beta: TentParam) -> Result<Self> {
        let spec = CodeSpec::Tent { n, beta };
        spec.validate()?;
        Ok(spec)
    }

    /// Tent turbo code with the default slope `beta = 2`.
    pub fn tent_turbo(n: usize, punctured: bool) -> Result<Self> {
        let spec = CodeSpec::TentTurbo { n, beta: TentParam::default(), punctured };
        spec.validate()?;
        Ok(spec)
    }

    pub fn baker(n: usize) -> Result<Self> {
        let spec = CodeSpec::Baker { n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn baker_turbo(n: usize, punctured: bool) -> Result<Self> {
        let spec = CodeSpec::BakerTurbo { n, punctured };
        spec.validate()?;
        Ok(spec)
    }

    /// Turbo families need at least two states per component map; the plain
    /// families admit the degenerate systematic-only `n = 1`.
    pub fn validate(&self) -> Result<()> {
        let (n, min_n) = match *self {
            CodeSpec::Tent { n, .. } | CodeSpec::Baker { n } => (n, 1),
            CodeSpec::TentTurbo { n, .. } | CodeSpec::BakerTurbo { n, .. } => (n, 2),
        };
        if n < min_n {
            return Err(Error::InvalidInput(format!(
                "orbit length n = {n} too small for {} (minimum {min_n})",
                self.family_name()
            )));
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            CodeSpec::Tent { .. } => "tent",
            CodeSpec::TentTurbo { .. } => "tent-turbo",
            CodeSpec::Baker { .. } => "baker",
            CodeSpec::BakerTurbo { .. } => "baker-turbo",
        }
    }

    /// Source block length: 1 for tent families, 2 for baker families.
    pub fn k(&self) -> usize {
        match self {
            CodeSpec::Tent { .. } | CodeSpec::TentTurbo { .. } => 1,
            CodeSpec::Baker { .. } | CodeSpec::BakerTurbo { .. } => 2,
        }
    }

    /// Orbit length per component map.
    pub fn orbit_len(&self) -> usize {
        match *self {
            CodeSpec::Tent { n, .. }
            | CodeSpec::TentTurbo { n, .. }
            | CodeSpec::Baker { n }
            | CodeSpec::BakerTurbo { n, .. } => n,
        }
    }

    /// Number of real symbols per codeword.
    pub fn codeword_len(&self) -> usize {
        match *self {
            CodeSpec::Tent { n, .. } => n,
            CodeSpec::TentTurbo { n, punctured, .. } => 2 * n - usize::from(punctured),
            CodeSpec::Baker { n } => 2 * n,
            CodeSpec::BakerTurbo { n, punctured } => 4 * n - 2 * usize::from(punctured),
        }
    }

    /// Exact code rate `k / codeword_len`, reduced.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.k() as u64, self.codeword_len() as u64)
    }

    /// Tent slope for the tent families; the baker's map has no parameter.
    pub fn tent_param(&self) -> TentParam {
        match *self {
            CodeSpec::Tent { beta, .. } | CodeSpec::TentTurbo { beta, .. } => beta,
            _ => TentParam::default(),
        }
    }

    /// Upper end of the per-coordinate source domain `[-1, hi]`.
    pub fn source_hi(&self) -> f64 {
        match self {
            CodeSpec::Tent { beta, .. } | CodeSpec::TentTurbo { beta, .. } => {
                beta.x_max().min(1.0)
            }
            _ => 1.0,
        }
    }

    /// Stable identifier used in CSV output and cache keys.
    pub fn id(&self) -> String {
        let mut id = format!("{}-n{}", self.family_name(), self.orbit_len());
        match *self {
            CodeSpec::Tent { beta, .. } | CodeSpec::TentTurbo { beta, .. }
                if beta.beta() != 2.0 =>
            {
                id.push_str(&format!("-beta{}", beta.beta()));
            }
            _ => {}
        }
        match *self {
            CodeSpec::TentTurbo { punctured: true, .. }
            | CodeSpec::BakerTurbo { punctured: true, .. } => id.push_str("-punct"),
            _ => {}
        }
        id
    }

    /// Position-by-position description of the codeword: which map, orbit
    /// step and dimension each symbol carries.
    pub fn layout(&self) -> Vec<SymbolSlot> {
        let n = self.orbit_len();
        let mut slots = Vec::with_capacity(self.codeword_len());
        match *self {
            CodeSpec::Tent { .. } => {
                for i in 0..n {
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::X });
                }
            }
            CodeSpec::TentTurbo { punctured, .. } => {
                for i in 0..n {
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::X });
                }
                let last = if punctured { n - 1 } else { n };
                for i in 0..last {
                    slots.push(SymbolSlot { map: 1, step: i as u16, dim: Dim::X });
                }
            }
            CodeSpec::Baker { .. } => {
                for i in 0..n {
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::X });
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::Y });
                }
            }
            CodeSpec::BakerTurbo { punctured, .. } => {
                for i in 0..n {
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::X });
                    slots.push(SymbolSlot { map: 0, step: i as u16, dim: Dim::Y });
                }
                let first = usize::from(punctured);
                for i in first..n {
                    slots.push(SymbolSlot { map: 1, step: i as u16, dim: Dim::X });
                    slots.push(SymbolSlot { map: 1, step: i as u16, dim: Dim::Y });
                }
            }
        }
        slots
    }
}

/// An encoded source block: real-valued symbols plus their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub symbols: Vec<f64>,
    pub layout: Vec<SymbolSlot>,
}

fn check_source(spec: &CodeSpec, source: &[f64]) -> Result<()> {
    if source.len() != spec.k() {
        return Err(Error::InvalidInput(format!(
            "{} takes {} source symbol(s), got {}",
            spec.family_name(),
            spec.k(),
            source.len()
        )));
    }
    let hi = spec.source_hi();
    for &u in source {
        if !u.is_finite() || u < -1.0 - DOMAIN_TOL || u > hi + DOMAIN_TOL {
            return Err(Error::Domain(format!(
                "source symbol {u} outside [-1, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Encode a source block, appending the codeword symbols to `out`.
///
/// This is the allocation-light path used by the sweep harness and the grid
/// oracle; [`encode`] wraps it into a [`Codeword`].
pub fn encode_into(spec: &CodeSpec, source: &[f64], out: &mut Vec<f64>) -> Result<()> {
    spec.validate()?;
    check_source(spec, source)?;
    match *spec {
        CodeSpec::Tent { n, beta } => {
            let mut x = source[0];
            out.push(x);
            for _ in 1..n {
                x = map::tent_forward(x, beta)?;
                out.push(x);
            }
        }
        CodeSpec::TentTurbo { n, beta, punctured } => {
            let u = source[0];
            let mut signs = Vec::with_capacity(n - 1);
            let mut x = u;
            out.push(x);
            for _ in 1..n {
                signs.push(Sign::of(x));
                x = map::tent_forward(x, beta)?;
                out.push(x);
            }
            // Backward half: the second map is assigned the reversed symbolic
            // coding, so its orbit (x'_0, ..., x'_{n-1} = u) realizes
            // sign(x'_i) = s_{n-2-i}. Encoding runs backward from x'_{n-1} = u
            // through the tent inverse, consuming s_0 first.
            let mut back = vec![0.0; n];
            back[n - 1] = u;
            for i in (0..n - 1).rev() {
                back[i] = map::tent_inverse(back[i + 1], signs[n - 2 - i], beta)?;
            }
            out.extend_from_slice(&back[..n - 1]);
            if !punctured {
                out.push(back[n - 1]);
            }
        }
        CodeSpec::Baker { n } => {
            let mut p = PlanePoint::new(source[0], source[1]);
            out.push(p.x);
            out.push(p.y);
            for _ in 1..n {
                p = map::baker_forward(p)?;
                out.push(p.x);
                out.push(p.y);
            }
        }
        CodeSpec::BakerTurbo { n, punctured } => {
            for (seed, skip_seed) in [
                (PlanePoint::new(source[0], source[1]), false),
                (PlanePoint::new(source[1], source[0]), punctured),
            ] {
                let mut p = seed;
                if !skip_seed {
                    out.push(p.x);
                    out.push(p.y);
                }
                for _ in 1..n {
                    p = map::baker_forward(p)?;
                    out.push(p.x);
                    out.push(p.y);
                }
            }
        }
    }
    Ok(())
}

/// Encode a source block into a [`Codeword`].
pub fn encode(spec: &CodeSpec, source: &[f64]) -> Result<Codeword> {
    let mut symbols = Vec::with_capacity(spec.codeword_len());
    encode_into(spec, source, &mut symbols)?;
    Ok(Codeword { symbols, layout: spec.layout() })
}

/// Encode with the plain tent code. `spec` must be a `Tent` spec.
pub fn encode_tent(u: f64, spec: &CodeSpec) -> Result<Codeword> {
    match spec {
        CodeSpec::Tent { .. } => encode(spec, &[u]),
        _ => Err(Error::InvalidInput(format!(
            "encode_tent needs a tent spec, got {}",
            spec.family_name()
        ))),
    }
}

/// Encode with the tent turbo code. `spec` must be a `TentTurbo` spec.
pub fn encode_tent_turbo(u: f64, spec: &CodeSpec) -> Result<Codeword> {
    match spec {
        CodeSpec::TentTurbo { .. } => encode(spec, &[u]),
        _ => Err(Error::InvalidInput(format!(
            "encode_tent_turbo needs a tent-turbo spec, got {}",
            spec.family_name()
        ))),
    }
}

/// Encode with the plain baker code. `spec` must be a `Baker` spec.
pub fn encode_baker(uv: PlanePoint, spec: &CodeSpec) -> Result<Codeword> {
    match spec {
        CodeSpec::Baker { .. } => encode(spec, &[uv.x, uv.y]),
        _ => Err(Error::InvalidInput(format!(
            "encode_baker needs a baker spec, got {}",
            spec.family_name()
        ))),
    }
}

/// Encode with the baker turbo code. `spec` must be a `BakerTurbo` spec.
pub fn encode_baker_turbo(uv: PlanePoint, spec: &CodeSpec) -> Result<Codeword> {
    match spec {
        CodeSpec::BakerTurbo { .. } => encode(spec, &[uv.x, uv.y]),
        _ => Err(Error::InvalidInput(format!(
            "encode_baker_turbo needs a baker-turbo spec, got {}",
            spec.family_name()
        ))),
    }
}

/// Exact code rate of a spec.
pub fn rate(spec: &CodeSpec) -> Ratio<u64> {
    spec.rate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "length mismatch: {a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} != {b:?}");
        }
    }

    #[test]
    fn tent_examples() {
        let spec = CodeSpec::tent(3).unwrap();
        close(&encode_tent(0.5, &spec).unwrap().symbols, &[0.5, 0.0, 1.0], 0.0);
        close(&encode_tent(0.3, &spec).unwrap().symbols, &[0.3, 0.4, 0.2], 1e-15);
        let spec = CodeSpec::tent(4).unwrap();
        close(&encode_tent(-1.0, &spec).unwrap().symbols, &[-1.0; 4], 0.0);
    }

    #[test]
    fn tent_turbo_examples() {
        let spec = CodeSpec::tent_turbo(3, true).unwrap();
        close(
            &encode_tent_turbo(0.5, &spec).unwrap().symbols,
            &[0.5, 0.0, 1.0, 0.375, 0.25],
            0.0,
        );
        let spec = CodeSpec::tent_turbo(3, false).unwrap();
        close(
            &encode_tent_turbo(0.5, &spec).unwrap().symbols,
            &[0.5, 0.0, 1.0, 0.375, 0.25, 0.5],
            0.0,
        );
        let spec = CodeSpec::tent_turbo(2, true).unwrap();
        close(&encode_tent_turbo(-1.0, &spec).unwrap().symbols, &[-1.0; 3], 0.0);
    }

    #[test]
    fn baker_examples() {
        let spec = CodeSpec::baker(2).unwrap();
        close(
            &encode_baker(PlanePoint::new(0.5, -0.5), &spec).unwrap().symbols,
            &[0.5, -0.5, 0.0, 0.75],
            0.0,
        );
        close(
            &encode_baker(PlanePoint::new(-1.0, -1.0), &spec).unwrap().symbols,
            &[-1.0; 4],
            0.0,
        );
        let spec = CodeSpec::baker(3).unwrap();
        close(
            &encode_baker(PlanePoint::new(0.3, 0.3), &spec).unwrap().symbols,
            &[0.3, 0.3, 0.4, 0.35, 0.2, 0.325],
            1e-15,
        );
    }

    #[test]
    fn baker_turbo_examples() {
        let spec = CodeSpec::baker_turbo(2, false).unwrap();
        close(
            &encode_baker_turbo(PlanePoint::new(0.5, -0.5), &spec).unwrap().symbols,
            &[0.5, -0.5, 0.0, 0.75, -0.5, 0.5, 0.0, -0.25],
            0.0,
        );
        close(
            &encode_baker_turbo(PlanePoint::new(-1.0, -1.0), &spec).unwrap().symbols,
            &[-1.0; 8],
            0.0,
        );
        let spec = CodeSpec::baker_turbo(2, true).unwrap();
        close(
            &encode_baker_turbo(PlanePoint::new(0.5, -0.5), &spec).unwrap().symbols,
            &[0.5, -0.5, 0.0, 0.75, 0.0, -0.25],
            0.0,
        );
    }

    #[test]
    fn rates() {
        let r = rate(&CodeSpec::tent_turbo(6, true).unwrap());
        assert_eq!((*r.numer(), *r.denom()), (1, 11));
        assert_eq!(r.to_string(), "1/11");
        let r = rate(&CodeSpec::baker_turbo(3, false).unwrap());
        assert_eq!((*r.numer(), *r.denom()), (1, 6));
        let r = rate(&CodeSpec::tent(11).unwrap());
        assert_eq!((*r.numer(), *r.denom()), (1, 11));
        let r = rate(&CodeSpec::baker_turbo(3, true).unwrap());
        assert_eq!((*r.numer(), *r.denom()), (1, 5)); // 2/10
        let r = rate(&CodeSpec::baker(3).unwrap());
        assert_eq!((*r.numer(), *r.denom()), (1, 3)); // 2/6
    }

    #[test]
    fn layout_matches_codeword_len() {
        for spec in [
            CodeSpec::tent(5).unwrap(),
            CodeSpec::tent_turbo(4, true).unwrap(),
            CodeSpec::tent_turbo(4, false).unwrap(),
            CodeSpec::baker(3).unwrap(),
            CodeSpec::baker_turbo(3, true).unwrap(),
            CodeSpec::baker_turbo(3, false).unwrap(),
        ] {
            assert_eq!(spec.layout().len(), spec.codeword_len(), "{}", spec.id());
        }
    }

    #[test]
    fn family_mismatch_is_rejected() {
        let tent = CodeSpec::tent(3).unwrap();
        let baker = CodeSpec::baker(3).unwrap();
        assert!(encode_tent(0.5, &baker).is_err());
        assert!(encode_baker(PlanePoint::new(0.0, 0.0), &tent).is_err());
        assert!(encode(&tent, &[0.1, 0.2]).is_err());
        assert!(encode(&tent, &[1.5]).is_err());
    }

    #[test]
    fn turbo_needs_two_states() {
        assert!(CodeSpec::tent_turbo(1, true).is_err());
        assert!(CodeSpec::baker_turbo(1, false).is_err());
        // Degenerate systematic-only plain codes are allowed.
        assert!(CodeSpec::tent(1).is_ok());
        assert!(CodeSpec::baker(1).is_ok());
    }

    #[test]
    fn ids() {
        assert_eq!(CodeSpec::tent(11).unwrap().id(), "tent-n11");
        assert_eq!(CodeSpec::tent_turbo(6, true).unwrap().id(), "tent-turbo-n6-punct");
        assert_eq!(CodeSpec::baker_turbo(3, false).unwrap().id(), "baker-turbo-n3");
    }
}
