//! Exact maximum-likelihood decoding of the chaotic analog codes.
//!
//! All four families are piecewise-linear in the source block: once the sign
//! pattern (symbolic coding) of every component map is fixed, the codeword is
//! an affine function of the source. The decoder enumerates every realizable
//! sign pattern as an [`AffineSegment`], solves a small constrained
//! least-squares problem on each segment, and keeps the global likelihood
//! maximum.
//!
//! A brute-force grid oracle and a genie-aided tent decoder (true symbolic
//! coding supplied as side information) are provided for verification and
//! bounds.

use crate::channel::ChannelObservation;
use crate::code::{encode_into, CodeSpec};
use crate::error::{Error, Result};
use crate::map::{self, Sign, SymbolicCoding, TentParam};

/// Feasibility slack for constraint checks inside the segment solver.
const FEAS_TOL: f64 = 1e-12;

/// Coefficients below this are treated as a vacuous constraint direction.
const COEFF_EPS: f64 = 1e-30;

/// Guard against a rank-deficient gain; cannot trigger for these codes since
/// the systematic rows have unit gain, but the solver degrades to a flat
/// objective instead of dividing by zero.
const GAIN_EPS: f64 = 1e-12;

/// Half-plane constraint `coeff . w + offset >= 0` over the source vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub coeff: [f64; 2],
    pub offset: f64,
}

/// Affine restriction of an encoder to one sign pattern.
///
/// Within the constraint region (intersected with the source box),
/// `encode(w) = gain * w + offset` exactly. Regions of distinct segments have
/// disjoint interiors and together cover the source domain.
#[derive(Debug, Clone)]
pub struct AffineSegment {
    /// Source dimension (1 for tent families, 2 for baker families).
    pub k: usize,
    /// Per-row source gains; column 1 is zero when `k == 1`.
    pub gain: Vec<[f64; 2]>,
    pub offset: Vec<f64>,
    /// Sign-pattern constraints. The source box `[-1, domain_hi]^k` is
    /// implicit and always intersected by the solver.
    pub constraints: Vec<Constraint>,
    /// The sign pattern that generated this segment, one per component map.
    pub signs: Vec<SymbolicCoding>,
    /// Upper end of the per-coordinate source domain.
    pub domain_hi: f64,
}

/// Decoded source estimate with its Gaussian log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Source estimate, always inside the source box.
    pub estimate: Vec<f64>,
    /// `-||r - c(estimate)||^2 / (2 sigma^2)`, up to the Gaussian
    /// normalization constant. Zero residual reports exactly `0.0`.
    pub log_likelihood: f64,
    /// Winning segment index; `None` for the grid oracle.
    pub segment_index: Option<usize>,
}

fn log_likelihood_from_rss(rss: f64, sigma2: f64) -> f64 {
    if rss <= 0.0 {
        0.0
    } else {
        -rss / (2.0 * sigma2)
    }
}

fn pattern(mask: usize, len: usize) -> Vec<Sign> {
    (0..len)
        .map(|i| if mask >> i & 1 == 1 { Sign::Minus } else { Sign::Plus })
        .collect()
}

/// Affine form `coeff * seed + offset` of one orbit state.
#[derive(Debug, Clone, Copy)]
struct Affine {
    c: f64,
    o: f64,
}

/// Forward tent states as affine functions of the seed, signs fixed.
fn tent_forward_affine(signs: &[Sign], n: usize, p: TentParam) -> Vec<Affine> {
    let beta = p.beta();
    let mut rows = Vec::with_capacity(n);
    rows.push(Affine { c: 1.0, o: 0.0 });
    for i in 1..n {
        let s = signs[i - 1].value();
        let prev = rows[i - 1];
        rows.push(Affine {
            c: -beta * s * prev.c,
            o: beta - 1.0 - beta * s * prev.o,
        });
    }
    rows
}

/// Backward tent states as affine functions of the seed `x'_{n-1}`.
///
/// The backward orbit carries the reversed symbolic coding: deriving `x'_i`
/// applies sign `s_{n-2-i}`, matching the turbo encoder.
fn tent_backward_affine(signs: &[Sign], n: usize, p: TentParam) -> Vec<Affine> {
    let beta = p.beta();
    let mut rows = vec![Affine { c: 0.0, o: 0.0 }; n];
    rows[n - 1] = Affine { c: 1.0, o: 0.0 };
    for i in (0..n - 1).rev() {
        let s = signs[n - 2 - i].value();
        let next = rows[i + 1];
        rows[i] = Affine {
            c: -s * next.c / beta,
            o: s * (beta - 1.0 - next.o) / beta,
        };
    }
    rows
}

/// Baker y states as affine functions of the seed y, x-branch signs fixed.
fn baker_y_affine(signs: &[Sign], n: usize) -> Vec<Affine> {
    let mut rows = Vec::with_capacity(n);
    rows.push(Affine { c: 1.0, o: 0.0 });
    for i in 1..n {
        let t = signs[i - 1].value();
        let prev = rows[i - 1];
        rows.push(Affine {
            c: -t * prev.c / 2.0,
            o: t * (1.0 - prev.o) / 2.0,
        });
    }
    rows
}

/// Sign-pattern constraints `s_i (c_i w + o_i) >= 0` on source column `col`.
fn sign_constraints(signs: &[Sign], rows: &[Affine], col: usize) -> Vec<Constraint> {
    signs
        .iter()
        .zip(rows)
        .map(|(s, row)| {
            let mut coeff = [0.0; 2];
            coeff[col] = s.value() * row.c;
            Constraint { coeff, offset: s.value() * row.o }
        })
        .collect()
}

/// Enumerate one affine segment per realizable sign pattern of `spec`.
///
/// Tent families branch on the `n-1` signs of the forward orbit; the plain
/// baker code branches on the x-evolution of `u`; the baker turbo code
/// branches independently on the x-evolutions of `u` (map 1) and `v` (map 2),
/// giving `2^(n-1) * 2^(n-1)` segments.
pub fn enumerate_segments(spec: &CodeSpec) -> Result<Vec<AffineSegment>> {
    spec.validate()?;
    let n = spec.orbit_len();
    let half = 1usize << (n - 1);
    let hi = spec.source_hi();
    let mut segments = Vec::new();
    match *spec {
        CodeSpec::Tent { beta, .. } => {
            for mask in 0..half {
                let signs = pattern(mask, n - 1);
                let rows = tent_forward_affine(&signs, n, beta);
                segments.push(AffineSegment {
                    k: 1,
                    gain: rows.iter().map(|r| [r.c, 0.0]).collect(),
                    offset: rows.iter().map(|r| r.o).collect(),
                    constraints: sign_constraints(&signs, &rows, 0),
                    signs: vec![SymbolicCoding::new(signs)],
                    domain_hi: hi,
                });
            }
        }
        CodeSpec::TentTurbo { beta, punctured, .. } => {
            for mask in 0..half {
                let signs = pattern(mask, n - 1);
                let fwd = tent_forward_affine(&signs, n, beta);
                let bwd = tent_backward_affine(&signs, n, beta);
                let back_len = if punctured { n - 1 } else { n };
                let mut gain: Vec<[f64; 2]> = fwd.iter().map(|r| [r.c, 0.0]).collect();
                let mut offset: Vec<f64> = fwd.iter().map(|r| r.o).collect();
                gain.extend(bwd[..back_len].iter().map(|r| [r.c, 0.0]));
                offset.extend(bwd[..back_len].iter().map(|r| r.o));
                segments.push(AffineSegment {
                    k: 1,
                    gain,
                    offset,
                    constraints: sign_constraints(&signs, &fwd, 0),
                    signs: vec![SymbolicCoding::new(signs)],
                    domain_hi: hi,
                });
            }
        }
        CodeSpec::Baker { .. } => {
            let beta = TentParam::default();
            for mask in 0..half {
                let signs = pattern(mask, n - 1);
                let xs = tent_forward_affine(&signs, n, beta);
                let ys = baker_y_affine(&signs, n);
                let mut gain = Vec::with_capacity(2 * n);
                let mut offset = Vec::with_capacity(2 * n);
                for i in 0..n {
                    gain.push([xs[i].c, 0.0]);
                    offset.push(xs[i].o);
                    gain.push([0.0, ys[i].c]);
                    offset.push(ys[i].o);
                }
                segments.push(AffineSegment {
                    k: 2,
                    gain,
                    offset,
                    constraints: sign_constraints(&signs, &xs, 0),
                    signs: vec![SymbolicCoding::new(signs)],
                    domain_hi: hi,
                });
            }
        }
        CodeSpec::BakerTurbo { punctured, .. } => {
            let beta = TentParam::default();
            for mask1 in 0..half {
                let s1 = pattern(mask1, n - 1);
                let xs1 = tent_forward_affine(&s1, n, beta);
                let ys1 = baker_y_affine(&s1, n);
                for mask2 in 0..half {
                    let s2 = pattern(mask2, n - 1);
                    let xs2 = tent_forward_affine(&s2, n, beta);
                    let ys2 = baker_y_affine(&s2, n);
                    let len = spec.codeword_len();
                    let mut gain = Vec::with_capacity(len);
                    let mut offset = Vec::with_capacity(len);
                    for i in 0..n {
                        // Map 1 is seeded with {u, v}.
                        gain.push([xs1[i].c, 0.0]);
                        offset.push(xs1[i].o);
                        gain.push([0.0, ys1[i].c]);
                        offset.push(ys1[i].o);
                    }
                    for i in usize::from(punctured)..n {
                        // Map 2 is seeded with the mirrored pair {v, u}.
                        gain.push([0.0, xs2[i].c]);
                        offset.push(xs2[i].o);
                        gain.push([ys2[i].c, 0.0]);
                        offset.push(ys2[i].o);
                    }
                    let mut constraints = sign_constraints(&s1, &xs1, 0);
                    constraints.extend(sign_constraints(&s2, &xs2, 1));
                    segments.push(AffineSegment {
                        k: 2,
                        gain,
                        offset,
                        constraints,
                        signs: vec![SymbolicCoding::new(s1.clone()), SymbolicCoding::new(s2)],
                        domain_hi: hi,
                    });
                }
            }
        }
    }
    Ok(segments)
}

impl AffineSegment {
    /// Evaluate the segment's affine codeword at `w`.
    pub fn codeword_at(&self, w: &[f64]) -> Vec<f64> {
        let wv = [w[0], w.get(1).copied().unwrap_or(0.0)];
        self.gain
            .iter()
            .zip(&self.offset)
            .map(|(g, o)| g[0] * wv[0] + g[1] * wv[1] + o)
            .collect()
    }

    /// True when `w` satisfies every sign constraint with slack `tol`
    /// (negative `tol` demands strict interiority).
    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        let wv = [w[0], w.get(1).copied().unwrap_or(0.0)];
        self.constraints
            .iter()
            .all(|c| c.coeff[0] * wv[0] + c.coeff[1] * wv[1] + c.offset >= -tol)
    }

    /// Reduce the constraints to per-axis intervals. All segments produced by
    /// [`enumerate_segments`] have axis-aligned constraints, so the region is
    /// exactly the product of these intervals; `None` if the region is empty.
    pub fn axis_intervals(&self) -> Option<Vec<[f64; 2]>> {
        let mut iv = vec![[-1.0, self.domain_hi]; self.k];
        for c in &self.constraints {
            for (axis, interval) in iv.iter_mut().enumerate() {
                let a = c.coeff[axis];
                if a.abs() < COEFF_EPS {
                    continue;
                }
                let bound = -c.offset / a;
                if a > 0.0 {
                    interval[0] = interval[0].max(bound);
                } else {
                    interval[1] = interval[1].min(bound);
                }
            }
        }
        if iv.iter().any(|[lo, hi]| *lo > *hi + FEAS_TOL) {
            None
        } else {
            Some(iv)
        }
    }

    fn rss(&self, received: &[f64], w: [f64; 2]) -> f64 {
        let mut rss = 0.0;
        for ((g, o), r) in self.gain.iter().zip(&self.offset).zip(received) {
            let e = r - (g[0] * w[0] + g[1] * w[1] + o);
            rss += e * e;
        }
        rss
    }

    /// Maximize the likelihood on this segment; `None` if the region is empty.
    fn solve(&self, received: &[f64]) -> Option<([f64; 2], f64)> {
        match self.k {
            1 => self.solve_1d(received),
            2 => self.solve_2d(received),
            _ => unreachable!("source dimension is always 1 or 2"),
        }
    }

    fn solve_1d(&self, received: &[f64]) -> Option<([f64; 2], f64)> {
        let mut lo: f64 = -1.0;
        let mut hi: f64 = self.domain_hi;
        for c in &self.constraints {
            let a = c.coeff[0];
            if a.abs() < COEFF_EPS {
                if c.offset < -FEAS_TOL {
                    return None;
                }
                continue;
            }
            let bound = -c.offset / a;
            if a > 0.0 {
                lo = lo.max(bound);
            } else {
                hi = hi.min(bound);
            }
        }
        if lo > hi {
            if lo - hi > FEAS_TOL {
                return None;
            }
            let mid = 0.5 * (lo + hi);
            lo = mid;
            hi = mid;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((g, o), r) in self.gain.iter().zip(&self.offset).zip(received) {
            num += g[0] * (r - o);
            den += g[0] * g[0];
        }
        let u = if den > GAIN_EPS { num / den } else { 0.0 };
        let u = u.clamp(lo, hi).clamp(-1.0, self.domain_hi);
        let w = [u, 0.0];
        Some((w, self.rss(received, w)))
    }

    fn solve_2d(&self, received: &[f64]) -> Option<([f64; 2], f64)> {
        // Sign constraints plus the four sides of the source box.
        let hi = self.domain_hi;
        let mut cons: Vec<Constraint> = Vec::with_capacity(self.constraints.len() + 4);
        cons.extend_from_slice(&self.constraints);
        cons.push(Constraint { coeff: [1.0, 0.0], offset: 1.0 });
        cons.push(Constraint { coeff: [-1.0, 0.0], offset: hi });
        cons.push(Constraint { coeff: [0.0, 1.0], offset: 1.0 });
        cons.push(Constraint { coeff: [0.0, -1.0], offset: hi });

        let feasible = |w: [f64; 2]| {
            cons.iter()
                .all(|c| c.coeff[0] * w[0] + c.coeff[1] * w[1] + c.offset >= -FEAS_TOL)
        };

        // Unconstrained least squares via the 2x2 normal equations.
        let (mut m00, mut m01, mut m11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((g, o), r) in self.gain.iter().zip(&self.offset).zip(received) {
            let res = r - o;
            m00 += g[0] * g[0];
            m01 += g[0] * g[1];
            m11 += g[1] * g[1];
            b0 += g[0] * res;
            b1 += g[1] * res;
        }
        let det = m00 * m11 - m01 * m01;
        if det > GAIN_EPS {
            let w = [(m11 * b0 - m01 * b1) / det, (m00 * b1 - m01 * b0) / det];
            if feasible(w) {
                let w = [w[0].clamp(-1.0, hi), w[1].clamp(-1.0, hi)];
                return Some((w, self.rss(received, w)));
            }
        }

        // Interior optimum infeasible (or gain degenerate): the concave
        // quadratic attains its constrained maximum on the boundary, so
        // maximize along every active constraint line clipped by the rest.
        // Interval endpoints double as the vertex candidates.
        let mut best: Option<([f64; 2], f64)> = None;
        for (i, ci) in cons.iter().enumerate() {
            let n2 = ci.coeff[0] * ci.coeff[0] + ci.coeff[1] * ci.coeff[1];
            if n2 < COEFF_EPS {
                if ci.offset < -FEAS_TOL {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / n2.sqrt();
            let p = [-ci.offset * ci.coeff[0] / n2, -ci.offset * ci.coeff[1] / n2];
            let d = [-ci.coeff[1] * inv, ci.coeff[0] * inv];
            let mut tlo = f64::NEG_INFINITY;
            let mut thi = f64::INFINITY;
            let mut empty = false;
            for (j, cj) in cons.iter().enumerate() {
                if i == j {
                    continue;
                }
                let s = cj.coeff[0] * d[0] + cj.coeff[1] * d[1];
                let q = cj.coeff[0] * p[0] + cj.coeff[1] * p[1] + cj.offset;
                if s.abs() < COEFF_EPS {
                    if q < -FEAS_TOL {
                        empty = true;
                        break;
                    }
                } else if s > 0.0 {
                    tlo = tlo.max(-q / s);
                } else {
                    thi = thi.min(-q / s);
                }
            }
            if empty || tlo > thi + FEAS_TOL {
                continue;
            }
            if tlo > thi {
                let mid = 0.5 * (tlo + thi);
                tlo = mid;
                thi = mid;
            }
            let mut gd_res = 0.0;
            let mut gd2 = 0.0;
            for ((g, o), r) in self.gain.iter().zip(&self.offset).zip(received) {
                let gd = g[0] * d[0] + g[1] * d[1];
                let res = r - o - (g[0] * p[0] + g[1] * p[1]);
                gd_res += gd * res;
                gd2 += gd * gd;
            }
            let t = if gd2 > GAIN_EPS { gd_res / gd2 } else { 0.0 };
            let t = t.clamp(tlo, thi);
            if !t.is_finite() {
                continue;
            }
            let w = [
                (p[0] + t * d[0]).clamp(-1.0, hi),
                (p[1] + t * d[1]).clamp(-1.0, hi),
            ];
            let rss = self.rss(received, w);
            if best.as_ref().is_none_or(|&(_, b)| rss < b) {
                best = Some((w, rss));
            }
        }
        best
    }
}

fn check_observation(spec: &CodeSpec, obs: &ChannelObservation) -> Result<()> {
    if obs.received.len() != spec.codeword_len() {
        return Err(Error::InvalidInput(format!(
            "observation length {} does not match codeword length {} of {}",
            obs.received.len(),
            spec.codeword_len(),
            spec.id()
        )));
    }
    if !(obs.sigma2 >= 0.0 && obs.sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise variance must be finite and non-negative, got {}",
            obs.sigma2
        )));
    }
    Ok(())
}

/// Maximize the Gaussian log-likelihood over one segment's feasible region.
///
/// For `k = 1` the unconstrained optimum is closed-form and clamped to the
/// feasible interval; for `k = 2` the solver tries the unconstrained optimum
/// and otherwise maximizes along every constraint edge (vertices included as
/// edge-interval endpoints). Returns `None` when the region is empty.
pub fn segment_ml(seg: &AffineSegment, obs: &ChannelObservation) -> Option<DecodeResult> {
    assert_eq!(
        seg.gain.len(),
        obs.received.len(),
        "observation length does not match segment rows"
    );
    seg.solve(&obs.received).map(|(w, rss)| DecodeResult {
        estimate: w[..seg.k].to_vec(),
        log_likelihood: log_likelihood_from_rss(rss, obs.sigma2),
        segment_index: None,
    })
}

/// ML decoder with a precomputed segment table for one code spec.
///
/// The table is immutable after construction and can be shared freely across
/// threads; decoding is pure.
#[derive(Debug, Clone)]
pub struct MlDecoder {
    spec: CodeSpec,
    segments: Vec<AffineSegment>,
}

impl MlDecoder {
    pub fn new(spec: CodeSpec) -> Result<Self> {
        let segments = enumerate_segments(&spec)?;
        Ok(Self { spec, segments })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn segments(&self) -> &[AffineSegment] {
        &self.segments
    }

    /// Exact ML decode: the best feasible segment optimum, ties broken by the
    /// lowest segment index.
    pub fn decode(&self, obs: &ChannelObservation) -> Result<DecodeResult> {
        check_observation(&self.spec, obs)?;
        let mut best: Option<(f64, usize, [f64; 2])> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            if let Some((w, rss)) = seg.solve(&obs.received) {
                if best.as_ref().is_none_or(|&(b, _, _)| rss < b) {
                    best = Some((rss, i, w));
                }
            }
        }
        let (rss, index, w) = best.expect("segment regions cover the source domain");
        Ok(DecodeResult {
            estimate: w[..self.spec.k()].to_vec(),
            log_likelihood: log_likelihood_from_rss(rss, obs.sigma2),
            segment_index: Some(index),
        })
    }
}

/// One-shot ML decode; builds the segment table on the fly. Sweeps should
/// construct an [`MlDecoder`] once and reuse it.
pub fn ml_decode(spec: &CodeSpec, obs: &ChannelObservation) -> Result<DecodeResult> {
    MlDecoder::new(*spec)?.decode(obs)
}

/// Default oracle grid step: 1e-4 for scalar sources, 1e-3 per axis for
/// source pairs.
pub fn default_grid_step(spec: &CodeSpec) -> f64 {
    if spec.k() == 1 {
        1e-4
    } else {
        1e-3
    }
}

/// Brute-force likelihood search on a regular source grid.
///
/// Independent of the segment decomposition: every grid point is encoded
/// directly and compared against the observation. Intended as a verification
/// oracle; cost is `O((2/step)^k)` encodes.
pub fn grid_oracle(spec: &CodeSpec, obs: &ChannelObservation, step: f64) -> Result<DecodeResult> {
    check_observation(spec, obs)?;
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    let hi = spec.source_hi();
    let span = hi + 1.0;
    let steps_f = span / step;
    let m = if (steps_f - steps_f.round()).abs() < 1e-6 {
        steps_f.round() as usize + 1
    } else {
        steps_f.floor() as usize + 1
    };
    let grid = |i: usize| (-1.0 + i as f64 * step).min(hi);
    let mut buf = Vec::with_capacity(spec.codeword_len());
    let mut best_rss = f64::INFINITY;
    let mut best = vec![0.0; spec.k()];
    match spec.k() {
        1 => {
            for i in 0..m {
                let u = grid(i);
                buf.clear();
                encode_into(spec, &[u], &mut buf)?;
                let rss: f64 = buf.iter().zip(&obs.received).map(|(c, r)| (r - c) * (r - c)).sum();
                if rss < best_rss {
                    best_rss = rss;
                    best[0] = u;
                }
            }
        }
        2 => {
            for i in 0..m {
                let u = grid(i);
                for j in 0..m {
                    let v = grid(j);
                    buf.clear();
                    encode_into(spec, &[u, v], &mut buf)?;
                    let rss: f64 =
                        buf.iter().zip(&obs.received).map(|(c, r)| (r - c) * (r - c)).sum();
                    if rss < best_rss {
                        best_rss = rss;
                        best[0] = u;
                        best[1] = v;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(DecodeResult {
        estimate: best,
        log_likelihood: log_likelihood_from_rss(best_rss, obs.sigma2),
        segment_index: None,
    })
}

/// Genie-aided tent decoding: invert the received last parity back to the
/// source using the true symbolic coding as side information.
///
/// Each inverse step contracts the channel perturbation by `1/beta`, so the
/// estimate error variance shrinks geometrically in the orbit length. The
/// received value and every intermediate state are clamped into the map
/// domain; the final estimate is clamped into `[-1, 1]`.
pub fn genie_decode_tent(
    obs: &ChannelObservation,
    signs: &SymbolicCoding,
    spec: &CodeSpec,
) -> Result<f64> {
    let CodeSpec::Tent { n, beta } = *spec else {
        return Err(Error::InvalidInput(format!(
            "genie decoding needs a tent spec, got {}",
            spec.family_name()
        )));
    };
    check_observation(spec, obs)?;
    if signs.len() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "symbolic coding length {} does not match n - 1 = {}",
            signs.len(),
            n - 1
        )));
    }
    let hi = beta.x_max();
    let mut x = obs.received[n - 1].clamp(-1.0, hi);
    for i in (0..n - 1).rev() {
        x = map::tent_inverse(x, signs[i], beta)?.clamp(-1.0, hi);
    }
    Ok(x.clamp(-1.0, 1.0))
}
