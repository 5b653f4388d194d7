//! Adaptive rejection sampling for log-concave densities (tangent upper
//! hull, chord squeeze).

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Maximum number of tangent points kept in the hull.
pub const MAX_HULL_POINTS: usize = 64;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An unnormalized log-concave density together with its derivative.
#[derive(Clone)]
pub struct LogConcaveTarget {
    log_density: Evaluator,
    derivative: Evaluator,
    lower: f64,
    upper: f64,
    hint: Option<f64>,
}

impl fmt::Debug for LogConcaveTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogConcaveTarget")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("hint", &self.hint)
            .finish_non_exhaustive()
    }
}

impl LogConcaveTarget {
    /// `lower` and `upper` may be infinite; the density is evaluated only
    /// strictly inside the interval.
    pub fn new<F, D>(log_density: F, derivative: D, lower: f64, upper: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lower < upper) || lower.is_nan() || upper.is_nan() {
            return Err(Error::Domain(format!("empty domain ({lower}, {upper})")));
        }
        Ok(LogConcaveTarget {
            log_density: Arc::new(log_density),
            derivative: Arc::new(derivative),
            lower,
            upper,
            hint: None,
        })
    }

    /// A starting abscissa near the bulk of the density.
    pub fn with_hint(mut self, x: f64) -> Self {
        if x > self.lower && x < self.upper {
            self.hint = Some(x);
        }
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn log_density(&self, x: f64) -> f64 {
        (self.log_density)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    fn start(&self) -> f64 {
        if let Some(h) = self.hint {
            return h;
        }
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => 0.5 * (self.lower + self.upper),
            (true, false) => self.lower + 1.0_f64.max(self.lower.abs()),
            (false, true) => self.upper - 1.0_f64.max(self.upper.abs()),
            (false, false) => 0.0,
        }
    }

    /// Moves `x` a distance `step` towards `+inf` (`dir > 0`) or `-inf`,
    /// never leaving the domain: near a finite edge the move halves the
    /// remaining gap instead.
    fn advance(&self, x: f64, step: f64, dir: f64) -> f64 {
        if dir > 0.0 {
            if self.upper.is_finite() && x + step >= self.upper {
                x + 0.5 * (self.upper - x)
            } else {
                x + step
            }
        } else if self.lower.is_finite() && x - step <= self.lower {
            x - 0.5 * (x - self.lower)
        } else {
            x - step
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tangent {
    x: f64,
    h: f64,
    d: f64,
}

impl Tangent {
    fn at(&self, x: f64) -> f64 {
        self.h + self.d * (x - self.x)
    }
}

#[derive(Debug, Clone, Copy)]
struct HullSegment {
    a: f64,
    b: f64,
    tangent: usize,
    log_mass: f64,
}

/// Adaptive rejection sampler; the hull refines itself as draws are made.
#[derive(Debug, Clone)]
pub struct AdaptiveRejectionSampler {
    target: LogConcaveTarget,
    points: Vec<Tangent>,
    segments: Vec<HullSegment>,
    cumulative: Vec<f64>,
    proposals: u64,
    accepted: u64,
}

impl AdaptiveRejectionSampler {
    pub fn new(target: LogConcaveTarget) -> Result<Self> {
        let xs = initial_abscissae(&target)?;
        let mut points = Vec::with_capacity(MAX_HULL_POINTS);
        for x in xs {
            let h = target.log_density(x);
            let d = target.derivative(x);
            if !h.is_finite() || !d.is_finite() {
                return Err(Error::Envelope(format!("non-finite log density or slope at {x}")));
            }
            points.push(Tangent { x, h, d });
        }
        points.sort_by(|p, q| p.x.total_cmp(&q.x));
        points.dedup_by(|p, q| p.x == q.x);
        let mut sampler = AdaptiveRejectionSampler {
            target,
            points,
            segments: Vec::new(),
            cumulative: Vec::new(),
            proposals: 0,
            accepted: 0,
        };
        sampler.rebuild()?;
        Ok(sampler)
    }

    pub fn target(&self) -> &LogConcaveTarget {
        &self.target
    }

    pub fn hull_size(&self) -> usize {
        self.points.len()
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        let (lo, hi) = self.target.domain();
        let pts = &self.points;
        if pts.is_empty() {
            return Err(Error::Envelope("no hull points".into()));
        }
        if !lo.is_finite() && pts[0].d <= 0.0 {
            return Err(Error::Envelope("no abscissa with positive slope".into()));
        }
        if !hi.is_finite() && pts[pts.len() - 1].d >= 0.0 {
            return Err(Error::Envelope("no abscissa with negative slope".into()));
        }
        let mut cuts = Vec::with_capacity(pts.len() + 1);
        cuts.push(lo);
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let z = if (p.d - q.d).abs() <= 1e-12 * (p.d.abs() + q.d.abs()) {
                0.5 * (p.x + q.x)
            } else {
                (q.h - p.h - q.x * q.d + p.x * p.d) / (p.d - q.d)
            };
            cuts.push(z.clamp(p.x, q.x));
        }
        cuts.push(hi);

        self.segments.clear();
        for (i, p) in pts.iter().enumerate() {
            let (a, b) = (cuts[i], cuts[i + 1]);
            self.segments.push(HullSegment { a, b, tangent: i, log_mass: segment_log_mass(p, a, b) });
        }
        let max = self.segments.iter().map(|s| s.log_mass).fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Envelope("hull has no finite mass".into()));
        }
        self.cumulative.clear();
        let mut total = 0.0;
        for s in &self.segments {
            total += (s.log_mass - max).exp();
            self.cumulative.push(total);
        }
        for c in &mut self.cumulative {
            *c /= total;
        }
        Ok(())
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c < u).min(self.segments.len() - 1);
        let seg = self.segments[idx];
        let p = self.points[seg.tangent];
        let v: f64 = open01(rng);
        let width = seg.b - seg.a;
        let x = if p.d.abs() * width.min(1e300) < 1e-12 && width.is_finite() {
            seg.a + v * width
        } else if p.d > 0.0 {
            seg.b + (-v * -(-p.d * width).exp_m1()).ln_1p() / p.d
        } else {
            seg.a + (-v * -(p.d * width).exp_m1()).ln_1p() / p.d
        };
        let x = x.clamp(seg.a, seg.b);
        (x, p.at(x))
    }

    fn squeeze(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|p| p.x <= x);
        if i == 0 || i == self.points.len() {
            return f64::NEG_INFINITY;
        }
        let (p, q) = (self.points[i - 1], self.points[i]);
        p.h + (q.h - p.h) * (x - p.x) / (q.x - p.x)
    }

    fn insert(&mut self, x: f64, h: f64) -> Result<()> {
        if self.points.len() >= MAX_HULL_POINTS || !h.is_finite() {
            return Ok(());
        }
        let d = self.target.derivative(x);
        if !d.is_finite() {
            return Ok(());
        }
        let i = self.points.partition_point(|p| p.x < x);
        if i < self.points.len() && self.points[i].x == x {
            return Ok(());
        }
        let (lo, hi) = self.target.domain();
        if x <= lo || x >= hi {
            return Ok(());
        }
        self.points.insert(i, Tangent { x, h, d });
        self.rebuild()
    }

    /// One exact draw from the normalized target.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        for _ in 0..100_000 {
            self.proposals += 1;
            let (x, upper) = self.propose(rng);
            let log_w = open01(rng).ln();
            if log_w <= self.squeeze(x) - upper {
                self.accepted += 1;
                return Ok(x);
            }
            let h = self.target.log_density(x);
            if log_w <= h - upper {
                self.accepted += 1;
                self.insert(x, h)?;
                return Ok(x);
            }
            self.insert(x, h)?;
        }
        Err(Error::Envelope("rejection loop did not terminate".into()))
    }
}

/// Uniform on the open interval (0, 1).
pub(crate) fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn segment_log_mass(p: &Tangent, a: f64, b: f64) -> f64 {
    let width = b - a;
    if width <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p.d == 0.0 || (width.is_finite() && (p.d * width).abs() < 1e-12) {
        return p.at(0.5 * (a + b)) + width.ln();
    }
    if p.d > 0.0 {
        p.at(b) + (-(-p.d * width).exp_m1()).ln() - p.d.ln()
    } else {
        p.at(a) + (-(p.d * width).exp_m1()).ln() - (-p.d).ln()
    }
}

/// Picks three starting abscissae around the mode at roughly one unit of
/// log-density drop on each side.
fn initial_abscissae(target: &LogConcaveTarget) -> Result<Vec<f64>> {
    let (lo, hi) = target.domain();
    let x0 = target.start();
    let d0 = target.derivative(x0);
    if !d0.is_finite() {
        return Err(Error::Envelope(format!("non-finite slope at start point {x0}")));
    }

    // Bracket the mode by walking uphill with doubling steps.
    let dir = if d0 > 0.0 { 1.0 } else { -1.0 };
    let mut step = 1.0_f64.max(x0.abs() * 0.1);
    let mut x = x0;
    let mut boundary_mode = None;
    let mut bracket = None;
    if d0 == 0.0 {
        bracket = Some((x0, x0));
    }
    while bracket.is_none() && boundary_mode.is_none() {
        let next = target.advance(x, step, dir);
        let d = target.derivative(next);
        if d.is_finite() && d * dir <= 0.0 {
            bracket = Some(if dir > 0.0 { (x, next) } else { (next, x) });
            break;
        }
        let edge = if dir > 0.0 { hi } else { lo };
        if (next - x).abs() <= 1e-14 * (1.0 + next.abs()) {
            if edge.is_finite() {
                boundary_mode = Some(edge);
                break;
            }
            return Err(Error::Envelope("could not bracket the mode".into()));
        }
        if !edge.is_finite() && next.abs() > 1e300 {
            return Err(Error::Envelope("could not bracket the mode".into()));
        }
        x = next;
        step *= 2.0;
    }

    if let Some(edge) = boundary_mode {
        // Monotone density: mode at a finite edge.
        let inward = if edge == lo { 1.0 } else { -1.0 };
        let anchor = x;
        let s = drop_scale(target, anchor, inward)?;
        let dist = (anchor - edge).abs() + s;
        return Ok([0.25, 1.0, 2.0]
            .iter()
            .map(|f| interior(target, edge + inward * f * dist))
            .collect());
    }

    let (mut a, mut b) = bracket.expect("mode bracketed");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if target.derivative(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let mode = 0.5 * (a + b);
    let mut xs = vec![mode];
    for dir in [-1.0, 1.0] {
        let edge = if dir > 0.0 { hi } else { lo };
        if edge.is_finite() && (edge - mode).abs() <= 1e-12 * (1.0 + mode.abs()) {
            continue;
        }
        let s = drop_scale(target, mode, dir)?;
        xs.push(interior(target, mode + dir * s));
    }
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// Keeps a candidate strictly inside the domain.
fn interior(target: &LogConcaveTarget, x: f64) -> f64 {
    let (lo, hi) = target.domain();
    if x <= lo {
        lo + 0.5 * (hi.min(lo + 1.0) - lo) * 1e-3
    } else if x >= hi {
        hi - 0.5 * (hi - lo.max(hi - 1.0)) * 1e-3
    } else {
        x
    }
}

/// Distance from `anchor` in direction `dir` over which the log density
/// falls by about one unit (stopping at the domain edge).
fn drop_scale(target: &LogConcaveTarget, anchor: f64, dir: f64) -> Result<f64> {
    let h0 = target.log_density(anchor);
    if !h0.is_finite() {
        return Err(Error::Envelope(format!("non-finite log density at {anchor}")));
    }
    let d0 = target.derivative(anchor).abs();
    let mut s = if d0 > 1e-8 { 1.0 / d0 } else { 1.0_f64.max(anchor.abs() * 1e-2) };
    let drop = |s: f64| h0 - target.log_density(target.advance(anchor, s, dir));
    let mut grow = 0;
    while drop(s) < 1.0 && grow < 200 {
        let reached = target.advance(anchor, s, dir);
        let edge = if dir > 0.0 { target.upper } else { target.lower };
        if edge.is_finite() && (edge - reached).abs() < 1e-12 * (1.0 + edge.abs()) {
            break;
        }
        s *= 2.0;
        grow += 1;
    }
    let mut shrink = 0;
    while drop(0.5 * s) >= 1.0 && shrink < 200 {
        s *= 0.5;
        shrink += 1;
    }
    let x = target.advance(anchor, s, dir);
    Ok((x - anchor).abs())
}

/// One draw from a log-concave target (builds a fresh hull each call).
pub fn sample_log_concave<R: Rng + ?Sized>(target: LogConcaveTarget, rng: &mut R) -> Result<f64> {
    AdaptiveRejectionSampler::new(target)?.sample(rng)
}
