//! Point estimators of the discovery probabilities `D_n(l)` and the
//! posterior moments of `Q(A_l)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_sigma, domain, Error, Result};
use crate::gibbs_weights::{self, weight_ratios, PriorSpec};
use crate::special_fn::{lgamma, ln_pochhammer, signed_log_sum, SignedLog};
use crate::summary::SampleSummary;

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    GoodTuring,
    SmoothedGoodTuring,
    FirstOrder,
    SecondOrder,
}

impl EstimateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::GoodTuring => "good_turing",
            EstimateMethod::SmoothedGoodTuring => "smoothed_good_turing",
            EstimateMethod::FirstOrder => "first_order",
            EstimateMethod::SecondOrder => "second_order",
        }
    }
}

/// An equal-tailed credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// A point estimate of `D_n(l)`, optionally with a credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryEstimate {
    pub l: u64,
    pub value: f64,
    pub method: EstimateMethod,
    pub interval: Option<Interval>,
}

impl DiscoveryEstimate {
    fn new(l: u64, value: f64, method: EstimateMethod) -> Self {
        DiscoveryEstimate { l, value: value.clamp(0.0, 1.0), method, interval: None }
    }

    /// Attaches an interval, widening it if needed so it contains the
    /// point estimate.
    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = Some(Interval {
            lo: interval.lo.min(self.value),
            hi: interval.hi.max(self.value),
            level: interval.level,
        });
        self
    }
}

/// A measurable set described by the two quantities the posterior moments
/// depend on: its base-measure mass `nu0_mass` and
/// `mu_mass = sum over observed species in the set of (n_i - sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub nu0_mass: f64,
    pub mu_mass: f64,
}

impl EventSpec {
    pub fn new(nu0_mass: f64, mu_mass: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu0_mass) {
            return Err(domain(format!("base-measure mass must be in [0, 1], got {nu0_mass}")));
        }
        if !(mu_mass >= 0.0) {
            return Err(domain(format!("tied mass must be nonnegative, got {mu_mass}")));
        }
        Ok(EventSpec { nu0_mass, mu_mass })
    }

    /// The set of species not yet observed.
    pub fn unseen() -> Self {
        EventSpec { nu0_mass: 1.0, mu_mass: 0.0 }
    }

    /// The set of species observed exactly `l` times.
    pub fn seen_exactly(s: &SampleSummary, sigma: f64, l: u64) -> Self {
        EventSpec { nu0_mass: 0.0, mu_mass: (l as f64 - sigma) * s.m(l) as f64 }
    }

    /// The whole space.
    pub fn everything(s: &SampleSummary, sigma: f64) -> Self {
        EventSpec { nu0_mass: 1.0, mu_mass: s.n() as f64 - sigma * s.k() as f64 }
    }
}

fn check_l(s: &SampleSummary, l: u64) -> Result<()> {
    if l > s.n() {
        return Err(domain(format!("l must not exceed n = {}, got {l}", s.n())));
    }
    Ok(())
}

/// Bayesian nonparametric estimate: `V_{n+1,k+1}/V_{n,k}` for `l = 0` and
/// `(l - sigma) m_l V_{n+1,k}/V_{n,k}` for `l >= 1`.
pub fn bnp_discovery(s: &SampleSummary, prior: &PriorSpec, l: u64) -> Result<DiscoveryEstimate> {
    check_l(s, l)?;
    if l > 0 && s.m(l) == 0 {
        return Ok(DiscoveryEstimate::new(l, 0.0, EstimateMethod::Exact));
    }
    let ratios = weight_ratios(s.n(), s.k(), prior)?;
    let value = if l == 0 { ratios.g0 } else { (l as f64 - prior.sigma()) * s.m(l) as f64 * ratios.g1 };
    Ok(DiscoveryEstimate::new(l, value, EstimateMethod::Exact))
}

/// Good–Turing estimate `(l + 1) m_{l+1} / n`.
pub fn good_turing(s: &SampleSummary, l: u64) -> Result<DiscoveryEstimate> {
    if l >= s.n() {
        return Err(domain(format!("l must be below n = {}, got {l}", s.n())));
    }
    let value = (l + 1) as f64 * s.m(l + 1) as f64 / s.n() as f64;
    Ok(DiscoveryEstimate::new(l, value, EstimateMethod::GoodTuring))
}

/// Good–Turing with the counts replaced by
/// `m'_l = sigma (1 - sigma)_{l-1} k / l!`, which gives
/// `sigma (1 - sigma)_l k / (l! n)`.
pub fn smoothed_good_turing(s: &SampleSummary, sigma: f64, l: u64) -> Result<DiscoveryEstimate> {
    check_sigma(sigma)?;
    let ln_value = sigma.ln() + ln_pochhammer(1.0 - sigma, l).log_abs() + (s.k() as f64).ln()
        - lgamma(l as f64 + 1.0)
        - (s.n() as f64).ln();
    Ok(DiscoveryEstimate::new(l, ln_value.exp(), EstimateMethod::SmoothedGoodTuring))
}

/// Large-sample approximation `sigma k / n` (`l = 0`) and
/// `(l - sigma) m_l / n` (`l >= 1`).
pub fn first_order(s: &SampleSummary, sigma: f64, l: u64) -> Result<DiscoveryEstimate> {
    check_sigma(sigma)?;
    check_l(s, l)?;
    let n = s.n() as f64;
    let value = if l == 0 { sigma * s.k() as f64 / n } else { (l as f64 - sigma) * s.m(l) as f64 / n };
    Ok(DiscoveryEstimate::new(l, value, EstimateMethod::FirstOrder))
}

/// First-order approximation plus the prior-specific correction:
/// `theta / n` for Pitman–Yor and `tau k^(-1/sigma)` for generalized gamma.
pub fn second_order(s: &SampleSummary, prior: &PriorSpec, l: u64) -> Result<DiscoveryEstimate> {
    check_l(s, l)?;
    let sigma = prior.sigma();
    let n = s.n() as f64;
    let k = s.k() as f64;
    let shift = match prior {
        PriorSpec::PitmanYor { theta, .. } => theta / n,
        PriorSpec::GeneralizedGamma { tau, .. } => tau * k.powf(-1.0 / sigma),
        PriorSpec::Generic { .. } => return Err(Error::UnsupportedPrior("second-order approximation")),
    };
    let value = if l == 0 {
        sigma * k / n + shift
    } else {
        (l as f64 - sigma) * s.m(l) as f64 / n * (1.0 - shift)
    };
    Ok(DiscoveryEstimate::new(l, value, EstimateMethod::SecondOrder))
}

/// Decimal digits the alternating moment sum may lose.
pub const MAX_MOMENT_LOST_DIGITS: f64 = 6.0;

/// `E[Q(A_l)^r | X]`.
///
/// Pitman–Yor moments come from the Beta laws of the posterior. Otherwise
/// `l >= 1` uses `V_{n+r,k}/V_{n,k} ((l - sigma) m_l)_r` and `l = 0` the
/// alternating sum `sum_i C(r,i) (-1)^i V_{n+i,k}/V_{n,k} (n - sigma k)_i`,
/// which is refused with a cancellation error when it would lose more
/// than six digits. Generic priors, whose weights carry Monte Carlo noise,
/// use the all-positive form of [`general_moment`] for `l = 0`.
pub fn posterior_moment(s: &SampleSummary, prior: &PriorSpec, l: u64, r: u32) -> Result<f64> {
    check_l(s, l)?;
    if r == 0 {
        return Err(domain("moment order must be at least 1"));
    }
    let sigma = prior.sigma();
    let (n, k) = (s.n(), s.k());
    let tied = (l as f64 - sigma) * s.m(l) as f64;
    if l > 0 && s.m(l) == 0 {
        return Ok(0.0);
    }
    let r64 = r as u64;
    if let PriorSpec::PitmanYor { theta, .. } = prior {
        let top = if l == 0 { theta + sigma * k as f64 } else { tied };
        return Ok((ln_pochhammer(top, r64) / ln_pochhammer(theta + n as f64, r64)).to_f64());
    }
    if l > 0 {
        let ln_ratio = prior.ln_weight(n + r64, k)? - prior.ln_weight(n, k)?;
        return Ok((SignedLog::from_ln(ln_ratio) * ln_pochhammer(tied, r64)).to_f64().clamp(0.0, 1.0));
    }
    if let PriorSpec::Generic { .. } = prior {
        return general_moment(s, prior, EventSpec::unseen(), r);
    }
    let base = prior.ln_weight(n, k)?;
    let free = n as f64 - sigma * k as f64;
    let mut terms = Vec::with_capacity(r as usize + 1);
    for i in 0..=r64 {
        let ln_binom = lgamma(r as f64 + 1.0) - lgamma(i as f64 + 1.0) - lgamma((r64 - i) as f64 + 1.0);
        let ln_v = prior.ln_weight(n + i, k)? - base;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let term = SignedLog::new(sign, ln_binom + ln_v) * ln_pochhammer(free, i);
        terms.push(term);
    }
    let magnitude = signed_log_sum(terms.iter().map(|t| SignedLog::from_ln(t.log_abs())));
    let sum = signed_log_sum(terms.iter().copied());
    let lost = if sum.sign() > 0 {
        (magnitude.log_abs() - sum.log_abs()) / std::f64::consts::LN_10
    } else {
        f64::INFINITY
    };
    if lost > MAX_MOMENT_LOST_DIGITS {
        return Err(Error::Cancellation { context: format!("posterior moment of order {r} for l = 0"), lost_digits: lost });
    }
    if let PriorSpec::GeneralizedGamma { sigma, tau } = *prior {
        // The same sum taken inside the integral: with u = x/(tau+x) the
        // alternating polynomial equals sum_j C(r,j) (sigma k)_j/(n)_j
        // u^j (1-u)^(r-j), whose terms are all positive.
        let mut coefficients = Vec::with_capacity(r as usize + 1);
        let mut c = 1.0;
        for j in 0..=r64 {
            coefficients.push(c);
            c *= (r64 - j) as f64 / (j + 1) as f64 * (sigma * k as f64 + j as f64) / (n + j) as f64;
        }
        let polynomial = |u: f64| {
            let v = 1.0 - u;
            coefficients.iter().enumerate().map(|(j, c)| c * u.powi(j as i32) * v.powi((r64 - j as u64) as i32)).sum::<f64>()
        };
        let value = gibbs_weights::gg_latent_average(n, k, sigma, tau, polynomial)?;
        return Ok(value.clamp(0.0, 1.0));
    }
    Ok(sum.to_f64().clamp(0.0, 1.0))
}

/// Coefficients `W(i)` of the moment formula: the sum, over orderings of
/// `r` further draws of which `i` are new species, of the products of the
/// tied masses met along the way. A new species adds `1 - sigma` to the
/// tied mass, a tie adds one.
fn tie_products(mu: f64, sigma: f64, r: usize) -> Vec<f64> {
    // w[a][b]: a new species and b ties so far
    let mut w = vec![vec![0.0; r + 1]; r + 1];
    w[0][0] = 1.0;
    for total in 1..=r {
        for a in 0..=total {
            let b = total - a;
            let mut v = 0.0;
            if a > 0 {
                v += w[a - 1][b];
            }
            if b > 0 {
                v += w[a][b - 1] * (mu + a as f64 * (1.0 - sigma) + (b - 1) as f64);
            }
            w[a][b] = v;
        }
    }
    (0..=r).map(|i| w[i][r - i]).collect()
}

/// `E[Q(A)^r | X]` for an arbitrary set `A`:
/// `sum_i V_{n+r,k+i}/V_{n,k} nu0(A)^i W_i(mu(A))`, with the `W_i` built
/// by the recursion over draw orderings (and `0^0 = 1`).
pub fn general_moment(s: &SampleSummary, prior: &PriorSpec, event: EventSpec, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(domain("moment order must be at least 1"));
    }
    let sigma = prior.sigma();
    let (n, k) = (s.n(), s.k());
    let free = n as f64 - sigma * k as f64;
    if event.mu_mass > free + 1e-12 * free.max(1.0) {
        return Err(domain(format!("tied mass {} exceeds n - sigma k = {free}", event.mu_mass)));
    }
    let coefficients = tie_products(event.mu_mass, sigma, r as usize);
    let base = prior.ln_weight(n, k)?;
    let r64 = r as u64;
    let mut terms = Vec::with_capacity(r as usize + 1);
    for (i, &c) in coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let nu = if i == 0 {
            0.0
        } else if event.nu0_mass == 0.0 {
            continue;
        } else {
            i as f64 * event.nu0_mass.ln()
        };
        let ln_v = prior.ln_weight(n + r64, k + i as u64)? - base;
        terms.push(SignedLog::from_ln(ln_v + nu + c.ln()));
    }
    Ok(signed_log_sum(terms).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_products_small() {
        // r = 1: one new species (coefficient 1) or one tie (mu)
        assert_eq!(tie_products(2.5, 0.5, 1), vec![2.5, 1.0]);
        // r = 2, mu = 0: only orderings starting with a new species survive
        let w = tie_products(0.0, 0.3, 2);
        assert_eq!(w[2], 1.0);
        assert!((w[1] - 0.7).abs() < 1e-15);
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn smoothed_examples() {
        let s = SampleSummary::with_totals(1000, 100, [(1, 100)]).unwrap();
        let v = smoothed_good_turing(&s, 0.5, 1).unwrap().value;
        assert!((v - 0.025).abs() < 1e-15);
        let first = first_order(&s, 0.5, 0).unwrap().value;
        assert!((smoothed_good_turing(&s, 0.5, 0).unwrap().value - first).abs() < 1e-15);
    }
}
