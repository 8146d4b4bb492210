//! Closed-form model: residual channel, logical readout error, connection
//! statistics, threshold condition and resource overheads.
//!
//! Every function is generic over [`Real`]; see the `*64`/`*32` aliases at
//! the crate root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::steane::Basis;

/// Validated range of the physical error rate for the leading-order formulas.
pub const P_VALIDATED_MAX: f64 = 0.05;
/// Surface-code threshold used for the verdict.
pub const SURFACE_THRESHOLD: f64 = 0.033;
/// Conservative end of the quoted surface-code threshold range.
pub const SURFACE_THRESHOLD_CONSERVATIVE: f64 = 0.029;
/// Number of links each root has to make in the 3D lattice.
pub const LINKS_PER_ROOT: usize = 4;
/// Largest leaf count scanned by [`AnalyticModel::choose_leaves`].
pub const MAX_LEAVES: usize = 50;

/// Residual error rates per unit `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRatios<T> {
    pub r_x: T,
    pub r_y: T,
    pub r_z: T,
}

impl<T: Real> Default for ChannelRatios<T> {
    fn default() -> Self {
        Self {
            r_x: T::lit(1.0 / 15.0),
            r_y: T::lit(1.0 / 15.0),
            r_z: T::lit(2.0 / 15.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingChannel<T> {
    pub eps_x: T,
    pub eps_y: T,
    pub eps_z: T,
    /// `p` lies in the range where the leading-order form was checked.
    pub validated: bool,
}

impl<T: Real> LeadingChannel<T> {
    pub fn total(&self) -> T {
        self.eps_x + self.eps_y + self.eps_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport<T> {
    pub p: T,
    pub leaves: usize,
    pub tau: T,
    pub p_q0: T,
    pub p_q1: T,
    pub p_s: T,
    pub p_fail: T,
    pub q: T,
    pub threshold: T,
    pub margin: T,
    pub verdict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate<T> {
    pub omega: T,
    pub p: T,
    pub q: T,
    pub kappa: T,
    pub r: T,
    pub n: T,
    pub k: T,
    pub c: T,
    pub cr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafChoice {
    /// Smallest admissible leaf count meeting the failure target.
    pub leaves: usize,
    /// Leaf count minimising `q` over the scanned range.
    pub q_minimizing: usize,
}

/// Model parameters; `Default` gives the standard settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModel<T> {
    pub ratios: ChannelRatios<T>,
    pub threshold: T,
    /// Multiplies `R`; 1 evaluates the formula as written.
    pub kappa_prefactor: T,
}

impl<T: Real> Default for AnalyticModel<T> {
    fn default() -> Self {
        Self {
            ratios: ChannelRatios::default(),
            threshold: T::lit(SURFACE_THRESHOLD),
            kappa_prefactor: T::one(),
        }
    }
}

/// `f(x) = 1 - (1-x)^7 - 7x(1-x)^6`: probability that a weight-1 decoder
/// fails on seven independent flips of rate `x`.
///
/// Evaluated as the tail `sum_{k>=2} C(7,k) x^k (1-x)^(7-k)`, which avoids
/// the cancellation of the three-term form at small `x`.
pub fn f_steane<T: Real>(x: T) -> T {
    const C7: [f64; 8] = [1.0, 7.0, 21.0, 35.0, 35.0, 21.0, 7.0, 1.0];
    let y = T::one() - x;
    (2..=7).fold(T::zero(), |acc, k| {
        acc + T::lit(C7[k]) * x.powi(k as i32) * y.powi(7 - k as i32)
    })
}

/// Measurement flip rate `4p/15`.
pub fn p_meas<T: Real>(p: T) -> T {
    T::lit(4.0 / 15.0) * p
}

/// Two-qubit gate error rate visible to a transversal X readout, `4p/5`.
pub fn p_gate<T: Real>(p: T) -> T {
    T::lit(0.8) * p
}

fn ln_choose<T: Real>(n: usize, k: usize) -> T {
    let k = k.min(n - k);
    (0..k).fold(T::zero(), |acc, i| {
        acc + (T::from_count(n - i) / T::from_count(i + 1)).ln()
    })
}

/// `x^k` that is exactly 1 at `k = 0`, in log space otherwise.
fn ln_pow<T: Real>(x: T, k: usize) -> T {
    if k == 0 {
        T::zero()
    } else {
        T::from_count(k) * x.ln()
    }
}

/// Probability that fewer than [`LINKS_PER_ROOT`] of `leaves` attempts succeed.
pub fn pfail<T: Real>(leaves: usize, p_s: T) -> Result<T> {
    if leaves <= LINKS_PER_ROOT {
        return Err(Error::InvalidParameter(format!(
            "the failure formula needs more than {LINKS_PER_ROOT} leaves, got {leaves}"
        )));
    }
    if !(T::zero()..=T::one()).contains(&p_s) {
        return Err(Error::InvalidParameter(format!(
            "success probability {p_s:?} outside [0, 1]"
        )));
    }
    let fail = T::one() - p_s;
    let sum = (0..LINKS_PER_ROOT).fold(T::zero(), |acc, k| {
        acc + (ln_choose::<T>(leaves, k) + ln_pow(p_s, k) + ln_pow(fail, leaves - k)).exp()
    });
    Ok(sum)
}

impl<T: Real> AnalyticModel<T> {
    pub fn leading_channel(&self, p: T) -> LeadingChannel<T> {
        LeadingChannel {
            eps_x: self.ratios.r_x * p,
            eps_y: self.ratios.r_y * p,
            eps_z: self.ratios.r_z * p,
            validated: p >= T::zero() && p <= T::lit(P_VALIDATED_MAX),
        }
    }

    /// Physical flip rate of a transversal readout of a verified block,
    /// after `tau` units of waiting.
    pub fn pq0(&self, p: T, basis: Basis, tau: T) -> T {
        let c = self.leading_channel(p);
        let residual = match basis {
            Basis::X => c.eps_z + c.eps_y,
            Basis::Z => c.eps_x + c.eps_y,
            Basis::Y => c.eps_x + c.eps_z,
        };
        residual + p_meas(p) + tau * p
    }

    pub fn pq1(&self, p: T, basis: Basis, tau: T) -> T {
        f_steane(self.pq0(p, basis, tau))
    }

    /// `(1 - p_G)^7 (1 - eps)^14 (1 - p_M)^14`.
    pub fn ps(&self, p: T) -> T {
        let one = T::one();
        let c = self.leading_channel(p);
        (one - p_gate(p)).powi(7) * (one - c.total()).powi(14) * (one - p_meas(p)).powi(14)
    }

    pub fn q_of_p(&self, p: T, leaves: usize, tau: T) -> Result<ThresholdReport<T>> {
        if p < T::zero() || p > T::one() || tau < T::zero() {
            return Err(Error::InvalidParameter(format!("p = {p:?}, tau = {tau:?}")));
        }
        let p_q0 = self.pq0(p, Basis::X, tau);
        let p_q1 = f_steane(p_q0);
        let p_s = self.ps(p);
        let p_fail = pfail(leaves, p_s)?;
        let q = p_q1 * (T::one() + T::from_count(leaves)) + p_fail;
        let margin = self.threshold - q;
        Ok(ThresholdReport {
            p,
            leaves,
            tau,
            p_q0,
            p_q1,
            p_s,
            p_fail,
            q,
            threshold: self.threshold,
            margin,
            verdict: margin > T::zero(),
        })
    }

    pub fn choose_leaves(&self, p: T, target_pfail: T) -> Result<LeafChoice> {
        if target_pfail <= T::zero() {
            return Err(Error::InvalidParameter(
                "failure target must be positive".into(),
            ));
        }
        let p_s = self.ps(p);
        let mut leaves = None;
        let mut best = (T::infinity(), LINKS_PER_ROOT + 1);
        for l in LINKS_PER_ROOT + 1..=MAX_LEAVES {
            if leaves.is_none() && pfail(l, p_s)? <= target_pfail {
                leaves = Some(l);
            }
            let q = self.q_of_p(p, l, T::zero())?.q;
            if q < best.0 {
                best = (q, l);
            }
        }
        match leaves {
            Some(leaves) => Ok(LeafChoice {
                leaves,
                q_minimizing: best.1,
            }),
            None => Err(Error::NoLeafCount {
                max: MAX_LEAVES,
                target: target_pfail.to_f64_lossy(),
            }),
        }
    }

    /// `kappa = |ln 4q| / 2`.
    pub fn kappa(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q < T::lit(0.25)) {
            return Err(Error::KappaUndefined(q.to_f64_lossy()));
        }
        Ok((T::lit(4.0) * q).ln().abs() / T::lit(2.0))
    }

    /// `R = [ln(10 Omega) / kappa]^3`, `C = N (1-p)^-K`, `CR = C R`.
    pub fn resources(&self, p: T, q: T, omega: T, n: T, k: T) -> Result<ResourceEstimate<T>> {
        if omega <= T::one() {
            return Err(Error::InvalidParameter(format!(
                "computation size {omega:?} must exceed 1"
            )));
        }
        if !(p >= T::zero() && p < T::one()) {
            return Err(Error::InvalidParameter(format!("p = {p:?}")));
        }
        let kappa = self.kappa(q)?;
        let r = self.kappa_prefactor * ((T::lit(10.0) * omega).ln() / kappa).powi(3);
        let c = n * (T::one() - p).powf(-k);
        Ok(ResourceEstimate {
            omega,
            p,
            q,
            kappa,
            r,
            n,
            k,
            c,
            cr: c * r,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> AnalyticModel<f64> {
        AnalyticModel::default()
    }

    #[test]
    fn f_endpoints() {
        assert_eq!(f_steane(0.0f64), 0.0);
        assert_relative_eq!(f_steane(1.0f64), 1.0);
    }

    #[test]
    fn f_matches_the_three_term_form() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let three = 1.0 - (1.0 - x).powi(7) - 7.0 * x * (1.0 - x).powi(6);
            assert!((f_steane(x) - three).abs() < 1e-12);
        }
    }

    #[test]
    fn readout_rates() {
        let m = model();
        assert_relative_eq!(
            m.pq0(0.01, Basis::X, 0.0),
            7.0 / 15.0 * 0.01,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            m.pq0(0.01, Basis::X, 1.0),
            (7.0 / 15.0 + 1.0) * 0.01,
            max_relative = 1e-12
        );
        assert!(m.pq0(0.01, Basis::Z, 0.0) < m.pq0(0.01, Basis::X, 0.0));
        // 21 x^2 = 4.57e-4 is the leading term; the full value is lower.
        assert_relative_eq!(f_steane(0.0046667), 4.5028e-4, max_relative = 1e-4);
        assert_relative_eq!(21.0 * 0.0046667f64.powi(2), 4.57e-4, max_relative = 1e-3);
    }

    #[test]
    fn channel_ratios() {
        let c = model().leading_channel(0.015);
        assert_relative_eq!(c.eps_x, 0.001, max_relative = 1e-12);
        assert_relative_eq!(c.eps_y, 0.001, max_relative = 1e-12);
        assert_relative_eq!(c.eps_z, 0.002, max_relative = 1e-12);
        assert!(!model().leading_channel(0.06).validated);
    }

    #[test]
    fn pfail_limits() {
        assert_eq!(pfail(7, 1.0f64).unwrap(), 0.0);
        assert_relative_eq!(pfail(7, 0.0f64).unwrap(), 1.0);
        assert!(pfail(4, 0.9f64).is_err());
    }

    #[test]
    fn pfail_survives_large_leaf_counts() {
        let v = pfail(2000, 0.5f64).unwrap();
        assert!(v.is_finite() && v >= 0.0 && v < 1e-300);
    }

    #[test]
    fn kappa_domain() {
        assert!(model().kappa(0.25).is_err());
        assert!(model().kappa(0.0).is_err());
        assert!(model().kappa(0.1).unwrap() > 0.0);
    }

    #[test]
    fn single_precision_tracks_double() {
        let a = AnalyticModel::<f32>::default()
            .q_of_p(0.01, 7, 0.0)
            .unwrap();
        let b = model().q_of_p(0.01, 7, 0.0).unwrap();
        assert_relative_eq!(a.q as f64, b.q, max_relative = 1e-5);
    }
}
