use super::AnalyticsError;
use crate::proto::majority;

/// What to do when the read-to-write lag `t'` comes out negative, which
/// happens whenever `μ > 2λ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LagPolicy {
    /// Refuse to evaluate anything that depends on `t'`.
    #[default]
    Refuse,
    /// Evaluate with `t'` clamped to 0.
    Clamp,
}

/// Inputs of the stochastic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// `N`, number of clients (queues).
    pub clients: usize,
    /// `n`, number of replicas.
    pub replicas: usize,
    /// `λ`, operation arrival rate per client.
    pub arrival_rate: f64,
    /// `μ`, operation service rate.
    pub service_rate: f64,
    /// `λr`, rate of the exponential read message delay.
    pub read_rate: f64,
    /// `λw`, rate of the exponential write message delay.
    pub write_rate: f64,
    pub lag_policy: LagPolicy,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            clients: 5,
            replicas: 5,
            arrival_rate: 10.0,
            service_rate: 10.0,
            read_rate: 20.0,
            write_rate: 20.0,
            lag_policy: LagPolicy::Refuse,
        }
    }
}

impl ModelParams {
    /// Defaults with `N = n = size`.
    pub fn square(size: usize) -> Self {
        ModelParams {
            clients: size,
            replicas: size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.clients < 2 {
            return Err(AnalyticsError::Domain(format!(
                "need N >= 2 clients, got {}",
                self.clients
            )));
        }
        if self.replicas < 2 {
            return Err(AnalyticsError::Domain(format!(
                "need n >= 2 replicas, got {}",
                self.replicas
            )));
        }
        for (name, v) in [
            ("arrival rate", self.arrival_rate),
            ("service rate", self.service_rate),
            ("read delay rate", self.read_rate),
            ("write delay rate", self.write_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(AnalyticsError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Quorum size `⌊n/2⌋ + 1`.
    pub fn quorum(&self) -> usize {
        majority(self.replicas)
    }

    /// `λr / (λw + λr)`.
    pub fn alpha(&self) -> f64 {
        self.read_rate / (self.write_rate + self.read_rate)
    }

    /// `P{D = 0} = ½(1 + (λ/(μ+λ))²)`.
    pub fn p0(&self) -> f64 {
        let x = self.arrival_rate / (self.service_rate + self.arrival_rate);
        0.5 * (1.0 + x * x)
    }

    /// `(2λ+μ)² / (2(μ+λ)²)`.
    pub fn r(&self) -> f64 {
        let (l, m) = (self.arrival_rate, self.service_rate);
        (2.0 * l + m).powi(2) / (2.0 * (m + l).powi(2))
    }

    /// `μ / (2(μ+λ))`.
    pub fn s(&self) -> f64 {
        self.service_rate / (2.0 * (self.service_rate + self.arrival_rate))
    }

    /// Lag between a write's start and a concurrent read's start, `1/λ`.
    pub fn t(&self) -> f64 {
        1.0 / self.arrival_rate
    }

    /// Expected lag from `r'` starting to `w` starting; may be negative.
    pub fn t_prime(&self) -> f64 {
        t_prime(self.arrival_rate, self.service_rate)
    }

    /// `t'` as used by the integrals, after applying the lag policy.
    pub fn effective_t_prime(&self) -> Result<f64, AnalyticsError> {
        let t = self.t_prime();
        match (t < 0.0, self.lag_policy) {
            (false, _) => Ok(t),
            (true, LagPolicy::Clamp) => Ok(0.0),
            (true, LagPolicy::Refuse) => Err(AnalyticsError::NegativeLag(t)),
        }
    }
}

/// `(2λ − μ) / (2λμ)`, the expected time from `r'` being issued to `w` being
/// issued.
pub fn t_prime(arrival_rate: f64, service_rate: f64) -> f64 {
    (2.0 * arrival_rate - service_rate) / (2.0 * arrival_rate * service_rate)
}

/// Expected gap from `r'` finishing to `r` starting, `1/(2λ)`.
pub fn read_gap(arrival_rate: f64) -> f64 {
    1.0 / (2.0 * arrival_rate)
}
