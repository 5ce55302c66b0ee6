//! Closed-form idle-time distributions for M/M/1, c×M/M/1 and M/M/c queues.
//!
//! Every queue here is open-loop Poisson with exponential service. The
//! arrival rate in [`QueueParams`] is always *per core*, so an M/M/c system
//! with `c` servers sees an aggregate stream of `c·λ`, and utilization is
//! `λ·service_mean` for all three disciplines.
//!
//! Idle periods that end with an arrival are exponential. The fraction of
//! idle *time* contributed by periods of length at least `t` is the
//! length-biased tail `(1 + r·t)·e^{−r·t}`, which is what the band and
//! residency calculations are built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Beyond this exponent the tail is below 1e-300 and is clamped to zero.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueKind {
    /// Single server.
    Mm1,
    /// `c` independent M/M/1 queues, one per core.
    Cxmm1,
    /// One shared FIFO queue feeding `c` servers.
    Mmc,
}

impl QueueKind {
    pub fn label(self) -> &'static str {
        match self {
            QueueKind::Mm1 => "mm1",
            QueueKind::Cxmm1 => "cxmm1",
            QueueKind::Mmc => "mmc",
        }
    }
}

impl std::str::FromStr for QueueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm1" | "m/m/1" => Ok(QueueKind::Mm1),
            "cxmm1" | "cxm/m/1" | "c×m/m/1" => Ok(QueueKind::Cxmm1),
            "mmc" | "m/m/c" => Ok(QueueKind::Mmc),
            other => Err(Error::InvalidParams(format!("unknown queue kind `{other}`"))),
        }
    }
}

/// Which idle process a calculation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// A single core.
    Core,
    /// All cores idle at once.
    Package,
}

/// Upper edge of an idle band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandEnd {
    Finite(f64),
    Unbounded,
}

impl BandEnd {
    pub fn from_secs(secs: f64) -> Self {
        if secs.is_infinite() {
            BandEnd::Unbounded
        } else {
            BandEnd::Finite(secs)
        }
    }

    pub fn as_secs(self) -> f64 {
        match self {
            BandEnd::Finite(s) => s,
            BandEnd::Unbounded => f64::INFINITY,
        }
    }
}

/// Queue discipline and load. Construct through [`QueueParams::new`] or the
/// helpers so the stability and positivity checks always run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub kind: QueueKind,
    /// Arrivals per second per core.
    pub lambda_per_core: f64,
    /// Mean service time in seconds.
    pub service_mean: f64,
    pub cores: u32,
}

impl QueueParams {
    pub fn new(kind: QueueKind, lambda_per_core: f64, service_mean: f64, cores: u32) -> Result<Self> {
        let params = QueueParams { kind, lambda_per_core, service_mean, cores };
        params.validate()?;
        Ok(params)
    }

    pub fn mm1(lambda: f64, service_mean: f64) -> Result<Self> {
        Self::new(QueueKind::Mm1, lambda, service_mean, 1)
    }

    pub fn cxmm1(cores: u32, lambda_per_core: f64, service_mean: f64) -> Result<Self> {
        Self::new(QueueKind::Cxmm1, lambda_per_core, service_mean, cores)
    }

    pub fn mmc(cores: u32, lambda_per_core: f64, service_mean: f64) -> Result<Self> {
        Self::new(QueueKind::Mmc, lambda_per_core, service_mean, cores)
    }

    /// Build from a per-core arrival rate and a target utilization.
    pub fn from_utilization(kind: QueueKind, lambda_per_core: f64, utilization: f64, cores: u32) -> Result<Self> {
        if !(lambda_per_core.is_finite() && lambda_per_core > 0.0) {
            return Err(Error::InvalidParams(format!("arrival rate must be positive, got {lambda_per_core}")));
        }
        Self::new(kind, lambda_per_core, utilization / lambda_per_core, cores)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_per_core.is_finite() && self.lambda_per_core > 0.0) {
            return Err(Error::InvalidParams(format!("arrival rate must be positive, got {}", self.lambda_per_core)));
        }
        if !(self.service_mean.is_finite() && self.service_mean > 0.0) {
            return Err(Error::InvalidParams(format!("mean service time must be positive, got {}", self.service_mean)));
        }
        if self.cores == 0 {
            return Err(Error::InvalidParams("core count must be at least 1".into()));
        }
        let rho = self.utilization();
        if rho >= 1.0 {
            return Err(Error::Unstable { rho });
        }
        Ok(())
    }

    /// Per-server utilization `λ·service_mean`.
    pub fn utilization(&self) -> f64 {
        self.lambda_per_core * self.service_mean
    }

    /// Offered load `c·ρ` of the whole system.
    pub fn offered_load(&self) -> f64 {
        f64::from(self.cores) * self.utilization()
    }
}

/// Exponential idle-period law: periods end at `rate`, and the process is
/// idle for `idle_fraction` of wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleLaw {
    pub rate: f64,
    pub idle_fraction: f64,
}

impl IdleLaw {
    pub fn mean_period(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Time-average fraction that each server is busy.
pub fn busy_fraction(params: &QueueParams) -> Result<f64> {
    params.validate()?;
    Ok(params.utilization())
}

/// Idle law of one core. Only defined for per-core queues; M/M/c per-core
/// idleness depends on dispatch and is left to the simulator.
pub fn core_idle_law(params: &QueueParams) -> Result<IdleLaw> {
    params.validate()?;
    match params.kind {
        QueueKind::Mm1 | QueueKind::Cxmm1 => {
            Ok(IdleLaw { rate: params.lambda_per_core, idle_fraction: 1.0 - params.utilization() })
        }
        QueueKind::Mmc => Err(Error::Unsupported(
            "per-core idle law of M/M/c depends on the dispatch policy; use the simulator".into(),
        )),
    }
}

/// Idle law of the whole package (every core idle at once).
///
/// For independent per-core queues the full-idle periods end at the merged
/// arrival rate `c·λ` and the package is empty with probability `(1−ρ)^c`.
/// For M/M/c a single arrival at rate `c·λ` ends an empty period and the
/// empty probability is Erlang's P0.
pub fn package_idle_law(params: &QueueParams) -> Result<IdleLaw> {
    params.validate()?;
    let c = f64::from(params.cores);
    let rate = c * params.lambda_per_core;
    let idle_fraction = match params.kind {
        QueueKind::Mm1 | QueueKind::Cxmm1 => (1.0 - params.utilization()).powi(params.cores as i32),
        QueueKind::Mmc => erlang_p0(params.cores, params.offered_load())?,
    };
    Ok(IdleLaw { rate, idle_fraction })
}

pub fn idle_law(params: &QueueParams, level: Level) -> Result<IdleLaw> {
    match level {
        Level::Core => core_idle_law(params),
        Level::Package => package_idle_law(params),
    }
}

fn check_tail_args(rate: f64, t: f64) -> Result<()> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("duration must be non-negative, got {t}")));
    }
    Ok(())
}

/// Fraction of total idle *time* spent in idle periods of length ≥ `t`,
/// for exponential periods with the given rate.
pub fn idle_tail_time_weighted(rate: f64, t: f64) -> Result<f64> {
    check_tail_args(rate, t)?;
    let x = rate * t;
    if x > EXP_CLAMP {
        return Ok(0.0);
    }
    Ok((1.0 + x) * (-x).exp())
}

/// Fraction of idle *periods* (by count) lasting at least `t`. Not used by
/// the residency model; exposed for comparison with the time-weighted tail.
pub fn idle_tail_count_weighted(rate: f64, t: f64) -> Result<f64> {
    check_tail_args(rate, t)?;
    let x = rate * t;
    if x > EXP_CLAMP {
        return Ok(0.0);
    }
    Ok((-x).exp())
}

fn tail_at(rate: f64, edge: BandEnd) -> Result<f64> {
    match edge {
        BandEnd::Finite(t) => idle_tail_time_weighted(rate, t),
        BandEnd::Unbounded => Ok(0.0),
    }
}

/// Fraction of wall-clock time spent inside idle periods whose full length
/// lies in `[t_lo, t_hi)`.
pub fn idle_band_fraction(params: &QueueParams, level: Level, t_lo: f64, t_hi: BandEnd) -> Result<f64> {
    let law = idle_law(params, level)?;
    law_band_fraction(&law, t_lo, t_hi)
}

pub(crate) fn law_band_fraction(law: &IdleLaw, t_lo: f64, t_hi: BandEnd) -> Result<f64> {
    if t_lo.is_nan() || t_lo < 0.0 {
        return Err(Error::Domain(format!("band start must be non-negative, got {t_lo}")));
    }
    if let BandEnd::Finite(hi) = t_hi {
        if !(hi > t_lo) {
            return Err(Error::Domain(format!("band end {hi} must exceed band start {t_lo}")));
        }
    }
    let lo = idle_tail_time_weighted(law.rate, t_lo)?;
    let hi = tail_at(law.rate, t_hi)?;
    Ok(law.idle_fraction * (lo - hi))
}

/// Probability that an M/M/c system with `servers` servers and offered load
/// `a = c·ρ` is empty.
pub fn erlang_p0(servers: u32, offered_load: f64) -> Result<f64> {
    if servers == 0 {
        return Err(Error::InvalidParams("server count must be at least 1".into()));
    }
    if !(offered_load.is_finite() && offered_load > 0.0) {
        return Err(Error::InvalidParams(format!("offered load must be positive, got {offered_load}")));
    }
    let c = f64::from(servers);
    let rho = offered_load / c;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    if servers == 1 {
        return Ok(1.0 - rho);
    }
    // a^k/k! built incrementally; `term` ends as a^c/c!.
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..servers {
        sum += term;
        term *= offered_load / f64::from(k + 1);
    }
    sum += term / (1.0 - rho);
    Ok(1.0 / sum)
}
