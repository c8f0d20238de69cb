//! Analytical weight coefficients for the additive fitness criterion.
//!
//! Three ways of choosing `(w_g, w_p, w_s)`:
//!
//! * equal weights;
//! * relative spread: `δ_k = 1 − F_k⁻ / F_k⁺`, `w_k = δ_k / Σ δ`;
//! * radius: `R*_k` is the largest observed value of criterion `k` whose
//!   relative deviation from the criterion minimum, `(F − F⁻) / F⁻`, stays
//!   within `ξ_k`. The inverse variant sets `w_k ∝ 1 / R*_k`; the direct
//!   variant sets `w_k ∝ R*_k`.
//!
//! Samples come from a [`DataRange`] of the result log: one query, one
//! population, or every population.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::ResultRecord;

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Replacement for a zero criterion minimum in the radius method.
pub const MIN_CLAMP: f64 = 1e-6;

pub const CRITERIA: [&str; 3] = ["g", "p", "s"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w_g: f64,
    w_p: f64,
    w_s: f64,
}

impl WeightVector {
    pub fn new(w_g: f64, w_p: f64, w_s: f64) -> Result<Self> {
        let ok = [w_g, w_p, w_s].iter().all(|w| w.is_finite() && *w >= 0.0)
            && (w_g + w_p + w_s - 1.0).abs() <= WEIGHT_SUM_TOLERANCE;
        if ok {
            Ok(Self { w_g, w_p, w_s })
        } else {
            Err(Error::InvalidWeights(w_g, w_p, w_s))
        }
    }

    pub fn equal() -> Self {
        Self {
            w_g: 1.0 / 3.0,
            w_p: 1.0 / 3.0,
            w_s: 1.0 / 3.0,
        }
    }

    /// Normalizes three nonnegative scores to sum to one.
    fn proportional(scores: [f64; 3]) -> Result<Self> {
        let total: f64 = scores.iter().sum();
        Self::new(scores[0] / total, scores[1] / total, scores[2] / total)
    }

    pub fn g(&self) -> f64 {
        self.w_g
    }

    pub fn p(&self) -> f64 {
        self.w_p
    }

    pub fn s(&self) -> f64 {
        self.w_s
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_g, self.w_p, self.w_s]
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        Self::equal()
    }
}

/// Observed values of the three criteria over one data range.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSamples {
    columns: [Vec<f64>; 3],
}

impl CriterionSamples {
    pub fn new(g: Vec<f64>, p: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if g.is_empty() || g.len() != p.len() || g.len() != s.len() {
            return Err(Error::InvalidSamples(format!(
                "column lengths {}, {}, {}",
                g.len(),
                p.len(),
                s.len()
            )));
        }
        if g.iter().chain(&p).chain(&s).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples("non-finite value".into()));
        }
        Ok(Self { columns: [g, p, s] })
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    /// `(F⁻, F⁺)` per criterion.
    pub fn bounds(&self) -> [(f64, f64); 3] {
        self.columns.each_ref().map(|c| {
            c.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
        })
    }
}

pub fn equal_weights() -> WeightVector {
    WeightVector::equal()
}

/// Relative spreads `δ_k = 1 − F_k⁻ / F_k⁺`.
pub fn relative_spreads(samples: &CriterionSamples) -> Result<[f64; 3]> {
    let bounds = samples.bounds();
    if bounds.iter().any(|&(_, hi)| hi <= 0.0) {
        return Err(Error::NonPositiveMaximum);
    }
    Ok(bounds.map(|(lo, hi)| 1.0 - lo / hi))
}

/// Weights proportional to relative spread; equal weights when no criterion
/// varies.
pub fn relative_spread_weights(samples: &CriterionSamples) -> Result<WeightVector> {
    let deltas = relative_spreads(samples)?;
    if deltas.iter().all(|&d| d == 0.0) {
        return Ok(WeightVector::equal());
    }
    WeightVector::proportional(deltas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusVariant {
    /// `w_k ∝ 1 / R*_k`.
    Inverse,
    /// `w_k ∝ R*_k`.
    Direct,
}

impl fmt::Display for RadiusVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadiusVariant::Inverse => "inverse",
            RadiusVariant::Direct => "direct",
        })
    }
}

impl FromStr for RadiusVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" => Ok(RadiusVariant::Inverse),
            "direct" => Ok(RadiusVariant::Direct),
            other => Err(Error::Config(format!(
                "unknown radius variant {other:?}; expected direct or inverse"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusConfig {
    /// Relative-deviation thresholds `ξ` for g, p and s, as fractions.
    pub xi: [f64; 3],
    pub variant: RadiusVariant,
}

impl RadiusConfig {
    pub fn new(xi: [f64; 3], variant: RadiusVariant) -> Result<Self> {
        if xi.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config(format!(
                "radius thresholds must be > 0, got {xi:?}"
            )));
        }
        Ok(Self { xi, variant })
    }
}

impl Default for RadiusConfig {
    fn default() -> Self {
        Self {
            xi: [0.33, 0.33, 0.34],
            variant: RadiusVariant::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusOutcome {
    pub radii: [f64; 3],
    pub weights: WeightVector,
    pub warnings: Vec<String>,
}

/// Largest observed value within `ξ` relative deviation of the minimum.
///
/// A zero minimum is clamped to [`MIN_CLAMP`] and reported through the
/// returned flag.
pub fn radius(values: &[f64], xi: f64) -> Result<(f64, bool)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lo < 0.0 {
        return Err(Error::NegativeMinimum);
    }
    let (lo, clamped) = if lo == 0.0 {
        (MIN_CLAMP, true)
    } else {
        (lo, false)
    };
    let r = values
        .iter()
        .copied()
        .filter(|&v| (v - lo) / lo <= xi)
        .fold(lo, f64::max);
    Ok((r, clamped))
}

pub fn weights_from_radii(radii: [f64; 3], variant: RadiusVariant) -> Result<WeightVector> {
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidSamples(format!(
            "radii must be positive, got {radii:?}"
        )));
    }
    match variant {
        RadiusVariant::Direct => WeightVector::proportional(radii),
        RadiusVariant::Inverse => WeightVector::proportional(radii.map(|r| 1.0 / r)),
    }
}

pub fn radius_weights(samples: &CriterionSamples, cfg: &RadiusConfig) -> Result<RadiusOutcome> {
    let mut radii = [0.0; 3];
    let mut warnings = Vec::new();
    for k in 0..3 {
        let (r, clamped) = radius(samples.column(k), cfg.xi[k])?;
        if clamped {
            warnings.push(format!(
                "criterion {} has zero minimum; clamped to {MIN_CLAMP:e}",
                CRITERIA[k]
            ));
        }
        radii[k] = r;
    }
    Ok(RadiusOutcome {
        radii,
        weights: weights_from_radii(radii, cfg.variant)?,
        warnings,
    })
}

/// Which rows of the log feed a weight computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataRange {
    PerQuery { population_no: u64, query_no: u64 },
    PerPopulation { population_no: u64 },
    AllPopulations,
}

impl DataRange {
    pub fn contains(&self, r: &ResultRecord) -> bool {
        match *self {
            DataRange::PerQuery {
                population_no,
                query_no,
            } => r.population_no == population_no && r.query_no == query_no,
            DataRange::PerPopulation { population_no } => r.population_no == population_no,
            DataRange::AllPopulations => true,
        }
    }
}

impl fmt::Display for DataRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataRange::PerQuery {
                population_no,
                query_no,
            } => write!(f, "query:{population_no}:{query_no}"),
            DataRange::PerPopulation { population_no } => write!(f, "population:{population_no}"),
            DataRange::AllPopulations => f.write_str("all"),
        }
    }
}

impl FromStr for DataRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadRange(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.parse::<u64>().map_err(|_| bad());
        match parts.as_slice() {
            ["all"] => Ok(DataRange::AllPopulations),
            ["population", p] => Ok(DataRange::PerPopulation {
                population_no: num(p)?,
            }),
            ["query", p, q] => Ok(DataRange::PerQuery {
                population_no: num(p)?,
                query_no: num(q)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Which `s` column the weight methods read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SColumn {
    #[default]
    Raw,
    Normalized,
}

impl FromStr for SColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(SColumn::Raw),
            "normalized" => Ok(SColumn::Normalized),
            other => Err(Error::Config(format!(
                "unknown s column {other:?}; expected raw or normalized"
            ))),
        }
    }
}

impl fmt::Display for SColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SColumn::Raw => "raw",
            SColumn::Normalized => "normalized",
        })
    }
}

/// The normalized g and p columns plus the selected s column of every
/// record in `range`.
pub fn collect_samples(
    records: &[ResultRecord],
    range: DataRange,
    s_column: SColumn,
) -> Result<CriterionSamples> {
    let (mut g, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for r in records.iter().filter(|r| range.contains(r)) {
        g.push(r.g);
        p.push(r.p);
        s.push(match s_column {
            SColumn::Raw => r.s_raw,
            SColumn::Normalized => r.s,
        });
    }
    if g.is_empty() {
        return Err(Error::EmptyRange);
    }
    CriterionSamples::new(g, p, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMethod {
    Equal,
    Spread,
    Radius,
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMethod::Equal => "equal",
            WeightMethod::Spread => "spread",
            WeightMethod::Radius => "radius",
        })
    }
}

impl FromStr for WeightMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(WeightMethod::Equal),
            "spread" => Ok(WeightMethod::Spread),
            "radius" => Ok(WeightMethod::Radius),
            other => Err(Error::Config(format!(
                "unknown weight method {other:?}; expected equal, spread or radius"
            ))),
        }
    }
}

/// A computed weight triple with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub method: WeightMethod,
    pub range: DataRange,
    pub weights: WeightVector,
    /// Present for the radius method only.
    pub radius: Option<RadiusConfig>,
    pub warnings: Vec<String>,
}

impl WeightReport {
    pub const HEADER: &'static str = "method,variant,range,w_g,w_p,w_s,xi_g,xi_p,xi_s";

    /// Non-radius methods leave the variant and threshold fields empty.
    pub fn csv_row(&self) -> String {
        let w = self.weights.as_array();
        let (variant, xi) = match &self.radius {
            Some(cfg) => (
                cfg.variant.to_string(),
                cfg.xi.map(|x| x.to_string()).join(","),
            ),
            None => (String::new(), ",,".to_string()),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.method, variant, self.range, w[0], w[1], w[2], xi
        )
    }
}

pub fn weights_for_samples(
    samples: &CriterionSamples,
    method: WeightMethod,
    cfg: &RadiusConfig,
) -> Result<(WeightVector, Vec<String>)> {
    match method {
        WeightMethod::Equal => Ok((WeightVector::equal(), Vec::new())),
        WeightMethod::Spread => Ok((relative_spread_weights(samples)?, Vec::new())),
        WeightMethod::Radius => {
            let out = radius_weights(samples, cfg)?;
            Ok((out.weights, out.warnings))
        }
    }
}

pub fn weights_for_range(
    records: &[ResultRecord],
    range: DataRange,
    method: WeightMethod,
    cfg: &RadiusConfig,
    s_column: SColumn,
) -> Result<WeightReport> {
    let samples = collect_samples(records, range, s_column)?;
    let (weights, warnings) = weights_for_samples(&samples, method, cfg)?;
    Ok(WeightReport {
        method,
        range,
        weights,
        radius: (method == WeightMethod::Radius).then_some(*cfg),
        warnings,
    })
}
