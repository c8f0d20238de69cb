//! Population fitness curves under equal, relative-spread and radius
//! weights, recomputed from a result log.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{population_fitness, query_fitness, ResultRecord};
use crate::weights::{
    collect_samples, radius_weights, relative_spread_weights, DataRange, RadiusConfig, SColumn,
    WeightVector,
};

/// Which data range feeds the method weights of each curve point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// One weight triple over the whole log.
    AllPopulations,
    /// One weight triple per population.
    PerPopulation,
    /// One weight triple per query.
    PerQuery,
}

impl FromStr for CurveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-populations" | "all" => Ok(CurveMode::AllPopulations),
            "per-population" => Ok(CurveMode::PerPopulation),
            "per-query" => Ok(CurveMode::PerQuery),
            other => Err(Error::Config(format!(
                "unknown curve mode {other:?}; expected all-populations, per-population or per-query"
            ))),
        }
    }
}

impl fmt::Display for CurveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveMode::AllPopulations => "all-populations",
            CurveMode::PerPopulation => "per-population",
            CurveMode::PerQuery => "per-query",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub population_no: u64,
    pub w_equ: f64,
    pub w_dis: f64,
    pub w_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curves {
    pub points: Vec<CurvePoint>,
    pub warnings: Vec<String>,
}

/// Spread and radius weights for one range. A range where the spread
/// method is undefined (some criterion never exceeds zero) falls back to
/// equal weights with a warning.
fn method_weights(
    records: &[ResultRecord],
    range: DataRange,
    radius: &RadiusConfig,
    s_column: SColumn,
    warnings: &mut Vec<String>,
) -> Result<(WeightVector, WeightVector)> {
    let samples = collect_samples(records, range, s_column)?;
    let spread = match relative_spread_weights(&samples) {
        Ok(w) => w,
        Err(Error::NonPositiveMaximum) => {
            warnings.push(format!(
                "{range}: spread weights undefined, using equal weights"
            ));
            WeightVector::equal()
        }
        Err(e) => return Err(e),
    };
    let rad = radius_weights(&samples, radius)?;
    warnings.extend(rad.warnings.into_iter().map(|w| format!("{range}: {w}")));
    Ok((spread, rad.weights))
}

/// Mean of per-query means, queries grouped by `query_no`.
fn population_value(
    by_query: &BTreeMap<u64, Vec<ResultRecord>>,
    weights: impl Fn(u64) -> WeightVector,
) -> Result<f64> {
    let per_query = by_query
        .iter()
        .map(|(&q, rs)| query_fitness(rs, &weights(q)))
        .collect::<Result<Vec<f64>>>()?;
    population_fitness(&per_query)
}

/// One point per population present in the log, in ascending population
/// order. Queries absent from the log (no results) are not averaged in.
pub fn compute_curves(
    records: &[ResultRecord],
    radius: &RadiusConfig,
    mode: CurveMode,
    s_column: SColumn,
) -> Result<Curves> {
    if records.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut populations: BTreeMap<u64, BTreeMap<u64, Vec<ResultRecord>>> = BTreeMap::new();
    for r in records {
        populations
            .entry(r.population_no)
            .or_default()
            .entry(r.query_no)
            .or_default()
            .push(r.clone());
    }

    let mut warnings = Vec::new();
    let global = match mode {
        CurveMode::AllPopulations => Some(method_weights(
            records,
            DataRange::AllPopulations,
            radius,
            s_column,
            &mut warnings,
        )?),
        _ => None,
    };

    let equal = WeightVector::equal();
    let mut points = Vec::with_capacity(populations.len());
    for (&population_no, by_query) in &populations {
        let w_equ = population_value(by_query, |_| equal)?;
        let (w_dis, w_rad) = match mode {
            CurveMode::AllPopulations | CurveMode::PerPopulation => {
                let (spread, rad) = match global {
                    Some(w) => w,
                    None => method_weights(
                        records,
                        DataRange::PerPopulation { population_no },
                        radius,
                        s_column,
                        &mut warnings,
                    )?,
                };
                (
                    population_value(by_query, |_| spread)?,
                    population_value(by_query, |_| rad)?,
                )
            }
            CurveMode::PerQuery => {
                let mut per_query = BTreeMap::new();
                for &query_no in by_query.keys() {
                    let range = DataRange::PerQuery {
                        population_no,
                        query_no,
                    };
                    per_query.insert(
                        query_no,
                        method_weights(records, range, radius, s_column, &mut warnings)?,
                    );
                }
                (
                    population_value(by_query, |q| per_query[&q].0)?,
                    population_value(by_query, |q| per_query[&q].1)?,
                )
            }
        };
        points.push(CurvePoint {
            population_no,
            w_equ,
            w_dis,
            w_rad,
        });
    }
    Ok(Curves { points, warnings })
}

pub const CURVE_HEADER: &str = "population_no,W_equ,W_dis,W_rad";

pub fn write_curves<W: Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.population_no, p.w_equ, p.w_dis, p.w_rad
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::CriterionSamples;

    fn rec(pop: u64, q: u64, g: f64, p: f64, s: f64) -> ResultRecord {
        ResultRecord {
            population_no: pop,
            query_no: q,
            doc_id: format!("d{pop}{q}{g}"),
            g_raw: 1.0,
            g,
            p_raw: 1.0,
            p,
            s_raw: s,
            s,
        }
    }

    fn synthetic() -> Vec<ResultRecord> {
        let mut out = Vec::new();
        for pop in 0..3u64 {
            for q in 0..2u64 {
                for i in 0..3u64 {
                    let x = (1 + pop * 7 + q * 3 + i) as f64;
                    out.push(rec(
                        pop,
                        q,
                        (x * 0.37).fract(),
                        (x * 0.61).fract(),
                        0.05 + (x * 0.13).fract() * 0.5,
                    ));
                }
            }
        }
        out
    }

    #[test]
    fn single_population_equal_curve() {
        let rs = vec![
            rec(4, 0, 0.2, 0.4, 0.6),
            rec(4, 0, 0.5, 0.5, 0.5),
            rec(4, 1, 0.9, 0.3, 0.3),
        ];
        let c = compute_curves(
            &rs,
            &RadiusConfig::default(),
            CurveMode::PerPopulation,
            SColumn::Raw,
        )
        .unwrap();
        assert_eq!(c.points.len(), 1);
        let q0 = (0.4 + 0.5) / 2.0;
        let q1 = 0.5;
        assert!((c.points[0].w_equ - (q0 + q1) / 2.0).abs() < 1e-12);
        assert_eq!(c.points[0].population_no, 4);
    }

    #[test]
    fn equal_criteria_give_coincident_curves() {
        let rs: Vec<_> = synthetic()
            .into_iter()
            .map(|mut r| {
                r.p = r.g;
                r.s_raw = r.g;
                r.s = r.g;
                r
            })
            .collect();
        for mode in [
            CurveMode::AllPopulations,
            CurveMode::PerPopulation,
            CurveMode::PerQuery,
        ] {
            let c = compute_curves(&rs, &RadiusConfig::default(), mode, SColumn::Raw).unwrap();
            for p in &c.points {
                assert!((p.w_equ - p.w_dis).abs() < 1e-9 && (p.w_equ - p.w_rad).abs() < 1e-9);
            }
        }
    }

    /// Direct recomputation: weights from explicit min/max scans, then plain
    /// nested means.
    fn oracle(records: &[ResultRecord], mode: CurveMode) -> Vec<[f64; 4]> {
        let cfg = RadiusConfig::default();
        let weights_of = |rows: &[&ResultRecord]| -> ([f64; 3], [f64; 3]) {
            let cols: [Vec<f64>; 3] = [
                rows.iter().map(|r| r.g).collect(),
                rows.iter().map(|r| r.p).collect(),
                rows.iter().map(|r| r.s_raw).collect(),
            ];
            let mut delta = [0.0; 3];
            let mut radii = [0.0; 3];
            for k in 0..3 {
                let mut lo = f64::MAX;
                let mut hi = f64::MIN;
                for &v in &cols[k] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                delta[k] = 1.0 - lo / hi;
                let lo_c = if lo == 0.0 { 1e-6 } else { lo };
                let mut r = lo_c;
                for &v in &cols[k] {
                    if (v - lo_c) / lo_c <= cfg.xi[k] && v > r {
                        r = v;
                    }
                }
                radii[k] = r;
            }
            let ds: f64 = delta.iter().sum();
            let rs: f64 = radii.iter().sum();
            (delta.map(|d| d / ds), radii.map(|r| r / rs))
        };
        let fit = |r: &ResultRecord, w: [f64; 3]| w[0] * r.g + w[1] * r.p + w[2] * r.s_raw;
        let all: Vec<&ResultRecord> = records.iter().collect();
        let global = weights_of(&all);
        let mut pops: Vec<u64> = records.iter().map(|r| r.population_no).collect();
        pops.dedup();
        pops.iter()
            .map(|&pn| {
                let rows: Vec<&ResultRecord> =
                    records.iter().filter(|r| r.population_no == pn).collect();
                let mut qs: Vec<u64> = rows.iter().map(|r| r.query_no).collect();
                qs.dedup();
                let pop_w = weights_of(&rows);
                let mut sums = [0.0; 3];
                for &q in &qs {
                    let qrows: Vec<&ResultRecord> =
                        rows.iter().copied().filter(|r| r.query_no == q).collect();
                    let (wd, wr) = match mode {
                        CurveMode::AllPopulations => global,
                        CurveMode::PerPopulation => pop_w,
                        CurveMode::PerQuery => weights_of(&qrows),
                    };
                    let n = qrows.len() as f64;
                    sums[0] += qrows.iter().map(|r| fit(r, [1.0 / 3.0; 3])).sum::<f64>() / n;
                    sums[1] += qrows.iter().map(|r| fit(r, wd)).sum::<f64>() / n;
                    sums[2] += qrows.iter().map(|r| fit(r, wr)).sum::<f64>() / n;
                }
                let k = qs.len() as f64;
                [pn as f64, sums[0] / k, sums[1] / k, sums[2] / k]
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let rs = synthetic();
        for mode in [
            CurveMode::AllPopulations,
            CurveMode::PerPopulation,
            CurveMode::PerQuery,
        ] {
            let c = compute_curves(&rs, &RadiusConfig::default(), mode, SColumn::Raw).unwrap();
            let expected = oracle(&rs, mode);
            assert_eq!(c.points.len(), 3);
            for (p, e) in c.points.iter().zip(&expected) {
                assert_eq!(p.population_no as f64, e[0]);
                assert!((p.w_equ - e[1]).abs() < 1e-9, "{mode}");
                assert!((p.w_dis - e[2]).abs() < 1e-9, "{mode}");
                assert!((p.w_rad - e[3]).abs() < 1e-9, "{mode}");
                for v in [p.w_equ, p.w_dis, p.w_rad] {
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn spread_fallback_warns() {
        // Single result per query with g = 0: no positive maximum for g.
        let rs = vec![rec(0, 0, 0.0, 0.5, 0.2), rec(0, 1, 1.0, 0.7, 0.3)];
        let c = compute_curves(
            &rs,
            &RadiusConfig::default(),
            CurveMode::PerQuery,
            SColumn::Raw,
        )
        .unwrap();
        assert!(c
            .warnings
            .iter()
            .any(|w| w.contains("query:0:0") && w.contains("spread")));
        let samples = CriterionSamples::new(vec![0.0], vec![0.5], vec![0.2]).unwrap();
        assert!(relative_spread_weights(&samples).is_err());
    }

    #[test]
    fn empty_log_rejected() {
        assert!(matches!(
            compute_curves(
                &[],
                &RadiusConfig::default(),
                CurveMode::PerPopulation,
                SColumn::Raw
            ),
            Err(Error::EmptyLog)
        ));
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        let pts = [CurvePoint {
            population_no: 1,
            w_equ: 0.5,
            w_dis: 0.25,
            w_rad: 0.125,
        }];
        write_curves(&pts, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "population_no,W_equ,W_dis,W_rad\n1,0.5,0.25,0.125\n"
        );
    }
}
