use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::MemberIntegral;
use crate::error::{Error, Result};
use crate::markov::{Density, MarkovProcess};
use crate::numerics::RandomStream;

/// Fraction of singular resamples above which the verdict is inconclusive.
pub const MAX_RESAMPLE_FRACTION: f64 = 1e-3;
/// Draw attempts per sample point before giving up on it.
const MAX_ATTEMPTS: usize = 10_000;
/// Violations kept verbatim in a report; the rest are only counted.
const MAX_RECORDED_VIOLATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificatePlan {
    pub n_points: usize,
    /// Points with `u.singular_distance(x) < exclusion_radius` are redrawn.
    pub exclusion_radius: f64,
    pub margin_floor: f64,
}

impl Default for CertificatePlan {
    fn default() -> Self {
        Self { n_points: 10_000, exclusion_radius: 1e-3, margin_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation<S> {
    pub index: usize,
    pub point: S,
    pub ratio: f64,
}

/// One evaluated sample: `u(x)`, `(𝒫u)(x)` and the relative margin `1 − 𝒫u/u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMargin {
    pub index: usize,
    pub u: f64,
    pub perron_u: f64,
    pub ratio: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport<S> {
    pub n_points: usize,
    pub margin_floor: f64,
    pub min_margin: f64,
    pub violation_count: usize,
    pub violations: Vec<Violation<S>>,
    pub resamples: usize,
    /// Points that could not be evaluated within the attempt budget.
    pub failed_points: usize,
    pub integrability: Vec<MemberIntegral>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub samples: Vec<SampleMargin>,
}

impl<S> CertificateReport<S> {
    /// Attaches integrability estimates and recomputes the verdict.
    pub fn with_integrability(mut self, integrability: Vec<MemberIntegral>) -> Self {
        self.integrability = integrability;
        self.verdict = self.compute_verdict();
        self
    }

    fn compute_verdict(&self) -> Verdict {
        let too_many_resamples = self.resamples as f64 > MAX_RESAMPLE_FRACTION * self.n_points as f64;
        if too_many_resamples || self.failed_points > 0 || self.samples.is_empty() && self.n_points > 0 {
            return Verdict::Inconclusive;
        }
        if self.violation_count > 0 || self.integrability.iter().any(|m| !m.finite) {
            return Verdict::Violated;
        }
        if self.min_margin > self.margin_floor {
            Verdict::Certified
        } else {
            Verdict::Inconclusive
        }
    }
}

enum PointOutcome<S> {
    Evaluated { point: S, sample: SampleMargin, resamples: usize },
    Failed { resamples: usize },
}

/// Samples points with `sampler`, evaluates `𝒫u` and checks `𝒫u < u`.
///
/// Point `i` is drawn from `rng.substream(i)`. Draws inside the exclusion zone
/// around `u`'s singular set are redrawn silently; draws where `u` or `𝒫u` is
/// still non-finite are redrawn and counted as resamples.
pub fn check_proper_subinvariance<P, F>(
    model: &P,
    u: &dyn Density<P::State>,
    plan: &CertificatePlan,
    sampler: F,
    rng: &RandomStream,
) -> Result<CertificateReport<P::State>>
where
    P: MarkovProcess,
    F: Fn(&mut RandomStream) -> Result<P::State> + Sync,
{
    if plan.n_points == 0 {
        return Err(Error::InvalidArgument("n_points must be positive".into()));
    }
    let outcomes: Vec<PointOutcome<P::State>> = (0..plan.n_points)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.substream(i as u64);
            let mut resamples = 0;
            for _ in 0..MAX_ATTEMPTS {
                let x = sampler(&mut stream)?;
                if u.singular_distance(&x) < plan.exclusion_radius {
                    continue;
                }
                let ux = u.eval(&x);
                let pux = model.perron(u, &x);
                match pux {
                    Ok(p) if ux.is_finite() && ux > 0.0 && p.is_finite() => {
                        let ratio = p / ux;
                        let sample = SampleMargin { index: i, u: ux, perron_u: p, ratio, margin: 1.0 - ratio };
                        return Ok(PointOutcome::Evaluated { point: x, sample, resamples });
                    }
                    Ok(_) | Err(Error::SingularEvaluation { .. }) | Err(Error::NotConverged { .. }) => resamples += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(PointOutcome::Failed { resamples })
        })
        .collect::<Result<_>>()?;

    let mut report = CertificateReport {
        n_points: plan.n_points,
        margin_floor: plan.margin_floor,
        min_margin: f64::INFINITY,
        violation_count: 0,
        violations: Vec::new(),
        resamples: 0,
        failed_points: 0,
        integrability: Vec::new(),
        verdict: Verdict::Inconclusive,
        samples: Vec::with_capacity(plan.n_points),
    };
    for o in outcomes {
        match o {
            PointOutcome::Evaluated { point, sample, resamples } => {
                report.resamples += resamples;
                report.min_margin = report.min_margin.min(sample.margin);
                if sample.ratio >= 1.0 {
                    report.violation_count += 1;
                    if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                        report.violations.push(Violation { index: sample.index, point, ratio: sample.ratio });
                    }
                }
                report.samples.push(sample);
            }
            PointOutcome::Failed { resamples } => {
                report.resamples += resamples;
                report.failed_points += 1;
            }
        }
    }
    report.verdict = report.compute_verdict();
    Ok(report)
}
