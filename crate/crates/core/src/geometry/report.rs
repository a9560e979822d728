use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Whether a check expects vanishing residuals or a negative control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Zero,
    Nonzero,
}

/// Residuals of one equation over a set of sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub tag: String,
    pub subject: String,
    pub expect: Expect,
    pub tol: f64,
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Points skipped because a precondition failed.
    pub skipped: usize,
    pub pass: bool,
}

impl ResidualReport {
    /// Builds a report; `None` residuals mark skipped points.
    pub fn new(
        tag: impl Into<String>,
        subject: impl Into<String>,
        expect: Expect,
        tol: f64,
        samples: Vec<(Vec<f64>, Option<f64>)>,
    ) -> Self {
        let mut points = Vec::new();
        let mut residuals = Vec::new();
        let mut skipped = 0;
        for (x, r) in samples {
            match r {
                Some(r) => {
                    points.push(x);
                    residuals.push(r);
                }
                None => skipped += 1,
            }
        }
        let max = residuals.iter().copied().fold(0.0, f64::max);
        let mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        let finite = residuals.iter().all(|r| r.is_finite());
        let pass = finite
            && match expect {
                Expect::Zero => max < tol,
                Expect::Nonzero => max > tol,
            };
        ResidualReport {
            tag: tag.into(),
            subject: subject.into(),
            expect,
            tol,
            points,
            residuals,
            max,
            mean,
            skipped,
            pass,
        }
    }

    /// A single scalar check with no sample points.
    pub fn scalar(tag: impl Into<String>, subject: impl Into<String>, expect: Expect, tol: f64, residual: f64) -> Self {
        let mut r = Self::new(tag, subject, expect, tol, vec![(Vec::new(), Some(residual))]);
        r.points.clear();
        r
    }
}

/// Evaluates `f` at every point in parallel, keeping the input order.
pub fn sweep<F>(points: &[Vec<f64>], f: F) -> Result<Vec<(Vec<f64>, Option<f64>)>>
where
    F: Fn(&[f64]) -> Result<Option<f64>> + Sync,
{
    points
        .par_iter()
        .map(|x| f(x).map(|r| (x.clone(), r)))
        .collect()
}

/// A sample point with several residuals.
pub type MultiResidual<const K: usize> = (Vec<f64>, [Option<f64>; K]);

/// As [`sweep`] for checks producing several residuals per point.
pub fn sweep_many<F, const K: usize>(points: &[Vec<f64>], f: F) -> Result<Vec<MultiResidual<K>>>
where
    F: Fn(&[f64]) -> Result<[Option<f64>; K]> + Sync,
{
    points
        .par_iter()
        .map(|x| f(x).map(|r| (x.clone(), r)))
        .collect()
}

/// Splits a multi-residual sweep into one column per check.
pub fn column<const K: usize>(samples: &[(Vec<f64>, [Option<f64>; K])], k: usize) -> Vec<(Vec<f64>, Option<f64>)> {
    samples.iter().map(|(x, r)| (x.clone(), r[k])).collect()
}
