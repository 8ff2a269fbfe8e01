//! Grid checks of the uniform weight conditions W1–W5.
//!
//! Every "sup over the state space" is a supremum over the supplied grid,
//! and every limit in `N` or `K` is judged from the probed values only.

use serde::{Deserialize, Serialize};

use super::{EvalMode, WeightModel};
use crate::error::{Error, Result};
use crate::state::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Uniform weak law: `sup_x P[|W_{x,N} - 1| >= delta] -> 0`.
    W1,
    /// Uniform negative moments: `sup_x E[W_{x,N}^{-1}] -> 1`.
    W2,
    /// Uniform integrability: `sup_x E[W_x 1{W_x > K}] -> 0` as `K` grows.
    W3,
    /// Polynomial lower tail: `sup_x P[W_x <= w] <= M w^beta` on `(0, gamma)`.
    W4,
    /// Bounded moment: `sup_x E[W_x^{1+k}] < infinity`.
    W5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SatisfiedOnGrid,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct ConditionParams {
    pub delta: f64,
    /// Truncation levels `K` for W3.
    pub levels: Vec<f64>,
    pub gamma: f64,
    /// Candidate `(M, beta)` for W4; fitted when absent.
    pub w4_candidate: Option<(f64, f64)>,
    /// Smallest fitted exponent accepted as evidence of a polynomial tail.
    pub min_beta: f64,
    pub k: f64,
    /// Largest moment treated as finite by W5.
    pub moment_cap: f64,
    /// W2: ratio of outer-half to inner-half grid suprema read as unbounded growth.
    pub growth_factor: f64,
    pub tol: f64,
    pub mode: EvalMode,
}

impl Default for ConditionParams {
    fn default() -> Self {
        ConditionParams {
            delta: 0.5,
            levels: vec![1.0, 10.0, 100.0, 1000.0],
            gamma: 0.9,
            w4_candidate: None,
            min_beta: 0.05,
            k: 1.0,
            moment_cap: 1e12,
            growth_factor: 4.0,
            tol: 1e-3,
            mode: EvalMode::Exact,
        }
    }
}

/// One tabulated statistic. `level` is `delta`, `K`, `w` or `1+k` as relevant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub x: State,
    pub n: usize,
    pub level: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub grid: Vec<State>,
    pub n_values: Vec<usize>,
    pub rows: Vec<ConditionRow>,
    pub verdict: Verdict,
    pub witness: Option<ConditionRow>,
    /// Fitted or supplied `(M, beta, gamma)` for W4.
    pub fitted: Option<(f64, f64, f64)>,
}

/// Grid supremum of `rows` restricted to those passing `keep`.
fn grid_sup<'a>(rows: &'a [ConditionRow], keep: impl Fn(&ConditionRow) -> bool) -> Option<&'a ConditionRow> {
    rows.iter()
        .filter(|r| keep(r))
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Less))
}

/// Verdict for "sup over the grid tends to `limit`" along increasing indices.
///
/// With several indices: satisfied when the last supremum is within `tol`
/// of the limit, violated when it shows no decrease from the first, and
/// inconclusive otherwise. With a single index only an excess of at least
/// `1 - tol` counts as a violation.
fn limit_verdict(
    rows: &[ConditionRow],
    indices: &[f64],
    index_of: impl Fn(&ConditionRow) -> f64,
    limit: f64,
    tol: f64,
) -> (Verdict, Option<ConditionRow>) {
    let first = grid_sup(rows, |r| index_of(r) == indices[0]).cloned();
    let last = grid_sup(rows, |r| index_of(r) == *indices.last().unwrap()).cloned();
    let (Some(first), Some(last)) = (first, last) else {
        return (Verdict::Inconclusive, None);
    };
    let excess = last.value - limit;
    if !excess.is_nan() && excess <= tol {
        return (Verdict::SatisfiedOnGrid, None);
    }
    let no_decay = if indices.len() == 1 {
        !(excess < 1.0 - tol)
    } else {
        !(last.value < first.value - tol)
    };
    if no_decay {
        (Verdict::Violated, Some(last))
    } else {
        (Verdict::Inconclusive, Some(last))
    }
}

/// Violation when, at `n`, the statistic over the outer half of the grid
/// exceeds the inner half by `growth_factor`: the supremum over the whole
/// space then looks unbounded.
fn edge_growth(
    rows: &[ConditionRow],
    grid: &[State],
    n: usize,
    params: &ConditionParams,
) -> Option<(Verdict, Option<ConditionRow>)> {
    if grid.len() < 4 {
        return None;
    }
    let half = grid.len() / 2;
    let at_n: Vec<&ConditionRow> = rows.iter().filter(|r| r.n == n).collect();
    let inner = at_n[..half].iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let outer = at_n[half..]
        .iter()
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Less))?;
    if outer.value > 1.0 + params.tol && outer.value > params.growth_factor * inner {
        Some((Verdict::Violated, Some((*outer).clone())))
    } else {
        None
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Least-squares slope and intercept of `ys` on `xs`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

pub fn check_condition(
    model: &WeightModel,
    which: Condition,
    grid: &[State],
    n_values: &[usize],
    params: &ConditionParams,
) -> Result<ConditionReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("condition grid is empty".into()));
    }
    let mut n_values: Vec<usize> = n_values.to_vec();
    n_values.sort_unstable();
    n_values.dedup();
    if matches!(which, Condition::W1 | Condition::W2) && n_values.is_empty() {
        return Err(Error::InvalidInput("W1/W2 need at least one N".into()));
    }
    let mode = params.mode;
    let mut rows = Vec::new();
    let row = |x: &State, n: usize, level: f64, est: super::Estimate| ConditionRow {
        x: x.clone(),
        n,
        level,
        value: est.value,
        std_error: est.std_error,
    };
    let mut fitted = None;
    let (verdict, witness) = match which {
        Condition::W1 | Condition::W2 => {
            for &n in &n_values {
                for x in grid {
                    let est = if which == Condition::W1 {
                        model.tail_probability(x, n, params.delta, mode)?
                    } else {
                        model.negative_moment(x, n, 1.0, mode)?
                    };
                    let level = if which == Condition::W1 { params.delta } else { -1.0 };
                    rows.push(row(x, n, level, est));
                }
            }
            let idx: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
            let limit = if which == Condition::W1 { 0.0 } else { 1.0 };
            let verdict = limit_verdict(&rows, &idx, |r| r.n as f64, limit, params.tol);
            if which == Condition::W2 && verdict.0 == Verdict::Inconclusive {
                edge_growth(&rows, grid, *n_values.last().unwrap(), params).unwrap_or(verdict)
            } else {
                verdict
            }
        }
        Condition::W3 => {
            let levels = sorted_unique(params.levels.clone());
            if levels.is_empty() {
                return Err(Error::InvalidInput("W3 needs at least one level K".into()));
            }
            for &k in &levels {
                for x in grid {
                    rows.push(row(x, 1, k, model.truncated_mean(x, k, mode)?));
                }
            }
            limit_verdict(&rows, &levels, |r| r.level, 0.0, params.tol)
        }
        Condition::W4 => {
            let gamma = params.gamma;
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::InvalidInput(format!("gamma must lie in (0,1), got {gamma}")));
            }
            let ws: Vec<f64> = (0..20)
                .map(|i| gamma * 10f64.powf(-4.0 + 4.0 * (i as f64 + 0.5) / 20.0))
                .collect();
            for &w in &ws {
                for x in grid {
                    rows.push(row(x, 1, w, model.cdf(x, 1, w, mode)?));
                }
            }
            let sups: Vec<ConditionRow> = ws
                .iter()
                .filter_map(|&w| grid_sup(&rows, |r| r.level == w).cloned())
                .collect();
            match params.w4_candidate {
                Some((m, beta)) => {
                    fitted = Some((m, beta, gamma));
                    let bad = sups
                        .iter()
                        .find(|r| r.value > m * r.level.powf(beta) + params.tol)
                        .cloned();
                    match bad {
                        Some(r) => (Verdict::Violated, Some(r)),
                        None => (Verdict::SatisfiedOnGrid, None),
                    }
                }
                None => {
                    let pos: Vec<&ConditionRow> = sups.iter().filter(|r| r.value > 0.0).collect();
                    if pos.is_empty() {
                        fitted = Some((0.0, f64::INFINITY, gamma));
                        (Verdict::SatisfiedOnGrid, None)
                    } else if pos.len() < 2 {
                        (Verdict::Inconclusive, Some(pos[0].clone()))
                    } else {
                        let lx: Vec<f64> = pos.iter().map(|r| r.level.ln()).collect();
                        let ly: Vec<f64> = pos.iter().map(|r| r.value.ln()).collect();
                        let (beta, _) = fit_line(&lx, &ly);
                        let m = pos
                            .iter()
                            .map(|r| r.value / r.level.powf(beta))
                            .fold(0.0, f64::max);
                        fitted = Some((m, beta, gamma));
                        if beta >= params.min_beta {
                            (Verdict::SatisfiedOnGrid, None)
                        } else {
                            let smallest = pos
                                .iter()
                                .min_by(|a, b| a.level.partial_cmp(&b.level).unwrap())
                                .map(|r| (*r).clone());
                            (Verdict::Violated, smallest)
                        }
                    }
                }
            }
        }
        Condition::W5 => {
            let q = 1.0 + params.k;
            for x in grid {
                rows.push(row(x, 1, q, model.moment(x, 1, q, mode)?));
            }
            let sup = grid_sup(&rows, |_| true).cloned();
            match sup {
                Some(r) if r.value.is_finite() && r.value <= params.moment_cap => {
                    (Verdict::SatisfiedOnGrid, None)
                }
                other => (Verdict::Violated, other),
            }
        }
    };
    Ok(ConditionReport {
        condition: which,
        grid: grid.to_vec(),
        n_values,
        rows,
        verdict,
        witness,
        fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Sequence;

    fn lattice(hi: i64) -> Vec<State> {
        (1..=hi).map(State::Integer).collect()
    }

    #[test]
    fn unit_weights_satisfy_w1() {
        let r = check_condition(
            &WeightModel::Unit,
            Condition::W1,
            &lattice(10),
            &[1, 10],
            &ConditionParams::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnGrid);
        assert!(r.rows.iter().all(|row| row.value == 0.0));
    }

    #[test]
    fn inhomogeneous_two_point_violates_w1_at_n1() {
        let model = WeightModel::TwoPointInhomogeneous {
            b: 4.0,
            eps: Sequence::PeriodicPower,
        };
        let r = check_condition(&model, Condition::W1, &lattice(300), &[1], &ConditionParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let w = r.witness.unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inhomogeneous_two_point_violates_w2() {
        let model = WeightModel::TwoPointInhomogeneous {
            b: 4.0,
            eps: Sequence::PeriodicPower,
        };
        let r = check_condition(&model, Condition::W2, &lattice(300), &[1, 4, 16], &ConditionParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        // E[W^{-1}] >= P[no upper atom] / eps_m grows without bound in m
        let w = r.witness.unwrap();
        let m = w.x.as_integer().unwrap();
        let eps = Sequence::PeriodicPower.value(m).unwrap();
        let s = (1.0 - eps) / (4.0 - eps);
        assert!(w.value >= (1.0 - s).powi(16) / eps);

        let homogeneous = WeightModel::TwoPointHomogeneous { b: 4.0, eps: 0.5 };
        let r = check_condition(&homogeneous, Condition::W2, &lattice(40), &[1, 4, 16], &ConditionParams::default())
            .unwrap();
        assert_ne!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn log_normal_second_moment_w5() {
        let model = WeightModel::HomogeneousLogNormal { sigma2: 5.0 };
        let grid = vec![State::scalar(-1.0), State::scalar(0.0), State::scalar(2.0)];
        let r = check_condition(&model, Condition::W5, &grid, &[], &ConditionParams::default()).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnGrid);
        assert!((r.rows[0].value - 148.413_159_102_576_6).abs() < 1e-9);
    }

    #[test]
    fn bounded_two_point_is_uniformly_integrable() {
        let model = WeightModel::TwoPointInhomogeneous {
            b: 4.0,
            eps: Sequence::Reciprocal,
        };
        let r = check_condition(&model, Condition::W3, &lattice(50), &[], &ConditionParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnGrid);
    }

    #[test]
    fn vanishing_lower_atom_violates_w4() {
        let model = WeightModel::TwoPointInhomogeneous {
            b: 4.0,
            eps: Sequence::PeriodicPower,
        };
        let r = check_condition(&model, Condition::W4, &lattice(300), &[], &ConditionParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn log_normal_has_polynomial_lower_tail() {
        let model = WeightModel::HomogeneousLogNormal { sigma2: 1.0 };
        let r = check_condition(&model, Condition::W4, &[State::scalar(0.0)], &[], &ConditionParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnGrid);
        let (m, beta, _) = r.fitted.unwrap();
        for row in &r.rows {
            assert!(row.value <= m * row.level.powf(beta) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(check_condition(&WeightModel::Unit, Condition::W1, &[], &[1], &ConditionParams::default()).is_err());
    }
}
