use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub final_step: f64,
    pub budget_exhausted: bool,
}

/// Coordinate pattern search.
///
/// Polls `x ± step·e_i` for `i = 0..n` in that order, moving to any strictly better
/// point as soon as it is found. A full poll without improvement halves the step.
/// Stops when the step drops below `tolerance` or after `max_evals` evaluations.
/// Non-finite objective values are treated as `+∞`.
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    step0: f64,
    tolerance: f64,
    max_evals: usize,
) -> Result<SearchResult> {
    if !(step0 > 0.0) || !(tolerance > 0.0) {
        return Err(Error::InvalidInput("pattern search step and tolerance must be positive".into()));
    }
    let mut eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut best = eval(&x);
    let mut evaluations = 1;
    let mut step = step0;
    while step >= tolerance {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evaluations >= max_evals {
                    return Ok(SearchResult {
                        x,
                        value: best,
                        evaluations,
                        final_step: step,
                        budget_exhausted: true,
                    });
                }
                let mut trial = x.clone();
                trial[i] += dir * step;
                let v = eval(&trial);
                evaluations += 1;
                if v < best {
                    best = v;
                    x = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(SearchResult {
        x,
        value: best,
        evaluations,
        final_step: step,
        budget_exhausted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_quadratic() {
        let r = pattern_search(|x| (x[0] - 3.0).powi(2), &[0.0], 1.0, 1e-6, 10_000).unwrap();
        assert!((r.x[0] - 3.0).abs() <= 1e-6);
        assert!(!r.budget_exhausted);
    }

    #[test]
    fn coupled_quadratic() {
        // minimum at (1, -2)
        let f = |x: &[f64]| {
            let (a, b) = (x[0] - 1.0, x[1] + 2.0);
            a * a + 0.5 * a * b + 2.0 * b * b
        };
        let r = pattern_search(f, &[5.0, 5.0], 1.0, 1e-7, 100_000).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn constant_objective_keeps_start() {
        let r = pattern_search(|_| 4.0, &[0.3, -2.0], 0.5, 1e-3, 10_000).unwrap();
        assert_eq!(r.x, vec![0.3, -2.0]);
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn budget_flag() {
        let r = pattern_search(|x| (x[0] - 100.0).powi(2), &[0.0], 1.0, 1e-9, 5).unwrap();
        assert!(r.budget_exhausted);
        assert_eq!(r.evaluations, 5);
        assert!(r.value < 100.0 * 100.0);
    }

    #[test]
    fn nan_is_rejected_as_worse() {
        let r = pattern_search(|x| if x[0] > 0.0 { f64::NAN } else { -x[0] }, &[0.0], 1.0, 0.1, 100).unwrap();
        assert_eq!(r.x, vec![0.0]);
    }
}
