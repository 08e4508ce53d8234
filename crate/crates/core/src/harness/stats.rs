//! Rank-sum testing and multiple-comparison correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest combined sample size for which exact p-values are computed.
pub const EXACT_MAX_TOTAL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    TwoSided,
    /// `a` tends to be smaller than `b`.
    Less,
    /// `a` tends to be larger than `b`.
    Greater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `U` of the first sample.
    pub statistic: f64,
    pub exact: bool,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub reject: bool,
}

impl TestResult {
    /// Records an adjusted p-value and the decision at `level`.
    pub fn decide(&mut self, p_adjusted: f64, level: f64) {
        self.p_adjusted = p_adjusted;
        self.reject = p_adjusted < level;
    }
}

/// Midranks (1-based) of `values`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Number of orderings of `m` a's and `n` b's giving each `U_a = 0..=m·n`.
fn u_counts(m: usize, n: usize) -> Vec<f64> {
    // table[i][j][u] built by where the largest element comes from
    let max_u = m * n;
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            let mut counts = vec![0.0; i * j + 1];
            if i == 0 || j == 0 {
                counts[0] = 1.0;
            } else {
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    counts[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    counts[u] += c;
                }
            }
            table[i][j] = counts;
        }
    }
    let out = std::mem::take(&mut table[m][n]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

/// Mann-Whitney U test (equivalently the Wilcoxon rank-sum test).
///
/// Exact when the samples total at most [`EXACT_MAX_TOTAL`] and have no ties;
/// otherwise a normal approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("Mann-Whitney U needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Argument("samples contain NaN".into()));
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..m].iter().sum();
    let u = rank_sum_a - (m * (m + 1)) as f64 / 2.0;

    let has_ties = {
        let mut sorted = pooled.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    };

    let (p, exact) = if m + n <= EXACT_MAX_TOTAL && !has_ties {
        let counts = u_counts(m, n);
        let total: f64 = counts.iter().sum();
        let k = u.round() as usize;
        let lower: f64 = counts[..=k].iter().sum::<f64>() / total;
        let upper: f64 = counts[k..].iter().sum::<f64>() / total;
        let p = match alternative {
            Alternative::Less => lower,
            Alternative::Greater => upper,
            Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
        };
        (p, true)
    } else {
        let (mf, nf) = (m as f64, n as f64);
        let big_n = mf + nf;
        let mut tie_term = 0.0;
        let mut sorted = pooled.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let var = mf * nf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        let mean = mf * nf / 2.0;
        let p = if !(var > 0.0) {
            1.0
        } else {
            let sd = var.sqrt();
            match alternative {
                Alternative::TwoSided => {
                    let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
                    (2.0 * (1.0 - z.norm_cdf())).min(1.0)
                }
                Alternative::Less => ((u - mean + 0.5) / sd).norm_cdf(),
                Alternative::Greater => 1.0 - ((u - mean - 0.5) / sd).norm_cdf(),
            }
        };
        (p, false)
    };
    let p = p.clamp(0.0, 1.0);
    Ok(TestResult {
        statistic: u,
        exact,
        p_value: p,
        p_adjusted: p,
        reject: false,
    })
}

/// Same test under its rank-sum name.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult> {
    mann_whitney_u(a, b, alternative)
}

/// Holm-Bonferroni step-down adjustment, returned in input order.
pub fn holm_bonferroni(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Argument(format!("p-value {p} outside [0, 1]")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        let v = ((m - j) as f64 * pvalues[i]).min(1.0);
        running = running.max(v);
        adjusted[i] = running;
    }
    Ok(adjusted)
}
