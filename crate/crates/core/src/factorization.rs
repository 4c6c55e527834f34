//! Completing the sparse score matrix with projected SGD factorization.
//!
//! The objective over the observed entries is
//!
//! ```text
//! Σ (v_ua − p_u·q_a)² + β/2 (‖P‖² + ‖Q‖²)
//! ```
//!
//! Each observed entry (visited user-major, no shuffling) applies
//! `p_u ← p_u + α(2 e q_a − β p_u)` and the symmetric update for `q_a`,
//! both computed from the pre-step values, then clamps negative factor
//! entries to zero. Training stops once the per-epoch cost decrease drops
//! below the tolerance.

use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorizationConfig {
    pub latent_dim: usize,
    /// α
    pub learning_rate: f64,
    /// β
    pub regularization: f64,
    /// Training stops when the cost decreases by less than this in one epoch.
    pub convergence_tol: f64,
    pub max_epochs: usize,
    pub rng_seed: u64,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            latent_dim: 20,
            learning_rate: 0.0002,
            regularization: 0.02,
            convergence_tol: 0.001,
            max_epochs: 5000,
            rng_seed: 0,
        }
    }
}

impl FactorizationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("factorization: {msg}")));
        if self.latent_dim == 0 {
            return bad("latent_dim must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.regularization.is_finite() && self.regularization >= 0.0) {
            return bad("regularization must be non-negative");
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationResult {
    pub latent_dim: usize,
    pub n_users: usize,
    pub n_articles: usize,
    /// Row-major `n_users × latent_dim`.
    #[serde(skip)]
    pub user_factors: Vec<f64>,
    /// Row-major `n_articles × latent_dim`.
    #[serde(skip)]
    pub item_factors: Vec<f64>,
    pub epochs_run: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
}

impl FactorizationResult {
    pub fn user_factor(&self, user: usize) -> &[f64] {
        &self.user_factors[user * self.latent_dim..(user + 1) * self.latent_dim]
    }

    pub fn item_factor(&self, article: usize) -> &[f64] {
        &self.item_factors[article * self.latent_dim..(article + 1) * self.latent_dim]
    }

    pub fn predict(&self, user: usize, article: usize) -> f64 {
        dot(self.user_factor(user), self.item_factor(article))
    }

    /// `V̂ = P·Qᵀ`, row-major.
    pub fn predicted(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_users * self.n_articles);
        for u in 0..self.n_users {
            for a in 0..self.n_articles {
                out.push(self.predict(u, a));
            }
        }
        out
    }

    pub fn write_user_factors<W: Write>(&self, ids: &[String], writer: W) -> Result<()> {
        write_factors(writer, ids, &self.user_factors, self.latent_dim)
    }

    pub fn write_item_factors<W: Write>(&self, ids: &[String], writer: W) -> Result<()> {
        write_factors(writer, ids, &self.item_factors, self.latent_dim)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cost(entries: &[(usize, usize, f64)], p: &[f64], q: &[f64], k: usize, beta: f64) -> f64 {
    let sq_err: f64 = entries
        .iter()
        .map(|&(u, a, v)| {
            let e = v - dot(&p[u * k..(u + 1) * k], &q[a * k..(a + 1) * k]);
            e * e
        })
        .sum();
    let norm: f64 = p.iter().chain(q).map(|x| x * x).sum();
    sq_err + beta / 2.0 * norm
}

pub fn factorize(v: &ScoreMatrix, cfg: &FactorizationConfig) -> Result<FactorizationResult> {
    cfg.validate()?;
    if v.observed().is_empty() {
        return Err(Error::Empty("observed scores"));
    }
    let (n, m, k) = (v.n_users(), v.n_articles(), cfg.latent_dim);
    if k > n.min(m) {
        return Err(Error::InvalidConfig(format!(
            "latent_dim {k} exceeds min(users, articles) = {}",
            n.min(m)
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut p: Vec<f64> = (0..n * k).map(|_| rng.sample(Open01)).collect();
    let mut q: Vec<f64> = (0..m * k).map(|_| rng.sample(Open01)).collect();
    let entries: Vec<(usize, usize, f64)> =
        v.observed().iter().map(|(&(u, a), &s)| (u, a, s)).collect();

    let (alpha, beta) = (cfg.learning_rate, cfg.regularization);
    let initial_cost = cost(&entries, &p, &q, k, beta);
    let mut prev = initial_cost;
    let mut epochs_run = 0;
    let mut converged = false;

    for epoch in 1..=cfg.max_epochs {
        for &(u, a, target) in &entries {
            let (pu, qa) = (&mut p[u * k..(u + 1) * k], &mut q[a * k..(a + 1) * k]);
            let err = target - dot(pu, qa);
            for (pf, qf) in pu.iter_mut().zip(qa.iter_mut()) {
                let (old_p, old_q) = (*pf, *qf);
                *pf = (old_p + alpha * (2.0 * err * old_q - beta * old_p)).max(0.0);
                *qf = (old_q + alpha * (2.0 * err * old_p - beta * old_q)).max(0.0);
            }
        }
        let current = cost(&entries, &p, &q, k, beta);
        epochs_run = epoch;
        if !current.is_finite() {
            return Err(Error::Diverged {
                epoch,
                cost: current,
            });
        }
        let decrease = prev - current;
        prev = current;
        // a rising cost keeps training; a flat start is not convergence
        if (0.0..cfg.convergence_tol).contains(&decrease) && current < initial_cost {
            converged = true;
            break;
        }
    }
    log::debug!(
        "factorization: {epochs_run} epochs, cost {initial_cost:.4} -> {prev:.4}, converged={converged}"
    );

    Ok(FactorizationResult {
        latent_dim: k,
        n_users: n,
        n_articles: m,
        user_factors: p,
        item_factors: q,
        epochs_run,
        initial_cost,
        final_cost: prev,
        converged,
    })
}

/// `V*`: observed scores kept verbatim, everything else predicted.
pub fn merge(v: &ScoreMatrix, result: &FactorizationResult) -> Result<ScoreMatrix> {
    if result.n_users != v.n_users() || result.n_articles != v.n_articles() {
        return Err(Error::InvalidConfig(format!(
            "factorization is {}×{} but the score matrix is {}×{}",
            result.n_users,
            result.n_articles,
            v.n_users(),
            v.n_articles()
        )));
    }
    let m = v.n_articles();
    let values = (0..v.n_users() * m)
        .map(|i| {
            let (u, a) = (i / m, i % m);
            v.observed_score(u, a)
                .unwrap_or_else(|| result.predict(u, a))
        })
        .collect();
    Ok(v.with_completed(values))
}

fn write_factors<W: Write>(writer: W, ids: &[String], factors: &[f64], k: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row_id".to_string()];
    header.extend((0..k).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for (id, row) in ids.iter().zip(factors.chunks(k)) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rank_one(x: &[f64], hidden: &[(usize, usize)]) -> ScoreMatrix {
        let mut triplets = Vec::new();
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                if !hidden.contains(&(i, j)) {
                    triplets.push((format!("u{i}"), format!("a{j}"), xi * xj));
                }
            }
        }
        ScoreMatrix::from_observed(triplets).unwrap()
    }

    fn rank_one_cfg() -> FactorizationConfig {
        FactorizationConfig {
            latent_dim: 1,
            regularization: 0.0,
            max_epochs: 200_000,
            learning_rate: 0.005,
            ..Default::default()
        }
    }

    #[test]
    fn fully_observed_rank_one() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let v = rank_one(&x, &[]);
        let r = factorize(&v, &rank_one_cfg()).unwrap();
        assert!(r.converged);
        let mut sq = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                sq += (r.predict(i, j) - x[i] * x[j]).powi(2);
            }
        }
        let rmse = (sq / 16.0).sqrt();
        assert!(rmse < 0.05, "rmse {rmse}");
    }

    #[test]
    fn hidden_entry_recovered() {
        let v = rank_one(&[1.0, 2.0, 3.0], &[(2, 2)]);
        assert_eq!(v.observed().len(), 8);
        let r = factorize(&v, &rank_one_cfg()).unwrap();
        assert!(r.converged);
        let guess = r.predict(2, 2);
        assert!((guess - 9.0).abs() <= 0.9, "predicted {guess}");

        let full = merge(&v, &r).unwrap();
        let values = full.completed().unwrap();
        for (&(u, a), &s) in v.observed() {
            assert_eq!(values[u * 3 + a].to_bits(), s.to_bits());
        }
        assert_eq!(values[8], guess);
    }

    #[test]
    fn merge_with_full_support_is_identity() {
        let v = rank_one(&[1.0, 2.0], &[]);
        let r = factorize(
            &v,
            &FactorizationConfig {
                latent_dim: 1,
                max_epochs: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let merged = merge(&v, &r).unwrap();
        assert_eq!(merged.completed().unwrap(), &[1.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn merge_rejects_mismatched_dimensions() {
        let small = rank_one(&[1.0, 2.0], &[]);
        let big = rank_one(&[1.0, 2.0, 3.0], &[]);
        let r = factorize(
            &small,
            &FactorizationConfig {
                latent_dim: 1,
                max_epochs: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(merge(&big, &r).is_err());
    }

    #[test]
    fn latent_dim_bounded_by_matrix() {
        let v = rank_one(&[1.0, 2.0], &[]);
        let err = factorize(&v, &FactorizationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn huge_step_diverges() {
        let v = rank_one(&[10.0, 20.0, 30.0], &[]);
        let cfg = FactorizationConfig {
            latent_dim: 2,
            learning_rate: 5.0,
            ..Default::default()
        };
        assert!(matches!(factorize(&v, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = FactorizationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.regularization = 0.0;
        assert!(cfg.validate().is_ok());
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = FactorizationConfig {
            convergence_tol: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn factor_csv_shape() {
        let v = rank_one(&[1.0, 2.0], &[]);
        let r = factorize(
            &v,
            &FactorizationConfig {
                latent_dim: 2,
                max_epochs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_user_factors(v.users(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("row_id,f0,f1"));
        assert!(lines.next().unwrap().starts_with("u0,"));
        assert_eq!(lines.count(), 1);
    }

    fn arb_matrix() -> impl Strategy<Value = ScoreMatrix> {
        proptest::collection::btree_map((0usize..5, 0usize..5), 1.0f64..10.0, 3..20).prop_map(
            |cells| {
                ScoreMatrix::from_observed(
                    cells
                        .into_iter()
                        .map(|((u, a), s)| (format!("u{u}"), format!("a{a}"), s)),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn deterministic_and_non_negative(v in arb_matrix(), seed in 0u64..1000) {
            let k = v.n_users().min(v.n_articles()).min(3);
            let cfg = FactorizationConfig { latent_dim: k, rng_seed: seed, max_epochs: 400, learning_rate: 0.005, ..Default::default() };
            let a = factorize(&v, &cfg).unwrap();
            let b = factorize(&v, &cfg).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.user_factors.iter().chain(&a.item_factors).all(|&x| x >= 0.0));
            prop_assert!(a.predicted().iter().all(|&x| x >= 0.0));
            if a.converged {
                prop_assert!(a.final_cost < a.initial_cost);
            }
            let merged = merge(&v, &a).unwrap();
            prop_assert_eq!(merge(&merged, &a).unwrap(), merged.clone());
        }
    }
}
