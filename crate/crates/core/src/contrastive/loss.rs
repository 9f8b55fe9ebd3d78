//! Contrastive loss over `4B` views and its analytic gradient.
//!
//! For anchor `a` with positive `p(a)`:
//!
//! ```text
//! l_a = -s(a, p(a)) / tau + log sum_{j != a} exp(s(a, j) / tau)
//! L   = (1 / 4B) sum_a l_a
//! ```
//!
//! where `s` is cosine similarity. The denominator runs over every other view,
//! so the positive appears in it and hard negatives (the other scale of the
//! same crop source) compete with it.

use super::{positive_of, EmbeddingBatch};
use crate::error::{Error, Result};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("dimension mismatch: {} vs {}", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::invalid("cosine similarity of a zero-norm vector"));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

struct Prepared {
    n: usize,
    norms: Vec<f64>,
    unit: Vec<Vec<f64>>,
    sim: Vec<f64>,
}

fn prepare(batch: &EmbeddingBatch, tau: f64) -> Result<Prepared> {
    if batch.pairs() < 2 {
        return Err(Error::invalid(format!("contrastive loss needs at least 2 pairs, got {}", batch.pairs())));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("temperature must be positive, got {tau}")));
    }
    let n = batch.len();
    let norms: Vec<f64> = batch.rows().map(norm).collect();
    if let Some(v) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::invalid(format!("view {v} has zero norm")));
    }
    let unit: Vec<Vec<f64>> = batch.rows().zip(&norms).map(|(r, &nr)| r.iter().map(|x| x / nr).collect()).collect();
    let mut sim = vec![0.0; n * n];
    for a in 0..n {
        sim[a * n + a] = 1.0;
        for j in a + 1..n {
            let s = dot(&unit[a], &unit[j]);
            sim[a * n + j] = s;
            sim[j * n + a] = s;
        }
    }
    Ok(Prepared { n, norms, unit, sim })
}

/// Returns `(loss, per-view terms)` with terms in row order.
pub fn nt_xent_multiscale(batch: &EmbeddingBatch, tau: f64) -> Result<(f64, Vec<f64>)> {
    let prep = prepare(batch, tau)?;
    let (terms, _) = terms_and_softmax(&prep, batch.pairs(), tau, false);
    let loss = terms.iter().sum::<f64>() / prep.n as f64;
    Ok((loss, terms))
}

fn terms_and_softmax(prep: &Prepared, pairs: usize, tau: f64, want_softmax: bool) -> (Vec<f64>, Vec<f64>) {
    let n = prep.n;
    let mut terms = Vec::with_capacity(n);
    let mut soft = if want_softmax { vec![0.0; n * n] } else { Vec::new() };
    for a in 0..n {
        let row = &prep.sim[a * n..(a + 1) * n];
        let m =
            row.iter().enumerate().filter(|&(j, _)| j != a).map(|(_, &s)| s / tau).fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (j, &s) in row.iter().enumerate() {
            if j != a {
                let e = (s / tau - m).exp();
                z += e;
                if want_softmax {
                    soft[a * n + j] = e;
                }
            }
        }
        if want_softmax {
            soft[a * n..(a + 1) * n].iter_mut().for_each(|e| *e /= z);
        }
        let p = positive_of(pairs, a);
        terms.push(m + z.ln() - row[p] / tau);
    }
    (terms, soft)
}

/// Loss and gradient in one pass; the gradient has the batch's row-major layout.
pub fn nt_xent_with_gradient(batch: &EmbeddingBatch, tau: f64) -> Result<(f64, Vec<f64>)> {
    let prep = prepare(batch, tau)?;
    let pairs = batch.pairs();
    let n = prep.n;
    let dim = batch.dim();
    let (terms, soft) = terms_and_softmax(&prep, pairs, tau, true);
    let loss = terms.iter().sum::<f64>() / n as f64;

    // dL/ds(a, j) from anchor a's term, before symmetrizing.
    let scale = 1.0 / (n as f64 * tau);
    let mut c = soft;
    for a in 0..n {
        c[a * n + positive_of(pairs, a)] -= 1.0;
        c[a * n + a] = 0.0;
    }
    let mut grad = vec![0.0; n * dim];
    for a in 0..n {
        let g = &mut grad[a * dim..(a + 1) * dim];
        let mut radial = 0.0;
        for j in 0..n {
            if j == a {
                continue;
            }
            let m = scale * (c[a * n + j] + c[j * n + a]);
            if m == 0.0 {
                continue;
            }
            radial += m * prep.sim[a * n + j];
            for (gk, uk) in g.iter_mut().zip(&prep.unit[j]) {
                *gk += m * uk;
            }
        }
        let inv = 1.0 / prep.norms[a];
        for (gk, uk) in g.iter_mut().zip(&prep.unit[a]) {
            *gk = (*gk - radial * uk) * inv;
        }
    }
    Ok((loss, grad))
}

/// Analytic gradient of the loss with respect to every embedding value.
pub fn nt_xent_gradient(batch: &EmbeddingBatch, tau: f64) -> Result<Vec<f64>> {
    nt_xent_with_gradient(batch, tau).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrastive::{view_index, Scale, Source};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_batch(seed: u64, pairs: usize, dim: usize) -> EmbeddingBatch {
        let mut rng = crate::rng::rng_from_seed(seed);
        let values = (0..4 * pairs * dim).map(|_| rng.sample(StandardNormal)).collect();
        EmbeddingBatch::new(pairs, dim, values).unwrap()
    }

    /// Literal evaluation of the four loss terms per index, each written out as
    /// its own numerator and denominator sums.
    fn literal_loss(batch: &EmbeddingBatch, tau: f64) -> f64 {
        let b = batch.pairs();
        let z = |src: Source, sc: Scale, i: usize| batch.row(view_index(b, src, sc, i));
        let gamma = |x: &[f64], y: &[f64]| {
            let c = dot(x, y) / (norm(x) * norm(y));
            (c / tau).exp()
        };
        use Scale::{Full, Half};
        use Source::{First as S1, Second as S2};
        let mut total = 0.0;
        for i in 0..b {
            for (own, other, sc, osc) in
                [(S1, S2, Full, Half), (S2, S1, Full, Half), (S1, S2, Half, Full), (S2, S1, Half, Full)]
            {
                let anchor = z(own, sc, i);
                let num = gamma(anchor, z(other, sc, i));
                let mut den = 0.0;
                for k in 0..b {
                    den += gamma(anchor, z(other, sc, k));
                    den += gamma(anchor, z(other, osc, k));
                    den += gamma(anchor, z(own, osc, k));
                    if k != i {
                        den += gamma(anchor, z(own, sc, k));
                    }
                }
                total += -(num / den).ln();
            }
        }
        total / (4 * b) as f64
    }

    #[test]
    fn cosine_basics() {
        let a = [1.0, 2.0, -0.5];
        assert_relative_eq!(cosine_similarity(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        let b = [0.3, -1.1, 2.0];
        let want = (1.0 * 0.3 - 2.0 * 1.1 - 1.0) / ((1.0f64 + 4.0 + 0.25).sqrt() * (0.09f64 + 1.21 + 4.0).sqrt());
        assert_relative_eq!(cosine_similarity(&a, &b).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn matches_literal_oracle() {
        for seed in 0..20 {
            let batch = random_batch(seed, 2 + (seed as usize % 5), 3 + (seed as usize % 7));
            for tau in [0.1, 0.5, 2.0] {
                let (got, terms) = nt_xent_multiscale(&batch, tau).unwrap();
                assert_eq!(terms.len(), batch.len());
                assert_relative_eq!(got, literal_loss(&batch, tau), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn identical_embeddings_give_log_of_denominator_size() {
        for b in 2..6 {
            let batch = EmbeddingBatch::new(b, 3, [0.2, -1.0, 0.7].repeat(4 * b)).unwrap();
            let (loss, _) = nt_xent_multiscale(&batch, 0.1).unwrap();
            assert_relative_eq!(loss, ((4 * b - 1) as f64).ln(), epsilon = 1e-12);
            let grad = nt_xent_gradient(&batch, 0.1).unwrap();
            let norms: Vec<f64> = grad.chunks(3).map(norm).collect();
            for w in norms.windows(2) {
                assert_relative_eq!(w[0], w[1], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn separated_positive_term_vanishes() {
        // anchor and positive coincide; every other view is antipodal
        let b = 2;
        let u = [0.6, -0.8, 0.0];
        let mut values = Vec::new();
        for v in 0..4 * b {
            let sign = if v == 0 || v == positive_of(b, 0) { 1.0 } else { -1.0 };
            values.extend(u.iter().map(|x| sign * x));
        }
        let batch = EmbeddingBatch::new(b, 3, values).unwrap();
        let tau = 0.1;
        let (_, terms) = nt_xent_multiscale(&batch, tau).unwrap();
        let closed = (1.0 + (4 * b - 2) as f64 * (-2.0 / tau).exp()).ln();
        assert_relative_eq!(terms[0], closed, max_relative = 1e-9);
        assert!(terms[0] < 1.3e-8);
        let (_, sharper) = nt_xent_multiscale(&batch, 0.05).unwrap();
        assert!(sharper[0] < 1e-15);
    }

    #[test]
    fn rejects_small_batches_and_bad_tau() {
        let one = random_batch(1, 1, 4);
        assert!(nt_xent_multiscale(&one, 0.1).is_err());
        let two = random_batch(1, 2, 4);
        assert!(nt_xent_multiscale(&two, 0.0).is_err());
        let mut zero = two.clone();
        zero.values_mut()[..4].fill(0.0);
        assert!(nt_xent_multiscale(&zero, 0.1).is_err());
    }

    fn finite_difference(batch: &EmbeddingBatch, tau: f64, h: f64) -> Vec<f64> {
        let mut out = vec![0.0; batch.values().len()];
        for (k, o) in out.iter_mut().enumerate() {
            let mut plus = batch.clone();
            plus.values_mut()[k] += h;
            let mut minus = batch.clone();
            minus.values_mut()[k] -= h;
            let lp = nt_xent_multiscale(&plus, tau).unwrap().0;
            let lm = nt_xent_multiscale(&minus, tau).unwrap().0;
            *o = (lp - lm) / (2.0 * h);
        }
        out
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let batch = random_batch(100 + seed, 4, 8);
            let g = nt_xent_gradient(&batch, 0.5).unwrap();
            let fd = finite_difference(&batch, 0.5, 1e-5);
            let scale = fd.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let err = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err / scale < 1e-4, "seed {seed}: {err} / {scale}");
        }
    }

    #[test]
    fn radial_derivative_vanishes() {
        // the loss depends on directions only, so d/dt L(z_a * (1 + t)) = 0
        let batch = random_batch(9, 3, 5);
        let g = nt_xent_gradient(&batch, 0.2).unwrap();
        for a in 0..batch.len() {
            let row = batch.row(a);
            let analytic = dot(&g[a * 5..(a + 1) * 5], row);
            let h = 1e-5;
            let bump = |t: f64| {
                let mut b = batch.clone();
                b.values_mut()[a * 5..(a + 1) * 5].iter_mut().zip(row).for_each(|(v, r)| *v = r * (1.0 + t));
                nt_xent_multiscale(&b, 0.2).unwrap().0
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            assert!((analytic - fd).abs() < 1e-4);
            assert!(analytic.abs() < 1e-10);
        }
    }

    #[test]
    fn large_tau_approaches_log_denominator_size() {
        let batch = random_batch(5, 4, 6);
        let (loss, _) = nt_xent_multiscale(&batch, 1e3).unwrap();
        assert!((loss - 15f64.ln()).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn invariant_to_positive_rescaling(seed in 0u64..1000, view in 0usize..12, pairs in 2usize..4) {
            let batch = random_batch(seed, pairs, 5);
            let view = view % batch.len();
            let (base, _) = nt_xent_multiscale(&batch, 0.1).unwrap();
            let mut scaled = batch.clone();
            scaled.values_mut()[view * 5..(view + 1) * 5].iter_mut().for_each(|v| *v *= 7.3);
            let (after, _) = nt_xent_multiscale(&scaled, 0.1).unwrap();
            prop_assert!((base - after).abs() < 1e-10);
        }

        #[test]
        fn pair_permutation_permutes_terms(seed in 0u64..1000, rot in 1usize..4) {
            let pairs = 4;
            let dim = 3;
            let batch = random_batch(seed, pairs, dim);
            let perm: Vec<usize> = (0..pairs).map(|i| (i + rot) % pairs).collect();
            let mut values = vec![0.0; batch.values().len()];
            for v in 0..batch.len() {
                let (block, i) = (v / pairs, v % pairs);
                let dst = block * pairs + perm[i];
                values[dst * dim..(dst + 1) * dim].copy_from_slice(batch.row(v));
            }
            let permuted = EmbeddingBatch::new(pairs, dim, values).unwrap();
            let (l0, t0) = nt_xent_multiscale(&batch, 0.3).unwrap();
            let (l1, t1) = nt_xent_multiscale(&permuted, 0.3).unwrap();
            prop_assert!((l0 - l1).abs() < 1e-12);
            for v in 0..batch.len() {
                let (block, i) = (v / pairs, v % pairs);
                prop_assert!((t0[v] - t1[block * pairs + perm[i]]).abs() < 1e-12);
            }
        }
    }
}
