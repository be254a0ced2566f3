//! Posterior summaries and chain diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::exchange::ChainOutput;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    /// `None` for the pooled row.
    pub chain: Option<usize>,
    pub draws: usize,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub ess: Vec<f64>,
    pub acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub burn_in: f64,
    pub chains: Vec<ChainSummary>,
    pub pooled: ChainSummary,
}

/// Draws kept after discarding the warmup rows and then the leading
/// `burn_in` fraction of what remains.
pub fn retained_draws(chain: &ChainOutput, burn_in: f64) -> &[crate::StatVector] {
    let after = &chain.draws[chain.warmup.min(chain.draws.len())..];
    let skip = (burn_in * after.len() as f64).floor() as usize;
    &after[skip.min(after.len())..]
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    let mean = sum / n as f64;
    let ss: f64 = xs.map(|x| (x - mean).powi(2)).sum();
    let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd)
}

/// Per-chain and pooled means, standard deviations (n - 1 denominator), ESS
/// and acceptance rates.
pub fn summarize(chains: &[ChainOutput], burn_in: f64) -> Result<PosteriorSummary> {
    if chains.is_empty() {
        return Err(ErgmError::config("no chains to summarize"));
    }
    if !(0.0..1.0).contains(&burn_in) {
        return Err(ErgmError::config("burn-in fraction must lie in [0, 1)"));
    }
    let d = chains[0].dim();
    let mut rows = Vec::with_capacity(chains.len());
    for c in chains {
        if c.dim() != d {
            return Err(ErgmError::Dimension { expected: d, got: c.dim() });
        }
        let kept = retained_draws(c, burn_in);
        if kept.is_empty() {
            return Err(ErgmError::config(format!("chain {} has no draws after burn-in", c.chain)));
        }
        let mut mean = Vec::with_capacity(d);
        let mut sd = Vec::with_capacity(d);
        let mut ess = Vec::with_capacity(d);
        for k in 0..d {
            let (m, s) = mean_sd(kept.iter().map(|t| t[k]));
            mean.push(m);
            sd.push(s);
            let series: Vec<f64> = kept.iter().map(|t| t[k]).collect();
            ess.push(effective_sample_size(&series).map_or(f64::NAN, |e| e.value));
        }
        rows.push(ChainSummary {
            chain: Some(c.chain),
            draws: kept.len(),
            mean,
            sd,
            ess,
            acceptance: c.overall_acceptance(),
        });
    }
    let pooled_draws = || chains.iter().flat_map(|c| retained_draws(c, burn_in).iter());
    let total: usize = rows.iter().map(|r| r.draws).sum();
    let mut mean = Vec::with_capacity(d);
    let mut sd = Vec::with_capacity(d);
    for k in 0..d {
        let m = rows.iter().map(|r| r.mean[k] * r.draws as f64).sum::<f64>() / total as f64;
        let ss: f64 = pooled_draws().map(|t| (t[k] - m).powi(2)).sum();
        mean.push(m);
        sd.push(if total > 1 { (ss / (total - 1) as f64).sqrt() } else { 0.0 });
    }
    let ess = (0..d).map(|k| rows.iter().map(|r| r.ess[k]).sum()).collect();
    let (acc, prop) = chains.iter().fold((0u64, 0u64), |(a, p), c| {
        (a + c.accepted.iter().sum::<u64>(), p + c.proposed.iter().sum::<u64>())
    });
    let pooled = ChainSummary {
        chain: None,
        draws: total,
        mean,
        sd,
        ess,
        acceptance: if prop == 0 { 0.0 } else { acc as f64 / prop as f64 },
    };
    Ok(PosteriorSummary { burn_in, chains: rows, pooled })
}

/// Sample autocorrelation function for lags `0..=max_lag`. A zero-variance
/// series gives `1` at lag 0 and `NaN` beyond.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() <= max_lag {
        return Err(ErgmError::SeriesTooShort { need: max_lag + 1, got: series.len() });
    }
    let acf = Acf::new(series);
    Ok((0..=max_lag).map(|k| acf.at(k)).collect())
}

struct Acf {
    centered: Vec<f64>,
    c0: f64,
}

impl Acf {
    fn new(series: &[f64]) -> Self {
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
        let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n;
        Acf { centered, c0 }
    }

    fn degenerate(&self) -> bool {
        !(self.c0 > 1e-300)
    }

    fn at(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if self.degenerate() {
            return f64::NAN;
        }
        let x = &self.centered;
        let ck: f64 = x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64;
        ck / self.c0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub value: f64,
    /// Zero-variance input; `value` is then the series length by convention.
    pub degenerate: bool,
}

/// `N / tau` with `tau = 1 + 2 sum_k rho_k`, truncated by Geyer's initial
/// positive sequence rule on consecutive lag pairs.
pub fn effective_sample_size(series: &[f64]) -> Result<Ess> {
    let n = series.len();
    if n < 10 {
        return Err(ErgmError::SeriesTooShort { need: 10, got: n });
    }
    let acf = Acf::new(series);
    if acf.degenerate() {
        return Ok(Ess { value: n as f64, degenerate: true });
    }
    // tau = -1 + 2 * sum_m (rho_{2m} + rho_{2m+1}) over the positive prefix
    let mut sum = 0.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = acf.at(2 * m) + acf.at(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    Ok(Ess { value: n as f64 / tau, degenerate: false })
}

/// First lag `k >= 1` with `|rho_k| < threshold`, searched up to `max_lag`.
pub fn first_negligible_lag(series: &[f64], threshold: f64, max_lag: usize) -> Result<Option<usize>> {
    if series.len() <= max_lag {
        return Err(ErgmError::SeriesTooShort { need: max_lag + 1, got: series.len() });
    }
    let acf = Acf::new(series);
    if acf.degenerate() {
        return Ok(None);
    }
    Ok((1..=max_lag).find(|&k| acf.at(k).abs() < threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StatVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn chain(id: usize, rows: Vec<Vec<f64>>) -> ChainOutput {
        let d = rows[0].len();
        ChainOutput {
            chain: id,
            seed: 0,
            draws: rows.into_iter().map(StatVector::new).collect(),
            warmup: 0,
            accepted: vec![1; d],
            proposed: vec![4; d],
            aux_log: None,
        }
    }

    fn ar1(rho: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        let sd = (1.0 - rho * rho).sqrt();
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = rho * x + sd * z;
                x
            })
            .collect()
    }

    #[test]
    fn constant_chain() {
        let s = summarize(&[chain(0, vec![vec![2.5, -1.0]; 50])], 0.0).unwrap();
        assert_eq!(s.pooled.mean, vec![2.5, -1.0]);
        assert_eq!(s.pooled.sd, vec![0.0, 0.0]);
        assert_eq!(s.pooled.acceptance, 0.25);
    }

    #[test]
    fn pooled_moments_by_hand() {
        let a = chain(0, vec![vec![1.0], vec![2.0], vec![3.0]]);
        let b = chain(1, vec![vec![5.0], vec![7.0], vec![9.0]]);
        let s = summarize(&[a.clone(), b.clone()], 0.0).unwrap();
        assert_eq!(s.chains[0].mean, vec![2.0]);
        assert_eq!(s.chains[1].mean, vec![7.0]);
        assert_eq!(s.chains[1].sd, vec![2.0]);
        assert!((s.pooled.mean[0] - 4.5).abs() < 1e-12);
        // pooled values 1,2,3,5,7,9: ss = 12.25+6.25+2.25+0.25+6.25+20.25
        assert!((s.pooled.sd[0] - (47.5f64 / 5.0).sqrt()).abs() < 1e-12);
        let swapped = summarize(&[b, a], 0.0).unwrap();
        assert!((swapped.pooled.mean[0] - s.pooled.mean[0]).abs() < 1e-12);
        assert!((swapped.pooled.sd[0] - s.pooled.sd[0]).abs() < 1e-12);
    }

    #[test]
    fn burn_in_and_warmup_are_discarded() {
        let mut c = chain(0, (0..10).map(|k| vec![k as f64]).collect());
        c.warmup = 2;
        assert_eq!(retained_draws(&c, 0.5).len(), 4);
        let s = summarize(&[c], 0.5).unwrap();
        assert_eq!(s.pooled.mean, vec![7.5]);
        assert!(summarize(&[], 0.1).is_err());
        assert!(summarize(&[chain(0, vec![vec![1.0]])], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn pooled_mean_is_weighted_chain_mean(xs in proptest::collection::vec(-5.0f64..5.0, 4..40), split in 1usize..3) {
            let cut = xs.len() * split / 4;
            prop_assume!(cut > 0 && cut < xs.len());
            let a = chain(0, xs[..cut].iter().map(|x| vec![*x]).collect());
            let b = chain(1, xs[cut..].iter().map(|x| vec![*x]).collect());
            let s = summarize(&[a, b], 0.0).unwrap();
            let w = s.chains.iter().map(|r| r.mean[0] * r.draws as f64).sum::<f64>() / xs.len() as f64;
            prop_assert!((s.pooled.mean[0] - w).abs() < 1e-12);
        }

        #[test]
        fn acf_is_bounded(xs in proptest::collection::vec(-10.0f64..10.0, 12..80)) {
            let acf = autocorrelation(&xs, 10).unwrap();
            prop_assert_eq!(acf[0], 1.0);
            for r in &acf {
                prop_assert!(r.is_nan() || r.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn white_noise_acf() {
        let x = ar1(0.0, 20_000, 1);
        let acf = autocorrelation(&x, 200).unwrap();
        let bound = 3.0 / (x.len() as f64).sqrt();
        let inside = acf[1..].iter().filter(|r| r.abs() < bound).count();
        assert!(inside as f64 >= 0.99 * 200.0 - 1.0);
        let ess = effective_sample_size(&x).unwrap();
        assert!((ess.value / 20_000.0 - 1.0).abs() < 0.1, "{}", ess.value);
    }

    #[test]
    fn ar1_acf_and_ess() {
        let rho: f64 = 0.9;
        let x = ar1(rho, 100_000, 2);
        let acf = autocorrelation(&x, 20).unwrap();
        for (k, r) in acf.iter().enumerate() {
            assert!((r - rho.powi(k as i32)).abs() < 0.03, "lag {k}: {r}");
        }
        let ess = effective_sample_size(&x).unwrap();
        let want = 100_000.0 * (1.0 - rho) / (1.0 + rho);
        assert!((ess.value / want - 1.0).abs() < 0.2, "{} vs {want}", ess.value);
        // 0.9^k < 0.05 first at k = 29
        let lag = first_negligible_lag(&x, 0.05, 200).unwrap().unwrap();
        assert!((20..=40).contains(&lag), "{lag}");
    }

    #[test]
    fn degenerate_series() {
        let x = vec![3.0; 50];
        let acf = autocorrelation(&x, 3).unwrap();
        assert_eq!(acf[0], 1.0);
        assert!(acf[1..].iter().all(|r| r.is_nan()));
        let ess = effective_sample_size(&x).unwrap();
        assert!(ess.degenerate);
        assert_eq!(ess.value, 50.0);
        assert_eq!(first_negligible_lag(&x, 0.05, 10).unwrap(), None);
        assert!(autocorrelation(&x, 50).is_err());
        assert!(effective_sample_size(&x[..5]).is_err());
    }
}
