//! Gibbs samplers for the link-based clustering models and an exact
//! enumeration of their posteriors on tiny corpora.

mod crp_chain;
mod exact;
mod link_chain;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::distances::Distances;
use crate::error::{Error, Result};
use crate::likelihood::{log_marginal, merge_ratio_unchecked, ClusterStats, LikelihoodParams, DEFAULT_LAMBDA};
use crate::links::{ClusterAssignment, LinkState};

pub use crp_chain::TableCrpChain;
pub use exact::{enumerate_exact_posterior, MAX_ENUMERATION_MENTIONS};
pub use link_chain::{AuditReport, LinkChain};

pub type ChainRng = ChaCha8Rng;

/// RNG for chain `chain` of a run seeded with `seed`: one ChaCha stream per chain.
pub fn chain_rng(seed: u64, chain: usize) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "hddcrp")]
    Hddcrp,
    #[serde(rename = "hddcrp-star")]
    HddcrpStar,
    #[serde(rename = "ddcrp")]
    DdcrpFlat,
    #[serde(rename = "hdp-lex")]
    HdpLex,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Hddcrp, ModelKind::HddcrpStar, ModelKind::DdcrpFlat, ModelKind::HdpLex];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Hddcrp => "hddcrp",
            ModelKind::HddcrpStar => "hddcrp-star",
            ModelKind::DdcrpFlat => "ddcrp",
            ModelKind::HdpLex => "hdp-lex",
        }
    }

    pub fn default_alpha_0(self) -> f64 {
        match self {
            ModelKind::Hddcrp => 0.001,
            ModelKind::HddcrpStar => 1.0,
            ModelKind::DdcrpFlat => 0.1,
            ModelKind::HdpLex => 1.0,
        }
    }

    /// Whether the model's prior depends on pairwise distances.
    pub fn uses_distances(self) -> bool {
        !matches!(self, ModelKind::HdpLex)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hddcrp" => Ok(ModelKind::Hddcrp),
            "hddcrp-star" | "hddcrp_star" | "hddcrp*" => Ok(ModelKind::HddcrpStar),
            "ddcrp" | "ddcrp-flat" | "ddcrp_flat" => Ok(ModelKind::DdcrpFlat),
            "hdp-lex" | "hdp_lex" => Ok(ModelKind::HdpLex),
            _ => Err(Error::InvalidArgument(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointEstimate {
    /// Clustering of the last sweep.
    Final,
    /// Clustering of the highest joint score after burn-in.
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    Fixed,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub model: ModelKind,
    /// Within-document self-affinity.
    pub alpha_d: f64,
    /// Top-level concentration; the single concentration of the flat DDCRP.
    pub alpha_0: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub chains: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub point_estimate: PointEstimate,
    pub scan: ScanOrder,
    /// Restricts flat DDCRP links to earlier mentions in corpus order.
    pub sequential_flat: bool,
    /// Replaces the Dirichlet-multinomial likelihood by a constant.
    pub flat_likelihood: bool,
}

impl SamplerConfig {
    pub fn new(model: ModelKind) -> Self {
        Self {
            model,
            alpha_d: 0.5,
            alpha_0: model.default_alpha_0(),
            lambda: DEFAULT_LAMBDA,
            iterations: 500,
            chains: 5,
            seed: 0,
            burn_in: 0,
            point_estimate: PointEstimate::Final,
            scan: ScanOrder::Fixed,
            sequential_flat: false,
            flat_likelihood: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha_d", self.alpha_d)?;
        positive("alpha_0", self.alpha_0)?;
        positive("lambda", self.lambda)?;
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Observation model used by a chain.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Emission {
    Dirichlet(LikelihoodParams),
    Flat,
}

impl Emission {
    pub(crate) fn new(corpus: &Corpus, cfg: &SamplerConfig) -> Result<Self> {
        if cfg.flat_likelihood {
            Ok(Emission::Flat)
        } else {
            Ok(Emission::Dirichlet(LikelihoodParams::for_corpus(corpus, cfg.lambda)?))
        }
    }

    pub(crate) fn log_marginal(&self, s: &ClusterStats) -> f64 {
        match self {
            Emission::Dirichlet(p) => log_marginal(s, p),
            Emission::Flat => 0.0,
        }
    }

    pub(crate) fn merge_ratio(&self, a: &ClusterStats, b: &ClusterStats) -> f64 {
        match self {
            Emission::Dirichlet(p) => merge_ratio_unchecked(a, b, p),
            Emission::Flat => 0.0,
        }
    }
}

/// Index drawn from unnormalized log weights.
pub(crate) fn sample_log_weights(log_weights: &[f64], rng: &mut impl Rng) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    // Rounding can leave u marginally above the last weight.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub(crate) fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Sampler state as exported in chain results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerState {
    Links(LinkState),
    /// Customer links plus the top-level cluster of each table, stored at the
    /// table's head.
    TableClusters {
        customer_links: Vec<usize>,
        table_cluster: Vec<Option<usize>>,
    },
}

/// One Markov chain over a model's latent state.
pub trait Chain {
    fn sweep(&mut self, rng: &mut ChainRng);
    /// Raw cluster label per global mention index.
    fn labels(&self) -> Vec<usize>;
    /// Log prior of the link state plus log likelihood of its clustering.
    fn joint_log_score(&self) -> f64;
    fn state(&self) -> SamplerState;
}

/// Initializes a chain of the configured model.
pub fn build_chain<'a>(
    corpus: &'a Corpus,
    distances: &'a Distances,
    cfg: &SamplerConfig,
    rng: &mut ChainRng,
) -> Result<Box<dyn Chain + 'a>> {
    cfg.validate()?;
    if distances.num_mentions() != corpus.num_mentions() {
        return Err(Error::InvalidArgument("distance tables do not match the corpus".into()));
    }
    Ok(match cfg.model {
        ModelKind::Hddcrp | ModelKind::DdcrpFlat => Box::new(LinkChain::init(corpus, distances, cfg, rng)?),
        ModelKind::HddcrpStar | ModelKind::HdpLex => Box::new(TableCrpChain::init(corpus, distances, cfg, rng)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub chain: usize,
    pub final_state: SamplerState,
    pub final_clustering: ClusterAssignment,
    /// The chain's point estimate under the configured rule.
    pub estimate: ClusterAssignment,
    pub loglik_trace: Vec<f64>,
}

/// Runs chain `chain` of `cfg` to completion.
pub fn run_chain(corpus: &Corpus, distances: &Distances, cfg: &SamplerConfig, chain: usize) -> Result<ChainResult> {
    let mut rng = chain_rng(cfg.seed, chain);
    let mut sampler = build_chain(corpus, distances, cfg, &mut rng)?;
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for it in 0..cfg.iterations {
        sampler.sweep(&mut rng);
        let score = sampler.joint_log_score();
        trace.push(score);
        if cfg.point_estimate == PointEstimate::Map
            && (it >= cfg.burn_in || it + 1 == cfg.iterations)
            && best.as_ref().is_none_or(|(s, _)| score > *s)
        {
            best = Some((score, sampler.labels()));
        }
    }
    let final_clustering = ClusterAssignment::from_labels(corpus, &sampler.labels());
    let estimate = match best {
        Some((_, labels)) => ClusterAssignment::from_labels(corpus, &labels),
        None => final_clustering.clone(),
    };
    Ok(ChainResult {
        chain,
        final_state: sampler.state(),
        final_clustering,
        estimate,
        loglik_trace: trace,
    })
}

/// Runs `cfg.chains` independent chains on up to `jobs` threads. Results are
/// ordered by chain index and do not depend on `jobs`.
pub fn run_chains(corpus: &Corpus, distances: &Distances, cfg: &SamplerConfig, jobs: usize) -> Result<Vec<ChainResult>> {
    cfg.validate()?;
    let jobs = jobs.clamp(1, cfg.chains.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ChainResult>>>> = Mutex::new((0..cfg.chains).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= cfg.chains {
                    break;
                }
                let r = run_chain(corpus, distances, cfg, k);
                results.lock().expect("result lock poisoned")[k] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("result lock poisoned")
        .into_iter()
        .map(|r| r.expect("chain did not run"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("lda".parse::<ModelKind>().is_err());
    }

    #[test]
    fn defaults_per_model() {
        assert_eq!(SamplerConfig::new(ModelKind::Hddcrp).alpha_0, 0.001);
        assert_eq!(SamplerConfig::new(ModelKind::HddcrpStar).alpha_0, 1.0);
        assert_eq!(SamplerConfig::new(ModelKind::DdcrpFlat).alpha_0, 0.1);
        let c = SamplerConfig::new(ModelKind::Hddcrp);
        assert_eq!((c.alpha_d, c.iterations, c.chains, c.lambda), (0.5, 500, 5, 1e-7));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = SamplerConfig::new(ModelKind::Hddcrp);
        c.iterations = 0;
        assert!(c.validate().is_err());
        let mut c = SamplerConfig::new(ModelKind::Hddcrp);
        c.alpha_0 = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn log_weight_sampling_matches_probabilities() {
        let lw = [0.0, 2f64.ln(), f64::NEG_INFINITY, 3f64.ln()];
        let mut rng = chain_rng(7, 0);
        let mut counts = [0usize; 4];
        let n = 60_000;
        for _ in 0..n {
            counts[sample_log_weights(&lw, &mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        for (k, p) in [(0, 1.0 / 6.0), (1, 2.0 / 6.0), (3, 3.0 / 6.0)] {
            assert!((counts[k] as f64 / n as f64 - p).abs() < 0.01);
        }
    }

    #[test]
    fn chain_streams_differ() {
        let a: u64 = chain_rng(1, 0).random();
        let b: u64 = chain_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, chain_rng(1, 0).random::<u64>());
    }
}
