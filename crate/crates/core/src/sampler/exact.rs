//! Brute-force posterior over clusterings for corpora small enough to
//! enumerate every latent configuration.

use std::collections::BTreeMap;

use super::{Emission, ModelKind, SamplerConfig};
use crate::corpus::Corpus;
use crate::distances::Distances;
use crate::error::{Error, Result};
use crate::likelihood::{ClusterStats, Vocabulary};
use crate::links::{component_labels, tables_from_customer_links, ClusterAssignment, LinkState};

pub const MAX_ENUMERATION_MENTIONS: usize = 8;

const MAX_CONFIGURATIONS: f64 = 2e7;

/// Normalized candidate probabilities: self first, then the given targets.
fn normalized(self_index: usize, self_weight: f64, others: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut c = vec![(self_index, self_weight)];
    c.extend(others);
    let total: f64 = c.iter().map(|x| x.1).sum();
    c.into_iter().map(|(j, w)| (j, w / total)).collect()
}

/// Calls `f` with every element of the Cartesian product of `lists`.
fn for_each_product(lists: &[Vec<(usize, f64)>], mut f: impl FnMut(&[usize], f64)) {
    let mut idx = vec![0usize; lists.len()];
    let mut choice: Vec<usize> = lists.iter().map(|l| l[0].0).collect();
    loop {
        let p: f64 = lists.iter().zip(&idx).map(|(l, &k)| l[k].1).product();
        f(&choice, p);
        let mut pos = 0;
        loop {
            if pos == lists.len() {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < lists[pos].len() {
                choice[pos] = lists[pos][idx[pos]].0;
                break;
            }
            idx[pos] = 0;
            choice[pos] = lists[pos][0].0;
            pos += 1;
        }
    }
}

/// Calls `f` with every set partition of `n` items, as restricted growth
/// strings.
fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a = vec![0usize; n];
    let mut max = vec![0usize; n];
    loop {
        f(&a);
        let mut i = n;
        loop {
            if i <= 1 {
                return;
            }
            i -= 1;
            if a[i] <= max[i - 1] {
                a[i] += 1;
                max[i] = max[i - 1].max(a[i]);
                for j in i + 1..n {
                    a[j] = 0;
                    max[j] = max[i];
                }
                break;
            }
        }
    }
}

/// Log probability of a partition of `table_count` tables with block sizes
/// `sizes` under a CRP with concentration `alpha`.
fn crp_log_prob(sizes: &[usize], table_count: usize, alpha: f64) -> f64 {
    sizes.len() as f64 * alpha.ln() + libm::lgamma(alpha) - libm::lgamma(alpha + table_count as f64)
        + sizes.iter().map(|&s| libm::lgamma(s as f64)).sum::<f64>()
}

struct Accumulator<'a> {
    corpus: &'a Corpus,
    emission: Emission,
    mention_stats: Vec<ClusterStats>,
    prior_mass: BTreeMap<ClusterAssignment, f64>,
}

impl Accumulator<'_> {
    fn add(&mut self, raw: &[usize], prior: f64) {
        if prior > 0.0 {
            let z = ClusterAssignment::from_labels(self.corpus, raw);
            *self.prior_mass.entry(z).or_insert(0.0) += prior;
        }
    }

    fn finish(self) -> BTreeMap<ClusterAssignment, f64> {
        let log_post: Vec<(ClusterAssignment, f64)> = self
            .prior_mass
            .into_iter()
            .map(|(z, mass)| {
                let labels = z.labels_for(self.corpus).expect("assignment over corpus");
                let k = labels.iter().max().map_or(0, |m| m + 1);
                let mut stats = vec![ClusterStats::default(); k];
                for (g, &l) in labels.iter().enumerate() {
                    stats[l].absorb(&self.mention_stats[g]);
                }
                let ll: f64 = stats.iter().map(|s| self.emission.log_marginal(s)).sum();
                (z, mass.ln() + ll)
            })
            .collect();
        let max = log_post.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = log_post.iter().map(|x| (x.1 - max).exp()).sum();
        log_post.into_iter().map(|(z, l)| (z, (l - max).exp() / total)).collect()
    }
}

/// Exact posterior probability of every clustering with positive mass, under
/// the model and hyperparameters of `cfg`.
pub fn enumerate_exact_posterior(
    corpus: &Corpus,
    distances: &Distances,
    cfg: &SamplerConfig,
) -> Result<BTreeMap<ClusterAssignment, f64>> {
    cfg.validate()?;
    let n = corpus.num_mentions();
    if n == 0 {
        return Err(Error::InvalidArgument("corpus has no mentions".into()));
    }
    if n > MAX_ENUMERATION_MENTIONS {
        return Err(Error::TooLarge(format!(
            "exact enumeration supports at most {MAX_ENUMERATION_MENTIONS} mentions, corpus has {n}"
        )));
    }
    if distances.num_mentions() != n {
        return Err(Error::InvalidArgument("distance tables do not match the corpus".into()));
    }
    let vocab = Vocabulary::from_corpus(corpus);
    let mut acc = Accumulator {
        corpus,
        emission: Emission::new(corpus, cfg)?,
        mention_stats: (0..n).map(|g| ClusterStats::for_mention(&vocab, corpus.mention(g), g)).collect(),
        prior_mass: BTreeMap::new(),
    };
    let customer: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| match cfg.model {
            ModelKind::Hddcrp | ModelKind::HddcrpStar => normalized(i, cfg.alpha_d, distances.within(i).iter().copied()),
            ModelKind::HdpLex => {
                let start = corpus.doc_range(corpus.doc_of(i)).start;
                normalized(i, cfg.alpha_d, (start..i).map(|j| (j, 1.0)))
            }
            ModelKind::DdcrpFlat => normalized(
                i,
                cfg.alpha_0,
                distances.flat(i).iter().copied().filter(|&(j, _)| !cfg.sequential_flat || j < i),
            ),
        })
        .collect();
    let table: Vec<Vec<(usize, f64)>> = (0..n).map(|i| normalized(i, cfg.alpha_0, distances.cross(i).iter().copied())).collect();

    let mut count: f64 = customer.iter().map(|c| c.len() as f64).product();
    match cfg.model {
        ModelKind::Hddcrp => count *= table.iter().map(|c| c.len() as f64).product::<f64>(),
        ModelKind::HddcrpStar | ModelKind::HdpLex => count *= 4140.0,
        ModelKind::DdcrpFlat => {}
    }
    if count > MAX_CONFIGURATIONS {
        return Err(Error::TooLarge(format!("{count:.0} configurations exceed the enumeration budget")));
    }

    for_each_product(&customer, |links, p_customer| match cfg.model {
        ModelKind::DdcrpFlat => {
            let state = LinkState {
                customer_links: links.to_vec(),
                table_links: (0..n).collect(),
            };
            acc.add(&component_labels(&state), p_customer);
        }
        ModelKind::Hddcrp => {
            // Non-head table links do not change the clustering and their
            // prior sums to one.
            let lists: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|i| if links[i] == i { table[i].clone() } else { vec![(i, 1.0)] })
                .collect();
            for_each_product(&lists, |tlinks, p_table| {
                let state = LinkState {
                    customer_links: links.to_vec(),
                    table_links: tlinks.to_vec(),
                };
                acc.add(&component_labels(&state), p_customer * p_table);
            });
        }
        ModelKind::HddcrpStar | ModelKind::HdpLex => {
            let tables: Vec<_> = (0..corpus.num_documents())
                .flat_map(|d| tables_from_customer_links(links, corpus, d))
                .collect();
            for_each_partition(tables.len(), |blocks| {
                let k = blocks.iter().max().map_or(0, |m| m + 1);
                let mut sizes = vec![0usize; k];
                let mut raw = vec![0usize; n];
                for (t, &b) in tables.iter().zip(blocks) {
                    sizes[b] += 1;
                    for &m in &t.members {
                        raw[m] = b;
                    }
                }
                let p = p_customer * crp_log_prob(&sizes, tables.len(), cfg.alpha_0).exp();
                acc.add(&raw, p);
            });
        }
    });
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let mut c = 0;
            for_each_partition(n, |_| c += 1);
            assert_eq!(c, bell);
        }
    }

    #[test]
    fn product_covers_every_combination() {
        let lists = vec![vec![(0, 0.5), (1, 0.5)], vec![(5, 0.25), (6, 0.25), (7, 0.5)]];
        let mut seen = Vec::new();
        let mut mass = 0.0;
        for_each_product(&lists, |c, p| {
            seen.push(c.to_vec());
            mass += p;
        });
        assert_eq!(seen.len(), 6);
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crp_partition_probabilities_sum_to_one() {
        let mut total = 0.0;
        for_each_partition(5, |a| {
            let k = a.iter().max().unwrap() + 1;
            let mut sizes = vec![0; k];
            for &b in a {
                sizes[b] += 1;
            }
            total += crp_log_prob(&sizes, 5, 0.7).exp();
        });
        assert!((total - 1.0).abs() < 1e-12);
    }
}
