//! MUC, B³, CEAF_e and CoNLL F1 over clusterings of a shared mention set.
//!
//! Vacuous ratios (zero denominators) score 0, as in the reference CoNLL
//! scorer: a singleton-only gold side gives MUC recall 0, and so on.

mod assignment;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

pub use assignment::max_weight_assignment;

use crate::corpus::{build_meta_documents, Corpus};
use crate::error::{Error, Result};
use crate::links::ClusterAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Precision and recall numerators and denominators, summable across
/// documents.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricCounts {
    pub p_num: f64,
    pub p_den: f64,
    pub r_num: f64,
    pub r_den: f64,
}

impl MetricCounts {
    pub fn prf(&self) -> Prf {
        Prf::new(ratio(self.p_num, self.p_den), ratio(self.r_num, self.r_den))
    }
}

impl std::ops::AddAssign for MetricCounts {
    fn add_assign(&mut self, o: Self) {
        self.p_num += o.p_num;
        self.p_den += o.p_den;
        self.r_num += o.r_num;
        self.r_den += o.r_den;
    }
}

/// Clusters as sets of positions over a shared universe.
fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut g: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (m, &l) in labels.iter().enumerate() {
        g.entry(l).or_default().push(m);
    }
    g.into_values().collect()
}

fn muc_side(key: &[usize], response: &[usize]) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for g in groups(key) {
        let parts: BTreeSet<usize> = g.iter().map(|&m| response[m]).collect();
        num += (g.len() - parts.len()) as f64;
        den += (g.len() - 1) as f64;
    }
    (num, den)
}

/// MUC link counts for label vectors over the same mentions.
pub fn muc_counts(gold: &[usize], pred: &[usize]) -> MetricCounts {
    let (r_num, r_den) = muc_side(gold, pred);
    let (p_num, p_den) = muc_side(pred, gold);
    MetricCounts { p_num, p_den, r_num, r_den }
}

fn overlap_table(gold: &[usize], pred: &[usize]) -> BTreeMap<(usize, usize), usize> {
    let mut t = BTreeMap::new();
    for (&g, &p) in gold.iter().zip(pred) {
        *t.entry((g, p)).or_insert(0) += 1;
    }
    t
}

fn sizes(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut s = BTreeMap::new();
    for &l in labels {
        *s.entry(l).or_insert(0) += 1;
    }
    s
}

/// B³ sums of per-mention precision and recall.
pub fn b_cubed_counts(gold: &[usize], pred: &[usize]) -> MetricCounts {
    let (gs, ps) = (sizes(gold), sizes(pred));
    let (mut p_num, mut r_num) = (0.0, 0.0);
    // Each (g, p) cell holds `n` mentions, each with overlap `n`.
    for ((g, p), n) in overlap_table(gold, pred) {
        let n = n as f64;
        p_num += n * n / ps[&p] as f64;
        r_num += n * n / gs[&g] as f64;
    }
    let total = gold.len() as f64;
    MetricCounts {
        p_num,
        p_den: total,
        r_num,
        r_den: total,
    }
}

/// Entity similarity `φ₄(G, S) = 2|G ∩ S| / (|G| + |S|)`.
pub fn phi4(overlap: usize, gold_size: usize, pred_size: usize) -> f64 {
    2.0 * overlap as f64 / (gold_size + pred_size) as f64
}

/// CEAF_e mass of the optimal gold/predicted entity alignment, with cluster
/// counts as denominators.
pub fn ceaf_e_counts(gold: &[usize], pred: &[usize]) -> MetricCounts {
    let gk: Vec<(usize, usize)> = sizes(gold).into_iter().collect();
    let pk: Vec<(usize, usize)> = sizes(pred).into_iter().collect();
    let gi: BTreeMap<usize, usize> = gk.iter().enumerate().map(|(i, &(l, _))| (l, i)).collect();
    let pi: BTreeMap<usize, usize> = pk.iter().enumerate().map(|(i, &(l, _))| (l, i)).collect();
    let mut w = vec![vec![0.0; pk.len()]; gk.len()];
    for ((g, p), n) in overlap_table(gold, pred) {
        let (a, b) = (gi[&g], pi[&p]);
        w[a][b] = phi4(n, gk[a].1, pk[b].1);
    }
    let (mass, _) = max_weight_assignment(&w);
    MetricCounts {
        p_num: mass,
        p_den: pk.len() as f64,
        r_num: mass,
        r_den: gk.len() as f64,
    }
}

/// Label vectors of two clusterings over their common, identical universe.
fn aligned(gold: &ClusterAssignment, pred: &ClusterAssignment) -> Result<(Vec<usize>, Vec<usize>)> {
    if gold.len() != pred.len() {
        return Err(Error::UniverseMismatch(format!(
            "gold covers {} mentions, prediction covers {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (id, l) in gold.iter() {
        let pl = pred
            .get(id)
            .ok_or_else(|| Error::UniverseMismatch(format!("mention `{id}` missing from prediction")))?;
        g.push(l);
        p.push(pl);
    }
    Ok((g, p))
}

pub fn muc(gold: &ClusterAssignment, pred: &ClusterAssignment) -> Result<Prf> {
    let (g, p) = aligned(gold, pred)?;
    Ok(muc_counts(&g, &p).prf())
}

pub fn b_cubed(gold: &ClusterAssignment, pred: &ClusterAssignment) -> Result<Prf> {
    let (g, p) = aligned(gold, pred)?;
    Ok(b_cubed_counts(&g, &p).prf())
}

pub fn ceaf_e(gold: &ClusterAssignment, pred: &ClusterAssignment) -> Result<Prf> {
    let (g, p) = aligned(gold, pred)?;
    Ok(ceaf_e_counts(&g, &p).prf())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "WD")]
    WithinDocument,
    #[serde(rename = "CD")]
    CrossDocument,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::WithinDocument => "WD",
            Setting::CrossDocument => "CD",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub setting: Setting,
    pub muc: Prf,
    #[serde(rename = "b3")]
    pub b_cubed: Prf,
    #[serde(rename = "ceafe")]
    pub ceaf_e: Prf,
    pub conll_f1: f64,
}

impl ScoreReport {
    fn from_counts(setting: Setting, muc: MetricCounts, b3: MetricCounts, ceaf: MetricCounts) -> Self {
        let (muc, b_cubed, ceaf_e) = (muc.prf(), b3.prf(), ceaf.prf());
        Self {
            setting,
            muc,
            b_cubed,
            ceaf_e,
            conll_f1: (muc.f1 + b_cubed.f1 + ceaf_e.f1) / 3.0,
        }
    }

    /// Field-wise arithmetic mean of reports of one setting.
    pub fn mean(reports: &[ScoreReport]) -> Result<ScoreReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::InvalidArgument("no reports to average".into()))?;
        if reports.iter().any(|r| r.setting != first.setting) {
            return Err(Error::InvalidArgument("cannot average reports of different settings".into()));
        }
        let avg = |f: &dyn Fn(&ScoreReport) -> Prf| Prf {
            precision: running_mean(reports.iter().map(|r| f(r).precision)),
            recall: running_mean(reports.iter().map(|r| f(r).recall)),
            f1: running_mean(reports.iter().map(|r| f(r).f1)),
        };
        Ok(ScoreReport {
            setting: first.setting,
            muc: avg(&|r| r.muc),
            b_cubed: avg(&|r| r.b_cubed),
            ceaf_e: avg(&|r| r.ceaf_e),
            conll_f1: running_mean(reports.iter().map(|r| r.conll_f1)),
        })
    }
}

/// Incremental mean; exact when every value is equal.
fn running_mean(xs: impl Iterator<Item = f64>) -> f64 {
    xs.enumerate().fold(0.0, |m, (k, x)| m + (x - m) / (k + 1) as f64)
}

fn check_universe(corpus: &Corpus, z: &ClusterAssignment, what: &str) -> Result<()> {
    match z.labels_for(corpus) {
        Ok(_) => Ok(()),
        Err(Error::UniverseMismatch(m)) => Err(Error::UniverseMismatch(format!("{what}: {m}"))),
        Err(e) => Err(e),
    }
}

/// Scores `pred` against `gold`. Within-document scores restrict both sides
/// to each document and sum the metric counts over documents; cross-document
/// scores do the same over meta-documents that merge every document of a
/// seminal event.
pub fn score(corpus: &Corpus, gold: &ClusterAssignment, pred: &ClusterAssignment, setting: Setting) -> Result<ScoreReport> {
    check_universe(corpus, gold, "gold")?;
    check_universe(corpus, pred, "prediction")?;
    let meta;
    let units = match setting {
        Setting::WithinDocument => corpus,
        Setting::CrossDocument => {
            meta = build_meta_documents(corpus)?;
            &meta
        }
    };
    let (mut m, mut b, mut c) = Default::default();
    for doc in units.documents() {
        let ids = doc.mentions().iter().map(|x| x.mention_id.as_str());
        let g = gold.restrict(ids.clone())?;
        let p = pred.restrict(ids)?;
        let (g, p) = aligned(&g, &p)?;
        m += muc_counts(&g, &p);
        b += b_cubed_counts(&g, &p);
        c += ceaf_e_counts(&g, &p);
    }
    Ok(ScoreReport::from_counts(setting, m, b, c))
}

/// Plain-text results table: one row per named report, percentages.
pub fn results_table(rows: &[(String, ScoreReport)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>6}",
        "", "MUC", "", "", "B3", "", "", "CEAFe", "", "", "CoNLL"
    );
    let _ = writeln!(
        out,
        "{:<width$}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>6}",
        "system", "R", "P", "F1", "R", "P", "F1", "R", "P", "F1", "F1"
    );
    for (name, r) in rows {
        let pct = |x: f64| format!("{:.1}", 100.0 * x);
        let _ = writeln!(
            out,
            "{:<width$}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>5} {:>5} {:>5}  {:>6}",
            name,
            pct(r.muc.recall),
            pct(r.muc.precision),
            pct(r.muc.f1),
            pct(r.b_cubed.recall),
            pct(r.b_cubed.precision),
            pct(r.b_cubed.f1),
            pct(r.ceaf_e.recall),
            pct(r.ceaf_e.precision),
            pct(r.ceaf_e.f1),
            pct(r.conll_f1)
        );
    }
    out
}
