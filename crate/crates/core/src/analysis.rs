//! Statistics over sample forms: histograms, trend classification, location
//! unexpectedness and simulated-vs-observed similarity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::{sort_forms, SampleForm};
use crate::scalar::Scalar;

/// Counts per integer value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    bins: BTreeMap<i64, usize>,
    total: usize,
}

impl Histogram {
    pub fn from_values(values: &[i64]) -> Self {
        let mut h = Histogram::default();
        for &v in values {
            h.add(v);
        }
        h
    }

    pub fn add(&mut self, value: i64) {
        *self.bins.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn bins(&self) -> &BTreeMap<i64, usize> {
        &self.bins
    }

    pub fn count(&self, value: i64) -> usize {
        self.bins.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Most frequent value, the smallest one on ties.
    pub fn mode(&self) -> Option<(i64, usize)> {
        self.bins
            .iter()
            .fold(None, |best: Option<(i64, usize)>, (&v, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((v, c)),
            })
    }

    /// Median of the per-bin counts.
    pub fn median_bin_count(&self) -> f64 {
        let mut counts: Vec<usize> = self.bins.values().copied().collect();
        if counts.is_empty() {
            return 0.0;
        }
        counts.sort_unstable();
        let mid = counts.len() / 2;
        if counts.len() % 2 == 1 {
            counts[mid] as f64
        } else {
            (counts[mid - 1] + counts[mid]) as f64 / 2.0
        }
    }

    pub fn share(&self, value: i64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(value) as f64 / self.total as f64
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&v, &c) in &other.bins {
            *self.bins.entry(v).or_insert(0) += c;
        }
        self.total += other.total;
    }

    /// `value,count` lines with a header, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in &self.bins {
            let _ = writeln!(out, "{v},{c}");
        }
        out
    }
}

/// Shorthand for [`Histogram::from_values`].
pub fn histogram(values: &[i64]) -> Histogram {
    Histogram::from_values(values)
}

/// Half the L1 distance between the normalized histograms. Two empty
/// histograms are at distance 0, an empty and a non-empty one at 1.
pub fn total_variation(a: &Histogram, b: &Histogram) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return 1.0,
        _ => {}
    }
    let keys: BTreeSet<i64> = a.bins.keys().chain(b.bins.keys()).copied().collect();
    let sum: f64 = keys.iter().map(|&k| (a.share(k) - b.share(k)).abs()).sum();
    (sum / 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrendTag {
    Constant,
    Random,
    RecognizableTrend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrendKind {
    UnimodalLowPeak,
    FirstKSpecial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendEvidence {
    pub modal_value: i64,
    pub modal_fraction: f64,
    /// Peak bin count over the median bin count.
    pub peak_ratio: f64,
    /// Two-proportion z statistic of "differs from the mode" between the
    /// first-k positions and the rest.
    pub positional_z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendClass {
    pub tag: TrendTag,
    pub trend_kind: Option<TrendKind>,
    pub evidence: TrendEvidence,
}

impl TrendClass {
    fn plain(tag: TrendTag, evidence: TrendEvidence) -> Self {
        debug_assert!(tag != TrendTag::RecognizableTrend);
        TrendClass { tag, trend_kind: None, evidence }
    }

    fn trend(kind: TrendKind, evidence: TrendEvidence) -> Self {
        TrendClass { tag: TrendTag::RecognizableTrend, trend_kind: Some(kind), evidence }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TrendClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.trend_kind {
            Some(k) => write!(f, "{:?}({k:?})", self.tag),
            None => write!(f, "{:?}", self.tag),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendThresholds {
    pub min_observations: usize,
    pub constant_modal_fraction: f64,
    pub peak_to_median: f64,
    /// The peak must lie in this lowest fraction of the value range.
    pub low_peak_quantile: f64,
    /// Smallest share of observations that must fall in that same low part
    /// of the range for a low peak.
    pub low_mass_min: f64,
    pub first_k: usize,
    /// Largest share of the remaining positions allowed to differ from the
    /// mode for the first-k pattern.
    pub first_k_max_rest_fraction: f64,
}

impl Default for TrendThresholds {
    fn default() -> Self {
        TrendThresholds {
            min_observations: 5,
            constant_modal_fraction: 0.9,
            peak_to_median: 2.0,
            low_peak_quantile: 0.25,
            low_mass_min: 0.4,
            first_k: 2,
            first_k_max_rest_fraction: 0.25,
        }
    }
}

pub fn classify_trend(values: &[i64], positions: Option<&[usize]>) -> Result<TrendClass> {
    classify_trend_with(values, positions, &TrendThresholds::default())
}

/// Constant, then unimodal low peak, then first-k special, else random.
/// A low peak also needs most of the mass in the low end of the range, which
/// keeps uniform samples over many values out of that class.
/// `positions` are 1-based ranks of the observations; without them the
/// observations are taken in list order.
pub fn classify_trend_with(values: &[i64], positions: Option<&[usize]>, th: &TrendThresholds) -> Result<TrendClass> {
    if values.len() < th.min_observations.max(1) {
        return Err(Error::InsufficientData { needed: th.min_observations.max(1), got: values.len() });
    }
    let ranks: Vec<usize> = match positions {
        Some(p) if p.len() != values.len() => {
            return Err(Error::validation(format!("{} positions for {} values", p.len(), values.len())))
        }
        Some(p) => p.to_vec(),
        None => (1..=values.len()).collect(),
    };
    let h = histogram(values);
    let (modal_value, modal_count) = h.mode().expect("non-empty");
    let n = values.len() as f64;
    let modal_fraction = modal_count as f64 / n;
    let peak_ratio = modal_count as f64 / h.median_bin_count();

    let differs: Vec<bool> = values.iter().map(|&v| v != modal_value).collect();
    let (mut first, mut first_differ, mut rest, mut rest_differ) = (0usize, 0usize, 0usize, 0usize);
    for (&d, &r) in differs.iter().zip(&ranks) {
        if r <= th.first_k {
            first += 1;
            first_differ += d as usize;
        } else {
            rest += 1;
            rest_differ += d as usize;
        }
    }
    let positional_z = if first == 0 || rest == 0 {
        0.0
    } else {
        let p1 = first_differ as f64 / first as f64;
        let p2 = rest_differ as f64 / rest as f64;
        let p = (first_differ + rest_differ) as f64 / n;
        let se = (p * (1.0 - p) * (1.0 / first as f64 + 1.0 / rest as f64)).sqrt();
        if se > 0.0 {
            (p1 - p2) / se
        } else {
            0.0
        }
    };
    let evidence = TrendEvidence { modal_value, modal_fraction, peak_ratio, positional_z };

    if modal_fraction >= th.constant_modal_fraction {
        return Ok(TrendClass::plain(TrendTag::Constant, evidence));
    }
    let unique_peak = h.bins().values().filter(|&&c| c == modal_count).count() == 1;
    let (lo, hi) = (*h.bins().keys().next().unwrap(), *h.bins().keys().next_back().unwrap());
    let low_end = th.low_peak_quantile * (hi - lo) as f64;
    let in_low_end = |v: i64| (v - lo) as f64 <= low_end;
    let low_mass = values.iter().filter(|&&v| in_low_end(v)).count() as f64 / n;
    if unique_peak && peak_ratio >= th.peak_to_median && in_low_end(modal_value) && low_mass >= th.low_mass_min {
        return Ok(TrendClass::trend(TrendKind::UnimodalLowPeak, evidence));
    }
    let first_k_special = th.first_k > 0
        && first == th.first_k
        && first_differ == first
        && rest > 0
        && rest_differ as f64 / rest as f64 <= th.first_k_max_rest_fraction;
    if first_k_special {
        return Ok(TrendClass::trend(TrendKind::FirstKSpecial, evidence));
    }
    Ok(TrendClass::plain(TrendTag::Random, evidence))
}

/// Reference and observed shares per category, with the observed/reference
/// ratio and whether it reaches the flagging threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison<T = f64> {
    pub categories: Vec<String>,
    pub reference_shares: Vec<T>,
    pub observed_shares: Vec<T>,
    pub ratios: Vec<T>,
    pub flagged: Vec<bool>,
    pub ratio_threshold: T,
}

impl<T: Scalar> DistributionComparison<T> {
    pub fn flagged_categories(&self) -> impl Iterator<Item = (&str, T)> + '_ {
        self.categories
            .iter()
            .zip(&self.ratios)
            .zip(&self.flagged)
            .filter(|(_, &f)| f)
            .map(|((c, &r), _)| (c.as_str(), r))
    }

    pub fn ratio(&self, category: &str) -> Option<T> {
        self.categories.iter().position(|c| c == category).map(|i| self.ratios[i])
    }

    pub fn is_flagged(&self, category: &str) -> bool {
        self.categories.iter().position(|c| c == category).is_some_and(|i| self.flagged[i])
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<20} {:>10} {:>10} {:>12}  flag\n", "category", "reference", "observed", "ratio");
        for i in 0..self.categories.len() {
            let _ = writeln!(
                out,
                "{:<20} {:>10.4} {:>10.4} {:>12.4}  {}",
                self.categories[i],
                self.reference_shares[i].to_f64_lossy(),
                self.observed_shares[i].to_f64_lossy(),
                self.ratios[i].to_f64_lossy(),
                if self.flagged[i] { "*" } else { "" },
            );
        }
        out
    }
}

/// Distance floor for reference shares in the ratio.
pub const SHARE_EPSILON: f64 = 1e-6;

fn check_shares<T: Scalar>(what: &str, shares: &BTreeMap<String, T>) -> Result<()> {
    let mut sum = T::zero();
    for (k, &v) in shares {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::validation(format!("{what} share for `{k}` is {v}")));
        }
        sum = sum + v;
    }
    let tol = 1e-9f64.max(16.0 * T::epsilon().to_f64_lossy() * shares.len().max(1) as f64);
    if (sum.to_f64_lossy() - 1.0).abs() > tol {
        return Err(Error::validation(format!("{what} shares sum to {sum}, not 1")));
    }
    Ok(())
}

/// Normalizes raw counts into shares.
pub fn shares_from_counts<T: Scalar>(counts: &BTreeMap<String, T>) -> Result<BTreeMap<String, T>> {
    let total = counts.values().fold(T::zero(), |a, &b| a + b);
    if counts.values().any(|&c| !c.is_finite() || c < T::zero()) || total <= T::zero() {
        return Err(Error::validation("counts must be non-negative with a positive total"));
    }
    Ok(counts.iter().map(|(k, &v)| (k.clone(), v / total)).collect())
}

/// Flags categories over-represented in `observed` relative to `reference`
/// by at least `ratio_threshold`. Categories missing on one side count as 0.
pub fn location_interestingness<T: Scalar>(
    reference: &BTreeMap<String, T>,
    observed: &BTreeMap<String, T>,
    ratio_threshold: T,
) -> Result<DistributionComparison<T>> {
    if !(ratio_threshold.is_finite() && ratio_threshold > T::one()) {
        return Err(Error::validation(format!("ratio threshold must exceed 1, got {ratio_threshold}")));
    }
    check_shares("reference", reference)?;
    check_shares("observed", observed)?;
    let categories: Vec<String> = reference.keys().chain(observed.keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let get = |m: &BTreeMap<String, T>, k: &String| m.get(k).copied().unwrap_or_else(T::zero);
    let reference_shares: Vec<T> = categories.iter().map(|k| get(reference, k)).collect();
    let observed_shares: Vec<T> = categories.iter().map(|k| get(observed, k)).collect();
    let eps = T::lit(SHARE_EPSILON);
    let ratios: Vec<T> = reference_shares.iter().zip(&observed_shares).map(|(&r, &o)| o / r.max(eps)).collect();
    let flagged = ratios.iter().map(|&r| r >= ratio_threshold).collect();
    Ok(DistributionComparison { categories, reference_shares, observed_shares, ratios, flagged, ratio_threshold })
}

/// Per-row variables compared between samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormVariable {
    Degree,
    SharedConnections,
    Known,
}

impl FormVariable {
    pub const ALL: [FormVariable; 3] = [FormVariable::Degree, FormVariable::SharedConnections, FormVariable::Known];

    pub fn as_str(self) -> &'static str {
        match self {
            FormVariable::Degree => "degree",
            FormVariable::SharedConnections => "shared_connections",
            FormVariable::Known => "known",
        }
    }

    /// Values present in the form with their ranks. Known is 1 for a
    /// filled "Known from" cell and 0 otherwise.
    pub fn column(self, form: &SampleForm) -> (Vec<i64>, Vec<usize>) {
        form.rows
            .iter()
            .filter_map(|r| {
                let v = match self {
                    FormVariable::Degree => r.degree.map(i64::from),
                    FormVariable::SharedConnections => r.shared_connections.map(i64::from),
                    FormVariable::Known => Some(r.known_from.is_some() as i64),
                }?;
                Some((v, r.rank))
            })
            .unzip()
    }
}

/// Trend classes and pooled histogram of one variable over a form set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub variable: FormVariable,
    pub histogram: Histogram,
    /// Class of the pooled values, with ranks kept.
    pub pooled_class: Option<TrendClass>,
    /// Number of forms per class label; forms with too few values are
    /// counted under `InsufficientData`.
    pub class_counts: BTreeMap<String, usize>,
    /// Most common per-form class label.
    pub dominant_class: Option<String>,
}

pub fn summarize_variable(forms: &[SampleForm], variable: FormVariable, th: &TrendThresholds) -> VariableSummary {
    let mut histogram = Histogram::default();
    let mut pooled_values = Vec::new();
    let mut pooled_ranks = Vec::new();
    let mut class_counts: BTreeMap<String, usize> = BTreeMap::new();
    for form in forms {
        let (values, ranks) = variable.column(form);
        let label = match classify_trend_with(&values, Some(&ranks), th) {
            Ok(c) => c.label(),
            Err(_) => "InsufficientData".to_string(),
        };
        *class_counts.entry(label).or_insert(0) += 1;
        for &v in &values {
            histogram.add(v);
        }
        pooled_values.extend(values);
        pooled_ranks.extend(ranks);
    }
    let pooled_class = classify_trend_with(&pooled_values, Some(&pooled_ranks), th).ok();
    let dominant_class = class_counts
        .iter()
        .filter(|(l, _)| l.as_str() != "InsufficientData")
        .fold(None, |best: Option<(&String, usize)>, (l, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((l, c)),
        })
        .map(|(l, _)| l.clone());
    VariableSummary { variable, histogram, pooled_class, class_counts, dominant_class }
}

/// 1 − Jaccard of consecutive candidate-name sets, averaged over the
/// chronologically ordered forms; `None` with fewer than two forms.
pub fn mean_churn(forms: &[SampleForm]) -> Option<f64> {
    let mut forms = forms.to_vec();
    sort_forms(&mut forms);
    let sets: Vec<BTreeSet<&str>> = forms.iter().map(|f| f.rows.iter().map(|r| r.name.as_str()).collect()).collect();
    if sets.len() < 2 {
        return None;
    }
    let total: f64 = sets
        .windows(2)
        .map(|w| {
            let union = w[0].union(&w[1]).count();
            if union == 0 {
                0.0
            } else {
                1.0 - w[0].intersection(&w[1]).count() as f64 / union as f64
            }
        })
        .sum();
    Some(total / (sets.len() - 1) as f64)
}

/// Per-form and pooled statistics of one form set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub format: String,
    pub network: String,
    pub forms: usize,
    pub rows: usize,
    pub variables: Vec<VariableSummary>,
    pub churn: Option<f64>,
    pub thresholds: TrendThresholds,
    #[serde(default)]
    pub provenance: Vec<String>,
}

pub const REPORT_FORMAT: &str = "recsim-report/1";

fn network_of(forms: &[SampleForm]) -> Result<String> {
    let names: BTreeSet<&str> = forms.iter().map(|f| f.network_name.as_str()).collect();
    match names.len() {
        0 => Err(Error::validation("no forms to analyse")),
        1 => Ok(names.into_iter().next().unwrap().to_string()),
        _ => Err(Error::validation(format!("forms mix network names {names:?}"))),
    }
}

pub fn analyze_forms(forms: &[SampleForm], th: &TrendThresholds) -> Result<SampleReport> {
    let network = network_of(forms)?;
    Ok(SampleReport {
        format: REPORT_FORMAT.to_string(),
        network,
        forms: forms.len(),
        rows: forms.iter().map(|f| f.rows.len()).sum(),
        variables: FormVariable::ALL.iter().map(|&v| summarize_variable(forms, v, th)).collect(),
        churn: mean_churn(forms),
        thresholds: th.clone(),
        provenance: Vec::new(),
    })
}

fn opt_label(c: &Option<TrendClass>) -> String {
    c.as_ref().map_or_else(|| "-".to_string(), TrendClass::label)
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

impl SampleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("network: {}\nforms: {}  rows: {}  mean churn: {}\n", self.network, self.forms, self.rows, opt_num(self.churn));
        for v in &self.variables {
            let mode = v.histogram.mode().map_or_else(|| "-".to_string(), |(m, c)| format!("{m} ({c})"));
            let _ = writeln!(
                out,
                "\n[{}]\npooled class: {}\nmode: {}\nper-form classes: {}",
                v.variable.as_str(),
                opt_label(&v.pooled_class),
                mode,
                v.class_counts.iter().map(|(l, c)| format!("{l}={c}")).collect::<Vec<_>>().join(", "),
            );
            out.push_str("value  count\n");
            for (val, c) in v.histogram.bins() {
                let _ = writeln!(out, "{val:>5}  {c:>5}");
            }
        }
        out
    }

    pub fn variable(&self, v: FormVariable) -> &VariableSummary {
        self.variables.iter().find(|s| s.variable == v).expect("all variables are summarized")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableComparison {
    pub variable: FormVariable,
    pub simulated_class: Option<String>,
    pub observed_class: Option<String>,
    pub trend_agreement: bool,
    pub total_variation: f64,
    pub simulated_histogram: Histogram,
    pub observed_histogram: Histogram,
}

/// Measurements only; there is no pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub format: String,
    pub network: String,
    pub simulated_forms: usize,
    pub observed_forms: usize,
    pub variables: Vec<VariableComparison>,
    pub simulated_churn: Option<f64>,
    pub observed_churn: Option<f64>,
    #[serde(default)]
    pub provenance: Vec<String>,
}

pub const SIMILARITY_FORMAT: &str = "recsim-similarity/1";

pub fn compare_lists(simulated: &[SampleForm], observed: &[SampleForm]) -> Result<SimilarityReport> {
    compare_lists_with(simulated, observed, &TrendThresholds::default())
}

/// Compares two form sets variable by variable. The trend class of a side
/// is its most common per-form class.
pub fn compare_lists_with(simulated: &[SampleForm], observed: &[SampleForm], th: &TrendThresholds) -> Result<SimilarityReport> {
    if simulated.is_empty() || observed.is_empty() {
        return Err(Error::validation("both form sets must be non-empty"));
    }
    let sim_net = network_of(simulated)?;
    let obs_net = network_of(observed)?;
    if sim_net != obs_net {
        return Err(Error::validation(format!("network names differ: `{sim_net}` vs `{obs_net}`")));
    }
    let variables = FormVariable::ALL
        .iter()
        .map(|&v| {
            let s = summarize_variable(simulated, v, th);
            let o = summarize_variable(observed, v, th);
            VariableComparison {
                variable: v,
                trend_agreement: s.dominant_class == o.dominant_class,
                total_variation: total_variation(&s.histogram, &o.histogram),
                simulated_class: s.dominant_class,
                observed_class: o.dominant_class,
                simulated_histogram: s.histogram,
                observed_histogram: o.histogram,
            }
        })
        .collect();
    Ok(SimilarityReport {
        format: SIMILARITY_FORMAT.to_string(),
        network: sim_net,
        simulated_forms: simulated.len(),
        observed_forms: observed.len(),
        variables,
        simulated_churn: mean_churn(simulated),
        observed_churn: mean_churn(observed),
        provenance: Vec::new(),
    })
}

impl SimilarityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "network: {}\nforms: simulated {}, observed {}\nmean churn: simulated {}, observed {}\n\n",
            self.network,
            self.simulated_forms,
            self.observed_forms,
            opt_num(self.simulated_churn),
            opt_num(self.observed_churn)
        );
        let _ = writeln!(out, "{:<20} {:<34} {:<34} {:>6} {:>8}", "variable", "simulated class", "observed class", "agree", "tv");
        for v in &self.variables {
            let _ = writeln!(
                out,
                "{:<20} {:<34} {:<34} {:>6} {:>8.4}",
                v.variable.as_str(),
                v.simulated_class.as_deref().unwrap_or("-"),
                v.observed_class.as_deref().unwrap_or("-"),
                if v.trend_agreement { "yes" } else { "no" },
                v.total_variation,
            );
        }
        out
    }

    pub fn variable(&self, v: FormVariable) -> &VariableComparison {
        self.variables.iter().find(|c| c.variable == v).expect("all variables are compared")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::SampleRow;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shares(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn histogram_counts() {
        assert_eq!(histogram(&[]).total(), 0);
        assert!(histogram(&[]).bins().is_empty());
        let h = histogram(&[3, 3, 1]);
        assert_eq!(h.bins(), &BTreeMap::from([(1, 1), (3, 2)]));
        assert_eq!(h.total(), 3);
        assert_eq!(h.mode(), Some((3, 2)));
        assert_eq!(h.to_csv(), "value,count\n1,1\n3,2\n");
    }

    #[test]
    fn constant_samples() {
        let c = classify_trend(&[2; 50], None).unwrap();
        assert_eq!(c.tag, TrendTag::Constant);
        assert_eq!(c.trend_kind, None);
        let mut known = vec![0; 47];
        known.extend([1, 1, 1]);
        let c = classify_trend(&known, None).unwrap();
        assert_eq!(c.tag, TrendTag::Constant);
        assert!((c.evidence.modal_fraction - 0.94).abs() < 1e-12);
    }

    /// Mode 1 with 10 of 50 and a long sparse tail.
    pub(crate) fn low_peak_sample() -> Vec<i64> {
        let mut v = vec![1; 10];
        v.extend([0; 6]);
        v.extend([2; 5]);
        v.extend([3; 4]);
        v.extend([4; 4]);
        v.extend([5; 3]);
        v.extend([6; 3]);
        v.extend([7, 7, 8, 8, 9, 10, 11, 12, 14, 15, 17, 19, 21, 24, 30]);
        v
    }

    #[test]
    fn low_peak_shape() {
        let v = low_peak_sample();
        assert_eq!(v.len(), 50);
        let c = classify_trend(&v, None).unwrap();
        assert_eq!(c.tag, TrendTag::RecognizableTrend);
        assert_eq!(c.trend_kind, Some(TrendKind::UnimodalLowPeak));
        assert_eq!(c.evidence.modal_value, 1);
        assert!(c.evidence.peak_ratio >= 2.0);
    }

    #[test]
    fn first_two_special() {
        let mut v = [0; 20];
        v[0] = 1;
        v[1] = 1;
        v[10] = 1;
        v[11] = 2;
        v[12] = 3;
        // Modal fraction 0.75 and a peak at the low end would read as a low
        // peak, so the values are placed at the top of the range.
        let v: Vec<i64> = v.iter().map(|&x| if x == 0 { 5 } else { x }).collect();
        let c = classify_trend(&v, None).unwrap();
        assert_eq!(c.trend_kind, Some(TrendKind::FirstKSpecial), "{c:?}");
        assert!(c.evidence.positional_z > 2.0);
        // Same values with the special rows moved down the list.
        let ranks: Vec<usize> = (0..20).map(|i| if i < 2 { i + 11 } else if i < 12 { i - 1 } else { i + 1 }).collect();
        let c = classify_trend(&v, Some(&ranks)).unwrap();
        assert_eq!(c.tag, TrendTag::Random);
    }

    #[test]
    fn too_few_observations() {
        assert!(matches!(classify_trend(&[1, 2, 3, 4], None), Err(Error::InsufficientData { needed: 5, got: 4 })));
        assert!(classify_trend(&[1, 2, 3, 4, 5], Some(&[1, 2])).is_err());
    }

    #[test]
    fn thresholds_are_configurable() {
        let mut known = vec![0; 47];
        known.extend([1, 1, 1]);
        let th = TrendThresholds { constant_modal_fraction: 0.95, ..Default::default() };
        assert_ne!(classify_trend_with(&known, None, &th).unwrap().tag, TrendTag::Constant);
    }

    #[test]
    fn uniform_data_is_random_and_constant_data_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for k in [5i64, 8, 10, 20, 50] {
            let random = (0..1000)
                .filter(|_| {
                    let v: Vec<i64> = (0..50).map(|_| rng.gen_range(0..k)).collect();
                    classify_trend(&v, None).unwrap().tag == TrendTag::Random
                })
                .count();
            assert!(random >= 950, "{k} values: {random}");
        }
        for _ in 0..1000 {
            let x = rng.gen_range(-5..50);
            assert_eq!(classify_trend(&[x; 50], None).unwrap().tag, TrendTag::Constant);
        }
    }

    #[test]
    fn total_variation_cases() {
        let a = histogram(&[2; 10]);
        let b = histogram(&[5; 7]);
        assert_eq!(total_variation(&a, &b), 1.0);
        assert_eq!(total_variation(&a, &a), 0.0);
        let c = histogram(&[1, 2]);
        assert!((total_variation(&a, &c) - 0.5).abs() < 1e-12);
        assert_eq!(total_variation(&Histogram::default(), &Histogram::default()), 0.0);
    }

    #[test]
    fn location_cases() {
        let same = shares(&[("IL", 0.8), ("US", 0.2)]);
        let d = location_interestingness(&same, &same, 3.0).unwrap();
        assert!(d.flagged.iter().all(|f| !f));

        let reference = shares(&[("IL", 0.82), ("B", 0.08), ("C", 0.04), ("D", 0.03), ("E", 0.02), ("F", 0.01)]);
        let observed = shares(&[("IL", 0.55), ("B", 0.30), ("C", 0.10), ("G", 0.05)]);
        let d = location_interestingness(&reference, &observed, 3.0).unwrap();
        assert!(d.is_flagged("B"));
        assert!((d.ratio("B").unwrap() - 3.75).abs() < 1e-12);
        assert!(!d.is_flagged("IL"));
        assert!(d.is_flagged("G"));
        assert_eq!(d.categories.len(), 7);

        let d = location_interestingness(&shares(&[("A", 1.0)]), &shares(&[("A", 0.9), ("Z", 0.1)]), 3.0).unwrap();
        assert!(d.is_flagged("Z"));
        assert!((d.ratio("Z").unwrap() - 0.1 / 1e-6).abs() < 1e-3);
    }

    #[test]
    fn location_rejects_bad_input() {
        let ok = shares(&[("A", 1.0)]);
        assert!(location_interestingness(&shares(&[("A", 0.5)]), &ok, 3.0).is_err());
        assert!(location_interestingness(&ok, &shares(&[("A", 1.2), ("B", -0.2)]), 3.0).is_err());
        assert!(location_interestingness(&ok, &ok, 1.0).is_err());
        let f32s: BTreeMap<String, f32> = [("A".to_string(), 0.3f32), ("B".to_string(), 0.7)].into();
        assert!(location_interestingness(&f32s, &f32s, 2.0f32).is_ok());
    }

    proptest! {
        #[test]
        fn histogram_conserves_count(v in prop::collection::vec(-20i64..20, 0..200)) {
            let h = histogram(&v);
            prop_assert_eq!(h.bins().values().sum::<usize>(), v.len());
            prop_assert_eq!(h.total(), v.len());
        }

        #[test]
        fn total_variation_is_a_bounded_symmetric_distance(
            a in prop::collection::vec(0i64..8, 1..60),
            b in prop::collection::vec(0i64..8, 1..60),
        ) {
            let (ha, hb) = (histogram(&a), histogram(&b));
            let d = total_variation(&ha, &hb);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!((d - total_variation(&hb, &ha)).abs() < 1e-15);
            prop_assert_eq!(total_variation(&ha, &ha), 0.0);
            let same_shares = ha.bins().keys().chain(hb.bins().keys()).all(|&k| ha.count(k) * b.len() == hb.count(k) * a.len());
            prop_assert_eq!(d == 0.0, same_shares);
        }

        #[test]
        fn location_flags_ignore_count_scale(
            r in prop::collection::vec(0.0f64..100.0, 4),
            o in prop::collection::vec(0.0f64..100.0, 4),
            scale in 0.01f64..1000.0,
        ) {
            prop_assume!(r.iter().sum::<f64>() > 1.0 && o.iter().sum::<f64>() > 1.0);
            let to_map = |v: &[f64], s: f64| -> BTreeMap<String, f64> {
                v.iter().enumerate().map(|(i, &x)| (format!("c{i}"), x * s)).collect()
            };
            let base = location_interestingness(
                &shares_from_counts(&to_map(&r, 1.0)).unwrap(),
                &shares_from_counts(&to_map(&o, 1.0)).unwrap(),
                3.0,
            ).unwrap();
            let scaled = location_interestingness(
                &shares_from_counts(&to_map(&r, scale)).unwrap(),
                &shares_from_counts(&to_map(&o, 1.0 / scale)).unwrap(),
                3.0,
            ).unwrap();
            for (i, (&fa, &fb)) in base.flagged.iter().zip(&scaled.flagged).enumerate() {
                // Ratios sitting on the threshold may round either way.
                if (base.ratios[i] - 3.0).abs() > 1e-9 {
                    prop_assert_eq!(fa, fb);
                }
            }
        }
    }

    fn form(minute: u32, network: &str, rows: &[(&str, u32, u32, bool)]) -> SampleForm {
        let mut f = SampleForm::new(network, NaiveDate::from_ymd_opt(2013, 7, 12).unwrap().and_hms_opt(10, minute, 0).unwrap());
        f.rows = rows
            .iter()
            .enumerate()
            .map(|(i, &(name, degree, shared, known))| SampleRow {
                rank: i + 1,
                name: name.to_string(),
                degree: Some(degree),
                shared_connections: Some(shared),
                known_from: known.then(|| "work".to_string()),
                position_title: "Engineer".into(),
                comments: None,
            })
            .collect();
        f
    }

    fn set_of(network: &str, degree: u32) -> Vec<SampleForm> {
        let names = ["a", "b", "c", "d", "e", "f", "g"];
        (0..3)
            .map(|i| {
                let rows: Vec<(&str, u32, u32, bool)> =
                    names[i..i + 5].iter().enumerate().map(|(j, &n)| (n, degree, j as u32, j < 2)).collect();
                form(i as u32, network, &rows)
            })
            .collect()
    }

    #[test]
    fn self_comparison() {
        let forms = set_of("Net", 2);
        let r = compare_lists(&forms, &forms).unwrap();
        for v in &r.variables {
            assert!(v.trend_agreement);
            assert_eq!(v.total_variation, 0.0);
        }
        assert_eq!(r.simulated_churn, r.observed_churn);
        assert!((r.simulated_churn.unwrap() - (1.0 - 4.0 / 6.0)).abs() < 1e-12);
        assert_eq!(r.variable(FormVariable::Degree).simulated_class.as_deref(), Some("Constant"));
    }

    #[test]
    fn comparison_cases() {
        let a = set_of("Net", 2);
        let b = set_of("Net", 5);
        let r = compare_lists(&a, &b).unwrap();
        let d = r.variable(FormVariable::Degree);
        assert!(d.trend_agreement);
        assert_eq!(d.total_variation, 1.0);
        assert!(compare_lists(&a, &set_of("Other", 2)).is_err());
        assert!(compare_lists(&a, &[]).is_err());
        let mut mixed = a.clone();
        mixed.push(set_of("Other", 2).remove(0));
        assert!(compare_lists(&mixed, &a).is_err());
        assert!(r.to_text().contains("shared_connections"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["format"], SIMILARITY_FORMAT);
    }

    #[test]
    fn sample_report_shapes() {
        let forms = set_of("Net", 2);
        let rep = analyze_forms(&forms, &TrendThresholds::default()).unwrap();
        assert_eq!(rep.rows, 15);
        assert_eq!(rep.variable(FormVariable::Degree).histogram.count(2), 15);
        assert_eq!(rep.variable(FormVariable::Known).histogram.count(1), 6);
        assert!(rep.to_text().contains("[degree]"));
    }
}
