//! Scoring algebra: attribute match and mismatch, interestingness as their
//! normalized product, friend-of-a-friend counting, and the normalized
//! linear combiner that turns component scores into a grade.
//!
//! Every function is generic over [`Scalar`] so the same code runs in `f32`
//! and `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{attribute_overlap, common_neighbors, CandidateFeatures};
use crate::graph::{AttributeKey, Member, MemberId, SocialGraph};
use crate::scalar::Scalar;

/// Raw (un-normalized) scoring coefficients.
///
/// The four top-level weights combine FoaF, interestingness, match and the
/// known flag. The per-key overlap weights drive [`match_score`] and the
/// weighted [`MismatchMode::UnsharedFraction`]. Normalization happens at use
/// time, so scaling every weight by a positive constant changes nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights<T = f64> {
    pub foaf_weight: T,
    pub interestingness_weight: T,
    pub match_weight: T,
    pub known_bonus: T,
    pub overlap_weights: [T; AttributeKey::COUNT],
    /// Extra FoaF credit for a common friend who shares an employer with the
    /// receiver.
    pub workplace_bonus: T,
}

impl<T: Scalar> Default for ScoreWeights<T> {
    fn default() -> Self {
        ScoreWeights {
            foaf_weight: T::one(),
            interestingness_weight: T::one(),
            match_weight: T::one(),
            known_bonus: T::one(),
            overlap_weights: [T::one(); AttributeKey::COUNT],
            workplace_bonus: T::zero(),
        }
    }
}

impl<T: Scalar> ScoreWeights<T> {
    /// Top-level weights in combiner order: foaf, interestingness, match, known.
    pub fn top_level(&self) -> [T; 4] {
        [self.foaf_weight, self.interestingness_weight, self.match_weight, self.known_bonus]
    }

    pub fn with_top_level(mut self, w: [T; 4]) -> Self {
        [self.foaf_weight, self.interestingness_weight, self.match_weight, self.known_bonus] = w;
        self
    }

    pub fn overlap_weight(&self, key: AttributeKey) -> T {
        self.overlap_weights[key.index()]
    }

    pub fn set_overlap_weight(&mut self, key: AttributeKey, w: T) {
        self.overlap_weights[key.index()] = w;
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.top_level().into_iter().chain(self.overlap_weights).chain([self.workplace_bonus]);
        for w in all {
            if !(w.is_finite() && w >= T::zero()) {
                return Err(Error::config(format!("weights must be finite and non-negative, got {w}")));
            }
        }
        Ok(())
    }

    pub fn normalized_top_level(&self) -> Result<[T; 4]> {
        self.validate()?;
        normalize(self.top_level()).ok_or_else(|| Error::config("all top-level weights are zero"))
    }

    pub fn normalized_overlap(&self) -> Result<[T; AttributeKey::COUNT]> {
        self.validate()?;
        normalize(self.overlap_weights).ok_or_else(|| Error::config("all attribute weights are zero"))
    }
}

fn normalize<T: Scalar, const N: usize>(w: [T; N]) -> Option<[T; N]> {
    let total = w.iter().fold(T::zero(), |acc, &x| acc + x);
    if total > T::zero() {
        Some(w.map(|x| x / total))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MismatchMode {
    /// `1 - match`.
    Complement,
    /// Weighted share of the candidate's values the receiver lacks.
    UnsharedFraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterestParams<T = f64> {
    pub norm_f: T,
    pub mismatch_mode: MismatchMode,
}

impl<T: Scalar> InterestParams<T> {
    /// Defaults per mode: 0.25 maps the peak of `m(1-m)` to 1 under
    /// `Complement`; `UnsharedFraction` has no fixed peak and uses 1.
    pub fn for_mode(mode: MismatchMode) -> Self {
        let norm_f = match mode {
            MismatchMode::Complement => T::lit(0.25),
            MismatchMode::UnsharedFraction => T::one(),
        };
        InterestParams { norm_f, mismatch_mode: mode }
    }

    pub fn validate(&self) -> Result<()> {
        if self.norm_f.is_finite() && self.norm_f > T::zero() {
            Ok(())
        } else {
            Err(Error::config(format!("norm_f must be positive, got {}", self.norm_f)))
        }
    }
}

impl<T: Scalar> Default for InterestParams<T> {
    fn default() -> Self {
        Self::for_mode(MismatchMode::Complement)
    }
}

fn check_unit<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must lie in [0,1], got {x}")))
    }
}

/// Weighted mean of per-key overlaps.
pub fn match_from_overlaps<T: Scalar>(overlaps: &[T; AttributeKey::COUNT], weights: &ScoreWeights<T>) -> Result<T> {
    let w = weights.normalized_overlap()?;
    let m = w.iter().zip(overlaps).fold(T::zero(), |acc, (&wk, &ok)| acc + wk * ok);
    Ok(m.clamp_unit())
}

/// How well the candidate's attributes match the receiver's.
pub fn match_score<T: Scalar>(receiver: &Member, candidate: &Member, weights: &ScoreWeights<T>) -> Result<T> {
    let overlaps = AttributeKey::ALL.map(|k| attribute_overlap(receiver, candidate, k));
    match_from_overlaps(&overlaps, weights)
}

pub fn mismatch_score<T: Scalar>(
    match_value: T,
    receiver: &Member,
    candidate: &Member,
    params: &InterestParams<T>,
    weights: &ScoreWeights<T>,
) -> Result<T> {
    check_unit("match", match_value)?;
    match params.mismatch_mode {
        MismatchMode::Complement => Ok(T::one() - match_value),
        MismatchMode::UnsharedFraction => {
            let w = weights.normalized_overlap()?;
            let total = AttributeKey::ALL.iter().fold(T::zero(), |acc, &k| {
                let vc = candidate.values(k);
                if vc.is_empty() {
                    return acc;
                }
                let unshared = vc.difference(receiver.values(k)).count();
                acc + w[k.index()] * T::from_count(unshared) / T::from_count(vc.len())
            });
            Ok(total.clamp_unit())
        }
    }
}

/// `match * mismatch / norm_f`, clamped to `[0, 1]`. The clamp only bites
/// when `norm_f` is smaller than the product.
pub fn interestingness<T: Scalar>(match_value: T, mismatch: T, params: &InterestParams<T>) -> Result<T> {
    params.validate()?;
    check_unit("match", match_value)?;
    check_unit("mismatch", mismatch)?;
    Ok((match_value * mismatch / params.norm_f).clamp_unit())
}

/// Common friends, each counting `1 + workplace_bonus` if they share an
/// employer with the receiver.
pub fn foaf_score<T: Scalar>(
    graph: &SocialGraph,
    receiver: MemberId,
    candidate: MemberId,
    weights: &ScoreWeights<T>,
) -> Result<T> {
    if receiver == candidate {
        return Err(Error::InvalidPair(receiver, candidate));
    }
    weights.validate()?;
    let employers = graph.member(receiver)?.values(AttributeKey::Employer);
    graph.member(candidate)?;
    let mut score = T::zero();
    for n in common_neighbors(graph, receiver, candidate)? {
        score = score + T::one();
        if weights.workplace_bonus > T::zero() {
            let shares = graph.member(n)?.values(AttributeKey::Employer).iter().any(|e| employers.contains(e));
            if shares {
                score = score + weights.workplace_bonus;
            }
        }
    }
    Ok(score)
}

/// Normalized linear combination of the component scores.
pub fn combined_score<T: Scalar>(
    features: &CandidateFeatures<T>,
    match_value: T,
    interest: T,
    foaf: T,
    weights: &ScoreWeights<T>,
    foaf_cap: T,
) -> Result<T> {
    if !(foaf_cap.is_finite() && foaf_cap > T::zero()) {
        return Err(Error::config(format!("foaf_cap must be positive, got {foaf_cap}")));
    }
    let [w_foaf, w_interest, w_match, w_known] = weights.normalized_top_level()?;
    let saturated = (foaf / foaf_cap).min(T::one()).max(T::zero());
    let known = if features.known { T::one() } else { T::zero() };
    let grade = w_foaf * saturated + w_interest * interest + w_match * match_value + w_known * known;
    Ok(grade.clamp_unit())
}

/// Computes every component for one pair and combines them.
pub fn grade_pair<T: Scalar>(
    graph: &SocialGraph,
    features: &CandidateFeatures<T>,
    receiver: MemberId,
    weights: &ScoreWeights<T>,
    params: &InterestParams<T>,
    foaf_cap: T,
) -> Result<T> {
    let candidate = features.candidate_id;
    let r = graph.member(receiver)?;
    let c = graph.member(candidate)?;
    let m = match_from_overlaps(&features.attribute_overlap, weights)?;
    let mm = mismatch_score(m, r, c, params, weights)?;
    let interest = interestingness(m, mm, params)?;
    let foaf = foaf_score(graph, receiver, candidate, weights)?;
    combined_score(features, m, interest, foaf, weights, foaf_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_features;
    use crate::graph::{Attributes, DegreeClass};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type W = ScoreWeights<f64>;

    fn member(id: u32, attrs: Attributes) -> Member {
        Member::new(MemberId(id), format!("m{id}")).with_attributes(attrs)
    }

    fn only_keys(keys: &[(AttributeKey, f64)]) -> W {
        let mut w = W { overlap_weights: [0.0; AttributeKey::COUNT], ..Default::default() };
        for &(k, x) in keys {
            w.set_overlap_weight(k, x);
        }
        w
    }

    fn features(known: bool) -> CandidateFeatures {
        CandidateFeatures {
            candidate_id: MemberId(1),
            degree: DegreeClass::Two,
            shared_connections: 0,
            known,
            known_from: None,
            attribute_overlap: [0.0; AttributeKey::COUNT],
        }
    }

    #[test]
    fn match_extremes() {
        let a = Attributes::default().with(AttributeKey::Skill, &["x", "y"]).with(AttributeKey::Hobby, &["h"]);
        let w = W::default();
        // Keys empty on both sides count as zero overlap, so restrict the
        // weights to populated keys.
        let w_pop = only_keys(&[(AttributeKey::Skill, 1.0), (AttributeKey::Hobby, 1.0)]);
        assert_eq!(match_score(&member(0, a.clone()), &member(1, a.clone()), &w_pop).unwrap(), 1.0);
        let b = Attributes::default().with(AttributeKey::Skill, &["z"]).with(AttributeKey::Hobby, &["g"]);
        assert_eq!(match_score(&member(0, a), &member(1, b), &w).unwrap(), 0.0);
    }

    #[test]
    fn match_weighted_mean() {
        let r = Attributes::default().with(AttributeKey::Employer, &["Intel"]).with(AttributeKey::Skill, &["a", "b"]);
        let c = Attributes::default().with(AttributeKey::Employer, &["Intel"]).with(AttributeKey::Skill, &["b", "c"]);
        let w = only_keys(&[(AttributeKey::Employer, 0.5), (AttributeKey::Skill, 0.5)]);
        assert_abs_diff_eq!(match_score(&member(0, r), &member(1, c), &w).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn match_requires_some_attribute_weight() {
        let w = only_keys(&[]);
        let m = member(0, Attributes::default());
        assert!(matches!(match_score(&m, &m, &w), Err(Error::Config(_))));
    }

    #[test]
    fn mismatch_modes() {
        let p = InterestParams::for_mode(MismatchMode::Complement);
        let m = member(0, Attributes::default());
        let w = W::default();
        assert_eq!(mismatch_score(1.0, &m, &m, &p, &w).unwrap(), 0.0);
        assert_abs_diff_eq!(mismatch_score(0.3, &m, &m, &p, &w).unwrap(), 0.7, epsilon = 1e-15);
        assert!(mismatch_score(1.2, &m, &m, &p, &w).is_err());

        let p = InterestParams::for_mode(MismatchMode::UnsharedFraction);
        let w = only_keys(&[(AttributeKey::Skill, 1.0)]);
        let r = member(0, Attributes::default().with(AttributeKey::Skill, &["a"]));
        let c = member(1, Attributes::default().with(AttributeKey::Skill, &["a", "b"]));
        assert_eq!(mismatch_score(0.5, &r, &c, &p, &w).unwrap(), 0.5);
        // Empty candidate set contributes zero.
        assert_eq!(mismatch_score(0.0, &c, &r, &p, &w).unwrap(), 0.0);
        let empty = member(2, Attributes::default());
        assert_eq!(mismatch_score(0.0, &r, &empty, &p, &w).unwrap(), 0.0);
    }

    #[test]
    fn interestingness_cases() {
        let p = InterestParams::default();
        assert_eq!(interestingness(1.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(interestingness(0.0, 0.8, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(interestingness(0.5, 0.5, &p).unwrap(), 1.0, epsilon = 1e-15);
        let bad = InterestParams { norm_f: 0.0, mismatch_mode: MismatchMode::Complement };
        assert!(matches!(interestingness(0.5, 0.5, &bad), Err(Error::Config(_))));
        let tiny = InterestParams { norm_f: 0.01, mismatch_mode: MismatchMode::Complement };
        assert_eq!(interestingness(0.5, 0.5, &tiny).unwrap(), 1.0);
    }

    #[test]
    fn interestingness_in_f32() {
        let p = InterestParams::<f32>::default();
        assert!((interestingness(0.5f32, 0.5, &p).unwrap() - 1.0).abs() < 1e-6);
    }

    /// 0 -- 2 -- 1, 0 -- 3 -- 1, 4 isolated; 2 works with 0 at Intel.
    fn small_graph() -> SocialGraph {
        let mut g = SocialGraph::new();
        let intel = Attributes::default().with(AttributeKey::Employer, &["Intel"]);
        g.add_member(member(0, intel.clone())).unwrap();
        g.add_member(member(1, Attributes::default())).unwrap();
        g.add_member(member(2, intel)).unwrap();
        g.add_member(member(3, Attributes::default().with(AttributeKey::Employer, &["HP"]))).unwrap();
        g.add_member(member(4, Attributes::default())).unwrap();
        for (a, b) in [(0, 2), (2, 1), (0, 3), (3, 1)] {
            g.add_friendship(MemberId(a), MemberId(b)).unwrap();
        }
        g
    }

    #[test]
    fn foaf_counts_and_workplace_bonus() {
        let g = small_graph();
        let mut w = ScoreWeights::<f64>::default();
        assert_eq!(foaf_score(&g, MemberId(0), MemberId(4), &w).unwrap(), 0.0);
        assert_eq!(foaf_score(&g, MemberId(0), MemberId(1), &w).unwrap(), 2.0);
        w.workplace_bonus = 0.5;
        assert_eq!(foaf_score(&g, MemberId(0), MemberId(1), &w).unwrap(), 2.5);
        assert!(foaf_score(&g, MemberId(1), MemberId(1), &w).is_err());
    }

    #[test]
    fn foaf_three_common_neighbors() {
        let mut g = SocialGraph::new();
        for i in 0..5 {
            g.add_member(member(i, Attributes::default())).unwrap();
        }
        for n in 2..5 {
            g.add_friendship(MemberId(0), MemberId(n)).unwrap();
            g.add_friendship(MemberId(1), MemberId(n)).unwrap();
        }
        assert_eq!(foaf_score::<f64>(&g, MemberId(0), MemberId(1), &W::default()).unwrap(), 3.0);
    }

    #[test]
    fn combined_cases() {
        let w = W::default();
        assert_eq!(combined_score(&features(false), 0.0, 0.0, 0.0, &w, 20.0).unwrap(), 0.0);
        let foaf_only = W::default().with_top_level([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(combined_score(&features(false), 0.3, 0.9, 20.0, &foaf_only, 20.0).unwrap(), 1.0);
        assert_eq!(combined_score(&features(false), 0.3, 0.9, 45.0, &foaf_only, 20.0).unwrap(), 1.0);

        let a = W::default().with_top_level([2.0, 2.0, 0.0, 0.0]);
        let b = W::default().with_top_level([1.0, 1.0, 0.0, 0.0]);
        for (m, i, f) in [(0.2, 0.7, 3.0), (0.9, 0.1, 30.0), (0.0, 0.0, 1.0)] {
            assert_eq!(
                combined_score(&features(true), m, i, f, &a, 20.0).unwrap(),
                combined_score(&features(true), m, i, f, &b, 20.0).unwrap()
            );
        }
    }

    #[test]
    fn combined_config_errors() {
        let zero = W::default().with_top_level([0.0; 4]);
        assert!(matches!(combined_score(&features(false), 0.1, 0.1, 1.0, &zero, 20.0), Err(Error::Config(_))));
        let w = W::default();
        assert!(combined_score(&features(false), 0.1, 0.1, 1.0, &w, 0.0).is_err());
        let neg = W::default().with_top_level([1.0, -1.0, 0.0, 0.0]);
        assert!(combined_score(&features(false), 0.1, 0.1, 1.0, &neg, 20.0).is_err());
    }

    #[test]
    fn grade_pair_matches_manual_composition() {
        let g = small_graph();
        let w = W { workplace_bonus: 0.5, ..Default::default() };
        let p = InterestParams::default();
        let f = extract_features::<f64>(&g, MemberId(0), MemberId(1)).unwrap();
        let r = g.member(MemberId(0)).unwrap();
        let c = g.member(MemberId(1)).unwrap();
        let m = match_score(r, c, &w).unwrap();
        let i = interestingness(m, mismatch_score(m, r, c, &p, &w).unwrap(), &p).unwrap();
        let foaf = foaf_score(&g, MemberId(0), MemberId(1), &w).unwrap();
        let expected = combined_score(&f, m, i, foaf, &w, 20.0).unwrap();
        assert_eq!(grade_pair(&g, &f, MemberId(0), &w, &p, 20.0).unwrap(), expected);
    }

    proptest! {
        #[test]
        fn interestingness_zero_at_extremes(x in 0.0f64..=1.0, norm_f in 1e-3f64..10.0) {
            let p = InterestParams { norm_f, mismatch_mode: MismatchMode::Complement };
            prop_assert_eq!(interestingness(0.0, x, &p).unwrap(), 0.0);
            prop_assert_eq!(interestingness(x, 0.0, &p).unwrap(), 0.0);
        }

        #[test]
        fn grades_are_bounded_and_scale_invariant(
            raw in prop::array::uniform4(0.0f64..5.0),
            scale in 1e-3f64..1e3,
            m in 0.0f64..=1.0,
            i in 0.0f64..=1.0,
            foaf in 0.0f64..100.0,
            known in any::<bool>(),
        ) {
            prop_assume!(raw.iter().any(|&x| x > 0.0));
            let a = W::default().with_top_level(raw);
            let b = W::default().with_top_level(raw.map(|x| x * scale));
            let ga = combined_score(&features(known), m, i, foaf, &a, 20.0).unwrap();
            let gb = combined_score(&features(known), m, i, foaf, &b, 20.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&ga));
            prop_assert!((ga - gb).abs() <= 1e-12);
        }
    }
}
