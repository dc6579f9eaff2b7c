//! Recommendation list generation, one page visit at a time:
//! randomize inputs, grade, sort and threshold, positional trends, decorate.

mod profile;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features_with_degree, is_known};
use crate::graph::{AttributeKey, DegreeClass, MemberId, SocialGraph};
use crate::scoring::grade_pair;
use crate::Grade;

pub use profile::{
    parse_profiles, write_profiles, NetworkProfile, FACEBOOK_LIKE, LINKEDIN_LIKE, PROFILES_FORMAT_HEADER,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoration {
    pub display_name: String,
    pub occupation_line: String,
    pub picture_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationEntry {
    pub candidate_id: MemberId,
    pub grade: Grade,
    /// 1-based rank.
    pub position: usize,
    pub injected_known: bool,
    pub decoration: Decoration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub receiver_id: MemberId,
    pub visit_index: u64,
    pub timestamp: NaiveDateTime,
    pub entries: Vec<RecommendationEntry>,
}

impl RecommendationList {
    pub fn candidate_ids(&self) -> impl Iterator<Item = MemberId> + '_ {
        self.entries.iter().map(|e| e.candidate_id)
    }
}

/// A candidate with its grade, before decoration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedCandidate {
    pub id: MemberId,
    pub grade: Grade,
    pub injected_known: bool,
}

impl GradedCandidate {
    fn graded(id: MemberId, grade: Grade) -> Self {
        GradedCandidate { id, grade, injected_known: false }
    }
}

/// Descending grade, ties by ascending id.
fn rank_order(a: &GradedCandidate, b: &GradedCandidate) -> std::cmp::Ordering {
    b.grade.total_cmp(&a.grade).then(a.id.cmp(&b.id))
}

/// Wall-clock time assigned to each visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitClock {
    pub start: NaiveDateTime,
    pub step_minutes: i64,
}

impl VisitClock {
    pub fn at(&self, visit_index: u64) -> NaiveDateTime {
        self.start + Duration::minutes(self.step_minutes * visit_index as i64)
    }
}

impl Default for VisitClock {
    fn default() -> Self {
        VisitClock {
            start: NaiveDate::from_ymd_opt(2013, 7, 12)
                .and_then(|d| d.and_hms_opt(22, 0, 0))
                .expect("valid date"),
            step_minutes: 180,
        }
    }
}

/// Everything a run of visits depends on. The random stream advances only
/// through the pipeline stages, so a visit sequence is a pure function of
/// (graph, receiver, profile, seed).
#[derive(Clone, Debug)]
pub struct SimState {
    graph: SocialGraph,
    receiver: MemberId,
    profile: NetworkProfile,
    rng: ChaCha8Rng,
    previous: Option<RecommendationList>,
    visit_index: u64,
    clock: VisitClock,
}

impl SimState {
    pub fn new(graph: SocialGraph, receiver: MemberId, profile: NetworkProfile, seed: u64) -> Result<Self> {
        graph.member(receiver)?;
        profile.validate()?;
        Ok(SimState {
            graph,
            receiver,
            profile,
            rng: ChaCha8Rng::seed_from_u64(seed),
            previous: None,
            visit_index: 0,
            clock: VisitClock::default(),
        })
    }

    pub fn with_clock(mut self, clock: VisitClock) -> Self {
        self.clock = clock;
        self
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn receiver(&self) -> MemberId {
        self.receiver
    }

    pub fn profile(&self) -> &NetworkProfile {
        &self.profile
    }

    pub fn previous_list(&self) -> Option<&RecommendationList> {
        self.previous.as_ref()
    }

    pub fn visit_index(&self) -> u64 {
        self.visit_index
    }

    /// The receiver accepts `candidate` as a friend.
    pub fn accept(&mut self, candidate: MemberId) -> Result<bool> {
        self.graph.add_friendship(self.receiver, candidate)
    }

    /// Known members of the receiver who are not friends, ascending.
    pub fn known_candidates(&self) -> Vec<MemberId> {
        let mut out: Vec<MemberId> = self
            .graph
            .interactions_of(self.receiver)
            .filter(|r| r.offline_acquaintance || r.joint_publications > 0)
            .map(|r| if r.pair.low() == self.receiver { r.pair.high() } else { r.pair.low() })
            .filter(|&c| !self.graph.are_friends(self.receiver, c))
            .collect();
        out.sort();
        out
    }

    fn degree_of(ball: &BTreeMap<MemberId, DegreeClass>, id: MemberId) -> DegreeClass {
        ball.get(&id).copied().unwrap_or(DegreeClass::ThreePlus)
    }

    fn grade_with_ball(&self, ball: &BTreeMap<MemberId, DegreeClass>, id: MemberId) -> Result<Grade> {
        let p = &self.profile;
        let features = extract_features_with_degree(&self.graph, self.receiver, id, Self::degree_of(ball, id))?;
        grade_pair(&self.graph, &features, self.receiver, &p.weights, &p.interest_params, p.foaf_cap)
    }

    /// Draws the candidate pool for the next visit: part of the previous
    /// list survives churn, the rest is topped up with fresh draws.
    pub fn randomize_inputs(&mut self) -> Result<BTreeSet<MemberId>> {
        let p = &self.profile;
        let ball = self.graph.degree_ball(self.receiver)?;
        let eligible: Vec<MemberId> = self
            .graph
            .member_ids()
            .filter(|&id| id != self.receiver && Self::degree_of(&ball, id) != DegreeClass::One)
            .collect();
        let passes_filter = |id: MemberId| p.degree_filter.is_none_or(|d| Self::degree_of(&ball, id) == d);
        let filtered: Vec<MemberId> = eligible.iter().copied().filter(|&id| passes_filter(id)).collect();
        if filtered.len() < p.pool_size {
            return Err(Error::UnderPopulated { needed: p.pool_size, available: filtered.len() });
        }

        let previous: BTreeSet<MemberId> =
            self.previous.as_ref().map(|l| l.candidate_ids().collect()).unwrap_or_default();
        let carried: Vec<MemberId> = previous.iter().copied().filter(|&id| passes_filter(id) && id != self.receiver).collect();
        let carried: Vec<MemberId> =
            carried.into_iter().filter(|id| eligible.binary_search(id).is_ok()).collect();
        let churned = (p.churn_fraction * carried.len() as f64).round() as usize;
        let keep = (carried.len() - churned).min(p.pool_size);
        let mut pool: BTreeSet<MemberId> = carried.choose_multiple(&mut self.rng, keep).copied().collect();

        let need = p.pool_size - pool.len();
        let random_part = (p.random_injection_fraction * need as f64).round() as usize;
        let rng = &mut self.rng;
        let mut draw = |from: &[MemberId], k: usize, pool: &mut BTreeSet<MemberId>, allow_previous: bool| {
            let options: Vec<MemberId> = from
                .iter()
                .copied()
                .filter(|id| !pool.contains(id) && (allow_previous || !previous.contains(id)))
                .collect();
            pool.extend(options.choose_multiple(rng, k.min(options.len())).copied());
        };
        if random_part > 0 {
            draw(&eligible, random_part, &mut pool, false);
        }
        for allow_previous in [false, true] {
            let missing = p.pool_size - pool.len();
            if missing > 0 {
                draw(&filtered, missing, &mut pool, allow_previous);
            }
        }
        debug_assert_eq!(pool.len(), p.pool_size);
        Ok(pool)
    }

    /// Grades every pool member with the profile's weights.
    pub fn calculate_recommendation(&self, pool: &BTreeSet<MemberId>) -> Result<BTreeMap<MemberId, Grade>> {
        let ball = self.graph.degree_ball(self.receiver)?;
        pool.iter()
            .map(|&id| {
                self.graph.member(id)?;
                if id == self.receiver || self.graph.are_friends(self.receiver, id) {
                    return Err(Error::InvalidPair(self.receiver, id));
                }
                Ok((id, self.grade_with_ball(&ball, id)?))
            })
            .collect()
    }

    /// Puts known candidates in the first `first_k_known` slots (each with
    /// probability `first_k_known_prob`) and swaps a `known_random_fraction`
    /// of the remaining slots for known candidates.
    ///
    /// Injected entries keep their computed grade but do not take part in the
    /// grade ordering; the non-injected entries stay sorted and the lowest
    /// graded fall off the end, so the list length never changes.
    pub fn apply_positional_trends(&mut self, ordered: Vec<GradedCandidate>) -> Result<Vec<GradedCandidate>> {
        let p = self.profile.clone();
        let n = ordered.len();
        let k = p.first_k_known.min(n);
        let random_slots = ((n - k) as f64 * p.known_random_fraction).round() as usize;
        if n == 0 || (k == 0 || p.first_k_known_prob == 0.0) && random_slots == 0 {
            return Ok(ordered);
        }
        let known = self.known_candidates();
        if known.is_empty() {
            log::debug!("receiver {} has no known non-friends; positional injection skipped", self.receiver);
            return Ok(ordered);
        }
        let ball = self.graph.degree_ball(self.receiver)?;

        // Top slots.
        let mut chosen: Vec<Option<MemberId>> = vec![None; k];
        let mut taken: BTreeSet<MemberId> = BTreeSet::new();
        for slot in chosen.iter_mut() {
            if !self.rng.gen_bool(p.first_k_known_prob) {
                continue;
            }
            let options: Vec<MemberId> = known.iter().copied().filter(|c| !taken.contains(c)).collect();
            match options.choose(&mut self.rng) {
                Some(&c) => {
                    *slot = Some(c);
                    taken.insert(c);
                }
                None => log::debug!("ran out of known candidates for top slots"),
            }
        }

        let rest: Vec<GradedCandidate> = ordered.iter().copied().filter(|c| !taken.contains(&c.id)).collect();
        let mut rest = rest.into_iter();
        let mut out = Vec::with_capacity(n);
        for slot in 0..n {
            match chosen.get(slot).copied().flatten() {
                Some(id) => out.push(GradedCandidate {
                    id,
                    grade: self.grade_with_ball(&ball, id)?,
                    injected_known: true,
                }),
                None => out.push(rest.next().expect("length is preserved")),
            }
        }

        // Randomly placed known candidates further down.
        if random_slots > 0 {
            let mut positions: Vec<usize> = (k..n).collect();
            positions.shuffle(&mut self.rng);
            for &pos in positions.iter().take(random_slots) {
                let present: BTreeSet<MemberId> = out.iter().map(|c| c.id).collect();
                let options: Vec<MemberId> = known.iter().copied().filter(|c| !present.contains(c)).collect();
                let Some(&c) = options.choose(&mut self.rng) else {
                    log::debug!("no further known candidates to place");
                    break;
                };
                out[pos] = GradedCandidate { id: c, grade: self.grade_with_ball(&ball, c)?, injected_known: true };
            }
        }
        Ok(out)
    }

    /// Runs one full visit and records it as the previous list.
    pub fn next_visit(&mut self) -> Result<RecommendationList> {
        let pool = self.randomize_inputs()?;
        let graded = self.calculate_recommendation(&pool)?;
        let ordered = sort_and_threshold(&graded, &self.profile);
        let trended = self.apply_positional_trends(ordered)?;
        let entries = decorate(&trended, &self.graph)?;
        let list = RecommendationList {
            receiver_id: self.receiver,
            visit_index: self.visit_index,
            timestamp: self.clock.at(self.visit_index),
            entries,
        };
        self.visit_index += 1;
        self.previous = Some(list.clone());
        Ok(list)
    }

    /// Known-from label for a listed candidate, if any.
    pub fn known_label(&self, candidate: MemberId) -> Option<String> {
        is_known(&self.graph, self.receiver, candidate).ok().and_then(|(_, l)| l)
    }
}

/// Keeps candidates at or above the threshold, best first, up to capacity.
pub fn sort_and_threshold(graded: &BTreeMap<MemberId, Grade>, profile: &NetworkProfile) -> Vec<GradedCandidate> {
    let mut out: Vec<GradedCandidate> = graded
        .iter()
        .filter(|(_, &g)| g >= profile.grade_threshold)
        .map(|(&id, &g)| GradedCandidate::graded(id, g))
        .collect();
    out.sort_by(rank_order);
    out.truncate(profile.list_capacity);
    out
}

/// Position line shown under a candidate's name: occupation, with the
/// employer appended when both are known.
pub fn occupation_line(member: &crate::graph::Member) -> String {
    let join = |k: AttributeKey| member.values(k).iter().cloned().collect::<Vec<_>>().join(", ");
    let occupation = join(AttributeKey::Occupation);
    let employer = join(AttributeKey::Employer);
    match (occupation.is_empty(), employer.is_empty()) {
        (false, false) => format!("{occupation} at {employer}"),
        (false, true) => occupation,
        (true, false) => employer,
        (true, true) => "Member".to_string(),
    }
}

pub fn decorate(ordered: &[GradedCandidate], graph: &SocialGraph) -> Result<Vec<RecommendationEntry>> {
    ordered
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = graph.member(c.id)?;
            Ok(RecommendationEntry {
                candidate_id: c.id,
                grade: c.grade,
                position: i + 1,
                injected_known: c.injected_known,
                decoration: Decoration {
                    display_name: m.display_name.clone(),
                    occupation_line: occupation_line(m),
                    picture_id: m.picture_id.clone(),
                },
            })
        })
        .collect()
}

/// An active but not extreme member: the one at the 85th percentile of
/// friend count, ties broken by id.
pub fn default_receiver(graph: &SocialGraph) -> Option<MemberId> {
    let mut ids: Vec<MemberId> = graph.member_ids().collect();
    if ids.is_empty() {
        return None;
    }
    ids.sort_by_key(|&id| (graph.degree(id).unwrap_or(0), id));
    Some(ids[(ids.len() - 1) * 85 / 100])
}
