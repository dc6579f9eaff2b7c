//! Reduced variable vector for a (receiver, candidate) pair.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributeKey, DegreeClass, Member, MemberId, SocialGraph};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFeatures<T = f64> {
    pub candidate_id: MemberId,
    pub degree: DegreeClass,
    pub shared_connections: usize,
    pub known: bool,
    pub known_from: Option<String>,
    /// Jaccard overlap per attribute key, indexed by [`AttributeKey::index`].
    pub attribute_overlap: [T; AttributeKey::COUNT],
}

impl<T: Scalar> CandidateFeatures<T> {
    pub fn overlap(&self, key: AttributeKey) -> T {
        self.attribute_overlap[key.index()]
    }
}

fn distinct_pair(graph: &SocialGraph, a: MemberId, b: MemberId) -> Result<()> {
    graph.member(a)?;
    graph.member(b)?;
    if a == b {
        Err(Error::InvalidPair(a, b))
    } else {
        Ok(())
    }
}

/// Number of common friends of `a` and `b`.
pub fn shared_connections(graph: &SocialGraph, a: MemberId, b: MemberId) -> Result<usize> {
    distinct_pair(graph, a, b)?;
    Ok(common_neighbors(graph, a, b)?.count())
}

/// Common friends of `a` and `b` in ascending id order.
pub fn common_neighbors<'g>(
    graph: &'g SocialGraph,
    a: MemberId,
    b: MemberId,
) -> Result<impl Iterator<Item = MemberId> + 'g> {
    let na = graph.neighbors(a)?;
    let nb = graph.neighbors(b)?;
    let (small, large) = if na.len() <= nb.len() { (na, nb) } else { (nb, na) };
    Ok(small.iter().copied().filter(move |n| large.contains(n)))
}

/// Jaccard similarity of two value sets; 0 when both are empty.
pub fn jaccard<T: Scalar>(x: &BTreeSet<String>, y: &BTreeSet<String>) -> T {
    let inter = x.intersection(y).count();
    let union = x.len() + y.len() - inter;
    if union == 0 {
        T::zero()
    } else {
        T::from_count(inter) / T::from_count(union)
    }
}

pub fn attribute_overlap<T: Scalar>(x: &Member, y: &Member, key: AttributeKey) -> T {
    jaccard(x.values(key), y.values(key))
}

/// Whether the receiver knows the candidate offline, with the recorded
/// provenance label if there is one.
pub fn is_known(graph: &SocialGraph, receiver: MemberId, candidate: MemberId) -> Result<(bool, Option<String>)> {
    distinct_pair(graph, receiver, candidate)?;
    Ok(match graph.interaction(receiver, candidate) {
        Some(r) if r.offline_acquaintance || r.joint_publications > 0 => (true, r.label.clone()),
        _ => (false, None),
    })
}

pub fn extract_features<T: Scalar>(
    graph: &SocialGraph,
    receiver: MemberId,
    candidate: MemberId,
) -> Result<CandidateFeatures<T>> {
    let degree = graph.network_degree(receiver, candidate)?;
    extract_features_with_degree(graph, receiver, candidate, degree)
}

/// As [`extract_features`], with the degree class already known (e.g. from
/// [`SocialGraph::degree_ball`]).
pub fn extract_features_with_degree<T: Scalar>(
    graph: &SocialGraph,
    receiver: MemberId,
    candidate: MemberId,
    degree: DegreeClass,
) -> Result<CandidateFeatures<T>> {
    let shared = shared_connections(graph, receiver, candidate)?;
    let (known, known_from) = is_known(graph, receiver, candidate)?;
    let r = graph.member(receiver)?;
    let c = graph.member(candidate)?;
    let attribute_overlap = AttributeKey::ALL.map(|k| attribute_overlap(r, c, k));
    Ok(CandidateFeatures {
        candidate_id: candidate,
        degree,
        shared_connections: shared,
        known,
        known_from,
        attribute_overlap,
    })
}
