//! Social graph model: members with categorical attributes, undirected
//! friendships and pairwise interaction records.

mod generate;
mod text;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_graph, AttributeSpec, GraphGenConfig};
pub use text::{parse_graph, write_graph, GRAPH_FORMAT_HEADER};

/// Opaque member identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberId(pub u32);

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for MemberId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim().parse().map(MemberId)
    }
}

/// Unary content variables of a member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttributeKey {
    Profession,
    EducationInstitution,
    Employer,
    Occupation,
    Skill,
    Language,
    Hobby,
    Location,
}

impl AttributeKey {
    pub const COUNT: usize = 8;

    pub const ALL: [AttributeKey; Self::COUNT] = [
        AttributeKey::Profession,
        AttributeKey::EducationInstitution,
        AttributeKey::Employer,
        AttributeKey::Occupation,
        AttributeKey::Skill,
        AttributeKey::Language,
        AttributeKey::Hobby,
        AttributeKey::Location,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKey::Profession => "profession",
            AttributeKey::EducationInstitution => "education",
            AttributeKey::Employer => "employer",
            AttributeKey::Occupation => "occupation",
            AttributeKey::Skill => "skill",
            AttributeKey::Language => "language",
            AttributeKey::Hobby => "hobby",
            AttributeKey::Location => "location",
        }
    }
}

impl fmt::Display for AttributeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttributeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttributeKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown attribute key `{s}`")))
    }
}

/// One value set per [`AttributeKey`]; every key is always present.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes([BTreeSet<String>; AttributeKey::COUNT]);

impl Attributes {
    pub fn get(&self, key: AttributeKey) -> &BTreeSet<String> {
        &self.0[key.index()]
    }

    pub fn get_mut(&mut self, key: AttributeKey) -> &mut BTreeSet<String> {
        &mut self.0[key.index()]
    }

    pub fn insert(&mut self, key: AttributeKey, value: impl Into<String>) -> bool {
        self.0[key.index()].insert(value.into())
    }

    pub fn with(mut self, key: AttributeKey, values: &[&str]) -> Self {
        for v in values {
            self.insert(key, *v);
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttributeKey, &BTreeSet<String>)> {
        AttributeKey::ALL.into_iter().map(move |k| (k, self.get(k)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub id: MemberId,
    pub display_name: String,
    pub attributes: Attributes,
    pub picture_id: String,
}

impl Member {
    /// A member with no attributes and a picture token derived from the id.
    pub fn new(id: MemberId, display_name: impl Into<String>) -> Self {
        Member {
            id,
            display_name: display_name.into(),
            attributes: Attributes::default(),
            picture_id: format!("pic-{:06}", id.0),
        }
    }

    pub fn with_attributes(mut self, attributes: Attributes) -> Self {
        self.attributes = attributes;
        self
    }

    pub fn values(&self, key: AttributeKey) -> &BTreeSet<String> {
        self.attributes.get(key)
    }
}

/// Unordered pair of distinct members, stored as (low, high).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberPair(MemberId, MemberId);

impl MemberPair {
    /// Returns `None` for a self-pair.
    pub fn new(a: MemberId, b: MemberId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(MemberPair(a, b)),
            std::cmp::Ordering::Greater => Some(MemberPair(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn low(self) -> MemberId {
        self.0
    }

    pub fn high(self) -> MemberId {
        self.1
    }

    pub fn contains(self, id: MemberId) -> bool {
        self.0 == id || self.1 == id
    }
}

/// Direct or indirect interaction between two members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub pair: MemberPair,
    pub joint_publications: u32,
    pub exchanged_messages: u32,
    pub common_search_topics: u32,
    pub offline_acquaintance: bool,
    /// Where the two know each other from, e.g. "studies".
    pub label: Option<String>,
}

impl InteractionRecord {
    pub fn new(pair: MemberPair) -> Self {
        InteractionRecord {
            pair,
            joint_publications: 0,
            exchanged_messages: 0,
            common_search_topics: 0,
            offline_acquaintance: false,
            label: None,
        }
    }
}

/// Network degree between two members, capped at 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DegreeClass {
    Zero,
    One,
    Two,
    Three,
    /// Farther than 3 hops, or unreachable.
    ThreePlus,
}

impl DegreeClass {
    pub fn from_distance(d: usize) -> Self {
        match d {
            0 => DegreeClass::Zero,
            1 => DegreeClass::One,
            2 => DegreeClass::Two,
            3 => DegreeClass::Three,
            _ => DegreeClass::ThreePlus,
        }
    }

    /// Integer used in sample forms. `ThreePlus` is written as 4.
    pub fn as_number(self) -> u32 {
        match self {
            DegreeClass::Zero => 0,
            DegreeClass::One => 1,
            DegreeClass::Two => 2,
            DegreeClass::Three => 3,
            DegreeClass::ThreePlus => 4,
        }
    }

    pub fn from_number(n: u32) -> Self {
        Self::from_distance(n as usize)
    }
}

impl fmt::Display for DegreeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeClass::ThreePlus => f.write_str("3+"),
            other => write!(f, "{}", other.as_number()),
        }
    }
}

impl FromStr for DegreeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "3+" => Ok(DegreeClass::ThreePlus),
            other => other
                .parse::<u32>()
                .map(DegreeClass::from_number)
                .map_err(|_| Error::validation(format!("invalid degree class `{s}`"))),
        }
    }
}

const MAX_DEGREE_DEPTH: usize = 3;

/// Undirected friendship graph with member attributes and interactions.
///
/// Built once and then shared read-only; the only mutation used after
/// construction is [`SocialGraph::add_friendship`], which models a
/// candidate accepting a recommendation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SocialGraph {
    members: BTreeMap<MemberId, Member>,
    adjacency: BTreeMap<MemberId, BTreeSet<MemberId>>,
    interactions: BTreeMap<MemberPair, InteractionRecord>,
    edge_count: usize,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_member(&mut self, member: Member) -> Result<()> {
        if self.members.contains_key(&member.id) {
            return Err(Error::validation(format!("duplicate member id {}", member.id)));
        }
        self.adjacency.insert(member.id, BTreeSet::new());
        self.members.insert(member.id, member);
        Ok(())
    }

    /// Adds an undirected edge. Returns `false` if it already existed.
    pub fn add_friendship(&mut self, a: MemberId, b: MemberId) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::InvalidPair(a, b));
        }
        let inserted = self.adjacency.get_mut(&a).expect("checked").insert(b);
        self.adjacency.get_mut(&b).expect("checked").insert(a);
        if inserted {
            self.edge_count += 1;
        }
        Ok(inserted)
    }

    pub fn add_interaction(&mut self, record: InteractionRecord) -> Result<()> {
        self.check(record.pair.low())?;
        self.check(record.pair.high())?;
        if self.interactions.contains_key(&record.pair) {
            return Err(Error::validation(format!(
                "duplicate interaction record for ({}, {})",
                record.pair.low(),
                record.pair.high()
            )));
        }
        self.interactions.insert(record.pair, record);
        Ok(())
    }

    pub fn contains(&self, id: MemberId) -> bool {
        self.members.contains_key(&id)
    }

    fn check(&self, id: MemberId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownMember(id))
        }
    }

    pub fn member(&self, id: MemberId) -> Result<&Member> {
        self.members.get(&id).ok_or(Error::UnknownMember(id))
    }

    pub fn members(&self) -> impl Iterator<Item = &Member> {
        self.members.values()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = MemberId> + '_ {
        self.members.keys().copied()
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edges in ascending (low, high) order.
    pub fn edges(&self) -> impl Iterator<Item = MemberPair> + '_ {
        self.adjacency.iter().flat_map(|(&a, ns)| {
            ns.range(a..)
                .filter(move |&&b| b != a)
                .map(move |&b| MemberPair(a, b))
        })
    }

    pub fn interactions(&self) -> impl Iterator<Item = &InteractionRecord> {
        self.interactions.values()
    }

    pub fn interaction(&self, a: MemberId, b: MemberId) -> Option<&InteractionRecord> {
        MemberPair::new(a, b).and_then(|p| self.interactions.get(&p))
    }

    /// Interaction records touching `id`.
    pub fn interactions_of(&self, id: MemberId) -> impl Iterator<Item = &InteractionRecord> {
        self.interactions.values().filter(move |r| r.pair.contains(id))
    }

    /// Members sharing a friendship edge with `id`.
    pub fn neighbors(&self, id: MemberId) -> Result<&BTreeSet<MemberId>> {
        self.adjacency.get(&id).ok_or(Error::UnknownMember(id))
    }

    pub fn degree(&self, id: MemberId) -> Result<usize> {
        self.neighbors(id).map(BTreeSet::len)
    }

    pub fn are_friends(&self, a: MemberId, b: MemberId) -> bool {
        self.adjacency.get(&a).is_some_and(|ns| ns.contains(&b))
    }

    /// Shortest-path class between `a` and `b`, capped at 3.
    pub fn network_degree(&self, a: MemberId, b: MemberId) -> Result<DegreeClass> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Ok(DegreeClass::Zero);
        }
        let mut seen = BTreeSet::from([a]);
        let mut frontier = vec![a];
        for depth in 1..=MAX_DEGREE_DEPTH {
            let mut next = Vec::new();
            for u in frontier {
                for &v in &self.adjacency[&u] {
                    if v == b {
                        return Ok(DegreeClass::from_distance(depth));
                    }
                    if seen.insert(v) {
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        Ok(DegreeClass::ThreePlus)
    }

    /// Degree classes of every member within three hops of `source`
    /// (including `source` itself at class 0). Members absent from the map
    /// are `ThreePlus`.
    pub fn degree_ball(&self, source: MemberId) -> Result<BTreeMap<MemberId, DegreeClass>> {
        self.check(source)?;
        let mut classes = BTreeMap::from([(source, DegreeClass::Zero)]);
        let mut queue = VecDeque::from([(source, 0usize)]);
        while let Some((u, d)) = queue.pop_front() {
            if d == MAX_DEGREE_DEPTH {
                continue;
            }
            for &v in &self.adjacency[&u] {
                if let std::collections::btree_map::Entry::Vacant(e) = classes.entry(v) {
                    e.insert(DegreeClass::from_distance(d + 1));
                    queue.push_back((v, d + 1));
                }
            }
        }
        Ok(classes)
    }
}
