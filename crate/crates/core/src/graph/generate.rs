use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttributeKey, Attributes, InteractionRecord, Member, MemberId, MemberPair, SocialGraph};
use crate::error::{Error, Result};

/// Vocabulary and per-member value count range for one attribute key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    /// Candidate values with sampling weights.
    pub values: Vec<(String, f64)>,
    pub min_count: usize,
    pub max_count: usize,
}

impl AttributeSpec {
    pub fn new(values: &[(&str, f64)], min_count: usize, max_count: usize) -> Self {
        AttributeSpec {
            values: values.iter().map(|(v, w)| (v.to_string(), *w)).collect(),
            min_count,
            max_count,
        }
    }

    /// Same weight for every value.
    pub fn uniform(values: &[&str], min_count: usize, max_count: usize) -> Self {
        AttributeSpec {
            values: values.iter().map(|v| (v.to_string(), 1.0)).collect(),
            min_count,
            max_count,
        }
    }

    fn positive_values(&self) -> usize {
        self.values.iter().filter(|(_, w)| *w > 0.0).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphGenConfig {
    pub member_count: usize,
    pub target_mean_degree: f64,
    pub attributes: BTreeMap<AttributeKey, AttributeSpec>,
    pub offline_acquaintance_prob: f64,
    /// Expected number of interaction records each member takes part in.
    pub interaction_rate: f64,
    /// Share of edge placements that close a triangle (friend of a friend)
    /// instead of wiring a uniformly random pair. Zero gives plain random
    /// wiring.
    pub triadic_closure: f64,
    /// Pareto shape of per-member activity. Edge endpoints are drawn in
    /// proportion to activity, giving a heavy-tailed degree distribution.
    /// `None` draws endpoints uniformly.
    #[serde(default)]
    pub activity_shape: Option<f64>,
    pub seed: u64,
}

const OFFLINE_LABELS: [&str; 5] = ["studies", "work", "brother", "neighbour", "army service"];

const FIRST_NAMES: [&str; 32] = [
    "John", "Richard", "Joe", "Mary", "Jane", "Alex", "Dana", "Noa", "Yael", "David", "Sarah",
    "Michael", "Rachel", "Daniel", "Leah", "Adam", "Tamar", "Eli", "Maya", "Omer", "Ruth", "Ben",
    "Lior", "Anna", "Paul", "Nina", "Tom", "Ella", "Sam", "Ada", "Ivan", "Lena",
];

const LAST_NAMES: [&str; 32] = [
    "Doe", "Roe", "Blogs", "Smith", "Cohen", "Levi", "Brown", "Miller", "Katz", "Stone", "Green",
    "Klein", "Weiss", "Fox", "Wolf", "Hart", "Stern", "Gold", "Marsh", "Reed", "Lane", "Shaw",
    "Ford", "Hale", "Nash", "Pike", "Rowe", "Snow", "Vale", "West", "Young", "Zane",
];

impl GraphGenConfig {
    /// A population with a built-in attribute vocabulary.
    pub fn with_defaults(member_count: usize, target_mean_degree: f64, seed: u64) -> Self {
        GraphGenConfig {
            member_count,
            target_mean_degree,
            attributes: default_vocabulary(),
            offline_acquaintance_prob: 0.5,
            interaction_rate: 4.0,
            triadic_closure: 0.0,
            activity_shape: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must lie in [0,1], got {p}")))
            }
        };
        unit("offline_acquaintance_prob", self.offline_acquaintance_prob)?;
        unit("triadic_closure", self.triadic_closure)?;
        if let Some(a) = self.activity_shape {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::config(format!("activity_shape must be positive, got {a}")));
            }
        }
        if !(self.target_mean_degree.is_finite() && self.target_mean_degree >= 0.0) {
            return Err(Error::config("target_mean_degree must be a finite non-negative number"));
        }
        if !(self.interaction_rate.is_finite() && self.interaction_rate >= 0.0) {
            return Err(Error::config("interaction_rate must be a finite non-negative number"));
        }
        for (key, spec) in &self.attributes {
            if spec.min_count > spec.max_count {
                return Err(Error::config(format!(
                    "{key}: count range min {} exceeds max {}",
                    spec.min_count, spec.max_count
                )));
            }
            if spec.values.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::config(format!("{key}: weights must be finite and non-negative")));
            }
            if spec.min_count > spec.positive_values() {
                return Err(Error::config(format!(
                    "{key}: vocabulary has {} usable values but members need at least {}",
                    spec.positive_values(),
                    spec.min_count
                )));
            }
        }
        Ok(())
    }
}

/// Builds a random population. Equal configs give identical graphs.
pub fn generate_graph(config: &GraphGenConfig) -> Result<SocialGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.member_count;
    let mut graph = SocialGraph::new();

    let combos = FIRST_NAMES.len() * LAST_NAMES.len();
    let mut name_order: Vec<usize> = (0..combos).collect();
    name_order.shuffle(&mut rng);

    for i in 0..n {
        let id = MemberId(i as u32);
        let combo = name_order[i % combos];
        let mut name = format!(
            "{} {}",
            FIRST_NAMES[combo % FIRST_NAMES.len()],
            LAST_NAMES[combo / FIRST_NAMES.len()]
        );
        if i >= combos {
            name.push_str(&format!(" {}", i / combos + 1));
        }
        let attributes = sample_attributes(&config.attributes, &mut rng);
        graph.add_member(Member::new(id, name).with_attributes(attributes))?;
    }

    wire_edges(&mut graph, config, &mut rng)?;
    add_interactions(&mut graph, config, &mut rng)?;
    Ok(graph)
}

fn sample_attributes(specs: &BTreeMap<AttributeKey, AttributeSpec>, rng: &mut ChaCha8Rng) -> Attributes {
    let mut attrs = Attributes::default();
    for (&key, spec) in specs {
        let usable = spec.positive_values();
        let hi = spec.max_count.min(usable);
        if hi == 0 {
            continue;
        }
        let count = rng.gen_range(spec.min_count.min(hi)..=hi);
        let mut pool: Vec<(&str, f64)> = spec
            .values
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(v, w)| (v.as_str(), *w))
            .collect();
        for _ in 0..count {
            let dist = WeightedIndex::new(pool.iter().map(|(_, w)| *w)).expect("positive weights");
            let (value, _) = pool.swap_remove(dist.sample(rng));
            attrs.insert(key, value);
        }
    }
    attrs
}

fn wire_edges(graph: &mut SocialGraph, config: &GraphGenConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = config.member_count;
    if n < 2 {
        return Ok(());
    }
    let max_pairs = n * (n - 1) / 2;
    let target = ((n as f64 * config.target_mean_degree / 2.0).round() as usize).min(max_pairs);
    let activity = config.activity_shape.map(|shape| {
        let weights: Vec<f64> = (0..n).map(|_| (1.0 - rng.gen::<f64>()).powf(-1.0 / shape)).collect();
        WeightedIndex::new(weights).expect("activities are positive")
    });
    let endpoint = |rng: &mut ChaCha8Rng| match &activity {
        Some(dist) => MemberId(dist.sample(rng) as u32),
        None => MemberId(rng.gen_range(0..n) as u32),
    };
    let mut attempts = 0usize;
    let limit = 200 * target + 1000;
    while graph.edge_count() < target && attempts < limit {
        attempts += 1;
        let u = endpoint(rng);
        let v = if rng.gen_bool(config.triadic_closure) {
            match friend_of_friend(graph, u, rng) {
                Some(v) => v,
                None => endpoint(rng),
            }
        } else {
            endpoint(rng)
        };
        if u != v {
            graph.add_friendship(u, v)?;
        }
    }
    if graph.edge_count() < target {
        log::warn!(
            "edge wiring stopped at {} of {} target edges after {attempts} attempts",
            graph.edge_count(),
            target
        );
    }
    Ok(())
}

fn friend_of_friend(graph: &SocialGraph, u: MemberId, rng: &mut ChaCha8Rng) -> Option<MemberId> {
    let pick = |id: MemberId, rng: &mut ChaCha8Rng| {
        let ns = graph.neighbors(id).ok()?;
        if ns.is_empty() {
            return None;
        }
        ns.iter().nth(rng.gen_range(0..ns.len())).copied()
    };
    let w = pick(u, rng)?;
    pick(w, rng)
}

fn add_interactions(graph: &mut SocialGraph, config: &GraphGenConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = config.member_count;
    if n < 2 {
        return Ok(());
    }
    let max_pairs = n * (n - 1) / 2;
    let target = ((n as f64 * config.interaction_rate / 2.0).round() as usize).min(max_pairs);
    let mut placed = 0usize;
    let mut attempts = 0usize;
    while placed < target && attempts < 100 * target + 1000 {
        attempts += 1;
        let a = MemberId(rng.gen_range(0..n) as u32);
        let b = MemberId(rng.gen_range(0..n) as u32);
        let Some(pair) = MemberPair::new(a, b) else {
            continue;
        };
        if graph.interaction(a, b).is_some() {
            continue;
        }
        let mut record = InteractionRecord::new(pair);
        record.offline_acquaintance = rng.gen_bool(config.offline_acquaintance_prob);
        if rng.gen_bool(0.1) {
            record.joint_publications = rng.gen_range(1..=3);
        }
        record.exchanged_messages = if graph.are_friends(a, b) {
            rng.gen_range(1..=40)
        } else {
            rng.gen_range(0..=2)
        };
        record.common_search_topics = rng.gen_range(0..=5);
        record.label = if record.offline_acquaintance {
            Some(OFFLINE_LABELS[rng.gen_range(0..OFFLINE_LABELS.len())].to_string())
        } else if record.joint_publications > 0 {
            Some("publications".to_string())
        } else {
            None
        };
        graph.add_interaction(record)?;
        placed += 1;
    }
    Ok(())
}

/// Built-in vocabulary. Location is skewed toward one home country.
pub fn default_vocabulary() -> BTreeMap<AttributeKey, AttributeSpec> {
    use AttributeKey::*;
    BTreeMap::from([
        (
            Profession,
            AttributeSpec::uniform(
                &[
                    "software engineering", "electrical engineering", "physics", "mathematics",
                    "economics", "law", "medicine", "marketing", "design", "biology", "education",
                    "architecture",
                ],
                1,
                1,
            ),
        ),
        (
            EducationInstitution,
            AttributeSpec::uniform(
                &[
                    "JCE", "Hebrew University", "Technion", "Tel Aviv University", "Weizmann",
                    "MIT", "Stanford", "Oxford", "ETH Zurich", "Sorbonne", "Bar-Ilan",
                    "Ben-Gurion University", "Haifa University", "Open University", "TU Delft",
                ],
                1,
                2,
            ),
        ),
        (
            Employer,
            AttributeSpec::uniform(
                &[
                    "Intel", "Microsoft", "Google", "IBM", "Checkpoint", "Mobileye", "Teva",
                    "Elbit", "HP", "Amdocs", "Wix", "Waze", "Ministry of Education", "Hadassah",
                    "Bank Leumi", "Self-employed", "NICE", "SAP", "Philips", "Siemens",
                ],
                1,
                1,
            ),
        ),
        (
            Occupation,
            AttributeSpec::new(
                &[
                    ("Computer Software Professional", 3.0),
                    ("College Student", 2.0),
                    ("Web Market Expert", 1.0),
                    ("Software Engineer", 3.0),
                    ("Team Leader", 1.0),
                    ("Researcher", 1.5),
                    ("Lecturer", 1.0),
                    ("Project Manager", 1.0),
                    ("QA Engineer", 1.0),
                    ("Data Analyst", 1.0),
                    ("Consultant", 1.0),
                    ("Product Manager", 1.0),
                    ("Hardware Engineer", 1.0),
                    ("Designer", 1.0),
                    ("Entrepreneur", 0.5),
                ],
                1,
                1,
            ),
        ),
        (
            Skill,
            AttributeSpec::uniform(
                &[
                    "C#", "Java", "C++", "Python", "SQL", "Rust", "JavaScript", "Machine Learning",
                    "Databases", "Networking", "Embedded", "Testing", "UX", "Statistics", "Cloud",
                    "Security", "Algorithms", "Project Management", "Marketing", "Writing",
                    "Signal Processing", "Linux", "Agile", "Data Mining", "Web Design",
                ],
                1,
                4,
            ),
        ),
        (
            Language,
            AttributeSpec::new(
                &[
                    ("Hebrew", 6.0),
                    ("English", 8.0),
                    ("Russian", 2.0),
                    ("Arabic", 1.5),
                    ("French", 1.0),
                    ("Spanish", 1.0),
                    ("German", 0.7),
                    ("Amharic", 0.3),
                ],
                1,
                3,
            ),
        ),
        (
            Hobby,
            AttributeSpec::uniform(
                &[
                    "hiking", "chess", "music", "photography", "cycling", "reading", "cooking",
                    "running", "football", "painting", "travel", "gardening", "swimming",
                    "theatre", "board games",
                ],
                0,
                3,
            ),
        ),
        (
            Location,
            AttributeSpec::new(
                &[
                    ("Israel", 80.0),
                    ("United States", 8.0),
                    ("United Kingdom", 4.0),
                    ("Germany", 3.0),
                    ("France", 3.0),
                    ("India", 2.0),
                ],
                1,
                1,
            ),
        ),
    ])
}
