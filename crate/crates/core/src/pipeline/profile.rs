//! Network profiles and their plain-text configuration format.
//!
//! ```text
//! # recsim-profiles v1
//! [my-network]
//! base = facebook-like        # optional: start from a preset
//! pool_size = 150
//! overlap.employer = 2.0
//! ```
//!
//! Keys are the ones listed by [`NetworkProfile::to_pairs`]. The same keys
//! are accepted as `--set key=value` overrides on the command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributeKey, DegreeClass};
use crate::samples::MAX_FORM_ROWS;
use crate::scoring::{InterestParams, MismatchMode, ScoreWeights};

pub const PROFILES_FORMAT_HEADER: &str = "# recsim-profiles v1";

pub const LINKEDIN_LIKE: &str = "linkedin-like";
pub const FACEBOOK_LIKE: &str = "facebook-like";

/// Policy bundle emulating one network's recommendation technique.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkProfile {
    pub name: String,
    pub list_capacity: usize,
    pub grade_threshold: f64,
    pub weights: ScoreWeights<f64>,
    pub interest_params: InterestParams<f64>,
    pub pool_size: usize,
    /// Share of fresh pool draws taken from all eligible members, ignoring
    /// `degree_filter`.
    pub random_injection_fraction: f64,
    pub first_k_known: usize,
    pub first_k_known_prob: f64,
    pub known_random_fraction: f64,
    pub degree_filter: Option<DegreeClass>,
    pub churn_fraction: f64,
    pub foaf_cap: f64,
}

impl Default for NetworkProfile {
    fn default() -> Self {
        NetworkProfile {
            name: "custom".to_string(),
            list_capacity: 50,
            grade_threshold: 0.0,
            weights: ScoreWeights::default(),
            interest_params: InterestParams::default(),
            pool_size: 100,
            random_injection_fraction: 0.0,
            first_k_known: 0,
            first_k_known_prob: 0.0,
            known_random_fraction: 0.0,
            degree_filter: None,
            churn_fraction: 0.6,
            foaf_cap: 20.0,
        }
    }
}

impl NetworkProfile {
    /// Friend-of-a-friend driven: second-degree candidates only, two known
    /// people in the top slots, heavy weight on shared connections.
    pub fn linkedin_like() -> Self {
        let mut weights = ScoreWeights {
            foaf_weight: 0.6,
            interestingness_weight: 0.1,
            match_weight: 0.2,
            known_bonus: 0.1,
            overlap_weights: [1.0; AttributeKey::COUNT],
            workplace_bonus: 0.5,
        };
        weights.set_overlap_weight(AttributeKey::Employer, 2.0);
        weights.set_overlap_weight(AttributeKey::Language, 0.5);
        weights.set_overlap_weight(AttributeKey::Hobby, 0.5);
        NetworkProfile {
            name: LINKEDIN_LIKE.to_string(),
            weights,
            pool_size: 80,
            random_injection_fraction: 0.05,
            first_k_known: 2,
            first_k_known_prob: 0.8,
            known_random_fraction: 0.02,
            degree_filter: Some(DegreeClass::Two),
            ..Default::default()
        }
    }

    /// Novelty driven: no degree restriction, grades tilted toward
    /// interestingness.
    pub fn facebook_like() -> Self {
        let mut weights = ScoreWeights {
            foaf_weight: 0.3,
            interestingness_weight: 0.5,
            match_weight: 0.1,
            known_bonus: 0.1,
            overlap_weights: [1.0; AttributeKey::COUNT],
            workplace_bonus: 0.0,
        };
        weights.set_overlap_weight(AttributeKey::Hobby, 2.0);
        weights.set_overlap_weight(AttributeKey::Location, 2.0);
        NetworkProfile {
            name: FACEBOOK_LIKE.to_string(),
            weights,
            pool_size: 200,
            known_random_fraction: 0.04,
            ..Default::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            LINKEDIN_LIKE => Some(Self::linkedin_like()),
            FACEBOOK_LIKE => Some(Self::facebook_like()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_FORM_ROWS).contains(&self.list_capacity) {
            return Err(Error::config(format!(
                "list_capacity must lie in 1..={MAX_FORM_ROWS}, got {}",
                self.list_capacity
            )));
        }
        if self.pool_size < self.list_capacity {
            return Err(Error::config(format!(
                "pool_size {} is smaller than list_capacity {}",
                self.pool_size, self.list_capacity
            )));
        }
        for (name, x) in [
            ("grade_threshold", self.grade_threshold),
            ("random_injection_fraction", self.random_injection_fraction),
            ("first_k_known_prob", self.first_k_known_prob),
            ("known_random_fraction", self.known_random_fraction),
            ("churn_fraction", self.churn_fraction),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::config(format!("{name} must lie in [0,1], got {x}")));
            }
        }
        if !(self.foaf_cap.is_finite() && self.foaf_cap > 0.0) {
            return Err(Error::config(format!("foaf_cap must be positive, got {}", self.foaf_cap)));
        }
        self.weights.normalized_top_level()?;
        self.weights.normalized_overlap()?;
        self.interest_params.validate()
    }

    /// Sets one configuration key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let real = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::config(format!("{key}: `{value}` is not a number")))
        };
        let count = || -> Result<usize> {
            value.parse::<usize>().map_err(|_| Error::config(format!("{key}: `{value}` is not a count")))
        };
        match key {
            "name" => self.name = value.to_string(),
            "list_capacity" => self.list_capacity = count()?,
            "grade_threshold" => self.grade_threshold = real()?,
            "pool_size" => self.pool_size = count()?,
            "random_injection_fraction" => self.random_injection_fraction = real()?,
            "first_k_known" => self.first_k_known = count()?,
            "first_k_known_prob" => self.first_k_known_prob = real()?,
            "known_random_fraction" => self.known_random_fraction = real()?,
            "churn_fraction" => self.churn_fraction = real()?,
            "foaf_cap" => self.foaf_cap = real()?,
            "degree_filter" => {
                self.degree_filter = match value {
                    "none" | "" => None,
                    v => Some(v.parse().map_err(|_| Error::config(format!("{key}: invalid degree `{v}`")))?),
                }
            }
            "foaf_weight" => self.weights.foaf_weight = real()?,
            "interestingness_weight" => self.weights.interestingness_weight = real()?,
            "match_weight" => self.weights.match_weight = real()?,
            "known_bonus" => self.weights.known_bonus = real()?,
            "workplace_bonus" => self.weights.workplace_bonus = real()?,
            "norm_f" => self.interest_params.norm_f = real()?,
            "mismatch_mode" => {
                self.interest_params.mismatch_mode = match value {
                    "complement" => MismatchMode::Complement,
                    "unshared_fraction" => MismatchMode::UnsharedFraction,
                    v => return Err(Error::config(format!("{key}: unknown mode `{v}`"))),
                }
            }
            other => match other.strip_prefix("overlap.") {
                Some(k) => {
                    let attr: AttributeKey = k.parse().map_err(|_| Error::config(format!("unknown key `{other}`")))?;
                    self.weights.set_overlap_weight(attr, real()?);
                }
                None => return Err(Error::config(format!("unknown profile key `{other}`"))),
            },
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override `{o}` is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let w = &self.weights;
        let mut pairs: Vec<(String, String)> = vec![
            ("name".into(), self.name.clone()),
            ("list_capacity".into(), self.list_capacity.to_string()),
            ("grade_threshold".into(), self.grade_threshold.to_string()),
            ("pool_size".into(), self.pool_size.to_string()),
            ("random_injection_fraction".into(), self.random_injection_fraction.to_string()),
            ("first_k_known".into(), self.first_k_known.to_string()),
            ("first_k_known_prob".into(), self.first_k_known_prob.to_string()),
            ("known_random_fraction".into(), self.known_random_fraction.to_string()),
            (
                "degree_filter".into(),
                self.degree_filter.map_or_else(|| "none".to_string(), |d| d.to_string()),
            ),
            ("churn_fraction".into(), self.churn_fraction.to_string()),
            ("foaf_cap".into(), self.foaf_cap.to_string()),
            ("foaf_weight".into(), w.foaf_weight.to_string()),
            ("interestingness_weight".into(), w.interestingness_weight.to_string()),
            ("match_weight".into(), w.match_weight.to_string()),
            ("known_bonus".into(), w.known_bonus.to_string()),
            ("workplace_bonus".into(), w.workplace_bonus.to_string()),
            ("norm_f".into(), self.interest_params.norm_f.to_string()),
            (
                "mismatch_mode".into(),
                match self.interest_params.mismatch_mode {
                    MismatchMode::Complement => "complement",
                    MismatchMode::UnsharedFraction => "unshared_fraction",
                }
                .into(),
            ),
        ];
        for k in AttributeKey::ALL {
            pairs.push((format!("overlap.{k}"), w.overlap_weight(k).to_string()));
        }
        pairs
    }

    /// One-line `key=value` rendering used in artifact headers.
    pub fn summary(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

/// Parses a profiles file into profiles keyed by section name.
pub fn parse_profiles(text: &str) -> Result<BTreeMap<String, NetworkProfile>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, PROFILES_FORMAT_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(n, format!("expected `{PROFILES_FORMAT_HEADER}`, found `{other}`")))
        }
        None => return Err(Error::parse(1, "empty profiles file")),
    }
    let mut profiles = BTreeMap::new();
    let mut current: Option<NetworkProfile> = None;
    let finish = |p: Option<NetworkProfile>, profiles: &mut BTreeMap<String, NetworkProfile>| -> Result<()> {
        if let Some(p) = p {
            p.validate()?;
            profiles.insert(p.name.clone(), p);
        }
        Ok(())
    };
    for (n, raw) in lines {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            finish(current.take(), &mut profiles).map_err(|e| Error::parse(n, e.to_string()))?;
            current = Some(NetworkProfile { name: name.trim().to_string(), ..Default::default() });
            continue;
        }
        let profile = current.as_mut().ok_or_else(|| Error::parse(n, "setting outside a [profile] section"))?;
        let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(n, format!("expected key = value, found `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "base" {
            let base = NetworkProfile::preset(v).ok_or_else(|| Error::parse(n, format!("unknown base preset `{v}`")))?;
            *profile = NetworkProfile { name: profile.name.clone(), ..base };
        } else {
            profile.set(k, v).map_err(|e| Error::parse(n, e.to_string()))?;
        }
    }
    let last_line = text.lines().count().max(1);
    finish(current, &mut profiles).map_err(|e| Error::parse(last_line, e.to_string()))?;
    Ok(profiles)
}

/// Writes profiles in the format read by [`parse_profiles`].
pub fn write_profiles<'a>(profiles: impl IntoIterator<Item = &'a NetworkProfile>) -> String {
    let mut out = format!("{PROFILES_FORMAT_HEADER}\n");
    for p in profiles {
        let _ = writeln!(out, "\n[{}]", p.name);
        for (k, v) in p.to_pairs().into_iter().skip(1) {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        NetworkProfile::linkedin_like().validate().unwrap();
        NetworkProfile::facebook_like().validate().unwrap();
        NetworkProfile::default().validate().unwrap();
        assert!(NetworkProfile::preset("myspace-like").is_none());
        assert_eq!(NetworkProfile::linkedin_like().churn_fraction, 0.6);
        assert_eq!(NetworkProfile::facebook_like().churn_fraction, 0.6);
    }

    #[test]
    fn profiles_file_round_trip() {
        let a = NetworkProfile::linkedin_like();
        let mut b = NetworkProfile::facebook_like();
        b.name = "fb-variant".into();
        b.set("overlap.skill", "3.5").unwrap();
        b.set("mismatch_mode", "unshared_fraction").unwrap();
        let text = write_profiles([&a, &b]);
        let parsed = parse_profiles(&text).unwrap();
        assert_eq!(parsed[LINKEDIN_LIKE], a);
        assert_eq!(parsed["fb-variant"], b);
    }

    #[test]
    fn base_preset_and_comments() {
        let text = "# recsim-profiles v1\n[mine]\nbase = facebook-like # start here\npool_size = 150\n";
        let p = &parse_profiles(text).unwrap()["mine"];
        assert_eq!(p.pool_size, 150);
        assert_eq!(p.weights, NetworkProfile::facebook_like().weights);
        assert_eq!(p.name, "mine");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# recsim-profiles v1\n[x]\npool_size = lots\n";
        assert!(matches!(parse_profiles(text), Err(Error::Parse { line: 3, .. })));
        let text = "# recsim-profiles v1\nfoaf_weight = 1\n";
        assert!(matches!(parse_profiles(text), Err(Error::Parse { line: 2, .. })));
        assert!(parse_profiles("[x]\n").is_err());
        let text = "# recsim-profiles v1\n[x]\nlist_capacity = 50\npool_size = 10\n";
        assert!(parse_profiles(text).is_err());
    }

    #[test]
    fn overrides() {
        let mut p = NetworkProfile::linkedin_like();
        p.apply_overrides(&["churn_fraction=0.8", "degree_filter=none", "overlap.hobby = 0"]).unwrap();
        assert_eq!(p.churn_fraction, 0.8);
        assert_eq!(p.degree_filter, None);
        assert_eq!(p.weights.overlap_weight(AttributeKey::Hobby), 0.0);
        assert!(p.apply_overrides(&["nonsense"]).is_err());
        assert!(p.apply_overrides(&["colour=blue"]).is_err());
    }

    #[test]
    fn invalid_profiles_rejected() {
        let p = NetworkProfile { churn_fraction: 1.2, ..Default::default() };
        assert!(p.validate().is_err());
        let p = NetworkProfile { list_capacity: 0, ..Default::default() };
        assert!(p.validate().is_err());
        let mut p = NetworkProfile::default();
        p.weights = p.weights.with_top_level([0.0; 4]);
        assert!(p.validate().is_err());
    }
}
