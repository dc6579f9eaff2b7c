//! Line-oriented graph file format.
//!
//! ```text
//! # recsim-graph v1
//! # any further `#` lines are comments
//! [members]
//! <id>\t<display_name>\t<picture_id>\t<key=value;key=value...|->
//! [edges]
//! <id>\t<id>
//! [interactions]
//! <id>\t<id>\t<joint_publications>\t<exchanged_messages>\t<common_search_topics>\t<offline 0|1>\t<label|->
//! ```
//!
//! Text fields are percent-escaped for `%`, tab, CR, LF, and additionally
//! `;` and `=` inside attribute values. A lone `-` stands for "none"; a
//! literal `-` value is written as `%2D`. Members, edges and interactions
//! are written in ascending id order, so the output is canonical.

use std::fmt::Write as _;

use super::{AttributeKey, Attributes, InteractionRecord, Member, MemberId, MemberPair, SocialGraph};
use crate::error::{Error, Result};

pub const GRAPH_FORMAT_HEADER: &str = "# recsim-graph v1";

/// Serializes `graph`; `comments` become `#` lines after the header.
pub fn write_graph(graph: &SocialGraph, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str(GRAPH_FORMAT_HEADER);
    out.push('\n');
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str("[members]\n");
    for m in graph.members() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            m.id,
            escape(&m.display_name, false),
            escape(&m.picture_id, false),
            write_attributes(&m.attributes)
        );
    }
    out.push_str("[edges]\n");
    for e in graph.edges() {
        let _ = writeln!(out, "{}\t{}", e.low(), e.high());
    }
    out.push_str("[interactions]\n");
    for r in graph.interactions() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pair.low(),
            r.pair.high(),
            r.joint_publications,
            r.exchanged_messages,
            r.common_search_topics,
            u8::from(r.offline_acquaintance),
            r.label.as_deref().map_or_else(|| "-".to_string(), |l| escape(l, false)),
        );
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Members,
    Edges,
    Interactions,
}

pub fn parse_graph(text: &str) -> Result<SocialGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, GRAPH_FORMAT_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(n, format!("expected `{GRAPH_FORMAT_HEADER}`, found `{other}`")))
        }
        None => return Err(Error::parse(1, "empty graph file")),
    }

    let mut graph = SocialGraph::new();
    let mut section = Section::None;
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[members]" => section = Section::Members,
            "[edges]" => section = Section::Edges,
            "[interactions]" => section = Section::Interactions,
            _ => {
                let fields: Vec<&str> = line.split('\t').collect();
                let at = |e: Error| match e {
                    Error::Parse { .. } => e,
                    other => Error::parse(n, other.to_string()),
                };
                match section {
                    Section::None => return Err(Error::parse(n, "data line before any section")),
                    Section::Members => {
                        expect_fields(n, &fields, 4)?;
                        let id = parse_id(n, fields[0])?;
                        let mut member = Member::new(id, unescape(n, fields[1])?);
                        member.picture_id = unescape(n, fields[2])?;
                        member.attributes = parse_attributes(n, fields[3])?;
                        graph.add_member(member).map_err(at)?;
                    }
                    Section::Edges => {
                        expect_fields(n, &fields, 2)?;
                        let a = parse_id(n, fields[0])?;
                        let b = parse_id(n, fields[1])?;
                        graph.add_friendship(a, b).map_err(at)?;
                    }
                    Section::Interactions => {
                        expect_fields(n, &fields, 7)?;
                        let a = parse_id(n, fields[0])?;
                        let b = parse_id(n, fields[1])?;
                        let pair = MemberPair::new(a, b)
                            .ok_or_else(|| Error::parse(n, "interaction with itself"))?;
                        let mut r = InteractionRecord::new(pair);
                        r.joint_publications = parse_count(n, fields[2])?;
                        r.exchanged_messages = parse_count(n, fields[3])?;
                        r.common_search_topics = parse_count(n, fields[4])?;
                        r.offline_acquaintance = match fields[5] {
                            "0" => false,
                            "1" => true,
                            other => return Err(Error::parse(n, format!("invalid flag `{other}`"))),
                        };
                        r.label = match fields[6] {
                            "-" => None,
                            s => Some(unescape(n, s)?),
                        };
                        graph.add_interaction(r).map_err(at)?;
                    }
                }
            }
        }
    }
    Ok(graph)
}

fn expect_fields(line: usize, fields: &[&str], want: usize) -> Result<()> {
    if fields.len() == want {
        Ok(())
    } else {
        Err(Error::parse(line, format!("expected {want} fields, found {}", fields.len())))
    }
}

fn parse_id(line: usize, s: &str) -> Result<MemberId> {
    s.parse().map_err(|_| Error::parse(line, format!("invalid member id `{s}`")))
}

fn parse_count(line: usize, s: &str) -> Result<u32> {
    s.parse().map_err(|_| Error::parse(line, format!("invalid count `{s}`")))
}

fn write_attributes(attrs: &Attributes) -> String {
    let pairs: Vec<String> = attrs
        .iter()
        .flat_map(|(k, vs)| vs.iter().map(move |v| format!("{}={}", k.as_str(), escape(v, true))))
        .collect();
    if pairs.is_empty() {
        "-".to_string()
    } else {
        pairs.join(";")
    }
}

fn parse_attributes(line: usize, s: &str) -> Result<Attributes> {
    let mut attrs = Attributes::default();
    if s == "-" {
        return Ok(attrs);
    }
    for item in s.split(';') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("attribute `{item}` lacks `=`")))?;
        let key: AttributeKey = k.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
        attrs.insert(key, unescape(line, v)?);
    }
    Ok(attrs)
}

fn escape(s: &str, attribute_value: bool) -> String {
    if s == "-" {
        return "%2D".to_string();
    }
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '%' => out.push_str("%25"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            ';' if attribute_value => out.push_str("%3B"),
            '=' if attribute_value => out.push_str("%3D"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(line: usize, s: &str) -> Result<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s
                .get(i + 1..i + 3)
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| Error::parse(line, format!("bad escape in `{s}`")))?;
            out.push(hex);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| Error::parse(line, format!("escape yields invalid UTF-8 in `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphGenConfig};
    use proptest::prelude::*;

    #[test]
    fn generated_graph_round_trips() {
        let mut config = GraphGenConfig::with_defaults(120, 6.0, 11);
        config.triadic_closure = 0.4;
        let g = generate_graph(&config).unwrap();
        let text = write_graph(&g, &["seed=11".into()]);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_graph(&back, &["seed=11".into()]), text);
    }

    #[test]
    fn empty_graph_round_trips() {
        let g = SocialGraph::new();
        assert_eq!(parse_graph(&write_graph(&g, &[])).unwrap(), g);
    }

    #[test]
    fn rejects_missing_header_and_bad_lines() {
        assert!(parse_graph("[members]\n").is_err());
        let bad = format!("{GRAPH_FORMAT_HEADER}\n[edges]\n0\t1\n");
        match parse_graph(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad = format!("{GRAPH_FORMAT_HEADER}\n[members]\n0\tA\tp\n");
        assert!(matches!(parse_graph(&bad), Err(Error::Parse { line: 3, .. })));
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("-".to_string()),
            "[a-zA-Z0-9 %;=\\t\\n\\-]{0,12}",
            "\\PC{0,8}",
        ]
    }

    fn graph_strategy() -> impl Strategy<Value = SocialGraph> {
        let members = prop::collection::vec(
            (text_strategy(), text_strategy(), prop::collection::vec((0usize..8, text_strategy()), 0..5)),
            0..8,
        );
        (members, prop::collection::vec((0u32..8, 0u32..8), 0..12), prop::collection::vec(
            (0u32..8, 0u32..8, 0u32..5, 0u32..5, 0u32..5, any::<bool>(), prop::option::of(text_strategy())),
            0..6,
        ))
            .prop_map(|(members, edges, interactions)| {
                let mut g = SocialGraph::new();
                let n = members.len() as u32;
                for (i, (name, pic, attrs)) in members.into_iter().enumerate() {
                    let mut m = Member::new(MemberId(i as u32), name);
                    m.picture_id = pic;
                    for (k, v) in attrs {
                        m.attributes.insert(AttributeKey::ALL[k], v);
                    }
                    g.add_member(m).unwrap();
                }
                if n > 1 {
                    for (a, b) in edges {
                        let (a, b) = (MemberId(a % n), MemberId(b % n));
                        if a != b {
                            g.add_friendship(a, b).unwrap();
                        }
                    }
                    for (a, b, p, m, s, off, label) in interactions {
                        if let Some(pair) = MemberPair::new(MemberId(a % n), MemberId(b % n)) {
                            if g.interaction(pair.low(), pair.high()).is_none() {
                                let mut r = InteractionRecord::new(pair);
                                r.joint_publications = p;
                                r.exchanged_messages = m;
                                r.common_search_topics = s;
                                r.offline_acquaintance = off;
                                r.label = label;
                                g.add_interaction(r).unwrap();
                            }
                        }
                    }
                }
                g
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(g in graph_strategy()) {
            let text = write_graph(&g, &[]);
            let back = parse_graph(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(write_graph(&back, &[]), text);
        }
    }
}
