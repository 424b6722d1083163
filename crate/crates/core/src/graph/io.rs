//! Line-oriented text format:
//!
//! ```text
//! graph <n> <m> [weighted]
//! v <id>                       (n lines)
//! e <id1> <id2> [<weight>]     (m lines, weight iff `weighted`)
//! ```
//!
//! Ports follow edge order. Weights are decimals (`0.25`) or fractions (`1/4`).
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_rational::Ratio;

use super::{check_weight, Edge, LabeledGraph, VertexId, Weight};
use crate::error::{Error, Result};

pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let Some((hline, header)) = lines.next() else {
        return LabeledGraph::from_edges(Vec::new(), Vec::new(), false);
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, m, weighted) = match fields.as_slice() {
        ["graph", n, m] => (parse_count(hline, n)?, parse_count(hline, m)?, false),
        ["graph", n, m, "weighted"] => (parse_count(hline, n)?, parse_count(hline, m)?, true),
        _ => return Err(Error::parse(hline, "expected `graph <n> <m> [weighted]`")),
    };

    let mut vertices = Vec::with_capacity(n);
    let mut known = HashSet::with_capacity(n);
    let mut edges = Vec::with_capacity(m);
    let mut seen_edges = HashSet::with_capacity(m);
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            ["v", id] => {
                if !edges.is_empty() {
                    return Err(Error::parse(line, "vertex line after edge lines"));
                }
                let id = parse_id(line, id)?;
                if !known.insert(id) {
                    return Err(Error::parse(line, format!("duplicate vertex {id}")));
                }
                vertices.push(id);
            }
            ["e", a, b, rest @ ..] => {
                let u = parse_id(line, a)?;
                let v = parse_id(line, b)?;
                for x in [u, v] {
                    if !known.contains(&x) {
                        return Err(Error::parse(line, format!("unknown vertex {x}")));
                    }
                }
                if u == v {
                    return Err(Error::parse(line, format!("self-loop at {u}")));
                }
                if !seen_edges.insert(Edge::new(u, v)) {
                    return Err(Error::parse(line, format!("duplicate edge ({u}, {v})")));
                }
                let w = match (weighted, rest) {
                    (false, []) => None,
                    (true, [w]) => Some(parse_weight(w).map_err(|m| Error::parse(line, m))?),
                    (false, _) => {
                        return Err(Error::parse(line, "weight given for an unweighted graph"))
                    }
                    (true, _) => return Err(Error::parse(line, "expected exactly one weight")),
                };
                edges.push((u, v, w));
            }
            _ => return Err(Error::parse(line, format!("unrecognized line `{content}`"))),
        }
    }
    if vertices.len() != n {
        return Err(Error::parse(
            hline,
            format!("header declares {n} vertices, found {}", vertices.len()),
        ));
    }
    if edges.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    LabeledGraph::from_edges(vertices, edges, weighted)
}

pub fn serialize_graph(g: &LabeledGraph) -> String {
    let mut out = String::new();
    let _ = write!(out, "graph {} {}", g.n(), g.m());
    if g.is_weighted() {
        out.push_str(" weighted");
    }
    out.push('\n');
    for v in g.vertices() {
        let _ = writeln!(out, "v {v}");
    }
    for (e, w) in g.weighted_edges() {
        match w {
            Some(w) => writeln!(out, "e {} {} {}", e.0, e.1, format_weight(*w)),
            None => writeln!(out, "e {} {}", e.0, e.1),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn format_weight(w: Weight) -> String {
    if *w.denom() == 1 {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

/// Parses `1`, `0.25` or `3/4` into an exact weight in `(0, 1]`.
pub fn parse_weight(s: &str) -> std::result::Result<Weight, String> {
    let bad = || format!("malformed weight `{s}`");
    let w = if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.parse().map_err(|_| bad())?;
        let den: u64 = den.parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ratio::new(num, den)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac))
            .ok_or_else(bad)?;
        Ratio::new(num, den)
    } else {
        Ratio::from_integer(s.parse().map_err(|_| bad())?)
    };
    check_weight(w)?;
    Ok(w)
}

fn parse_count(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("malformed count `{s}`")))
}

fn parse_id(line: usize, s: &str) -> Result<VertexId> {
    match s.parse::<VertexId>() {
        Ok(0) | Err(_) => Err(Error::parse(line, format!("malformed vertex id `{s}`"))),
        Ok(v) => Ok(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, CorpusSpec, Family, WeightModel};
    use proptest::prelude::*;

    #[test]
    fn empty_text_is_the_empty_graph() {
        let g = parse_graph("").unwrap();
        assert_eq!(g.n(), 0);
        assert_eq!(parse_graph("graph 0 0\n").unwrap().n(), 0);
    }

    #[test]
    fn single_edge_file() {
        let g = parse_graph("graph 2 1\nv 1\nv 2\ne 1 2\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn weights_decimal_and_fraction() {
        let g = parse_graph("graph 3 2 weighted\nv 1\nv 2\nv 3\ne 1 2 0.25\ne 2 3 3/4\n").unwrap();
        assert_eq!(g.weight(Edge(1, 2)), Some(Ratio::new(1, 4)));
        assert_eq!(g.weight(Edge(2, 3)), Some(Ratio::new(3, 4)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dup = parse_graph("graph 2 2\nv 1\nv 2\ne 1 2\ne 2 1\n").unwrap_err();
        assert_eq!(dup, Error::parse(5, "duplicate edge (2, 1)"));
        let heavy = parse_graph("graph 2 1 weighted\nv 1\nv 2\ne 1 2 1.5\n").unwrap_err();
        assert!(matches!(heavy, Error::Parse { line: 4, .. }));
        let zero = parse_graph("graph 2 1 weighted\nv 1\nv 2\ne 1 2 0\n").unwrap_err();
        assert!(matches!(zero, Error::Parse { line: 4, .. }));
        let missing = parse_graph("graph 2 1 weighted\nv 1\nv 2\ne 1 2\n").unwrap_err();
        assert!(matches!(missing, Error::Parse { line: 4, .. }));
        let count = parse_graph("graph 3 0\nv 1\nv 2\n").unwrap_err();
        assert!(matches!(count, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn random_regular_round_trip() {
        let spec = CorpusSpec::new(Family::RandomRegular { degree: 3 }, 20, 11);
        let g = generate(&spec).unwrap();
        assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
    }

    proptest! {
        #[test]
        fn round_trip_preserves_ports_and_weights(seed in 0u64..500, n in 2usize..16, weighted in any::<bool>()) {
            let n = n + n % 2;
            let weights = if weighted { WeightModel::UniformRational } else { WeightModel::Unit };
            let spec = CorpusSpec::new(Family::RandomRegular { degree: 3.min(n - 1) }, n, seed)
                .with_weights(weights);
            if let Ok(g) = generate(&spec) {
                let back = parse_graph(&serialize_graph(&g)).unwrap();
                prop_assert_eq!(back, g);
            }
        }
    }
}
