//! Serialization of exchange networks to edge-list CSV, DOT and GraphML.

use std::io::Read;

use crate::error::{Error, Result};
use crate::graph::{ExchangeNetwork, TimeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeListCsv,
    Dot,
    GraphMl,
}

impl std::str::FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" | "edgelist" | "edge-list" => Ok(Self::EdgeListCsv),
            "dot" => Ok(Self::Dot),
            "graphml" => Ok(Self::GraphMl),
            other => Err(Error::Config(format!("unknown graph format `{other}`"))),
        }
    }
}

/// Serializes a network. Rows and statements follow node order, so output is
/// deterministic for a given network.
pub fn export(network: &ExchangeNetwork, format: GraphFormat) -> String {
    match format {
        GraphFormat::EdgeListCsv => to_edge_list(network),
        GraphFormat::Dot => to_dot(network),
        GraphFormat::GraphMl => to_graphml(network),
    }
}

/// Edge list rows are `source,target,weight` with source = employer and
/// target = trainer. Nodes with no positive incident edge are declared by a
/// zero-weight self row so the import round trip preserves the node set.
fn to_edge_list(network: &ExchangeNetwork) -> String {
    let n = network.node_count();
    let mut touched = vec![false; n];
    for (i, j, _) in network.edges() {
        touched[i] = true;
        touched[j] = true;
    }
    let mut out = String::from("source,target,weight\n");
    for (i, j, w) in network.edges() {
        out.push_str(&format!(
            "{},{},{w}\n",
            csv_field(&network.nodes()[i]),
            csv_field(&network.nodes()[j])
        ));
    }
    for (v, touched) in touched.iter().enumerate() {
        if !touched {
            let id = csv_field(&network.nodes()[v]);
            out.push_str(&format!("{id},{id},0\n"));
        }
    }
    out
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn to_dot(network: &ExchangeNetwork) -> String {
    let mut out = String::from("digraph exchange {\n");
    for node in network.nodes() {
        out.push_str(&format!("  \"{}\";\n", node.replace('"', "\\\"")));
    }
    for (i, j, w) in network.edges() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [weight={w}];\n",
            network.nodes()[i].replace('"', "\\\""),
            network.nodes()[j].replace('"', "\\\"")
        ));
    }
    out.push_str("}\n");
    out
}

fn xml_escape(value: &str) -> String {
    value
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn to_graphml(network: &ExchangeNetwork) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n");
    out.push_str("  <graph id=\"exchange\" edgedefault=\"directed\">\n");
    for node in network.nodes() {
        out.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(node)));
    }
    for (i, j, w) in network.edges() {
        out.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{w}</data></edge>\n",
            xml_escape(&network.nodes()[i]),
            xml_escape(&network.nodes()[j])
        ));
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Reads an edge-list CSV back into a network.
///
/// Zero-weight rows declare nodes without contributing weight. Lines starting
/// with `#` are ignored, so exported files with provenance headers re-import.
pub fn import_edge_list<R: Read>(reader: R) -> Result<ExchangeNetwork> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["source", "target", "weight"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Data(format!(
            "edge list header must be `source,target,weight`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut entries: Vec<(String, String, u64)> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let source = row.get(0).unwrap_or("").to_string();
        let target = row.get(1).unwrap_or("").to_string();
        if source.is_empty() || target.is_empty() {
            return Err(Error::Data(format!("edge list row {i}: empty endpoint")));
        }
        let weight: u64 = row
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Data(format!("edge list row {i}: non-integer weight")))?;
        entries.push((source, target, weight));
    }

    let mut nodes: Vec<String> = entries
        .iter()
        .flat_map(|(s, t, _)| [s.clone(), t.clone()])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    nodes.sort();
    let index: std::collections::HashMap<&String, usize> =
        nodes.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let n = nodes.len();
    let mut weights = vec![vec![0u64; n]; n];
    for (source, target, weight) in &entries {
        weights[index[source]][index[target]] += weight;
    }
    ExchangeNetwork::from_weights(nodes, weights, TimeWindow::full())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(nodes: &[&str], weights: Vec<Vec<u64>>) -> ExchangeNetwork {
        ExchangeNetwork::from_weights(
            nodes.iter().map(|s| s.to_string()).collect(),
            weights,
            TimeWindow::full(),
        )
        .unwrap()
    }

    #[test]
    fn edge_list_row_per_positive_entry() {
        let network = net(&["A", "B"], vec![vec![0, 2], vec![0, 0]]);
        let csv = export(&network, GraphFormat::EdgeListCsv);
        assert_eq!(csv, "source,target,weight\nA,B,2\n");
    }

    #[test]
    fn self_loop_appears_in_edge_list_and_dot() {
        let network = net(&["A"], vec![vec![1]]);
        let csv = export(&network, GraphFormat::EdgeListCsv);
        assert!(csv.contains("A,A,1\n"));
        let dot = export(&network, GraphFormat::Dot);
        assert!(dot.contains("\"A\" -> \"A\" [weight=1];"));
    }

    #[test]
    fn isolated_nodes_survive_the_round_trip() {
        let network = net(&["A", "B", "C"], vec![vec![0, 3, 0], vec![0, 0, 0], vec![0, 0, 0]]);
        let csv = export(&network, GraphFormat::EdgeListCsv);
        assert!(csv.contains("C,C,0\n"));
        let back = import_edge_list(csv.as_bytes()).unwrap();
        assert_eq!(back.nodes(), network.nodes());
        assert_eq!(back.weights(), network.weights());
    }

    #[test]
    fn graphml_carries_weight_as_long_key() {
        let network = net(&["A", "B"], vec![vec![0, 2], vec![1, 0]]);
        let xml = export(&network, GraphFormat::GraphMl);
        assert!(xml.contains("attr.type=\"long\""));
        assert!(xml.contains("<edge source=\"A\" target=\"B\"><data key=\"weight\">2</data></edge>"));
        assert!(xml.contains("edgedefault=\"directed\""));
    }

    #[test]
    fn unknown_format_is_a_configuration_error() {
        let err = "svg".parse::<GraphFormat>().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn import_rejects_bad_header() {
        let err = import_edge_list("from,to,w\nA,B,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn import_skips_comment_lines() {
        let csv = "source,target,weight\n# provenance: test\nA,B,1\n";
        let network = import_edge_list(csv.as_bytes()).unwrap();
        assert_eq!(network.weight_between("A", "B"), 1);
    }
}
