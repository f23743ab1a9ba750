//! Undirected networks with one source and one receiver measurement node,
//! their text format, and loop-free path sets between the two.
//!
//! Link and node indices are 0-based in the API. The topology and paths file
//! formats number links from 1 in declaration order.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};

/// Undirected network with designated source and receiver nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<String>,
    links: Vec<(usize, usize)>,
    source: usize,
    receiver: usize,
}

impl Topology {
    /// Builds a topology from node names and links given as name pairs.
    pub fn new<S: AsRef<str>>(
        nodes: &[S],
        links: &[(S, S)],
        source: &str,
        receiver: &str,
    ) -> Result<Self> {
        let mut builder = Builder::default();
        for node in nodes {
            builder.add_node(node.as_ref()).map_err(TomoError::InvalidTopology)?;
        }
        for (a, b) in links {
            builder.add_link(a.as_ref(), b.as_ref()).map_err(TomoError::InvalidTopology)?;
        }
        builder.set_source(source).map_err(TomoError::InvalidTopology)?;
        builder.set_receiver(receiver).map_err(TomoError::InvalidTopology)?;
        builder.finish().map_err(TomoError::InvalidTopology)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn node_name(&self, node: usize) -> &str {
        &self.nodes[node]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    /// Endpoints of a link as node indices, in declaration order.
    pub fn link(&self, link: usize) -> (usize, usize) {
        self.links[link]
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    /// The endpoint of `link` opposite to `node`, if `node` is on the link.
    pub fn other_end(&self, link: usize, node: usize) -> Option<usize> {
        let (a, b) = self.links[link];
        if a == node {
            Some(b)
        } else if b == node {
            Some(a)
        } else {
            None
        }
    }

    /// Parses the line-oriented topology format.
    ///
    /// ```text
    /// # comment
    /// node s
    /// node a
    /// node r
    /// link s a
    /// link a r
    /// source s
    /// receiver r
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut builder = Builder::default();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = strip_comment(raw);
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some((&keyword, args)) = tokens.split_first() else {
                continue;
            };
            let parse_err = |message: String| TomoError::Parse { line, message };
            let outcome = match (keyword, args) {
                ("node", [id]) => builder.add_node(id),
                ("link", [a, b]) => builder.add_link(a, b),
                ("source", [id]) => builder.set_source(id),
                ("receiver", [id]) => builder.set_receiver(id),
                ("node" | "source" | "receiver", _) => {
                    Err(format!("`{keyword}` expects exactly one node id"))
                }
                ("link", _) => Err("`link` expects exactly two node ids".to_string()),
                _ => Err(format!("unknown directive `{keyword}`")),
            };
            outcome.map_err(parse_err)?;
        }
        builder.finish().map_err(|message| TomoError::Parse {
            line: last_line + 1,
            message,
        })
    }

    /// Writes the topology in the format accepted by [`Topology::parse`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let _ = writeln!(out, "node {node}");
        }
        for &(a, b) in &self.links {
            let _ = writeln!(out, "link {} {}", self.nodes[a], self.nodes[b]);
        }
        let _ = writeln!(out, "source {}", self.nodes[self.source]);
        let _ = writeln!(out, "receiver {}", self.nodes[self.receiver]);
        out
    }

    /// Random connected topology: a random spanning tree plus extra links.
    ///
    /// Node `n0` is the source and the last node is the receiver.
    pub fn random_connected<R: Rng + ?Sized>(
        num_nodes: usize,
        num_links: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if num_nodes < 2 {
            return Err(TomoError::InvalidParameter("need at least 2 nodes".into()));
        }
        let max_links = num_nodes * (num_nodes - 1) / 2;
        if num_links < num_nodes - 1 || num_links > max_links {
            return Err(TomoError::InvalidParameter(format!(
                "link count {num_links} outside {}..={max_links}",
                num_nodes - 1
            )));
        }
        let names: Vec<String> = (0..num_nodes).map(|i| format!("n{i}")).collect();
        let mut present = HashSet::new();
        let mut links = Vec::with_capacity(num_links);
        let mut order: Vec<usize> = (0..num_nodes).collect();
        order.shuffle(rng);
        for i in 1..num_nodes {
            let parent = order[rng.gen_range(0..i)];
            let pair = ordered(order[i], parent);
            present.insert(pair);
            links.push(pair);
        }
        while links.len() < num_links {
            let a = rng.gen_range(0..num_nodes);
            let b = rng.gen_range(0..num_nodes);
            if a == b {
                continue;
            }
            let pair = ordered(a, b);
            if present.insert(pair) {
                links.push(pair);
            }
        }
        links.shuffle(rng);
        Ok(Topology {
            nodes: names,
            links,
            source: 0,
            receiver: num_nodes - 1,
        })
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    links: Vec<(usize, usize)>,
    pairs: HashSet<(usize, usize)>,
    source: Option<usize>,
    receiver: Option<usize>,
}

impl Builder {
    fn add_node(&mut self, id: &str) -> std::result::Result<(), String> {
        if self.index.contains_key(id) {
            return Err(format!("duplicate node `{id}`"));
        }
        self.index.insert(id.to_string(), self.nodes.len());
        self.nodes.push(id.to_string());
        Ok(())
    }

    fn lookup(&self, id: &str) -> std::result::Result<usize, String> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| format!("unknown node `{id}`"))
    }

    fn add_link(&mut self, a: &str, b: &str) -> std::result::Result<(), String> {
        let (ia, ib) = (self.lookup(a)?, self.lookup(b)?);
        if ia == ib {
            return Err(format!("self-loop link `{a}`-`{b}`"));
        }
        if !self.pairs.insert(ordered(ia, ib)) {
            return Err(format!("duplicate link `{a}`-`{b}`"));
        }
        self.links.push((ia, ib));
        Ok(())
    }

    fn set_source(&mut self, id: &str) -> std::result::Result<(), String> {
        if self.source.is_some() {
            return Err("source declared twice".into());
        }
        self.source = Some(self.lookup(id)?);
        Ok(())
    }

    fn set_receiver(&mut self, id: &str) -> std::result::Result<(), String> {
        if self.receiver.is_some() {
            return Err("receiver declared twice".into());
        }
        self.receiver = Some(self.lookup(id)?);
        Ok(())
    }

    fn finish(self) -> std::result::Result<Topology, String> {
        let source = self.source.ok_or("missing `source` directive")?;
        let receiver = self.receiver.ok_or("missing `receiver` directive")?;
        if source == receiver {
            return Err("source and receiver must differ".into());
        }
        Ok(Topology {
            nodes: self.nodes,
            links: self.links,
            source,
            receiver,
        })
    }
}

/// A simple source-to-receiver path, stored as the ordered link indices walked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    links: Vec<usize>,
}

impl Path {
    /// Validates `links` as a simple walk from source to receiver.
    pub fn new(topology: &Topology, links: Vec<usize>) -> Result<Self> {
        node_sequence(topology, &links)?;
        Ok(Path { links })
    }

    pub fn links(&self) -> &[usize] {
        &self.links
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// Node indices visited, from source to receiver.
    pub fn nodes(&self, topology: &Topology) -> Vec<usize> {
        node_sequence(topology, &self.links).expect("path validated at construction")
    }

    fn link_set(&self) -> BTreeSet<usize> {
        self.links.iter().copied().collect()
    }
}

fn node_sequence(topology: &Topology, links: &[usize]) -> Result<Vec<usize>> {
    if links.is_empty() {
        return Err(TomoError::InvalidPath("empty path".into()));
    }
    let mut current = topology.source();
    let mut nodes = vec![current];
    let mut seen = HashSet::from([current]);
    for &link in links {
        if link >= topology.num_links() {
            return Err(TomoError::InvalidPath(format!("unknown link e{}", link + 1)));
        }
        let next = topology.other_end(link, current).ok_or_else(|| {
            TomoError::InvalidPath(format!(
                "link e{} does not touch node `{}`",
                link + 1,
                topology.node_name(current)
            ))
        })?;
        if !seen.insert(next) {
            return Err(TomoError::InvalidPath(format!(
                "node `{}` visited twice",
                topology.node_name(next)
            )));
        }
        nodes.push(next);
        current = next;
    }
    if current != topology.receiver() {
        return Err(TomoError::InvalidPath(format!(
            "path ends at `{}`, not at the receiver",
            topology.node_name(current)
        )));
    }
    Ok(nodes)
}

/// Ordered set of at least two distinct paths over one topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    topology: Arc<Topology>,
    paths: Vec<Path>,
}

impl PathSet {
    pub fn new(topology: Arc<Topology>, paths: Vec<Path>) -> Result<Self> {
        if paths.len() < 2 {
            return Err(TomoError::InsufficientPaths { found: paths.len() });
        }
        let mut seen: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        for (i, path) in paths.iter().enumerate() {
            node_sequence(&topology, path.links())?;
            if let Some(first) = seen.insert(path.link_set(), i) {
                return Err(TomoError::DuplicateRows {
                    first: first + 1,
                    second: i + 1,
                });
            }
        }
        Ok(PathSet { topology, paths })
    }

    /// Builds a path set from raw link-index sequences.
    pub fn from_links(topology: Arc<Topology>, paths: Vec<Vec<usize>>) -> Result<Self> {
        let paths = paths
            .into_iter()
            .map(|links| Path::new(&topology, links))
            .collect::<Result<Vec<_>>>()?;
        Self::new(topology, paths)
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// The first `count` paths.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        if count > self.paths.len() {
            return Err(TomoError::SelectionTooLarge {
                requested: count,
                available: self.paths.len(),
            });
        }
        Self::new(self.topology.clone(), self.paths[..count].to_vec())
    }

    /// True when `self` is a leading subsequence of `other` on the same topology.
    pub fn is_prefix_of(&self, other: &PathSet) -> bool {
        self.topology == other.topology
            && self.len() <= other.len()
            && self.paths.iter().zip(&other.paths).all(|(a, b)| a == b)
    }

    /// Parses a paths file (`path <link> <link> ...`, 1-based link indices).
    pub fn parse(topology: Arc<Topology>, text: &str) -> Result<Self> {
        let mut paths = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let tokens: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            let Some((&keyword, args)) = tokens.split_first() else {
                continue;
            };
            let err = |message: String| TomoError::Parse { line, message };
            if keyword != "path" {
                return Err(err(format!("unknown directive `{keyword}`")));
            }
            let links = args
                .iter()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n - 1),
                    _ => Err(err(format!("invalid link index `{tok}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let path = Path::new(&topology, links).map_err(|e| err(e.to_string()))?;
            paths.push(path);
        }
        Self::new(topology, paths)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for path in &self.paths {
            out.push_str("path");
            for link in path.links() {
                let _ = write!(out, " {}", link + 1);
            }
            out.push('\n');
        }
        out
    }

    /// Drops links that no path uses and renumbers the rest in their original
    /// relative order.
    pub fn restrict_to_covered_links(&self) -> Result<PathSet> {
        let used: BTreeSet<usize> = self.paths.iter().flat_map(|p| p.links().iter().copied()).collect();
        let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let topo = &self.topology;
        let topology = Topology {
            nodes: topo.nodes.clone(),
            links: used.iter().map(|&l| topo.links[l]).collect(),
            source: topo.source,
            receiver: topo.receiver,
        };
        let paths = self
            .paths
            .iter()
            .map(|p| Path {
                links: p.links().iter().map(|l| remap[l]).collect(),
            })
            .collect();
        PathSet::new(Arc::new(topology), paths)
    }
}

/// Enumerates simple source-to-receiver paths in lexicographic order of their
/// link-index sequences, keeping at most `max_paths` paths of at most
/// `max_hops` links. `max_hops = None` means `|V| - 1`.
pub fn enumerate_simple_paths(
    topology: Arc<Topology>,
    max_paths: usize,
    max_hops: Option<usize>,
) -> Result<PathSet> {
    if max_paths < 2 {
        return Err(TomoError::InvalidParameter("max_paths must be at least 2".into()));
    }
    let max_hops = max_hops.unwrap_or(topology.num_nodes().saturating_sub(1));
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); topology.num_nodes()];
    for (link, &(a, b)) in topology.links().iter().enumerate() {
        adjacency[a].push((link, b));
        adjacency[b].push((link, a));
    }
    for neighbours in &mut adjacency {
        neighbours.sort_unstable();
    }

    let mut found = Vec::new();
    let mut visited = vec![false; topology.num_nodes()];
    visited[topology.source()] = true;
    // Explicit stack of (node, next neighbour position) frames.
    let mut stack: Vec<(usize, usize)> = vec![(topology.source(), 0)];
    let mut links: Vec<usize> = Vec::new();
    while let Some(frame) = stack.last_mut() {
        let (node, pos) = *frame;
        if pos >= adjacency[node].len() || found.len() >= max_paths {
            stack.pop();
            visited[node] = false;
            links.pop();
            continue;
        }
        frame.1 += 1;
        let (link, next) = adjacency[node][pos];
        if visited[next] {
            continue;
        }
        if next == topology.receiver() {
            let mut path = links.clone();
            path.push(link);
            found.push(Path { links: path });
            continue;
        }
        if links.len() + 1 < max_hops {
            visited[next] = true;
            links.push(link);
            stack.push((next, 0));
        }
    }
    PathSet::new(topology, found)
}

/// How [`select_paths`] chooses rows for a routing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionStrategy {
    /// Fewest hops first, ties by candidate order.
    ShortestFirst,
    /// Greedy maximisation of distinct links covered; ties by fewer hops,
    /// then candidate order.
    CoverageGreedy,
    /// Seeded uniform shuffle of the candidates.
    Random,
}

impl std::str::FromStr for SelectionStrategy {
    type Err = TomoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest-first" | "shortest" => Ok(Self::ShortestFirst),
            "coverage-greedy" | "coverage" => Ok(Self::CoverageGreedy),
            "random" => Ok(Self::Random),
            other => Err(TomoError::InvalidParameter(format!(
                "unknown selection strategy `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ShortestFirst => "shortest-first",
            Self::CoverageGreedy => "coverage-greedy",
            Self::Random => "random",
        })
    }
}

/// Picks `count` paths from `candidates`. The output is in selection order, so
/// selections of increasing size with the same strategy and seed are nested.
pub fn select_paths(
    candidates: &PathSet,
    count: usize,
    strategy: SelectionStrategy,
    seed: u64,
) -> Result<PathSet> {
    let n = candidates.len();
    if count > n {
        return Err(TomoError::SelectionTooLarge {
            requested: count,
            available: n,
        });
    }
    let paths = candidates.paths();
    let order: Vec<usize> = match strategy {
        SelectionStrategy::ShortestFirst => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by_key(|&i| (paths[i].hops(), i));
            idx.truncate(count);
            idx
        }
        SelectionStrategy::CoverageGreedy => {
            let mut covered = HashSet::new();
            let mut taken = vec![false; n];
            let mut idx = Vec::with_capacity(count);
            for _ in 0..count {
                let best = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by_key(|&i| {
                        let gain = paths[i].links().iter().filter(|l| !covered.contains(*l)).count();
                        (gain, std::cmp::Reverse(paths[i].hops()), std::cmp::Reverse(i))
                    })
                    .expect("count <= candidates");
                taken[best] = true;
                covered.extend(paths[best].links().iter().copied());
                idx.push(best);
            }
            idx
        }
        SelectionStrategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(count);
            idx
        }
    };
    PathSet::new(
        candidates.topology().clone(),
        order.into_iter().map(|i| paths[i].clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const T1: &str = "\
node s
node a
node b
node c
node r
link s a
link a r
link s b
link b r
link a b
link s c
link c r
link a c
source s
receiver r
";

    fn t1() -> Arc<Topology> {
        Arc::new(Topology::parse(T1).unwrap())
    }

    fn seqs(ps: &PathSet) -> Vec<Vec<usize>> {
        ps.paths().iter().map(|p| p.links().iter().map(|l| l + 1).collect()).collect()
    }

    #[test]
    fn parses_smallest_network() {
        let t = Topology::parse("node s\nnode a\nnode r\nlink s a\nlink a r\nsource s\nreceiver r\n").unwrap();
        assert_eq!(t.num_links(), 2);
        assert_eq!(t.node_name(t.source()), "s");
    }

    #[test]
    fn parses_t1_and_round_trips() {
        let t = Topology::parse(T1).unwrap();
        assert_eq!(t.num_links(), 8);
        assert_eq!(t.num_nodes(), 5);
        assert_eq!(Topology::parse(&t.serialize()).unwrap(), t);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let t = Topology::parse("# net\nnode s # src\n\nnode r\nlink s r\nsource s\nreceiver r").unwrap();
        assert_eq!(t.num_links(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Topology::parse("node s\nnode r\nlink s s\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { line: 3, ref message } if message.contains("self-loop")));

        let err = Topology::parse("node s\nnode r\nlink s x\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { line: 3, ref message } if message.contains("unknown node")));

        let err = Topology::parse("node s\nnode r\nlink s r\nlink r s\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { line: 4, ref message } if message.contains("duplicate link")));

        let err = Topology::parse("node s\nnode r\nlink s r\nsource s\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { line: 5, ref message } if message.contains("receiver")));

        let err = Topology::parse("node s\nbogus\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { line: 2, .. }));

        let err = Topology::parse("node s\nnode r\nsource s\nreceiver s\n").unwrap_err();
        assert!(matches!(err, TomoError::Parse { ref message, .. } if message.contains("differ")));
    }

    #[test]
    fn enumerates_t1_up_to_three_hops() {
        let ps = enumerate_simple_paths(t1(), 100, Some(3)).unwrap();
        assert_eq!(
            seqs(&ps),
            vec![
                vec![1, 2],
                vec![1, 5, 4],
                vec![1, 8, 7],
                vec![3, 4],
                vec![3, 5, 2],
                vec![6, 7],
                vec![6, 8, 2],
            ]
        );
    }

    #[test]
    fn enumerates_t1_two_hop_paths() {
        let ps = enumerate_simple_paths(t1(), 100, Some(2)).unwrap();
        assert_eq!(seqs(&ps), vec![vec![1, 2], vec![3, 4], vec![6, 7]]);
    }

    #[test]
    fn default_hop_limit_finds_every_simple_path() {
        let ps = enumerate_simple_paths(t1(), 100, None).unwrap();
        assert_eq!(ps.len(), 9);
        let capped = enumerate_simple_paths(t1(), 4, None).unwrap();
        assert_eq!(seqs(&capped), seqs(&ps)[..4].to_vec());
    }

    #[test]
    fn single_link_network_has_insufficient_paths() {
        let t = Arc::new(Topology::parse("node s\nnode r\nlink s r\nsource s\nreceiver r\n").unwrap());
        assert_eq!(
            enumerate_simple_paths(t, 10, None).unwrap_err(),
            TomoError::InsufficientPaths { found: 1 }
        );
    }

    #[test]
    fn path_validation() {
        let t = t1();
        assert!(Path::new(&t, vec![0, 1]).is_ok());
        assert!(Path::new(&t, vec![0]).is_err(), "ends at a");
        assert!(Path::new(&t, vec![1, 0]).is_err(), "does not start at s");
        assert!(Path::new(&t, vec![0, 4, 2, 5, 7, 1]).is_err(), "revisits s");
        assert!(Path::new(&t, vec![]).is_err());
        assert_eq!(Path::new(&t, vec![0, 4, 3]).unwrap().nodes(&t), vec![0, 1, 2, 4]);
    }

    #[test]
    fn path_set_rejects_duplicates_and_singletons() {
        let t = t1();
        assert!(matches!(
            PathSet::from_links(t.clone(), vec![vec![0, 1], vec![0, 1]]),
            Err(TomoError::DuplicateRows { first: 1, second: 2 })
        ));
        assert!(matches!(
            PathSet::from_links(t, vec![vec![0, 1]]),
            Err(TomoError::InsufficientPaths { found: 1 })
        ));
    }

    fn t1_six() -> PathSet {
        let text = "path 1 2\npath 3 4\npath 1 5 4\npath 6 7\npath 3 5 2\npath 1 8 7\n";
        PathSet::parse(t1(), text).unwrap()
    }

    #[test]
    fn paths_file_round_trips() {
        let ps = t1_six();
        assert_eq!(ps.len(), 6);
        assert_eq!(PathSet::parse(ps.topology().clone(), &ps.serialize()).unwrap(), ps);
        assert!(matches!(
            PathSet::parse(t1(), "path 1 2\npath 1 9\n"),
            Err(TomoError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn select_everything() {
        let ps = t1_six();
        for strategy in [
            SelectionStrategy::ShortestFirst,
            SelectionStrategy::CoverageGreedy,
            SelectionStrategy::Random,
        ] {
            let sel = select_paths(&ps, 6, strategy, 7).unwrap();
            let mut got = seqs(&sel);
            got.sort();
            let mut want = seqs(&ps);
            want.sort();
            assert_eq!(got, want, "{strategy}");
        }
    }

    #[test]
    fn select_shortest_three() {
        let sel = select_paths(&t1_six(), 3, SelectionStrategy::ShortestFirst, 0).unwrap();
        assert_eq!(seqs(&sel), vec![vec![1, 2], vec![3, 4], vec![6, 7]]);
    }

    #[test]
    fn coverage_greedy_prefers_new_links() {
        let sel = select_paths(&t1_six(), 4, SelectionStrategy::CoverageGreedy, 0).unwrap();
        // 3-hop paths add three links; ties go to fewer hops, then lower index.
        assert_eq!(seqs(&sel), vec![vec![1, 5, 4], vec![6, 7], vec![3, 5, 2], vec![1, 8, 7]]);
    }

    #[test]
    fn selecting_too_many_fails() {
        assert_eq!(
            select_paths(&t1_six(), 7, SelectionStrategy::Random, 0).unwrap_err(),
            TomoError::SelectionTooLarge { requested: 7, available: 6 }
        );
    }

    #[test]
    fn random_selection_is_seeded_and_nested() {
        let all = enumerate_simple_paths(t1(), 100, None).unwrap();
        let a = select_paths(&all, 5, SelectionStrategy::Random, 11).unwrap();
        let b = select_paths(&all, 5, SelectionStrategy::Random, 11).unwrap();
        let small = select_paths(&all, 3, SelectionStrategy::Random, 11).unwrap();
        assert_eq!(a, b);
        assert!(small.is_prefix_of(&a));
    }

    #[test]
    fn restriction_drops_unused_links() {
        let sel = select_paths(&t1_six(), 3, SelectionStrategy::ShortestFirst, 0).unwrap();
        let restricted = sel.restrict_to_covered_links().unwrap();
        assert_eq!(restricted.topology().num_links(), 6);
        assert_eq!(seqs(&restricted), vec![vec![1, 2], vec![3, 4], vec![5, 6]]);
    }
}
