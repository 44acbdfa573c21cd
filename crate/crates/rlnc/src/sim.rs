//! Deterministic time-slotted network simulator.
//!
//! Nodes are sources, intermediates or destinations joined by directed links
//! with a per-slot capacity and an i.i.d. loss probability. Each slot every
//! node prepares its outgoing packets from the state it held at the start of
//! the slot and broadcasts each prepared packet on all of its outgoing links;
//! a packet received in slot `t` can be forwarded in slot `t + 1`.
//!
//! With coding on, sources emit fresh random linear combinations of the
//! originals they hold, intermediates re-encode everything they have heard so
//! far without decoding it, and destinations run the incremental
//! [`Decoder`]. With coding off everything is plain
//! store-and-forward: packets carry unit encoding vectors, intermediates
//! serve their per-link queues round robin, and destinations just collect
//! distinct originals. Runs are bit-for-bit reproducible for a fixed seed.
//!
//! The classic topologies are built in: the two-source butterfly whose shared
//! relay link is the multicast bottleneck, the three-node relay chain, and a
//! single point-to-point link.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{self, CodecError, CodedPacket, Decoder, GenerationParams, ReceiveStatus, SourcePacket};
use crate::galois::{Field, Symbol, TableMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("link endpoint {0} is not a node")]
    UnknownNode(usize),
    #[error("loss probability {0} must be within [0, 1]")]
    InvalidLoss(f64),
    #[error("link capacity must be at least 1")]
    ZeroCapacity,
    #[error("scenario config line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Intermediate,
    Destination,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Source => "source",
            Role::Intermediate => "intermediate",
            Role::Destination => "destination",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    /// Packets the link moves per time slot.
    pub capacity: u32,
    /// Probability that any one packet on this link is dropped.
    pub loss: f64,
}

/// A directed graph of nodes and lossy links. General graphs are accepted;
/// the simulation only requires that destinations be reachable to complete.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl Topology {
    pub fn new() -> Self {
        Topology::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>, role: Role) -> usize {
        self.nodes.push(Node { name: name.into(), role });
        self.nodes.len() - 1
    }

    pub fn add_link(&mut self, from: usize, to: usize, capacity: u32, loss: f64) -> Result<usize, SimError> {
        if from >= self.nodes.len() {
            return Err(SimError::UnknownNode(from));
        }
        if to >= self.nodes.len() {
            return Err(SimError::UnknownNode(to));
        }
        if capacity == 0 {
            return Err(SimError::ZeroCapacity);
        }
        if !(0.0..=1.0).contains(&loss) {
            return Err(SimError::InvalidLoss(loss));
        }
        self.links.push(Link { from, to, capacity, loss });
        Ok(self.links.len() - 1)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn sources(&self) -> Vec<usize> {
        self.by_role(Role::Source)
    }

    pub fn destinations(&self) -> Vec<usize> {
        self.by_role(Role::Destination)
    }

    fn by_role(&self, role: Role) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| node.role == role)
            .map(|(index, _)| index)
            .collect()
    }

    /// Destinations that no source can reach. Such nodes are reported in the
    /// run output rather than treated as an error.
    pub fn unreachable_destinations(&self) -> Vec<usize> {
        let mut visited = vec![false; self.nodes.len()];
        let mut frontier: VecDeque<usize> = self.sources().into();
        for &s in &frontier {
            visited[s] = true;
        }
        while let Some(node) = frontier.pop_front() {
            for link in &self.links {
                if link.from == node && !visited[link.to] {
                    visited[link.to] = true;
                    frontier.push_back(link.to);
                }
            }
        }
        self.destinations().into_iter().filter(|&d| !visited[d]).collect()
    }

    /// Sets the same loss probability on every link.
    pub fn with_uniform_loss(mut self, loss: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(SimError::InvalidLoss(loss));
        }
        for link in &mut self.links {
            link.loss = loss;
        }
        Ok(self)
    }

    /// The two-source butterfly: S1 and S2 each reach "their" destination
    /// directly and share the relay N, whose single outgoing link to the hub
    /// T is the bottleneck; T fans out to both destinations.
    pub fn butterfly() -> Topology {
        let mut t = Topology::new();
        let s1 = t.add_node("S1", Role::Source);
        let s2 = t.add_node("S2", Role::Source);
        let n = t.add_node("N", Role::Intermediate);
        let hub = t.add_node("T", Role::Intermediate);
        let d1 = t.add_node("D1", Role::Destination);
        let d2 = t.add_node("D2", Role::Destination);
        t.add_link(s1, d1, 1, 0.0).unwrap();
        t.add_link(s1, n, 1, 0.0).unwrap();
        t.add_link(s2, d2, 1, 0.0).unwrap();
        t.add_link(s2, n, 1, 0.0).unwrap();
        t.add_link(n, hub, 1, 0.0).unwrap();
        t.add_link(hub, d1, 1, 0.0).unwrap();
        t.add_link(hub, d2, 1, 0.0).unwrap();
        t
    }

    /// The three-node relay chain: S broadcasts to the intermediate A and the
    /// destination D; A forwards re-encoded packets to D.
    pub fn relay() -> Topology {
        let mut t = Topology::new();
        let s = t.add_node("S", Role::Source);
        let a = t.add_node("A", Role::Intermediate);
        let d = t.add_node("D", Role::Destination);
        t.add_link(s, a, 1, 0.0).unwrap();
        t.add_link(s, d, 1, 0.0).unwrap();
        t.add_link(a, d, 1, 0.0).unwrap();
        t
    }

    /// A single direct link from one source to one destination.
    pub fn point_to_point() -> Topology {
        let mut t = Topology::new();
        let s = t.add_node("S", Role::Source);
        let d = t.add_node("D", Role::Destination);
        t.add_link(s, d, 1, 0.0).unwrap();
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coding {
    On,
    Off,
}

impl FromStr for Coding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on" => Ok(Coding::On),
            "off" => Ok(Coding::Off),
            other => Err(format!("coding must be 'on' or 'off', got '{other}'")),
        }
    }
}

impl fmt::Display for Coding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == Coding::On { "on" } else { "off" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Butterfly,
    Relay,
    Point,
}

impl Scenario {
    pub fn topology(&self) -> Topology {
        match self {
            Scenario::Butterfly => Topology::butterfly(),
            Scenario::Relay => Topology::relay(),
            Scenario::Point => Topology::point_to_point(),
        }
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "butterfly" => Ok(Scenario::Butterfly),
            "relay" => Ok(Scenario::Relay),
            "point" => Ok(Scenario::Point),
            other => Err(format!("unknown scenario '{other}'; expected butterfly, relay or point")),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Butterfly => "butterfly",
            Scenario::Relay => "relay",
            Scenario::Point => "point",
        })
    }
}

/// Everything one run needs besides the topology.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub field: Field,
    /// Generation size `n`, split contiguously across the sources.
    pub packet_count: usize,
    pub coding: Coding,
    /// Number of time slots to simulate.
    pub slots: u32,
    pub seed: u64,
    /// Packets each source generates over the whole run (broadcast copies on
    /// multiple links count once).
    pub redundancy: u32,
    /// Byte length of each original payload.
    pub payload_bytes: usize,
}

/// Per-destination accounting for one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotStats {
    /// Packets that arrived (survived loss) this slot.
    pub delivered: u32,
    /// Packets that were new: rank-increasing under coding, first copies of
    /// an original otherwise.
    pub innovative: u32,
    pub redundant: u32,
    /// Decoder rank, or distinct originals collected, after this slot.
    pub rank: usize,
    /// Originals recoverable after this slot.
    pub decodable: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DestinationReport {
    pub node: String,
    pub reachable: bool,
    /// First slot at which all `n` originals were recoverable.
    pub completion_slot: Option<u32>,
    pub innovative: u32,
    pub redundant: u32,
    /// Store-and-forward packets whose encoding vector was not a unit vector.
    /// Always zero: uncoded runs never combine packets.
    pub non_unit_packets: u32,
    pub final_rank: usize,
    pub per_slot: Vec<SlotStats>,
    /// The recoverable originals at the end of the run, by index.
    pub decoded: Vec<(usize, Vec<Symbol>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeActivity {
    pub node: String,
    pub role: Role,
    /// Per-link transmissions attempted (before loss).
    pub packets_sent: u64,
}

/// The full outcome of a run. Reports from identical configs and seeds are
/// identical, which the tests rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub field_bits: u32,
    pub coding: Coding,
    pub packet_count: usize,
    pub slots: u32,
    /// The source payloads the run generated, in generation order.
    pub originals: Vec<Vec<Symbol>>,
    pub destinations: Vec<DestinationReport>,
    pub activity: Vec<NodeActivity>,
    /// Field multiplications performed anywhere in the run. Zero when coding
    /// is off.
    pub field_multiplications: u64,
}

impl SimReport {
    /// One CSV record per slot with the per-destination counters, for
    /// plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot");
        for dest in &self.destinations {
            for metric in ["delivered", "innovative", "redundant", "rank", "decodable"] {
                out.push_str(&format!(",{}_{}", metric, dest.node));
            }
        }
        out.push('\n');
        for slot in 0..self.slots as usize {
            out.push_str(&format!("{}", slot + 1));
            for dest in &self.destinations {
                let stats = &dest.per_slot[slot];
                out.push_str(&format!(
                    ",{},{},{},{},{}",
                    stats.delivered, stats.innovative, stats.redundant, stats.rank, stats.decodable
                ));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "coding={} field=GF(2^{}) packets={} slots={}",
            self.coding, self.field_bits, self.packet_count, self.slots
        )?;
        for activity in &self.activity {
            writeln!(
                f,
                "node {} role={} sent={}",
                activity.node, activity.role, activity.packets_sent
            )?;
        }
        for dest in &self.destinations {
            write!(
                f,
                "destination {} rank={}/{} innovative={} redundant={} decodable={}",
                dest.node,
                dest.final_rank,
                self.packet_count,
                dest.innovative,
                dest.redundant,
                dest.decoded.len()
            )?;
            match dest.completion_slot {
                Some(slot) => write!(f, " complete_at={slot}")?,
                None => write!(f, " complete_at=never")?,
            }
            if !dest.reachable {
                write!(f, " unreachable")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "field_multiplications={}", self.field_multiplications)
    }
}

struct SourceState {
    /// Generation indices this source owns.
    locals: Vec<usize>,
    /// Its copies of those originals.
    packets: Vec<SourcePacket>,
    generated: u32,
    next_uncoded: usize,
}

struct RelayState {
    /// Incoming link ids, in link order; one FIFO per link for uncoded
    /// forwarding, served round robin.
    in_links: Vec<usize>,
    fifos: Vec<VecDeque<CodedPacket>>,
    next_fifo: usize,
    /// Everything heard so far, re-encoded as a whole on each transmission.
    knowledge: Vec<CodedPacket>,
}

struct DestState {
    decoder: Option<Decoder>,
    collected: BTreeMap<usize, Vec<Symbol>>,
    completion_slot: Option<u32>,
    innovative: u32,
    redundant: u32,
    non_unit: u32,
    per_slot: Vec<SlotStats>,
}

enum NodeState {
    Source(SourceState),
    Relay(RelayState),
    Dest(DestState),
}

const MAX_RECODE_ATTEMPTS: usize = 16;

/// Local coefficients for a relay, uniform over the nonzero elements so the
/// combination always leans on the newest packet in the queue.
fn random_nonzero_coefficients<R: Rng + ?Sized>(count: usize, field: &Field, rng: &mut R) -> Vec<Symbol> {
    (0..count).map(|_| rng.gen_range(1..=field.max_symbol())).collect()
}

/// Index of the 1 in a unit encoding vector, if the vector is one.
fn unit_index(packet: &CodedPacket) -> Option<usize> {
    let mut index = None;
    for (i, &e) in packet.encoding_vector.iter().enumerate() {
        if e != 0 {
            if e != 1 || index.is_some() {
                return None;
            }
            index = Some(i);
        }
    }
    index
}

/// Runs `config` over `topology` and reports what every destination saw.
pub fn run(topology: &Topology, config: &SimConfig) -> Result<SimReport, SimError> {
    if config.packet_count == 0 {
        return Err(SimError::InvalidConfig("generation needs at least one packet".into()));
    }
    if config.slots == 0 {
        return Err(SimError::InvalidConfig("need at least one time slot".into()));
    }
    if config.payload_bytes == 0 {
        return Err(SimError::InvalidConfig("payloads must be at least one byte".into()));
    }
    let source_nodes = topology.sources();
    if source_nodes.is_empty() {
        return Err(SimError::InvalidConfig("topology has no source node".into()));
    }

    let multiplications = Arc::new(AtomicU64::new(0));
    let mut field = config.field.clone();
    field.attach_mul_counter(multiplications.clone());
    let n = config.packet_count;
    let params = GenerationParams::for_packet_bytes(n, config.payload_bytes, field.clone())
        .expect("packet count and payload bytes are validated above");

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // The generation: n random payloads, drawn before any traffic so the
    // originals only depend on the seed.
    let originals: Vec<SourcePacket> = (0..n)
        .map(|_| {
            let mut bytes = vec![0u8; config.payload_bytes];
            rng.fill(bytes.as_mut_slice());
            codec::symbolize(&bytes, &params).expect("payload fits by construction")
        })
        .collect();

    // Split the generation contiguously across the sources in node order.
    let mut states: Vec<NodeState> = Vec::with_capacity(topology.nodes.len());
    let mut next_index = 0;
    let base = n / source_nodes.len();
    let extra = n % source_nodes.len();
    let mut source_seen = 0;
    let unreachable = topology.unreachable_destinations();
    for (index, node) in topology.nodes.iter().enumerate() {
        states.push(match node.role {
            Role::Source => {
                let count = base + usize::from(source_seen < extra);
                source_seen += 1;
                let locals: Vec<usize> = (next_index..next_index + count).collect();
                next_index += count;
                NodeState::Source(SourceState {
                    packets: locals.iter().map(|&i| originals[i].clone()).collect(),
                    locals,
                    generated: 0,
                    next_uncoded: 0,
                })
            }
            Role::Intermediate => {
                let in_links: Vec<usize> = topology
                    .links
                    .iter()
                    .enumerate()
                    .filter(|(_, link)| link.to == index)
                    .map(|(link_id, _)| link_id)
                    .collect();
                NodeState::Relay(RelayState {
                    fifos: vec![VecDeque::new(); in_links.len()],
                    in_links,
                    next_fifo: 0,
                    knowledge: Vec::new(),
                })
            }
            Role::Destination => NodeState::Dest(DestState {
                decoder: (config.coding == Coding::On).then(|| Decoder::new(params.clone())),
                collected: BTreeMap::new(),
                completion_slot: None,
                innovative: 0,
                redundant: 0,
                non_unit: 0,
                per_slot: Vec::with_capacity(config.slots as usize),
            }),
        });
    }

    let out_links: Vec<Vec<usize>> = (0..topology.nodes.len())
        .map(|node| {
            topology
                .links
                .iter()
                .enumerate()
                .filter(|(_, link)| link.from == node)
                .map(|(link_id, _)| link_id)
                .collect()
        })
        .collect();

    let mut sent = vec![0u64; topology.nodes.len()];
    let mut inboxes: Vec<Vec<(usize, CodedPacket)>> = vec![Vec::new(); topology.nodes.len()];

    for slot in 1..=config.slots {
        // Phase 1: every node decides its transmissions from start-of-slot
        // state. A prepared packet is broadcast on every outgoing link with
        // capacity to spare.
        let mut staged: Vec<(usize, CodedPacket)> = Vec::new();
        for node in 0..topology.nodes.len() {
            let outs = &out_links[node];
            if outs.is_empty() {
                continue;
            }
            let rounds = outs.iter().map(|&l| topology.links[l].capacity).max().unwrap_or(0);
            for round in 0..rounds {
                let packet = match &mut states[node] {
                    NodeState::Source(source) => {
                        prepare_source_packet(source, &originals, config, &field, n, &mut rng)
                    }
                    NodeState::Relay(relay) => prepare_relay_packet(relay, config, &field, &mut rng),
                    NodeState::Dest(_) => None,
                };
                let Some(packet) = packet else { break };
                for &link_id in outs {
                    if topology.links[link_id].capacity > round {
                        staged.push((link_id, packet.clone()));
                        sent[node] += 1;
                    }
                }
            }
        }

        // Phase 2: move packets across their links, dropping lost ones.
        for (link_id, packet) in staged {
            let link = &topology.links[link_id];
            if link.loss > 0.0 && rng.gen_bool(link.loss) {
                continue;
            }
            inboxes[link.to].push((link_id, packet));
        }

        // Phase 3: consume arrivals. Relays queue them for the next slot;
        // destinations account for them now.
        for node in 0..topology.nodes.len() {
            let arrivals = std::mem::take(&mut inboxes[node]);
            match &mut states[node] {
                NodeState::Relay(relay) => {
                    for (link_id, packet) in arrivals {
                        if config.coding == Coding::On {
                            relay.knowledge.push(packet);
                        } else {
                            let queue = relay
                                .in_links
                                .iter()
                                .position(|&l| l == link_id)
                                .expect("arrival came over an incoming link");
                            relay.fifos[queue].push_back(packet);
                        }
                    }
                }
                NodeState::Dest(dest) => {
                    let delivered = arrivals.len() as u32;
                    let mut innovative = 0;
                    let mut redundant = 0;
                    for (_, packet) in arrivals {
                        match &mut dest.decoder {
                            Some(decoder) => {
                                match decoder.receive(&packet).expect("packet matches the generation") {
                                    ReceiveStatus::Innovative => innovative += 1,
                                    ReceiveStatus::Redundant => redundant += 1,
                                }
                            }
                            None => match unit_index(&packet) {
                                Some(index) => {
                                    if dest.collected.insert(index, packet.payload).is_none() {
                                        innovative += 1;
                                    } else {
                                        redundant += 1;
                                    }
                                }
                                None => {
                                    dest.non_unit += 1;
                                    redundant += 1;
                                }
                            },
                        }
                    }
                    dest.innovative += innovative;
                    dest.redundant += redundant;
                    let (rank, decodable) = match &dest.decoder {
                        Some(decoder) => (decoder.rank(), decoder.decoded_packets().len()),
                        None => (dest.collected.len(), dest.collected.len()),
                    };
                    if decodable == n && dest.completion_slot.is_none() {
                        dest.completion_slot = Some(slot);
                    }
                    dest.per_slot.push(SlotStats { delivered, innovative, redundant, rank, decodable });
                }
                NodeState::Source(_) => {} // sources ignore arrivals
            }
        }
    }

    // Assemble the report in node order.
    let mut destinations = Vec::new();
    let mut activity = Vec::new();
    for (index, node) in topology.nodes.iter().enumerate() {
        activity.push(NodeActivity {
            node: node.name.clone(),
            role: node.role,
            packets_sent: sent[index],
        });
        if let NodeState::Dest(dest) = &states[index] {
            let (final_rank, decoded) = match &dest.decoder {
                Some(decoder) => (
                    decoder.rank(),
                    decoder
                        .decoded_packets()
                        .into_iter()
                        .map(|(i, packet)| (i, packet.payload))
                        .collect(),
                ),
                None => (
                    dest.collected.len(),
                    dest.collected.iter().map(|(&i, payload)| (i, payload.clone())).collect(),
                ),
            };
            destinations.push(DestinationReport {
                node: node.name.clone(),
                reachable: !unreachable.contains(&index),
                completion_slot: dest.completion_slot,
                innovative: dest.innovative,
                redundant: dest.redundant,
                non_unit_packets: dest.non_unit,
                final_rank,
                per_slot: dest.per_slot.clone(),
                decoded,
            });
        }
    }

    Ok(SimReport {
        field_bits: config.field.bits(),
        coding: config.coding,
        packet_count: n,
        slots: config.slots,
        originals: originals.into_iter().map(|packet| packet.payload).collect(),
        destinations,
        activity,
        field_multiplications: multiplications.load(Ordering::Relaxed),
    })
}

fn prepare_source_packet(
    source: &mut SourceState,
    originals: &[SourcePacket],
    config: &SimConfig,
    field: &Field,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<CodedPacket> {
    if source.locals.is_empty() || source.generated >= config.redundancy {
        return None;
    }
    let packet = match config.coding {
        Coding::On => {
            let weights = codec::random_coefficients(source.locals.len(), field, rng);
            let combined = codec::encode(&source.packets, &weights, field)
                .expect("source packets share one shape");
            // Widen the local coefficients to the full generation.
            let mut encoding_vector = vec![0; n];
            for (&weight, &global) in weights.iter().zip(&source.locals) {
                encoding_vector[global] = weight;
            }
            CodedPacket { encoding_vector, payload: combined.payload }
        }
        Coding::Off => {
            let global = source.locals[source.next_uncoded % source.locals.len()];
            source.next_uncoded += 1;
            let mut encoding_vector = vec![0; n];
            encoding_vector[global] = 1;
            CodedPacket { encoding_vector, payload: originals[global].payload.clone() }
        }
    };
    source.generated += 1;
    Some(packet)
}

fn prepare_relay_packet(
    relay: &mut RelayState,
    config: &SimConfig,
    field: &Field,
    rng: &mut ChaCha8Rng,
) -> Option<CodedPacket> {
    match config.coding {
        Coding::On => {
            if relay.knowledge.is_empty() {
                return None;
            }
            for _ in 0..MAX_RECODE_ATTEMPTS {
                let weights = random_nonzero_coefficients(relay.knowledge.len(), field, rng);
                match codec::recode(&relay.knowledge, &weights, field) {
                    Ok(packet) => return Some(packet),
                    Err(CodecError::DegenerateCombination) => continue,
                    Err(other) => unreachable!("relay queue is shape-consistent: {other}"),
                }
            }
            None
        }
        Coding::Off => {
            for offset in 0..relay.fifos.len() {
                let queue = (relay.next_fifo + offset) % relay.fifos.len();
                if let Some(packet) = relay.fifos[queue].pop_front() {
                    relay.next_fifo = (queue + 1) % relay.fifos.len();
                    return Some(packet);
                }
            }
            None
        }
    }
}

/// Scenario file / flag settings with everything optional; missing values
/// fall back to the documented defaults in [`ScenarioSettings::build`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioSettings {
    pub scenario: Option<Scenario>,
    pub field_bits: Option<u32>,
    pub table_mode: Option<TableMode>,
    pub packets: Option<usize>,
    pub coding: Option<Coding>,
    pub slots: Option<u32>,
    pub seed: Option<u64>,
    pub redundancy: Option<u32>,
    pub payload_bytes: Option<usize>,
    pub loss: Option<f64>,
}

impl ScenarioSettings {
    /// Parses the plain-text `key = value` scenario format. Blank lines and
    /// `#` comments are skipped; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut settings = ScenarioSettings::default();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(SimError::Parse {
                    line,
                    message: format!("expected key = value, got '{content}'"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| SimError::Parse { line, message };
            match key {
                "scenario" => settings.scenario = Some(value.parse().map_err(bad)?),
                "field_bits" => {
                    settings.field_bits =
                        Some(value.parse().map_err(|e| bad(format!("field_bits: {e}")))?)
                }
                "table_mode" => {
                    settings.table_mode = Some(match value {
                        "on" => TableMode::On,
                        "off" => TableMode::Off,
                        other => {
                            return Err(bad(format!("table_mode must be on or off, got '{other}'")))
                        }
                    })
                }
                "packets" => {
                    settings.packets = Some(value.parse().map_err(|e| bad(format!("packets: {e}")))?)
                }
                "coding" => settings.coding = Some(value.parse().map_err(bad)?),
                "slots" => settings.slots = Some(value.parse().map_err(|e| bad(format!("slots: {e}")))?),
                "seed" => settings.seed = Some(value.parse().map_err(|e| bad(format!("seed: {e}")))?),
                "redundancy" => {
                    settings.redundancy =
                        Some(value.parse().map_err(|e| bad(format!("redundancy: {e}")))?)
                }
                "payload_bytes" => {
                    settings.payload_bytes =
                        Some(value.parse().map_err(|e| bad(format!("payload_bytes: {e}")))?)
                }
                "loss" => settings.loss = Some(value.parse().map_err(|e| bad(format!("loss: {e}")))?),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        Ok(settings)
    }

    /// Overlays `overrides` (typically command-line flags) on these settings.
    pub fn merge(self, overrides: ScenarioSettings) -> ScenarioSettings {
        ScenarioSettings {
            scenario: overrides.scenario.or(self.scenario),
            field_bits: overrides.field_bits.or(self.field_bits),
            table_mode: overrides.table_mode.or(self.table_mode),
            packets: overrides.packets.or(self.packets),
            coding: overrides.coding.or(self.coding),
            slots: overrides.slots.or(self.slots),
            seed: overrides.seed.or(self.seed),
            redundancy: overrides.redundancy.or(self.redundancy),
            payload_bytes: overrides.payload_bytes.or(self.payload_bytes),
            loss: overrides.loss.or(self.loss),
        }
    }

    /// Applies defaults and validates: butterfly scenario, GF(2^8) without
    /// tables, 16 packets, coding on, 20 slots, seed 42, redundancy
    /// `packets + 4`, 32-byte payloads, loss-free links.
    pub fn build(self) -> Result<ScenarioConfig, SimError> {
        let scenario = self.scenario.unwrap_or(Scenario::Butterfly);
        let field_bits = self.field_bits.unwrap_or(8);
        let table_mode = self.table_mode.unwrap_or(TableMode::Off);
        let packets = self.packets.unwrap_or(16);
        let loss = self.loss.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&loss) {
            return Err(SimError::InvalidLoss(loss));
        }
        if packets == 0 {
            return Err(SimError::InvalidConfig("packets must be at least 1".into()));
        }
        if scenario == Scenario::Butterfly && packets < 2 {
            return Err(SimError::InvalidConfig(
                "the butterfly splits the generation over two sources; need at least 2 packets".into(),
            ));
        }
        let field =
            Field::new(field_bits, table_mode).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        let sim = SimConfig {
            field,
            packet_count: packets,
            coding: self.coding.unwrap_or(Coding::On),
            slots: self.slots.unwrap_or(20),
            seed: self.seed.unwrap_or(42),
            redundancy: self.redundancy.unwrap_or(packets as u32 + 4),
            payload_bytes: self.payload_bytes.unwrap_or(32),
        };
        if sim.slots == 0 {
            return Err(SimError::InvalidConfig("slots must be at least 1".into()));
        }
        if sim.payload_bytes == 0 {
            return Err(SimError::InvalidConfig("payload_bytes must be at least 1".into()));
        }
        Ok(ScenarioConfig { scenario, loss, sim })
    }
}

/// A fully resolved scenario: which topology to build and how to run it.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub loss: f64,
    pub sim: SimConfig,
}

impl ScenarioConfig {
    pub fn topology(&self) -> Result<Topology, SimError> {
        self.scenario.topology().with_uniform_loss(self.loss)
    }
}
