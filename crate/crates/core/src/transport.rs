//! Transportation problem solved by successive shortest augmenting paths.
//!
//! Supplies ship to demands along a complete bipartite network with
//! uncapacitated links. The cost scalar is generic; integer amounts are
//! shipped. Each augmentation runs a dense Dijkstra on reduced costs, so
//! link costs must be non-negative.

use num_traits::{Num, NumCast};
use thiserror::Error;

/// Scalar usable as a shipping cost.
pub trait Cost: Num + NumCast + Copy + PartialOrd + std::fmt::Debug {}

impl<T: Num + NumCast + Copy + PartialOrd + std::fmt::Debug> Cost for T {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("total supply {supply} does not equal total demand {demand}")]
    Unbalanced { supply: u64, demand: u64 },
    #[error("negative shipping cost from supply {0} to demand {1}")]
    NegativeCost(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shipment {
    pub supply: usize,
    pub demand: usize,
    pub amount: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<C> {
    /// Non-zero shipments in ascending `(supply, demand)` order.
    pub shipments: Vec<Shipment>,
    pub total_cost: C,
}

/// Minimum-cost shipping plan moving every supply unit to a demand.
pub fn solve<C, F>(supply: &[u64], demand: &[u64], cost: F) -> Result<TransportSolution<C>, TransportError>
where
    C: Cost,
    F: Fn(usize, usize) -> C,
{
    let total_supply: u64 = supply.iter().sum();
    let total_demand: u64 = demand.iter().sum();
    if total_supply != total_demand {
        return Err(TransportError::Unbalanced { supply: total_supply, demand: total_demand });
    }
    let s = supply.len();
    let d = demand.len();
    let mut link = Vec::with_capacity(s * d);
    for i in 0..s {
        for j in 0..d {
            let c = cost(i, j);
            if c < C::zero() {
                return Err(TransportError::NegativeCost(i, j));
            }
            link.push(c);
        }
    }
    let mut net = Network {
        s,
        d,
        supply,
        demand,
        link: &link,
        from_source: vec![0; s],
        to_sink: vec![0; d],
        flow: vec![0; s * d],
        potential: vec![C::zero(); s + d + 2],
    };
    let mut shipped = 0;
    while shipped < total_supply {
        let amount = net.augment();
        debug_assert!(amount > 0);
        shipped += amount;
    }

    let mut shipments = Vec::new();
    let mut total_cost = C::zero();
    for i in 0..s {
        for j in 0..d {
            let amount = net.flow[i * d + j];
            if amount > 0 {
                shipments.push(Shipment { supply: i, demand: j, amount });
                total_cost = total_cost + link[i * d + j] * C::from(amount).expect("amount fits cost type");
            }
        }
    }
    Ok(TransportSolution { shipments, total_cost })
}

/// Residual network. Nodes: 0 source, 1..=s supplies, s+1..=s+d demands,
/// s+d+1 sink.
struct Network<'a, C> {
    s: usize,
    d: usize,
    supply: &'a [u64],
    demand: &'a [u64],
    link: &'a [C],
    from_source: Vec<u64>,
    to_sink: Vec<u64>,
    flow: Vec<u64>,
    potential: Vec<C>,
}

#[derive(Clone, Copy)]
enum Arc {
    Source(usize),
    SourceBack(usize),
    Link(usize, usize),
    LinkBack(usize, usize),
    Sink(usize),
    SinkBack(usize),
}

impl<C: Cost> Network<'_, C> {
    fn node_count(&self) -> usize {
        self.s + self.d + 2
    }

    fn sink(&self) -> usize {
        self.s + self.d + 1
    }

    /// Residual arcs leaving `u` as `(head, cost, arc)`, in ascending head
    /// order. The cost of a `LinkBack` arc is the negation of the one
    /// reported.
    fn arcs(&self, u: usize, out: &mut Vec<(usize, C, Arc)>) {
        out.clear();
        let (s, d) = (self.s, self.d);
        if u == 0 {
            for i in 0..s {
                if self.from_source[i] < self.supply[i] {
                    out.push((1 + i, C::zero(), Arc::Source(i)));
                }
            }
        } else if u <= s {
            let i = u - 1;
            if self.from_source[i] > 0 {
                out.push((0, C::zero(), Arc::SourceBack(i)));
            }
            for j in 0..d {
                out.push((1 + s + j, self.link[i * d + j], Arc::Link(i, j)));
            }
        } else if u <= s + d {
            let j = u - 1 - s;
            for i in 0..s {
                if self.flow[i * d + j] > 0 {
                    out.push((1 + i, self.link[i * d + j], Arc::LinkBack(i, j)));
                }
            }
            if self.to_sink[j] < self.demand[j] {
                out.push((self.sink(), C::zero(), Arc::Sink(j)));
            }
        } else {
            for j in 0..d {
                if self.to_sink[j] > 0 {
                    out.push((1 + s + j, C::zero(), Arc::SinkBack(j)));
                }
            }
        }
    }

    fn residual(&self, arc: Arc) -> u64 {
        match arc {
            Arc::Source(i) => self.supply[i] - self.from_source[i],
            Arc::SourceBack(i) => self.from_source[i],
            Arc::Link(..) => u64::MAX,
            Arc::LinkBack(i, j) => self.flow[i * self.d + j],
            Arc::Sink(j) => self.demand[j] - self.to_sink[j],
            Arc::SinkBack(j) => self.to_sink[j],
        }
    }

    fn push(&mut self, arc: Arc, amount: u64) {
        let d = self.d;
        match arc {
            Arc::Source(i) => self.from_source[i] += amount,
            Arc::SourceBack(i) => self.from_source[i] -= amount,
            Arc::Link(i, j) => self.flow[i * d + j] += amount,
            Arc::LinkBack(i, j) => self.flow[i * d + j] -= amount,
            Arc::Sink(j) => self.to_sink[j] += amount,
            Arc::SinkBack(j) => self.to_sink[j] -= amount,
        }
    }

    /// One shortest source-sink augmentation; returns the amount pushed.
    fn augment(&mut self) -> u64 {
        let n = self.node_count();
        let mut dist: Vec<Option<C>> = vec![None; n];
        let mut prev: Vec<Option<(usize, Arc)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut arcs = Vec::new();
        dist[0] = Some(C::zero());
        loop {
            // smallest tentative distance, lowest index on ties
            let mut pick: Option<(usize, C)> = None;
            for v in 0..n {
                if let (false, Some(dv)) = (done[v], dist[v]) {
                    if pick.is_none_or(|(_, best)| dv < best) {
                        pick = Some((v, dv));
                    }
                }
            }
            let Some((u, du)) = pick else { break };
            done[u] = true;
            self.arcs(u, &mut arcs);
            for &(v, c, arc) in &arcs {
                if done[v] {
                    continue;
                }
                // ordered so unsigned scalars never go below zero
                let reduced = match arc {
                    Arc::LinkBack(..) => self.potential[u] - (self.potential[v] + c),
                    _ => (c + self.potential[u]) - self.potential[v],
                };
                let candidate = du + reduced;
                if dist[v].is_none_or(|dv| candidate < dv) {
                    dist[v] = Some(candidate);
                    prev[v] = Some((u, arc));
                }
            }
        }
        let t = self.sink();
        let dt = dist[t].expect("complete bipartite network always reaches the sink");
        for v in 0..n {
            let delta = if done[v] { dist[v].unwrap_or(dt) } else { dt };
            self.potential[v] = self.potential[v] + delta;
        }
        let mut path = Vec::new();
        let mut v = t;
        while let Some((u, arc)) = prev[v] {
            path.push(arc);
            v = u;
        }
        let amount = path.iter().map(|&a| self.residual(a)).min().unwrap_or(0);
        for arc in path {
            self.push(arc, amount);
        }
        amount
    }
}
