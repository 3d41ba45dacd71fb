//! Binary threshold neurons with Hebbian plasticity.
//!
//! Neurons `0..26` are clamped to the sensor vector every click; the last
//! six neurons form the output register. All other neurons (and the output
//! neurons) fire synchronously from the previous state vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const INPUTS: usize = 26;
pub const OUTPUTS: usize = 6;
pub const MIN_NEURONS: usize = 32;
pub const DEFAULT_NEURONS: usize = 256;
pub const DEFAULT_ETA: f64 = 0.0035;
pub const DEFAULT_THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ConnectionClass {
    /// Fixed weight taken from the genotype.
    #[default]
    Hard,
    /// Learns during infancy only.
    Soft,
    /// Learns for the whole life.
    AdultSoft,
}

/// Decoded network blueprint. All three matrices are row-major with the
/// row indexing the postsynaptic neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct Phenotype {
    pub n: usize,
    pub connect: Vec<bool>,
    pub weight: Vec<f64>,
    pub class: Vec<ConnectionClass>,
}

impl Phenotype {
    pub fn empty(n: usize) -> Self {
        Phenotype {
            n,
            connect: vec![false; n * n],
            weight: vec![0.0; n * n],
            class: vec![ConnectionClass::Hard; n * n],
        }
    }

    pub fn set(&mut self, post: usize, pre: usize, class: ConnectionClass, weight: f64) {
        let i = post * self.n + pre;
        self.connect[i] = true;
        self.class[i] = class;
        self.weight[i] = match class {
            ConnectionClass::Hard => weight,
            _ => 0.0,
        };
    }

    pub fn connection_count(&self) -> usize {
        self.connect.iter().filter(|&&c| c).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearningRule {
    Hebb,
    Oja,
}

impl FromStr for LearningRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hebb" => Ok(LearningRule::Hebb),
            "oja" => Ok(LearningRule::Oja),
            _ => Err(Error::InvalidParam(format!("unknown learning rule `{s}`"))),
        }
    }
}

impl fmt::Display for LearningRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearningRule::Hebb => "hebb",
            LearningRule::Oja => "oja",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Infancy,
    Adult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub eta: f64,
    pub rule: LearningRule,
    pub theta: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            eta: DEFAULT_ETA,
            rule: LearningRule::Oja,
            theta: DEFAULT_THETA,
        }
    }
}

/// Plain Hebb: `eta * V * E`.
pub fn hebb_delta(_w: f64, v: f64, e: f64, eta: f64) -> f64 {
    eta * v * e
}

/// Oja's normalized variant: `eta * V * (E - V * w)`.
pub fn oja_delta(w: f64, v: f64, e: f64, eta: f64) -> f64 {
    eta * v * (e - v * w)
}

/// A running network. Connections are stored compressed by postsynaptic
/// row; `out_start`/`out_edge` index the same edges by presynaptic neuron
/// so firing only touches the outputs of active neurons.
#[derive(Debug, Clone)]
pub struct Network {
    n: usize,
    config: NetworkConfig,
    row_start: Vec<usize>,
    pre: Vec<u32>,
    post: Vec<u32>,
    weight: Vec<f64>,
    class: Vec<ConnectionClass>,
    out_start: Vec<usize>,
    out_edge: Vec<u32>,
    plastic: bool,
    state: Vec<u8>,
    prev: Vec<u8>,
    input: Vec<f64>,
}

impl Network {
    pub fn build(phenotype: &Phenotype, config: NetworkConfig) -> Result<Network> {
        let n = phenotype.n;
        if n < MIN_NEURONS {
            return Err(Error::InvalidNeuronCount(n));
        }
        if phenotype.connect.len() != n * n || phenotype.weight.len() != n * n || phenotype.class.len() != n * n {
            return Err(Error::CorruptGenotype("phenotype matrices do not match n".into()));
        }
        if config.eta.is_nan() || config.eta <= 0.0 {
            return Err(Error::InvalidParam(format!("eta must be positive, got {}", config.eta)));
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut pre = Vec::new();
        let mut post = Vec::new();
        let mut weight = Vec::new();
        let mut class = Vec::new();
        for j in 0..n {
            row_start.push(pre.len());
            for k in 0..n {
                let i = j * n + k;
                if !phenotype.connect[i] {
                    continue;
                }
                let c = phenotype.class[i];
                let w = match c {
                    ConnectionClass::Hard => phenotype.weight[i],
                    _ => 0.0,
                };
                if !(-1.0..=1.0).contains(&w) {
                    return Err(Error::CorruptGenotype(format!("weight {w} out of range at ({j}, {k})")));
                }
                pre.push(k as u32);
                post.push(j as u32);
                weight.push(w);
                class.push(c);
            }
        }
        row_start.push(pre.len());

        // edges grouped by presynaptic neuron, ascending postsynaptic order
        let mut out_start = vec![0; n + 1];
        for &k in &pre {
            out_start[k as usize + 1] += 1;
        }
        for k in 0..n {
            out_start[k + 1] += out_start[k];
        }
        let mut fill = out_start.clone();
        let mut out_edge = vec![0; pre.len()];
        for (e, &k) in pre.iter().enumerate() {
            out_edge[fill[k as usize]] = e as u32;
            fill[k as usize] += 1;
        }
        let plastic = class.iter().any(|&c| c != ConnectionClass::Hard);
        Ok(Network {
            n,
            config,
            row_start,
            pre,
            post,
            weight,
            class,
            out_start,
            out_edge,
            plastic,
            state: vec![0; n],
            prev: vec![0; n],
            input: vec![0.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> NetworkConfig {
        self.config
    }

    pub fn state(&self) -> &[u8] {
        &self.state
    }

    /// State vector the last `fire` computed from (inputs already clamped).
    pub fn previous_state(&self) -> &[u8] {
        &self.prev
    }

    pub fn connection_count(&self) -> usize {
        self.pre.len()
    }

    pub fn weight(&self, post: usize, pre: usize) -> Option<f64> {
        let row = self.row_start[post]..self.row_start[post + 1];
        self.pre[row.clone()]
            .iter()
            .position(|&k| k as usize == pre)
            .map(|off| self.weight[row.start + off])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|v| *v = 0);
        self.prev.iter_mut().for_each(|v| *v = 0);
    }

    /// One synchronous update. The sensor bits are clamped onto the input
    /// neurons first, then every other neuron fires iff its weighted input
    /// from that state reaches `theta`. Returns the output register.
    pub fn fire(&mut self, sensor: &[u8; INPUTS]) -> [u8; OUTPUTS] {
        self.prev.copy_from_slice(&self.state);
        self.prev[..INPUTS].copy_from_slice(sensor);
        let theta = self.config.theta;
        // Visiting active neurons in ascending order adds each neuron's
        // inputs in presynaptic order, the same order as a row-wise sum.
        self.input.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..self.n {
            if self.prev[k] == 0 {
                continue;
            }
            for &e in &self.out_edge[self.out_start[k]..self.out_start[k + 1]] {
                let e = e as usize;
                self.input[self.post[e] as usize] += self.weight[e];
            }
        }
        for j in INPUTS..self.n {
            self.state[j] = u8::from(self.input[j] >= theta);
        }
        self.state[..INPUTS].copy_from_slice(sensor);
        self.register()
    }

    pub fn register(&self) -> [u8; OUTPUTS] {
        let mut out = [0; OUTPUTS];
        out.copy_from_slice(&self.state[self.n - OUTPUTS..]);
        out
    }

    /// Applies the learning rule using the states around the last `fire`.
    pub fn learn(&mut self, stage: Stage) {
        if !self.plastic {
            return;
        }
        let prev = std::mem::take(&mut self.prev);
        let state = std::mem::take(&mut self.state);
        self.learn_step(&prev, &state, stage);
        self.prev = prev;
        self.state = state;
    }

    /// Updates every plastic connection with `V = post[j]`, `E = pre[k]`.
    /// Soft connections learn only in infancy, adult-soft ones always,
    /// hard ones never. Weights are clamped to `[-1, 1]`.
    pub fn learn_step(&mut self, pre_state: &[u8], post_state: &[u8], stage: Stage) {
        let eta = self.config.eta;
        let rule = self.config.rule;
        for (j, &post) in post_state.iter().enumerate().take(self.n) {
            let v = post as f64;
            // both rules vanish when the postsynaptic neuron is silent
            if v == 0.0 {
                continue;
            }
            for e in self.row_start[j]..self.row_start[j + 1] {
                let plastic = match self.class[e] {
                    ConnectionClass::Hard => false,
                    ConnectionClass::Soft => stage == Stage::Infancy,
                    ConnectionClass::AdultSoft => true,
                };
                if !plastic {
                    continue;
                }
                let x = pre_state[self.pre[e] as usize] as f64;
                let w = self.weight[e];
                let dw = match rule {
                    LearningRule::Hebb => hebb_delta(w, v, x, eta),
                    LearningRule::Oja => oja_delta(w, v, x, eta),
                };
                self.weight[e] = (w + dw).clamp(-1.0, 1.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sensor(active: &[usize]) -> [u8; INPUTS] {
        let mut s = [0; INPUTS];
        for &i in active {
            s[i] = 1;
        }
        s
    }

    #[test]
    fn rejects_small_networks() {
        assert!(Network::build(&Phenotype::empty(32), NetworkConfig::default()).is_ok());
        assert!(matches!(
            Network::build(&Phenotype::empty(16), NetworkConfig::default()),
            Err(Error::InvalidNeuronCount(16))
        ));
    }

    #[test]
    fn empty_network_is_silent() {
        let mut net = Network::build(&Phenotype::empty(64), NetworkConfig::default()).unwrap();
        for _ in 0..50 {
            assert_eq!(net.fire(&[1; INPUTS]), [0; OUTPUTS]);
        }
    }

    #[test]
    fn hard_weights_preserved_and_soft_start_at_zero() {
        let mut p = Phenotype::empty(32);
        p.set(30, 2, ConnectionClass::Hard, -0.7);
        p.set(31, 3, ConnectionClass::Soft, 0.9);
        let net = Network::build(&p, NetworkConfig::default()).unwrap();
        assert_eq!(net.weight(30, 2), Some(-0.7));
        assert_eq!(net.weight(31, 3), Some(0.0));
        assert_eq!(net.weight(31, 4), None);
    }

    #[test]
    fn single_full_weight_input_fires_target() {
        let mut p = Phenotype::empty(32);
        p.set(26, 0, ConnectionClass::Hard, 1.0);
        let mut net = Network::build(&p, NetworkConfig::default()).unwrap();
        let out = net.fire(&sensor(&[0]));
        assert_eq!(out, [1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn cancelling_inputs_stay_silent() {
        let mut p = Phenotype::empty(32);
        p.set(27, 0, ConnectionClass::Hard, 1.0);
        p.set(27, 1, ConnectionClass::Hard, -1.0);
        let mut net = Network::build(&p, NetworkConfig::default()).unwrap();
        assert_eq!(net.fire(&sensor(&[0, 1])), [0; OUTPUTS]);
    }

    #[test]
    fn input_slots_ignore_incoming_connections() {
        let mut p = Phenotype::empty(32);
        p.set(5, 0, ConnectionClass::Hard, 1.0);
        let mut net = Network::build(&p, NetworkConfig::default()).unwrap();
        net.fire(&sensor(&[0]));
        assert_eq!(net.state()[5], 0);
    }

    #[test]
    fn hidden_state_carries_between_clicks() {
        // input 0 -> hidden 30 -> output 63: takes two clicks
        let mut p = Phenotype::empty(64);
        p.set(30, 0, ConnectionClass::Hard, 1.0);
        p.set(63, 30, ConnectionClass::Hard, 0.5);
        let mut net = Network::build(&p, NetworkConfig::default()).unwrap();
        assert_eq!(net.fire(&sensor(&[0])), [0; OUTPUTS]);
        assert_eq!(net.fire(&sensor(&[])), [0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn rule_deltas() {
        assert_eq!(hebb_delta(0.3, 1.0, 1.0, 0.0035), 0.0035);
        assert_eq!(hebb_delta(0.3, 0.0, 1.0, 0.0035), 0.0);
        assert_eq!(hebb_delta(0.3, 1.0, 0.0, 0.0035), 0.0);
        assert_eq!(oja_delta(0.0, 1.0, 1.0, 0.0035), 0.0035);
        assert_eq!(oja_delta(1.0, 1.0, 1.0, 0.0035), 0.0);
        assert!((oja_delta(0.5, 1.0, 0.0, 0.0035) + 0.00175).abs() < 1e-15);
    }

    fn plastic_net(class: ConnectionClass, rule: LearningRule) -> Network {
        let mut p = Phenotype::empty(32);
        p.set(26, 0, class, 0.4);
        p.set(27, 0, ConnectionClass::Hard, 0.4);
        Network::build(
            &p,
            NetworkConfig {
                rule,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn adult_stage_freezes_soft_only() {
        let pre = sensor(&[0]).iter().copied().chain([0; 6]).collect::<Vec<_>>();
        let post = vec![1u8; 32];
        let mut soft = plastic_net(ConnectionClass::Soft, LearningRule::Oja);
        soft.learn_step(&pre, &post, Stage::Adult);
        assert_eq!(soft.weight(26, 0), Some(0.0));
        soft.learn_step(&pre, &post, Stage::Infancy);
        assert_eq!(soft.weight(26, 0), Some(0.0035));

        let mut adult = plastic_net(ConnectionClass::AdultSoft, LearningRule::Oja);
        adult.learn_step(&pre, &post, Stage::Adult);
        assert_eq!(adult.weight(26, 0), Some(0.0035));

        for stage in [Stage::Infancy, Stage::Adult] {
            adult.learn_step(&pre, &post, stage);
            assert_eq!(adult.weight(27, 0), Some(0.4));
        }
    }

    #[test]
    fn oja_converges_to_closed_form() {
        let pre = vec![1u8; 32];
        let post = vec![1u8; 32];
        let mut net = plastic_net(ConnectionClass::Soft, LearningRule::Oja);
        let eta: f64 = DEFAULT_ETA;
        for t in 1..=10_000 {
            net.learn_step(&pre, &post, Stage::Infancy);
            if t % 1000 == 0 {
                let expected = 1.0 - (1.0 - eta).powi(t);
                assert!((net.weight(26, 0).unwrap() - expected).abs() < 1e-9);
            }
        }
        assert!((net.weight(26, 0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn hebb_is_clamped() {
        let pre = vec![1u8; 32];
        let post = vec![1u8; 32];
        let mut net = plastic_net(ConnectionClass::AdultSoft, LearningRule::Hebb);
        let mut last = 0.0;
        for _ in 0..1000 {
            net.learn_step(&pre, &post, Stage::Adult);
            let w = net.weight(26, 0).unwrap();
            assert!(w >= last && w <= 1.0);
            last = w;
        }
        assert_eq!(last, 1.0);
    }
}
