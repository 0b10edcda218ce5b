//! Plaintext switching networks.
//!
//! A [`Network`] is a DAG of 2×2 switches over numbered wires; every switch
//! consumes two wires and produces two fresh ones. Permutation networks use
//! the recursive Beneš construction with one output switch per level fixed
//! to pass-through, which gives `N log N − N + 1` switches. Routing uses the
//! classic looping (two-colouring) algorithm.

use crate::binning::ExtendedPermutation;
use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchKind {
    /// Swaps its inputs when the selection bit is 1.
    Permutation,
    /// Copies the top input onto the bottom output when the bit is 1.
    Replication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch {
    pub kind: SwitchKind,
    pub inputs: [usize; 2],
    pub outputs: [usize; 2],
}

#[derive(Debug, Clone, Default)]
pub struct Network {
    /// Input wires are `0..inputs`.
    pub inputs: usize,
    pub wires: usize,
    /// Topological order.
    pub switches: Vec<Switch>,
    pub outputs: Vec<usize>,
}

impl Network {
    fn with_inputs(inputs: usize) -> Self {
        Self { inputs, wires: inputs, switches: Vec::new(), outputs: Vec::new() }
    }

    fn push(&mut self, kind: SwitchKind, a: usize, b: usize) -> (usize, usize) {
        let (c, d) = (self.wires, self.wires + 1);
        self.wires += 2;
        self.switches.push(Switch { kind, inputs: [a, b], outputs: [c, d] });
        (c, d)
    }

    pub fn count(&self, kind: SwitchKind) -> usize {
        self.switches.iter().filter(|s| s.kind == kind).count()
    }

    /// Applies the network with one selection bit per switch.
    pub fn evaluate<T: Clone>(&self, input: &[T], bits: &Bits) -> Result<Vec<T>> {
        if input.len() != self.inputs {
            return Err(Error::LengthMismatch { expected: self.inputs, actual: input.len() });
        }
        if bits.len() != self.switches.len() {
            return Err(Error::LengthMismatch { expected: self.switches.len(), actual: bits.len() });
        }
        let mut vals: Vec<Option<T>> = vec![None; self.wires];
        for (i, v) in input.iter().enumerate() {
            vals[i] = Some(v.clone());
        }
        for (s, b) in self.switches.iter().zip(bits.iter()) {
            let x = vals[s.inputs[0]].take().expect("wire set");
            let y = vals[s.inputs[1]].take().expect("wire set");
            let (c, d) = match (s.kind, b) {
                (SwitchKind::Permutation, false) => (x, y),
                (SwitchKind::Permutation, true) => (y, x),
                (SwitchKind::Replication, false) => (x, y),
                (SwitchKind::Replication, true) => (x.clone(), x),
            };
            vals[s.outputs[0]] = Some(c);
            vals[s.outputs[1]] = Some(d);
        }
        Ok(self.outputs.iter().map(|&w| vals[w].clone().expect("output wire set")).collect())
    }
}

/// Switch count of the permutation network on `n` wires (a power of two).
pub fn opn_switches(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        let lg = n.trailing_zeros() as usize;
        n * lg - n + 1
    }
}

fn check_bijection(perm: &[usize]) -> Result<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (y, &x) in perm.iter().enumerate() {
        if x >= perm.len() {
            return Err(Error::NotBijective(format!("entry {x} outside 0..{}", perm.len())));
        }
        if inv[x] != usize::MAX {
            return Err(Error::NotBijective(format!("source {x} used twice")));
        }
        inv[x] = y;
    }
    Ok(inv)
}

/// Subnet assignment of each input (false = upper) for one recursion level.
fn colour(perm: &[usize]) -> Vec<bool> {
    let n = perm.len();
    let mut inv = vec![0; n];
    for (y, &x) in perm.iter().enumerate() {
        inv[x] = y;
    }
    let mut col: Vec<Option<bool>> = vec![None; n];
    let half = n / 2;
    // The last output pair has no switch: output n−1 must come from below.
    let starts = std::iter::once((n - 1, true)).chain((0..half - 1).map(|j| (2 * j, false)));
    for (mut y, c) in starts {
        loop {
            let x = perm[y];
            if col[x].is_some() {
                break;
            }
            col[x] = Some(c);
            col[x ^ 1] = Some(!c);
            y = inv[x ^ 1] ^ 1;
        }
    }
    col.into_iter().map(|c| c.expect("every input coloured")).collect()
}

/// Appends a permutation network over `inputs`; `perm` (output `y` takes
/// input `perm[y]`) selects the bits, `None` builds the shape only.
fn build_opn(net: &mut Network, inputs: &[usize], perm: Option<&[usize]>, bits: &mut Vec<bool>) -> Vec<usize> {
    let n = inputs.len();
    if n == 1 {
        return inputs.to_vec();
    }
    if n == 2 {
        let (c, d) = net.push(SwitchKind::Permutation, inputs[0], inputs[1]);
        bits.push(perm.is_some_and(|p| p[0] == 1));
        return vec![c, d];
    }
    let half = n / 2;
    let col = perm.map(colour);
    let (mut up_in, mut lo_in) = (Vec::with_capacity(half), Vec::with_capacity(half));
    for i in 0..half {
        let (c, d) = net.push(SwitchKind::Permutation, inputs[2 * i], inputs[2 * i + 1]);
        bits.push(col.as_ref().is_some_and(|c| c[2 * i]));
        up_in.push(c);
        lo_in.push(d);
    }
    let subs = match (perm, &col) {
        (Some(p), Some(c)) => {
            let (mut up, mut lo) = (vec![0; half], vec![0; half]);
            for j in 0..half {
                for y in [2 * j, 2 * j + 1] {
                    if c[p[y]] {
                        lo[j] = p[y] / 2;
                    } else {
                        up[j] = p[y] / 2;
                    }
                }
            }
            Some((up, lo))
        }
        _ => None,
    };
    let up_out = build_opn(net, &up_in, subs.as_ref().map(|s| s.0.as_slice()), bits);
    let lo_out = build_opn(net, &lo_in, subs.as_ref().map(|s| s.1.as_slice()), bits);
    let mut out = Vec::with_capacity(n);
    for j in 0..half {
        if j == half - 1 {
            out.push(up_out[j]);
            out.push(lo_out[j]);
        } else {
            let (c, d) = net.push(SwitchKind::Permutation, up_out[j], lo_out[j]);
            bits.push(matches!((perm, &col), (Some(p), Some(c)) if c[p[2 * j]]));
            out.push(c);
            out.push(d);
        }
    }
    out
}

/// A routed permutation network.
#[derive(Debug, Clone)]
pub struct BenesNetwork {
    pub network: Network,
    pub bits: Bits,
}

impl BenesNetwork {
    pub fn size(&self) -> usize {
        self.network.inputs
    }

    pub fn evaluate<T: Clone>(&self, input: &[T]) -> Result<Vec<T>> {
        self.network.evaluate(input, &self.bits)
    }
}

/// Routes `perm` (output `y` receives input `perm[y]`). The length must be
/// a power of two.
pub fn benes_route(perm: &[usize]) -> Result<BenesNetwork> {
    check_bijection(perm)?;
    if !perm.len().is_power_of_two() {
        return Err(Error::Config(format!("network size {} is not a power of two", perm.len())));
    }
    let mut network = Network::with_inputs(perm.len());
    let mut bits = Vec::new();
    let ins: Vec<usize> = (0..perm.len()).collect();
    network.outputs = build_opn(&mut network, &ins, Some(perm), &mut bits);
    Ok(BenesNetwork { network, bits: Bits::from_bools(&bits) })
}

/// Like [`benes_route`], padding to the next power of two with identity
/// wires.
pub fn benes_route_padded(perm: &[usize]) -> Result<BenesNetwork> {
    check_bijection(perm)?;
    let size = perm.len().max(1).next_power_of_two();
    let mut padded = perm.to_vec();
    padded.extend(perm.len()..size);
    benes_route(&padded)
}

/// Sizes of the three stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramShape {
    /// Real input wires (bins).
    pub m: usize,
    /// Outputs (records).
    pub n: usize,
    /// Padded width of the first permutation stage.
    pub wide: usize,
    /// Padded width of the replication and final permutation stages.
    pub narrow: usize,
}

impl ProgramShape {
    /// With `tail_drop`, redundant wires are cut after the first stage.
    pub fn new(m: usize, n: usize, tail_drop: bool) -> Self {
        let wide = m.max(n).max(1).next_power_of_two();
        let narrow = if tail_drop { n.max(1).next_power_of_two() } else { wide };
        Self { m, n, wide, narrow }
    }

    /// Switches, which equals the OT count of an oblivious evaluation.
    pub fn switches(&self) -> usize {
        opn_switches(self.wide) + (self.narrow - 1) + opn_switches(self.narrow)
    }
}

/// Dummy placement, replication and permutation stages as one network.
#[derive(Debug, Clone)]
pub struct SwitchProgram {
    pub shape: ProgramShape,
    pub network: Network,
    /// One per switch; empty-valued in a shape-only program.
    pub bits: Bits,
    /// Switches per stage.
    pub stages: [usize; 3],
}

fn build_program(shape: ProgramShape, perms: Option<(&[usize], &[bool], &[usize])>) -> SwitchProgram {
    let mut network = Network::with_inputs(shape.wide);
    let mut bits = Vec::new();
    let ins: Vec<usize> = (0..shape.wide).collect();
    let first = build_opn(&mut network, &ins, perms.map(|p| p.0), &mut bits);
    let s1 = network.switches.len();
    let kept = &first[..shape.narrow];
    let mut cur = kept[0];
    let mut settled = Vec::with_capacity(shape.narrow);
    for (k, &w) in kept.iter().enumerate().skip(1) {
        let (top, bot) = network.push(SwitchKind::Replication, cur, w);
        bits.push(perms.is_some_and(|p| p.1[k]));
        settled.push(top);
        cur = bot;
    }
    settled.push(cur);
    let s2 = network.switches.len() - s1;
    let last = build_opn(&mut network, &settled, perms.map(|p| p.2), &mut bits);
    let s3 = network.switches.len() - s1 - s2;
    network.outputs = last[..shape.n].to_vec();
    SwitchProgram { shape, network, bits: Bits::from_bools(&bits), stages: [s1, s2, s3] }
}

impl SwitchProgram {
    /// Topology without selection bits, as seen by the label generator.
    pub fn shape_only(shape: ProgramShape) -> Self {
        build_program(shape, None)
    }

    /// Runs the program on `input` (length `m`); pad wires get `T::default()`.
    pub fn evaluate<T: Clone + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.shape.m {
            return Err(Error::LengthMismatch { expected: self.shape.m, actual: input.len() });
        }
        let mut padded = input.to_vec();
        padded.resize(self.shape.wide, T::default());
        self.network.evaluate(&padded, &self.bits)
    }
}

/// Decomposes `ep` into the three-stage program: the first stage lays out
/// each used source in first-occurrence order followed by one placeholder
/// per extra use, the replication chain fills placeholders from their
/// predecessor, and the last stage moves copies into record order.
pub fn decompose_extended(ep: &ExtendedPermutation, tail_drop: bool) -> Result<SwitchProgram> {
    let shape = ProgramShape::new(ep.m, ep.n(), tail_drop);
    let mut uses = vec![0usize; shape.wide];
    let mut order = Vec::new();
    for &s in &ep.src {
        if uses[s] == 0 {
            order.push(s);
        }
        uses[s] += 1;
    }
    let mut spare = (0..shape.wide).filter(|&b| uses[b] == 0);
    let mut layout = Vec::with_capacity(shape.wide);
    let mut placeholder = vec![false; shape.wide];
    let mut start = vec![usize::MAX; shape.wide];
    for &s in &order {
        start[s] = layout.len();
        layout.push(s);
        for _ in 1..uses[s] {
            let r = spare.next().expect("enough redundant wires for placeholders");
            placeholder[layout.len()] = true;
            layout.push(r);
        }
    }
    layout.extend(spare);
    debug_assert_eq!(layout.len(), shape.wide);
    let mut next = start;
    let mut last: Vec<usize> = ep
        .src
        .iter()
        .map(|&s| {
            next[s] += 1;
            next[s] - 1
        })
        .collect();
    last.extend(shape.n..shape.narrow);
    Ok(build_program(shape, Some((&layout, &placeholder[..shape.narrow], &last))))
}
