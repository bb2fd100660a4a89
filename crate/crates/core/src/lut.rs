//! Layered lookup tables: layer `k` holds one canonical representative per
//! class at T-distance `k` from the root.
//!
//! Each layer is grown from the previous one by applying the 15 involutive
//! generators to every node, canonicalizing, and keeping candidates that
//! are absent from every finalized layer. Expansion runs on the current
//! rayon pool; the next layer is a concurrent map with insert-if-absent.
//! When several parents reach the same class the smallest
//! `(parent, generator)` pair wins, and finalized layers are sorted by
//! their packed words, so the table does not depend on scheduling.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dashmap::mapref::entry::Entry;
use dashmap::DashMap;
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::canon::{canonicalize, CanonicalForm, Signature};
use crate::error::{Error, Result};
use crate::gens::{apply_gen, conjugate_involutive, GenIndex};
use crate::matrix::So6Matrix;
use crate::perm::SignedPerm;
use crate::word::{evaluate_factors, normalize, Factor, Word};

/// `gen` value of the root record.
pub const ROOT_GEN: u8 = 0xFF;

/// Hasher that passes a precomputed 64-bit signature straight through.
#[derive(Default, Clone, Copy)]
pub struct PassThrough(u64);

impl Hasher for PassThrough {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }

    #[inline]
    fn write_u64(&mut self, x: u64) {
        self.0 = x;
    }
}

pub type PassBuild = BuildHasherDefault<PassThrough>;

/// Canonical matrix keyed by its signature hash.
#[derive(Clone, PartialEq, Eq)]
struct CanonKey(So6Matrix);

impl Hash for CanonKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.signature().hash);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    /// The canonical form of the class.
    pub canon: So6Matrix,
    /// Involutive generator `u` with `canonicalize(X(u) · canon)` equal to
    /// the parent; [`ROOT_GEN`] for the root.
    pub gen: u8,
    /// Index of the parent in the previous layer.
    pub parent: u64,
}

impl Node {
    pub fn gen_index(&self) -> Option<GenIndex> {
        GenIndex::from_id(self.gen, true)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LutOptions {
    /// Skip the generator that leads straight back to the parent.
    pub suppress_backtracking: bool,
    /// Abort with a resource error once the table would exceed this many
    /// nodes.
    pub max_nodes: Option<usize>,
}

impl Default for LutOptions {
    fn default() -> Self {
        LutOptions { suppress_backtracking: true, max_nodes: None }
    }
}

/// Per-layer counters, summed over workers at the end of the layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LayerStats {
    pub depth: usize,
    pub candidates: u64,
    pub suppressed: u64,
    /// Candidates already present in a finalized layer.
    pub known: u64,
    /// Candidates that lost an insert race within the new layer.
    pub duplicates: u64,
    pub size: u64,
    pub elapsed: Duration,
}

impl std::ops::Add for LayerStats {
    type Output = LayerStats;

    fn add(self, o: LayerStats) -> LayerStats {
        LayerStats {
            depth: self.depth.max(o.depth),
            candidates: self.candidates + o.candidates,
            suppressed: self.suppressed + o.suppressed,
            known: self.known + o.known,
            duplicates: self.duplicates + o.duplicates,
            size: self.size + o.size,
            elapsed: self.elapsed.max(o.elapsed),
        }
    }
}

/// Packed `(layer, index)` reference used by the global index.
#[inline]
fn pack_ref(layer: usize, idx: usize) -> u64 {
    ((layer as u64) << 40) | idx as u64
}

#[inline]
fn unpack_ref(r: u64) -> (usize, usize) {
    ((r >> 40) as usize, (r & ((1 << 40) - 1)) as usize)
}

pub struct Lut {
    root: So6Matrix,
    root_form: CanonicalForm,
    layers: Vec<Vec<Node>>,
    index: HashMap<u64, SmallVec<[u64; 1]>, PassBuild>,
    stats: Vec<LayerStats>,
    /// Set when an early-stopped search left the last layer incomplete.
    partial: bool,
}

/// Shared state for probing the opposite side during a bidirectional
/// extension.
pub(crate) struct MeetHook<'a> {
    pub other: &'a Lut,
    pub stop: AtomicBool,
    pub winner: Mutex<Option<So6Matrix>>,
}

impl<'a> MeetHook<'a> {
    pub fn new(other: &'a Lut) -> Self {
        MeetHook { other, stop: AtomicBool::new(false), winner: Mutex::new(None) }
    }

    /// Write-once: the first committed meet wins.
    fn commit(&self, m: So6Matrix) {
        let mut w = self.winner.lock().unwrap_or_else(|e| e.into_inner());
        if w.is_none() {
            *w = Some(m);
        }
        self.stop.store(true, Ordering::Release);
    }
}

/// A walk back to the root: `node = evaluate(factors) · root · right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    pub factors: Vec<Factor>,
    pub right: SignedPerm,
}

impl Reconstruction {
    /// The walk as plain generators plus correction; `right` still applies
    /// after the root.
    pub fn word(&self) -> Word {
        normalize(&self.factors)
    }

    pub fn tcount(&self) -> usize {
        self.factors.iter().map(|f| f.tcount()).sum()
    }

    /// For an identity root, folds `right` into the word's correction so
    /// that the word alone evaluates to the node.
    pub fn into_word(self) -> Word {
        let mut w = normalize(&self.factors);
        w.correction = w.correction.compose(self.right);
        w
    }
}

/// Involutive generator `u` with `canonicalize(X(u) · V)` equal to the
/// parent, given `V = L · X(g) · P · R`.
fn undo_gen(left: SignedPerm, g: GenIndex) -> GenIndex {
    let (i, j) = g.pair();
    let (p, q) = (left.image(i), left.image(j));
    GenIndex::involutive(p.min(q), p.max(q))
}

impl Lut {
    pub fn init(root: &So6Matrix) -> Result<Lut> {
        root.validate()?;
        let root_form = canonicalize(root);
        let node = Node { canon: root_form.matrix.clone(), gen: ROOT_GEN, parent: 0 };
        let mut lut = Lut {
            root: root.clone(),
            root_form,
            layers: Vec::new(),
            index: HashMap::default(),
            stats: Vec::new(),
            partial: false,
        };
        lut.push_layer(vec![node], LayerStats { size: 1, ..Default::default() });
        Ok(lut)
    }

    /// Rebuilds a table from stored layers; used by the loader.
    pub(crate) fn from_layers(root: So6Matrix, layers: Vec<Vec<Node>>) -> Lut {
        let root_form = canonicalize(&root);
        let mut lut = Lut {
            root,
            root_form,
            layers: Vec::with_capacity(layers.len()),
            index: HashMap::default(),
            stats: Vec::new(),
            partial: false,
        };
        for (d, layer) in layers.into_iter().enumerate() {
            let size = layer.len() as u64;
            lut.push_layer(layer, LayerStats { depth: d, size, ..Default::default() });
        }
        lut
    }

    fn push_layer(&mut self, nodes: Vec<Node>, stats: LayerStats) {
        let depth = self.layers.len();
        for (i, n) in nodes.iter().enumerate() {
            self.index.entry(n.canon.signature().hash).or_default().push(pack_ref(depth, i));
        }
        self.layers.push(nodes);
        self.stats.push(stats);
    }

    pub fn root(&self) -> &So6Matrix {
        &self.root
    }

    pub fn layers(&self) -> &[Vec<Node>] {
        &self.layers
    }

    pub fn layer(&self, d: usize) -> &[Node] {
        &self.layers[d]
    }

    /// Deepest stored distance.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn frontier_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.len())
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cumulative representative count per depth.
    pub fn cumulative_counts(&self) -> Vec<usize> {
        self.layers
            .iter()
            .scan(0, |acc, l| {
                *acc += l.len();
                Some(*acc)
            })
            .collect()
    }

    /// Number of entries in the global index; equals [`Lut::len`].
    pub fn index_len(&self) -> usize {
        self.index.values().map(|v| v.len()).sum()
    }

    pub fn stats(&self) -> &[LayerStats] {
        &self.stats
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    /// Position of a canonical matrix in the table.
    pub fn find(&self, canon: &So6Matrix, sig: Signature) -> Option<(usize, usize)> {
        let refs = self.index.get(&sig.hash)?;
        refs.iter().map(|&r| unpack_ref(r)).find(|&(d, i)| self.layers[d][i].canon == *canon)
    }

    /// Distance and position of the class of `u`, if it is in the table.
    pub fn lookup(&self, u: &So6Matrix) -> Option<(usize, usize)> {
        let cf = canonicalize(u);
        let sig = cf.matrix.signature();
        self.find(&cf.matrix, sig)
    }

    /// Appends the next layer.
    pub fn extend_one_step(&mut self, opts: &LutOptions) -> Result<LayerStats> {
        self.extend_inner(opts, None)
    }

    pub(crate) fn extend_inner(&mut self, opts: &LutOptions, hook: Option<&MeetHook<'_>>) -> Result<LayerStats> {
        if self.partial {
            return Err(Error::Integrity("cannot extend a table whose last layer is incomplete".into()));
        }
        let start = Instant::now();
        let depth = self.layers.len();
        let budget = opts.max_nodes.map(|m| m.saturating_sub(self.len()));
        let next: DashMap<CanonKey, (u64, u8), PassBuild> = DashMap::default();
        let fresh = AtomicUsize::new(0);
        let this = &*self;
        let stats = this.layers[depth - 1]
            .par_iter()
            .enumerate()
            .try_fold(LayerStats::default, |mut st, (pi, node)| {
                if hook.is_some_and(|h| h.stop.load(Ordering::Relaxed)) {
                    return Ok(st);
                }
                for g in GenIndex::all_involutive() {
                    if opts.suppress_backtracking && node.gen == g.id() {
                        st.suppressed += 1;
                        continue;
                    }
                    st.candidates += 1;
                    let w = apply_gen(g, &node.canon).map_err(|e| Error::Overflow { depth, source: e })?;
                    let cf = canonicalize(&w);
                    let sig = cf.matrix.signature();
                    if this.find(&cf.matrix, sig).is_some() {
                        st.known += 1;
                        continue;
                    }
                    let meta = (pi as u64, undo_gen(cf.left, g).id());
                    let probe = hook.map(|_| cf.matrix.clone());
                    let inserted = match next.entry(CanonKey(cf.matrix)) {
                        Entry::Occupied(mut o) => {
                            if meta < *o.get() {
                                *o.get_mut() = meta;
                            }
                            false
                        }
                        Entry::Vacant(v) => {
                            v.insert(meta);
                            true
                        }
                    };
                    if !inserted {
                        st.duplicates += 1;
                        continue;
                    }
                    let n = fresh.fetch_add(1, Ordering::Relaxed) + 1;
                    if budget.is_some_and(|b| n > b) {
                        return Err(Error::Resource(format!(
                            "node limit {} reached while building layer {depth} ({} nodes in finished layers)",
                            opts.max_nodes.unwrap_or(0),
                            this.len()
                        )));
                    }
                    if let (Some(h), Some(m)) = (hook, probe) {
                        if h.other.find(&m, sig).is_some() {
                            h.commit(m);
                            return Ok(st);
                        }
                    }
                }
                Ok(st)
            })
            .try_reduce(LayerStats::default, |a, b| Ok(a + b))?;

        let mut nodes: Vec<Node> =
            next.into_iter().map(|(k, (parent, gen))| Node { canon: k.0, gen, parent }).collect();
        nodes.par_sort_unstable_by(|a, b| a.canon.cmp_words(&b.canon));
        let stats = LayerStats { depth, size: nodes.len() as u64, elapsed: start.elapsed(), ..stats };
        if hook.is_some_and(|h| h.stop.load(Ordering::Acquire)) {
            self.partial = true;
        }
        self.push_layer(nodes, stats);
        Ok(stats)
    }

    /// Walks from layer `depth`, position `idx` back to the root.
    pub fn reconstruct(&self, depth: usize, idx: usize) -> Result<Reconstruction> {
        let mut factors = Vec::with_capacity(2 * depth + 1);
        let mut rights = Vec::with_capacity(depth + 1);
        let (mut d, mut i) = (depth, idx);
        while d > 0 {
            let node = self.node(d, i)?;
            let u = node
                .gen_index()
                .ok_or_else(|| Error::Integrity(format!("node {i} at depth {d} has no generator")))?;
            let parent = self.node(d - 1, node.parent as usize)?;
            let cf = canonicalize(&apply_gen(u, &node.canon)?);
            if cf.matrix != parent.canon {
                return Err(Error::Integrity(format!("node {i} at depth {d} does not lead to its parent")));
            }
            factors.push(Factor::Gen(u));
            factors.push(Factor::Perm(cf.left.inverse()));
            rights.push(cf.right.inverse());
            i = node.parent as usize;
            d -= 1;
        }
        factors.push(Factor::Perm(self.root_form.left));
        rights.push(self.root_form.right);
        let right = rights.iter().rev().fold(SignedPerm::IDENTITY, |acc, &r| acc.compose(r));
        let rec = Reconstruction { factors, right };
        let got = evaluate_factors(&rec.factors)?.mul(&self.root)?.act_right(rec.right);
        if got != self.layers[depth][idx].canon {
            return Err(Error::Integrity(format!("reconstruction of node {idx} at depth {depth} is inexact")));
        }
        Ok(rec)
    }

    fn node(&self, d: usize, i: usize) -> Result<&Node> {
        self.layers
            .get(d)
            .and_then(|l| l.get(i))
            .ok_or_else(|| Error::Integrity(format!("dangling reference to node {i} at depth {d}")))
    }

    /// Exact synthesis of `u` from the table: `u = evaluate(factors) ·
    /// root · right`, with one generator per unit of distance. `None` when
    /// the class is beyond the table.
    pub fn synthesize(&self, u: &So6Matrix) -> Option<Result<Reconstruction>> {
        let cf = canonicalize(u);
        let (d, i) = self.find(&cf.matrix, cf.matrix.signature())?;
        Some(self.reconstruct(d, i).and_then(|rec| {
            let mut factors = Vec::with_capacity(rec.factors.len() + 1);
            factors.push(Factor::Perm(cf.left.inverse()));
            factors.extend(rec.factors);
            let out = Reconstruction { factors, right: rec.right.compose(cf.right.inverse()) };
            let got = evaluate_factors(&out.factors)?.mul(&self.root)?.act_right(out.right);
            if got != *u {
                return Err(Error::Integrity("synthesized word does not evaluate to the target".into()));
            }
            Ok(out)
        }))
    }

    /// The node written as `left · X(v_1) ⋯ X(v_k) · root · right`, with all
    /// signed permutations pushed outward.
    pub fn involutive_path(&self, depth: usize, idx: usize) -> Result<(SignedPerm, Vec<GenIndex>, SignedPerm)> {
        let rec = self.reconstruct(depth, idx)?;
        let mut q = SignedPerm::IDENTITY;
        let mut xs = Vec::with_capacity(depth);
        for f in rec.factors.iter().rev() {
            match *f {
                Factor::Perm(p) => q = p.compose(q),
                Factor::Gen(g) if g.is_involutive() => {
                    // X(g) · Q = Q · (Q⁻¹ X(g) Q) = Q · D · X(u)
                    let (d, u) = conjugate_involutive(q.inverse(), g);
                    q = q.compose(d);
                    xs.push(u);
                }
                _ => return Err(Error::Integrity("unexpected factor in a table walk".into())),
            }
        }
        xs.reverse();
        Ok((q, xs, rec.right))
    }
}

pub fn init_lut(root: &So6Matrix) -> Result<Lut> {
    Lut::init(root)
}

/// Layers `0..=k` from `root` on the current rayon pool.
pub fn generate_lut(root: &So6Matrix, k: usize, opts: &LutOptions) -> Result<Lut> {
    let mut lut = Lut::init(root)?;
    for _ in 0..k {
        lut.extend_one_step(opts)?;
    }
    Ok(lut)
}

/// Like [`generate_lut`], calling `progress` after each layer.
pub fn generate_lut_with(
    root: &So6Matrix,
    k: usize,
    opts: &LutOptions,
    mut progress: impl FnMut(&LayerStats, usize),
) -> Result<Lut> {
    let mut lut = Lut::init(root)?;
    progress(&lut.stats[0], 1);
    for _ in 0..k {
        let st = lut.extend_one_step(opts)?;
        progress(&st, lut.len());
    }
    Ok(lut)
}

pub fn lut_lookup<'a>(lut: &'a Lut, u: &So6Matrix) -> Option<(usize, &'a Node)> {
    lut.lookup(u).map(|(d, i)| (d, &lut.layers[d][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::equivalent;
    use crate::matrix::{gate_image, Gate};
    use crate::word::evaluate_word;

    #[test]
    fn small_identity_counts() {
        let lut = generate_lut(&So6Matrix::identity(), 4, &LutOptions::default()).unwrap();
        assert_eq!(lut.cumulative_counts(), vec![1, 2, 4, 10, 29]);
        assert_eq!(lut.index_len(), lut.len());
        assert_eq!(lut_lookup(&lut, &gate_image(Gate::T1)).unwrap().0, 1);
        assert_eq!(lut.lookup(&gate_image(Gate::CZ)), Some((0, 0)));
    }

    #[test]
    fn suppression_does_not_change_layers() {
        let a = generate_lut(&So6Matrix::identity(), 4, &LutOptions::default()).unwrap();
        let opts = LutOptions { suppress_backtracking: false, ..Default::default() };
        let b = generate_lut(&So6Matrix::identity(), 4, &opts).unwrap();
        assert_eq!(a.layers(), b.layers());
        assert!(a.stats()[3].suppressed > 0);
    }

    #[test]
    fn reconstruction_is_exact() {
        let lut = generate_lut(&So6Matrix::identity(), 5, &LutOptions::default()).unwrap();
        for d in 0..=5 {
            for i in (0..lut.layer(d).len()).step_by(7) {
                let rec = lut.reconstruct(d, i).unwrap();
                assert_eq!(rec.tcount(), d);
                let w = rec.into_word();
                assert_eq!(w.tcount(), d);
                assert_eq!(evaluate_word(&w).unwrap(), lut.layer(d)[i].canon);
                let (q, xs, r) = lut.involutive_path(d, i).unwrap();
                let mut m = So6Matrix::from_perm(r);
                for &x in xs.iter().rev() {
                    m = apply_gen(x, &m).unwrap();
                }
                assert_eq!(m.act_left(q), lut.layer(d)[i].canon);
            }
        }
    }

    #[test]
    fn node_limit_is_a_resource_error() {
        let opts = LutOptions { max_nodes: Some(20), ..Default::default() };
        match generate_lut(&So6Matrix::identity(), 6, &opts) {
            Err(Error::Resource(_)) => {}
            other => panic!("expected resource error, got {:?}", other.map(|l| l.len())),
        }
    }

    #[test]
    fn synthesize_hits_the_target_exactly() {
        let lut = generate_lut(&So6Matrix::identity(), 3, &LutOptions::default()).unwrap();
        let u = gate_image(Gate::H0).mul(&gate_image(Gate::T1)).unwrap().mul(&gate_image(Gate::CZ)).unwrap();
        let rec = lut.synthesize(&u).unwrap().unwrap();
        let w = rec.into_word();
        assert_eq!(w.tcount(), 1);
        assert_eq!(evaluate_word(&w).unwrap(), u);
        assert!(equivalent(&u, &gate_image(Gate::T0)));
    }
}
