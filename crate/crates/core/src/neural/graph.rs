//! Reverse-mode automatic differentiation over an eagerly evaluated graph.
//!
//! Nodes are appended in evaluation order (which is therefore topological);
//! each node's value is computed the moment it is created. `backward` walks
//! the nodes in reverse, accumulating adjoints. After a backward pass the
//! gradients of leaf nodes are available; interior adjoints are consumed as
//! the walk passes them.

use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Index of a node in its graph.
pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op<F: Scalar> {
    /// Input or parameter tensor; the only node kind keeping its gradient.
    Leaf,
    /// Matrix–vector product.
    MatVec { m: NodeId, v: NodeId },
    /// Elementwise sum of two same-shape tensors.
    Add { a: NodeId, b: NodeId },
    /// Elementwise (Hadamard) product.
    Mul { a: NodeId, b: NodeId },
    Sigmoid { x: NodeId },
    Tanh { x: NodeId },
    /// Numerically stabilized softmax over a vector.
    Softmax { x: NodeId },
    /// Concatenation of vectors in order.
    Concat { parts: Vec<NodeId> },
    /// Contiguous slice of the flat value array (also: embedding row).
    Slice { x: NodeId, start: usize, len: usize },
    /// Inner product of two same-length vectors; scalar result.
    Dot { a: NodeId, b: NodeId },
    /// Σᵢ weights[i] · rows[i]; the attention context vector.
    LinComb { weights: NodeId, rows: Vec<NodeId> },
    /// Pointer-generator mixture over the extended vocabulary:
    /// out[w] = gate·vocab[w] (w < V) plus Σ_{j: ext_ids[j]=w} (1−gate)·alpha[j].
    CopyMix {
        gate: NodeId,
        vocab: NodeId,
        alpha: NodeId,
        ext_ids: Vec<usize>,
    },
    /// ln(dist[index]); scalar result.
    PickLog { dist: NodeId, index: usize },
    /// Scalar multiple.
    Scale { x: NodeId, c: F },
    /// Arithmetic mean of scalar nodes.
    Mean { parts: Vec<NodeId> },
    /// Elementwise product with a constant mask (inverted dropout).
    MaskMul { x: NodeId, mask: Vec<F> },
}

struct Node<F: Scalar> {
    op: Op<F>,
    value: Tensor<F>,
}

/// An append-only computation graph.
pub struct Graph<F: Scalar> {
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> Default for Graph<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> Graph<F> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op<F>, value: Tensor<F>) -> NodeId {
        self.nodes.push(Node { op, value });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &Tensor<F> {
        &self.nodes[id].value
    }

    pub fn values(&self, id: NodeId) -> &[F] {
        &self.nodes[id].value.values
    }

    /// Gradient of a leaf after `backward`.
    pub fn grad(&self, id: NodeId) -> Option<&[F]> {
        self.nodes[id].value.grad.as_deref()
    }

    pub fn leaf(&mut self, t: Tensor<F>) -> NodeId {
        self.push(Op::Leaf, t)
    }

    pub fn scalar_leaf(&mut self, v: F) -> NodeId {
        self.leaf(Tensor::scalar(v))
    }

    pub fn matvec(&mut self, m: NodeId, v: NodeId) -> NodeId {
        let (rows, cols) = (self.nodes[m].value.rows(), self.nodes[m].value.cols());
        assert_eq!(cols, self.nodes[v].value.len(), "matvec dim mismatch");
        let mv = &self.nodes[m].value.values;
        let vv = &self.nodes[v].value.values;
        let mut out = vec![F::zero(); rows];
        for r in 0..rows {
            let row = &mv[r * cols..(r + 1) * cols];
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(vv) {
                acc = acc + *a * *b;
            }
            out[r] = acc;
        }
        self.push(Op::MatVec { m, v }, Tensor::vector(out))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(
            self.nodes[a].value.len(),
            self.nodes[b].value.len(),
            "add dim mismatch"
        );
        let out: Vec<F> = self.nodes[a]
            .value
            .values
            .iter()
            .zip(&self.nodes[b].value.values)
            .map(|(x, y)| *x + *y)
            .collect();
        self.push(Op::Add { a, b }, Tensor::vector(out))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(
            self.nodes[a].value.len(),
            self.nodes[b].value.len(),
            "mul dim mismatch"
        );
        let out: Vec<F> = self.nodes[a]
            .value
            .values
            .iter()
            .zip(&self.nodes[b].value.values)
            .map(|(x, y)| *x * *y)
            .collect();
        self.push(Op::Mul { a, b }, Tensor::vector(out))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let out: Vec<F> = self.nodes[x]
            .value
            .values
            .iter()
            .map(|v| F::one() / (F::one() + (-*v).exp()))
            .collect();
        self.push(Op::Sigmoid { x }, Tensor::vector(out))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let out: Vec<F> = self.nodes[x].value.values.iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh { x }, Tensor::vector(out))
    }

    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let xs = &self.nodes[x].value.values;
        let max = xs.iter().cloned().fold(F::neg_infinity(), F::max);
        let exps: Vec<F> = xs.iter().map(|v| (*v - max).exp()).collect();
        let sum = exps.iter().fold(F::zero(), |a, b| a + *b);
        let out: Vec<F> = exps.into_iter().map(|e| e / sum).collect();
        self.push(Op::Softmax { x }, Tensor::vector(out))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(&self.nodes[p].value.values);
        }
        self.push(
            Op::Concat {
                parts: parts.to_vec(),
            },
            Tensor::vector(out),
        )
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let out = self.nodes[x].value.values[start..start + len].to_vec();
        self.push(Op::Slice { x, start, len }, Tensor::vector(out))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(
            self.nodes[a].value.len(),
            self.nodes[b].value.len(),
            "dot dim mismatch"
        );
        let mut acc = F::zero();
        for (x, y) in self.nodes[a]
            .value
            .values
            .iter()
            .zip(&self.nodes[b].value.values)
        {
            acc = acc + *x * *y;
        }
        self.push(Op::Dot { a, b }, Tensor::scalar(acc))
    }

    pub fn lin_comb(&mut self, weights: NodeId, rows: &[NodeId]) -> NodeId {
        assert_eq!(
            self.nodes[weights].value.len(),
            rows.len(),
            "one weight per row"
        );
        let dim = self.nodes[rows[0]].value.len();
        let mut out = vec![F::zero(); dim];
        for (j, &r) in rows.iter().enumerate() {
            let w = self.nodes[weights].value.values[j];
            for (o, v) in out.iter_mut().zip(&self.nodes[r].value.values) {
                *o = *o + w * *v;
            }
        }
        self.push(
            Op::LinComb {
                weights,
                rows: rows.to_vec(),
            },
            Tensor::vector(out),
        )
    }

    pub fn copy_mix(
        &mut self,
        gate: NodeId,
        vocab: NodeId,
        alpha: NodeId,
        ext_ids: Vec<usize>,
        ext_size: usize,
    ) -> NodeId {
        assert_eq!(self.nodes[gate].value.len(), 1, "gate is a scalar");
        assert_eq!(
            self.nodes[alpha].value.len(),
            ext_ids.len(),
            "one attention weight per input position"
        );
        let g = self.nodes[gate].value.values[0];
        let vocab_len = self.nodes[vocab].value.len();
        assert!(ext_size >= vocab_len, "extended vocab contains the vocab");
        let mut out = vec![F::zero(); ext_size];
        for (w, p) in self.nodes[vocab].value.values.iter().enumerate() {
            out[w] = g * *p;
        }
        let one_minus = F::one() - g;
        for (j, &ext) in ext_ids.iter().enumerate() {
            debug_assert!(ext < ext_size);
            out[ext] = out[ext] + one_minus * self.nodes[alpha].value.values[j];
        }
        self.push(
            Op::CopyMix {
                gate,
                vocab,
                alpha,
                ext_ids,
            },
            Tensor::vector(out),
        )
    }

    pub fn pick_log(&mut self, dist: NodeId, index: usize) -> NodeId {
        let p = self.nodes[dist].value.values[index];
        self.push(Op::PickLog { dist, index }, Tensor::scalar(p.ln()))
    }

    pub fn scale(&mut self, x: NodeId, c: F) -> NodeId {
        let out: Vec<F> = self.nodes[x].value.values.iter().map(|v| *v * c).collect();
        self.push(Op::Scale { x, c }, Tensor::vector(out))
    }

    pub fn mean(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "mean of nothing");
        let mut acc = F::zero();
        for &p in parts {
            assert_eq!(self.nodes[p].value.len(), 1, "mean is over scalars");
            acc = acc + self.nodes[p].value.values[0];
        }
        let n = F::from_f64(parts.len() as f64);
        self.push(
            Op::Mean {
                parts: parts.to_vec(),
            },
            Tensor::scalar(acc / n),
        )
    }

    pub fn mask_mul(&mut self, x: NodeId, mask: Vec<F>) -> NodeId {
        assert_eq!(self.nodes[x].value.len(), mask.len(), "mask dim mismatch");
        let out: Vec<F> = self.nodes[x]
            .value
            .values
            .iter()
            .zip(&mask)
            .map(|(v, m)| *v * *m)
            .collect();
        self.push(Op::MaskMul { x, mask }, Tensor::vector(out))
    }

    /// Reverse-mode sweep from a scalar node. Afterwards leaf nodes carry
    /// their gradients (`grad`); interior adjoints are consumed.
    pub fn backward(&mut self, loss: NodeId) {
        assert_eq!(self.nodes[loss].value.len(), 1, "backward needs a scalar");
        let n = self.nodes.len();
        let mut adj: Vec<Option<Vec<F>>> = vec![None; n];
        adj[loss] = Some(vec![F::one()]);

        for i in (0..=loss).rev() {
            let Some(g) = adj[i].take() else { continue };
            // Leaves keep their gradient for the caller.
            if matches!(self.nodes[i].op, Op::Leaf) {
                let slot = self.nodes[i].value.grad.get_or_insert_with(|| {
                    vec![F::zero(); g.len()]
                });
                for (s, gv) in slot.iter_mut().zip(&g) {
                    *s = *s + *gv;
                }
                continue;
            }
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf => unreachable!(),
                Op::MatVec { m, v } => {
                    let cols = self.nodes[m].value.cols();
                    let rows = self.nodes[m].value.rows();
                    {
                        let vv = self.nodes[v].value.values.clone();
                        let dm = Self::slot(&mut adj, m, rows * cols);
                        for r in 0..rows {
                            for c in 0..cols {
                                dm[r * cols + c] = dm[r * cols + c] + g[r] * vv[c];
                            }
                        }
                    }
                    {
                        let mv = self.nodes[m].value.values.clone();
                        let dv = Self::slot(&mut adj, v, cols);
                        for r in 0..rows {
                            for c in 0..cols {
                                dv[c] = dv[c] + mv[r * cols + c] * g[r];
                            }
                        }
                    }
                }
                Op::Add { a, b } => {
                    Self::accumulate(&mut adj, a, &g);
                    Self::accumulate(&mut adj, b, &g);
                }
                Op::Mul { a, b } => {
                    let av = self.nodes[a].value.values.clone();
                    let bv = self.nodes[b].value.values.clone();
                    let da: Vec<F> = g.iter().zip(&bv).map(|(g, b)| *g * *b).collect();
                    let db: Vec<F> = g.iter().zip(&av).map(|(g, a)| *g * *a).collect();
                    Self::accumulate(&mut adj, a, &da);
                    Self::accumulate(&mut adj, b, &db);
                }
                Op::Sigmoid { x } => {
                    let y = &self.nodes[i].value.values;
                    let dx: Vec<F> = g
                        .iter()
                        .zip(y)
                        .map(|(g, y)| *g * *y * (F::one() - *y))
                        .collect();
                    Self::accumulate(&mut adj, x, &dx);
                }
                Op::Tanh { x } => {
                    let y = &self.nodes[i].value.values;
                    let dx: Vec<F> = g
                        .iter()
                        .zip(y)
                        .map(|(g, y)| *g * (F::one() - *y * *y))
                        .collect();
                    Self::accumulate(&mut adj, x, &dx);
                }
                Op::Softmax { x } => {
                    let y = &self.nodes[i].value.values;
                    let mut gy = F::zero();
                    for (gj, yj) in g.iter().zip(y) {
                        gy = gy + *gj * *yj;
                    }
                    let dx: Vec<F> = g
                        .iter()
                        .zip(y)
                        .map(|(gi, yi)| *yi * (*gi - gy))
                        .collect();
                    Self::accumulate(&mut adj, x, &dx);
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p].value.len();
                        Self::accumulate(&mut adj, p, &g[offset..offset + len]);
                        offset += len;
                    }
                }
                Op::Slice { x, start, len } => {
                    let total = self.nodes[x].value.len();
                    let dx = Self::slot(&mut adj, x, total);
                    for k in 0..len {
                        dx[start + k] = dx[start + k] + g[k];
                    }
                }
                Op::Dot { a, b } => {
                    let av = self.nodes[a].value.values.clone();
                    let bv = self.nodes[b].value.values.clone();
                    let da: Vec<F> = bv.iter().map(|v| g[0] * *v).collect();
                    let db: Vec<F> = av.iter().map(|v| g[0] * *v).collect();
                    Self::accumulate(&mut adj, a, &da);
                    Self::accumulate(&mut adj, b, &db);
                }
                Op::LinComb { weights, rows } => {
                    let wv = self.nodes[weights].value.values.clone();
                    let mut dw = vec![F::zero(); rows.len()];
                    for (j, &r) in rows.iter().enumerate() {
                        let rv = &self.nodes[r].value.values;
                        let mut acc = F::zero();
                        for (gk, vk) in g.iter().zip(rv) {
                            acc = acc + *gk * *vk;
                        }
                        dw[j] = acc;
                        let dr: Vec<F> = g.iter().map(|gk| wv[j] * *gk).collect();
                        Self::accumulate(&mut adj, r, &dr);
                    }
                    Self::accumulate(&mut adj, weights, &dw);
                }
                Op::CopyMix {
                    gate,
                    vocab,
                    alpha,
                    ext_ids,
                } => {
                    let gv = self.nodes[gate].value.values[0];
                    let one_minus = F::one() - gv;
                    let pv = self.nodes[vocab].value.values.clone();
                    let av = self.nodes[alpha].value.values.clone();

                    let dvocab: Vec<F> = g[..pv.len()].iter().map(|gw| gv * *gw).collect();
                    Self::accumulate(&mut adj, vocab, &dvocab);

                    let dalpha: Vec<F> = ext_ids
                        .iter()
                        .map(|&ext| one_minus * g[ext])
                        .collect();
                    Self::accumulate(&mut adj, alpha, &dalpha);

                    let mut dgate = F::zero();
                    for (w, p) in pv.iter().enumerate() {
                        dgate = dgate + *p * g[w];
                    }
                    for (j, &ext) in ext_ids.iter().enumerate() {
                        dgate = dgate - av[j] * g[ext];
                    }
                    Self::accumulate(&mut adj, gate, &[dgate]);
                }
                Op::PickLog { dist, index } => {
                    let p = self.nodes[dist].value.values[index];
                    let total = self.nodes[dist].value.len();
                    let dd = Self::slot(&mut adj, dist, total);
                    dd[index] = dd[index] + g[0] / p;
                }
                Op::Scale { x, c } => {
                    let dx: Vec<F> = g.iter().map(|gv| *gv * c).collect();
                    Self::accumulate(&mut adj, x, &dx);
                }
                Op::Mean { parts } => {
                    let inv = F::one() / F::from_f64(parts.len() as f64);
                    for p in parts {
                        Self::accumulate(&mut adj, p, &[g[0] * inv]);
                    }
                }
                Op::MaskMul { x, mask } => {
                    let dx: Vec<F> = g.iter().zip(&mask).map(|(g, m)| *g * *m).collect();
                    Self::accumulate(&mut adj, x, &dx);
                }
            }
        }
    }

    fn slot<'a>(adj: &'a mut [Option<Vec<F>>], id: NodeId, len: usize) -> &'a mut Vec<F> {
        adj[id].get_or_insert_with(|| vec![F::zero(); len])
    }

    fn accumulate(adj: &mut [Option<Vec<F>>], id: NodeId, g: &[F]) {
        let slot = Self::slot(adj, id, g.len());
        for (s, gv) in slot.iter_mut().zip(g) {
            *s = *s + *gv;
        }
    }
}
