use std::borrow::Cow;

use rand::Rng;

use super::tensor::{matmul_into, Tensor};
use super::GradError;

/// Probability floor applied before taking the log in cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Transpose(usize),
    Add(usize, usize),
    AddTiled(usize, usize),
    LookupRows {
        table: usize,
        indices: Vec<usize>,
    },
    SoftmaxRows(usize),
    SoftmaxCols {
        x: usize,
        block: usize,
    },
    RowL1Normalize(usize),
    Relu(usize),
    Conv1dValid {
        x: usize,
        kernels: usize,
        block: usize,
        width: usize,
    },
    MaxPoolGroups {
        x: usize,
        argmax: Vec<usize>,
    },
    Dropout {
        x: usize,
        mask: Vec<f64>,
    },
    ScalarDiv(usize, f64),
    Sum(usize),
    CrossEntropy {
        probs: usize,
        labels: Vec<usize>,
    },
}

struct Node<'a> {
    value: Cow<'a, Tensor>,
    op: Op,
    requires_grad: bool,
}

/// Records a forward computation so it can be differentiated once.
///
/// Leaves may borrow their tensors, which lets inference run over shared
/// parameters without copying them.
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
    consumed: bool,
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `var`, if it required one.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    /// Takes ownership of a gradient, leaving `None` behind.
    pub fn take(&mut self, var: Var) -> Option<Tensor> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }
}

fn shape_err(op: &'static str, detail: String) -> GradError {
    GradError::ShapeMismatch { op, detail }
}

fn require_matrix(op: &'static str, t: &Tensor) -> Result<(), GradError> {
    if t.is_matrix() {
        Ok(())
    } else {
        Err(shape_err(op, format!("expected a matrix, got shape {:?}", t.shape())))
    }
}

impl<'a> Default for Tape<'a> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            consumed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[usize]) -> Var {
        let requires_grad = inputs.iter().any(|&i| self.nodes[i].requires_grad);
        self.nodes.push(Node {
            value: Cow::Owned(value),
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_leaf(&mut self, value: Cow<'a, Tensor>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Registers a trainable tensor; its gradient is reported by `backward`.
    pub fn param(&mut self, t: &'a Tensor) -> Var {
        self.push_leaf(Cow::Borrowed(t), true)
    }

    pub fn param_owned(&mut self, t: Tensor) -> Var {
        self.push_leaf(Cow::Owned(t), true)
    }

    pub fn constant(&mut self, t: &'a Tensor) -> Var {
        self.push_leaf(Cow::Borrowed(t), false)
    }

    pub fn constant_owned(&mut self, t: Tensor) -> Var {
        self.push_leaf(Cow::Owned(t), false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, GradError> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a.0, b.0), &[a.0, b.0]))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var, GradError> {
        require_matrix("transpose", self.value(a))?;
        let out = self.value(a).transpose();
        Ok(self.push(out, Op::Transpose(a.0), &[a.0]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, GradError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("add", format!("{:?} + {:?}", ta.shape(), tb.shape())));
        }
        let mut out = ta.clone();
        out.add_assign(tb);
        Ok(self.push(out, Op::Add(a.0, b.0), &[a.0, b.0]))
    }

    /// Adds an `r×c` tile to every consecutive block of `r` rows of `a`.
    pub fn add_tiled(&mut self, a: Var, tile: Var) -> Result<Var, GradError> {
        let (ta, tt) = (self.value(a), self.value(tile));
        require_matrix("add_tiled", ta)?;
        require_matrix("add_tiled", tt)?;
        if tt.rows() == 0 || ta.cols() != tt.cols() || ta.rows() % tt.rows() != 0 {
            return Err(shape_err(
                "add_tiled",
                format!("{:?} tiled with {:?}", ta.shape(), tt.shape()),
            ));
        }
        let block = tt.len();
        let mut out = ta.clone();
        for chunk in out.data_mut().chunks_mut(block) {
            for (o, t) in chunk.iter_mut().zip(tt.data()) {
                *o += *t;
            }
        }
        Ok(self.push(out, Op::AddTiled(a.0, tile.0), &[a.0, tile.0]))
    }

    /// Gathers rows of `table`; equivalent to a one-hot matrix times `table`.
    pub fn lookup_rows(&mut self, table: Var, indices: &[usize]) -> Result<Var, GradError> {
        let tt = self.value(table);
        require_matrix("lookup_rows", tt)?;
        let (rows, cols) = (tt.rows(), tt.cols());
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            if i >= rows {
                return Err(GradError::IndexOutOfRange { index: i, rows });
            }
            data.extend_from_slice(tt.row(i));
        }
        let out = Tensor::new(vec![indices.len(), cols], data)?;
        Ok(self.push(
            out,
            Op::LookupRows {
                table: table.0,
                indices: indices.to_vec(),
            },
            &[table.0],
        ))
    }

    pub fn softmax_rows(&mut self, x: Var) -> Result<Var, GradError> {
        let t = self.value(x);
        require_matrix("softmax_rows", t)?;
        let cols = t.cols();
        let mut out = t.clone();
        for row in out.data_mut().chunks_mut(cols.max(1)) {
            softmax_in_place(row);
        }
        Ok(self.push(out, Op::SoftmaxRows(x.0), &[x.0]))
    }

    /// Column-wise softmax over the whole matrix.
    pub fn softmax_cols(&mut self, x: Var) -> Result<Var, GradError> {
        let rows = self.value(x).rows();
        self.softmax_cols_blocked(x, rows)
    }

    /// Column-wise softmax applied independently to each block of `block`
    /// consecutive rows (one block per sample in a stacked batch).
    pub fn softmax_cols_blocked(&mut self, x: Var, block: usize) -> Result<Var, GradError> {
        let t = self.value(x);
        require_matrix("softmax_cols", t)?;
        if block == 0 || t.rows() % block != 0 {
            return Err(shape_err(
                "softmax_cols",
                format!("{} rows not divisible into blocks of {}", t.rows(), block),
            ));
        }
        let cols = t.cols();
        let mut out = t.clone();
        let mut column = vec![0.0; block];
        for chunk in out.data_mut().chunks_mut(block * cols) {
            for c in 0..cols {
                for (r, v) in column.iter_mut().enumerate() {
                    *v = chunk[r * cols + c];
                }
                softmax_in_place(&mut column);
                for (r, v) in column.iter().enumerate() {
                    chunk[r * cols + c] = *v;
                }
            }
        }
        Ok(self.push(out, Op::SoftmaxCols { x: x.0, block }, &[x.0]))
    }

    /// Divides every row by its sum. A row summing to zero becomes uniform.
    pub fn row_l1_normalize(&mut self, x: Var) -> Result<Var, GradError> {
        let t = self.value(x);
        require_matrix("row_l1_normalize", t)?;
        let cols = t.cols();
        let mut out = t.clone();
        for row in out.data_mut().chunks_mut(cols.max(1)) {
            let s: f64 = row.iter().sum();
            if s == 0.0 {
                row.fill(1.0 / cols as f64);
            } else {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(self.push(out, Op::RowL1Normalize(x.0), &[x.0]))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| {
            if *v <= 0.0 {
                *v = 0.0;
            }
        });
        self.push(out, Op::Relu(x.0), &[x.0])
    }

    /// Valid 1D convolution along the row axis.
    ///
    /// `x` stacks samples of `block` rows by `D` columns. `kernels` has one
    /// row per kernel holding a `width×D` window in row-major order, so the
    /// window starting at row `u` is a contiguous slice of `x`. Output has
    /// `block - width + 1` rows per sample and one column per kernel; each
    /// entry is the total sum of the elementwise window-kernel product.
    pub fn conv1d_valid(
        &mut self,
        x: Var,
        kernels: Var,
        block: usize,
        width: usize,
    ) -> Result<Var, GradError> {
        let (tx, tk) = (self.value(x), self.value(kernels));
        require_matrix("conv1d_valid", tx)?;
        let d = tx.cols();
        let span = width * d;
        if width == 0 || block < width || tx.rows() % block != 0 || tk.cols() != span {
            return Err(shape_err(
                "conv1d_valid",
                format!(
                    "input {:?}, kernels {:?}, block {}, width {}",
                    tx.shape(),
                    tk.shape(),
                    block,
                    width
                ),
            ));
        }
        let n_kernels = tk.rows();
        let positions = block - width + 1;
        let batch = tx.rows() / block;
        let mut out = vec![0.0; batch * positions * n_kernels];
        let (xd, kd) = (tx.data(), tk.data());
        for b in 0..batch {
            for u in 0..positions {
                let start = (b * block + u) * d;
                let window = &xd[start..start + span];
                let out_row = &mut out[(b * positions + u) * n_kernels..][..n_kernels];
                for (l, o) in out_row.iter_mut().enumerate() {
                    *o = dot(window, &kd[l * span..(l + 1) * span]);
                }
            }
        }
        let out = Tensor::new(vec![batch * positions, n_kernels], out)?;
        Ok(self.push(
            out,
            Op::Conv1dValid {
                x: x.0,
                kernels: kernels.0,
                block,
                width,
            },
            &[x.0, kernels.0],
        ))
    }

    /// Column-wise max over each group of `group` consecutive rows.
    /// Ties resolve to the first row, which is where the gradient goes.
    pub fn max_pool_groups(&mut self, x: Var, group: usize) -> Result<Var, GradError> {
        let t = self.value(x);
        require_matrix("max_pool", t)?;
        if group == 0 || t.rows() % group != 0 {
            return Err(shape_err(
                "max_pool",
                format!("{} rows not divisible into groups of {}", t.rows(), group),
            ));
        }
        let cols = t.cols();
        let batch = t.rows() / group;
        let mut out = vec![0.0; batch * cols];
        let mut argmax = vec![0; batch * cols];
        for b in 0..batch {
            for c in 0..cols {
                let mut best = b * group;
                for r in b * group + 1..(b + 1) * group {
                    if t.get(r, c) > t.get(best, c) {
                        best = r;
                    }
                }
                out[b * cols + c] = t.get(best, c);
                argmax[b * cols + c] = best;
            }
        }
        let out = Tensor::new(vec![batch, cols], out)?;
        Ok(self.push(out, Op::MaxPoolGroups { x: x.0, argmax }, &[x.0]))
    }

    /// Inverted dropout. Outside training, or with `p == 0`, returns `x`
    /// unchanged without recording anything.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        x: Var,
        p: f64,
        rng: &mut R,
        train: bool,
    ) -> Result<Var, GradError> {
        if !(0.0..1.0).contains(&p) {
            return Err(GradError::BadProbability(p));
        }
        if !train || p == 0.0 {
            return Ok(x);
        }
        let scale = 1.0 / (1.0 - p);
        let t = self.value(x);
        let mask: Vec<f64> = (0..t.len())
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { scale })
            .collect();
        let mut out = t.clone();
        out.data_mut()
            .iter_mut()
            .zip(&mask)
            .for_each(|(v, m)| *v *= m);
        Ok(self.push(out, Op::Dropout { x: x.0, mask }, &[x.0]))
    }

    pub fn scalar_div(&mut self, x: Var, divisor: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v /= divisor);
        self.push(out, Op::ScalarDiv(x.0, divisor), &[x.0])
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let out = Tensor::scalar(self.value(x).sum());
        self.push(out, Op::Sum(x.0), &[x.0])
    }

    /// Mean over rows of `-ln(max(p[label], 1e-12))`.
    pub fn cross_entropy(&mut self, probs: Var, labels: &[usize]) -> Result<Var, GradError> {
        let t = self.value(probs);
        require_matrix("cross_entropy", t)?;
        if t.rows() != labels.len() || labels.is_empty() {
            return Err(shape_err(
                "cross_entropy",
                format!("{} prediction rows vs {} labels", t.rows(), labels.len()),
            ));
        }
        let classes = t.cols();
        let mut total = 0.0;
        for (r, &y) in labels.iter().enumerate() {
            if y >= classes {
                return Err(GradError::LabelOutOfRange { label: y, classes });
            }
            debug_assert!(t.row(r).iter().any(|p| p.is_nan()) || (t.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-6);
            let p = t.get(r, y);
            total -= if p.is_nan() { p } else { p.max(PROB_FLOOR).ln() };
        }
        let out = Tensor::scalar(total / labels.len() as f64);
        Ok(self.push(
            out,
            Op::CrossEntropy {
                probs: probs.0,
                labels: labels.to_vec(),
            },
            &[probs.0],
        ))
    }

    /// Reverse pass from a scalar node. The tape can be differentiated once.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients, GradError> {
        if self.consumed {
            return Err(GradError::GraphConsumed);
        }
        if self.value(loss).len() != 1 {
            return Err(GradError::NotScalar(self.value(loss).shape().to_vec()));
        }
        self.consumed = true;

        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        if self.nodes[loss.0].requires_grad {
            grads[loss.0] = Some(Tensor::filled(self.value(loss).shape(), 1.0));
        }

        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            self.propagate(node, &g, &mut grads);
            if matches!(node.op, Op::Leaf) {
                grads[id] = Some(g);
            }
        }

        // Intermediate gradients were consumed above; only leaves remain.
        Ok(Gradients { grads })
    }

    fn wants(&self, i: usize) -> bool {
        self.nodes[i].requires_grad
    }

    fn propagate(&self, node: &Node<'a>, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let val = |i: usize| -> &Tensor { &self.nodes[i].value };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (val(*a), val(*b));
                let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                if self.wants(*a) {
                    // dA = dC · Bᵀ
                    let mut da = vec![0.0; m * k];
                    for i in 0..m {
                        let g_row = &g.data()[i * n..(i + 1) * n];
                        for p in 0..k {
                            da[i * k + p] = dot(g_row, tb.row(p));
                        }
                    }
                    accumulate(grads, *a, ta.shape(), da);
                }
                if self.wants(*b) {
                    // dB = Aᵀ · dC
                    let at = ta.transpose();
                    let mut db = vec![0.0; k * n];
                    matmul_into(at.data(), g.data(), &mut db, k, m, n);
                    accumulate(grads, *b, tb.shape(), db);
                }
            }
            Op::Transpose(a) => {
                if self.wants(*a) {
                    accumulate(grads, *a, val(*a).shape(), g.transpose().into_data());
                }
            }
            Op::Add(a, b) => {
                for &i in [a, b] {
                    if self.wants(i) {
                        accumulate(grads, i, val(i).shape(), g.data().to_vec());
                    }
                }
            }
            Op::AddTiled(a, tile) => {
                if self.wants(*a) {
                    accumulate(grads, *a, val(*a).shape(), g.data().to_vec());
                }
                if self.wants(*tile) {
                    let tt = val(*tile);
                    let mut dt = vec![0.0; tt.len()];
                    for chunk in g.data().chunks(tt.len()) {
                        dt.iter_mut().zip(chunk).for_each(|(d, v)| *d += v);
                    }
                    accumulate(grads, *tile, tt.shape(), dt);
                }
            }
            Op::LookupRows { table, indices } => {
                if self.wants(*table) {
                    let tt = val(*table);
                    let cols = tt.cols();
                    let mut dt = vec![0.0; tt.len()];
                    for (r, &i) in indices.iter().enumerate() {
                        let src = &g.data()[r * cols..(r + 1) * cols];
                        dt[i * cols..(i + 1) * cols]
                            .iter_mut()
                            .zip(src)
                            .for_each(|(d, v)| *d += v);
                    }
                    accumulate(grads, *table, tt.shape(), dt);
                }
            }
            Op::SoftmaxRows(x) => {
                if self.wants(*x) {
                    let y = &node.value;
                    let cols = y.cols();
                    let mut dx = vec![0.0; y.len()];
                    for r in 0..y.rows() {
                        let (yr, gr) = (y.row(r), &g.data()[r * cols..(r + 1) * cols]);
                        let s = dot(yr, gr);
                        for c in 0..cols {
                            dx[r * cols + c] = yr[c] * (gr[c] - s);
                        }
                    }
                    accumulate(grads, *x, val(*x).shape(), dx);
                }
            }
            Op::SoftmaxCols { x, block } => {
                if self.wants(*x) {
                    let y = &node.value;
                    let cols = y.cols();
                    let (yd, gd) = (y.data(), g.data());
                    let mut dx = vec![0.0; y.len()];
                    for start in (0..y.rows()).step_by(*block) {
                        for c in 0..cols {
                            let idx = |r: usize| (start + r) * cols + c;
                            let s: f64 = (0..*block).map(|r| yd[idx(r)] * gd[idx(r)]).sum();
                            for r in 0..*block {
                                dx[idx(r)] = yd[idx(r)] * (gd[idx(r)] - s);
                            }
                        }
                    }
                    accumulate(grads, *x, val(*x).shape(), dx);
                }
            }
            Op::RowL1Normalize(x) => {
                if self.wants(*x) {
                    let tx = val(*x);
                    let cols = tx.cols();
                    let mut dx = vec![0.0; tx.len()];
                    for r in 0..tx.rows() {
                        let xr = tx.row(r);
                        let s: f64 = xr.iter().sum();
                        if s == 0.0 {
                            continue;
                        }
                        let gr = &g.data()[r * cols..(r + 1) * cols];
                        let cross = dot(gr, xr) / (s * s);
                        for c in 0..cols {
                            dx[r * cols + c] = gr[c] / s - cross;
                        }
                    }
                    accumulate(grads, *x, tx.shape(), dx);
                }
            }
            Op::Relu(x) => {
                if self.wants(*x) {
                    let tx = val(*x);
                    let dx = tx
                        .data()
                        .iter()
                        .zip(g.data())
                        .map(|(v, d)| if *v > 0.0 { *d } else { 0.0 })
                        .collect();
                    accumulate(grads, *x, tx.shape(), dx);
                }
            }
            Op::Conv1dValid {
                x,
                kernels,
                block,
                width,
            } => {
                let (tx, tk) = (val(*x), val(*kernels));
                let d = tx.cols();
                let span = width * d;
                let n_kernels = tk.rows();
                let positions = block - width + 1;
                let batch = tx.rows() / block;
                let (xd, kd, gd) = (tx.data(), tk.data(), g.data());
                let want_x = self.wants(*x);
                let want_k = self.wants(*kernels);
                let mut dx = if want_x { vec![0.0; tx.len()] } else { Vec::new() };
                let mut dk = if want_k { vec![0.0; tk.len()] } else { Vec::new() };
                for b in 0..batch {
                    for u in 0..positions {
                        let start = (b * block + u) * d;
                        let g_row = &gd[(b * positions + u) * n_kernels..][..n_kernels];
                        for (l, &gv) in g_row.iter().enumerate() {
                            if gv == 0.0 {
                                continue;
                            }
                            if want_k {
                                let window = &xd[start..start + span];
                                axpy(gv, window, &mut dk[l * span..(l + 1) * span]);
                            }
                            if want_x {
                                let kernel = &kd[l * span..(l + 1) * span];
                                axpy(gv, kernel, &mut dx[start..start + span]);
                            }
                        }
                    }
                }
                if want_x {
                    accumulate(grads, *x, tx.shape(), dx);
                }
                if want_k {
                    accumulate(grads, *kernels, tk.shape(), dk);
                }
            }
            Op::MaxPoolGroups { x, argmax } => {
                if self.wants(*x) {
                    let tx = val(*x);
                    let cols = tx.cols();
                    let mut dx = vec![0.0; tx.len()];
                    for (i, &src_row) in argmax.iter().enumerate() {
                        dx[src_row * cols + i % cols] += g.data()[i];
                    }
                    accumulate(grads, *x, tx.shape(), dx);
                }
            }
            Op::Dropout { x, mask } => {
                if self.wants(*x) {
                    let dx = g.data().iter().zip(mask).map(|(d, m)| d * m).collect();
                    accumulate(grads, *x, val(*x).shape(), dx);
                }
            }
            Op::ScalarDiv(x, divisor) => {
                if self.wants(*x) {
                    let dx = g.data().iter().map(|d| d / divisor).collect();
                    accumulate(grads, *x, val(*x).shape(), dx);
                }
            }
            Op::Sum(x) => {
                if self.wants(*x) {
                    let tx = val(*x);
                    accumulate(grads, *x, tx.shape(), vec![g.item(); tx.len()]);
                }
            }
            Op::CrossEntropy { probs, labels } => {
                if self.wants(*probs) {
                    let tp = val(*probs);
                    let cols = tp.cols();
                    let scale = g.item() / labels.len() as f64;
                    let mut dp = vec![0.0; tp.len()];
                    for (r, &y) in labels.iter().enumerate() {
                        let p = tp.get(r, y);
                        if p > PROB_FLOOR {
                            dp[r * cols + y] = -scale / p;
                        }
                    }
                    accumulate(grads, *probs, tp.shape(), dp);
                }
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Tensor>], id: usize, shape: &[usize], data: Vec<f64>) {
    match &mut grads[id] {
        Some(existing) => {
            for (e, v) in existing.data_mut().iter_mut().zip(&data) {
                *e += v;
            }
        }
        slot @ None => {
            *slot = Some(Tensor::new(shape.to_vec(), data).expect("gradient shape"));
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

/// Max-shifted softmax of a slice, in place.
fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    v.iter_mut().for_each(|x| *x /= total);
}
