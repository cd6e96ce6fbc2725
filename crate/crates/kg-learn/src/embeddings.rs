//! Translational and bilinear embedding models: TransE, TransH, DistMult,
//! RESCAL and ComplEx.
//!
//! Parameters live in name-indexed tables of flat `f64` rows. ComplEx rows
//! hold `d` real parts followed by `d` imaginary parts; RESCAL relation
//! rows are `d × d` matrices in row-major order; TransH keeps its
//! hyperplane normals in the auxiliary table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use kg_core::{Edge, Graph};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tensor::{dot, matmul, norm_p, ComplexTensor, Tensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown edge label `{0}`")]
    UnknownLabel(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    TransE,
    TransH,
    DistMult,
    Rescal,
    ComplEx,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::TransE, ModelKind::TransH, ModelKind::DistMult, ModelKind::Rescal, ModelKind::ComplEx];

    /// Stored row lengths for entities and relations at dimension `d`.
    fn row_lens(self, d: usize) -> (usize, usize) {
        match self {
            ModelKind::TransE | ModelKind::TransH | ModelKind::DistMult => (d, d),
            ModelKind::Rescal => (d, d * d),
            ModelKind::ComplEx => (2 * d, 2 * d),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TransE => "transe",
            ModelKind::TransH => "transh",
            ModelKind::DistMult => "distmult",
            ModelKind::Rescal => "rescal",
            ModelKind::ComplEx => "complex",
        })
    }
}

impl FromStr for ModelKind {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| EmbeddingError::Config(format!("unknown model `{s}` (expected transe, transh, distmult, rescal or complex)")))
    }
}

/// Named rows of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn insert(&mut self, name: &str, row: Vec<f64>) -> bool {
        if self.index.contains_key(name) {
            return false;
        }
        self.index.insert(name.to_string(), self.rows.len());
        self.names.push(name.to_string());
        self.rows.push(row);
        true
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.rows[i].as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub kind: ModelKind,
    pub dim: usize,
    pub seed: u64,
    /// Norm exponent of the TransE distance (1 or 2).
    pub q: u32,
    pub entities: Table,
    pub relations: Table,
    /// TransH hyperplane normals, keyed by relation.
    pub aux: Table,
}

/// Gradient of the score for one edge, split by parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub o: Vec<f64>,
    /// TransH normal; empty for the other models.
    pub w: Vec<f64>,
}

/// Score of `(s, r, o)` for raw parameter rows.
pub fn score_raw(kind: ModelKind, q: u32, s: &[f64], r: &[f64], o: &[f64], w: &[f64]) -> f64 {
    match kind {
        ModelKind::TransE => {
            let v: Vec<f64> = (0..s.len()).map(|i| s[i] + r[i] - o[i]).collect();
            -norm_p(&v, f64::from(q))
        }
        ModelKind::TransH => {
            let v = transh_residual(s, r, o, w);
            -dot(&v, &v)
        }
        ModelKind::DistMult => (0..s.len()).map(|i| r[i] * (s[i] * o[i])).sum(),
        ModelKind::Rescal => {
            let d = s.len();
            let row = Tensor::matrix(1, d, s.to_vec()).expect("d > 0");
            let m = Tensor::matrix(d, d, r.to_vec()).expect("d > 0");
            let col = Tensor::matrix(d, 1, o.to_vec()).expect("d > 0");
            let sr = matmul(&row, &m).expect("shapes agree");
            matmul(&sr, &col).expect("shapes agree").data()[0]
        }
        ModelKind::ComplEx => {
            let (es, rp, eo) = (split(s), split(r), split(o));
            es.hadamard(&rp).and_then(|x| x.hadamard(&eo.conj())).expect("equal dimensions").sum().re
        }
    }
}

fn split(x: &[f64]) -> ComplexTensor {
    ComplexTensor::from_split(x).expect("complex rows have even length")
}

/// `(s − (sᵀw)w) + r − (o − (oᵀw)w)`.
fn transh_residual(s: &[f64], r: &[f64], o: &[f64], w: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = s.iter().zip(o).map(|(a, b)| a - b).collect();
    let uw = dot(&u, w);
    (0..s.len()).map(|i| u[i] - uw * w[i] + r[i]).collect()
}

/// Hand-derived gradient of [`score_raw`].
pub fn gradient_raw(kind: ModelKind, q: u32, s: &[f64], r: &[f64], o: &[f64], w: &[f64]) -> Gradient {
    let d = s.len();
    match kind {
        ModelKind::TransE => {
            let v: Vec<f64> = (0..d).map(|i| s[i] + r[i] - o[i]).collect();
            let g: Vec<f64> = if q == 1 {
                v.iter().map(|x| -x.signum() * f64::from(*x != 0.0)).collect()
            } else {
                let n = norm_p(&v, 2.0);
                if n < 1e-12 {
                    vec![0.0; d]
                } else {
                    v.iter().map(|x| -x / n).collect()
                }
            };
            Gradient { s: g.clone(), r: g.clone(), o: g.iter().map(|x| -x).collect(), w: Vec::new() }
        }
        ModelKind::TransH => {
            let v = transh_residual(s, r, o, w);
            let gv: Vec<f64> = v.iter().map(|x| -2.0 * x).collect();
            let wg = dot(w, &gv);
            let gs: Vec<f64> = (0..d).map(|i| gv[i] - wg * w[i]).collect();
            let u: Vec<f64> = s.iter().zip(o).map(|(a, b)| a - b).collect();
            let uw = dot(&u, w);
            Gradient {
                o: gs.iter().map(|x| -x).collect(),
                s: gs,
                w: (0..d).map(|i| -wg * u[i] - uw * gv[i]).collect(),
                r: gv,
            }
        }
        ModelKind::DistMult => Gradient {
            s: (0..d).map(|i| r[i] * o[i]).collect(),
            r: (0..d).map(|i| s[i] * o[i]).collect(),
            o: (0..d).map(|i| s[i] * r[i]).collect(),
            w: Vec::new(),
        },
        ModelKind::Rescal => Gradient {
            s: (0..d).map(|i| (0..d).map(|j| r[i * d + j] * o[j]).sum()).collect(),
            r: (0..d * d).map(|k| s[k / d] * o[k % d]).collect(),
            o: (0..d).map(|j| (0..d).map(|i| s[i] * r[i * d + j]).sum()).collect(),
            w: Vec::new(),
        },
        ModelKind::ComplEx => {
            // score = Σ (ac − bd)e + (ad + bc)f with s = a+ib, r = c+id, o = e+if.
            let h = d / 2;
            let (a, b) = s.split_at(h);
            let (c, dd) = r.split_at(h);
            let (e, f) = o.split_at(h);
            let mut gs = vec![0.0; d];
            let mut gr = vec![0.0; d];
            let mut go = vec![0.0; d];
            for i in 0..h {
                gs[i] = c[i] * e[i] + dd[i] * f[i];
                gs[h + i] = -dd[i] * e[i] + c[i] * f[i];
                gr[i] = a[i] * e[i] + b[i] * f[i];
                gr[h + i] = -b[i] * e[i] + a[i] * f[i];
                go[i] = a[i] * c[i] - b[i] * dd[i];
                go[h + i] = a[i] * dd[i] + b[i] * c[i];
            }
            Gradient { s: gs, r: gr, o: go, w: Vec::new() }
        }
    }
}

/// TransH soft orthogonality penalty `max(0, (wᵀr)²/‖r‖² − ε²)`.
pub fn orthogonality_penalty(w: &[f64], r: &[f64], eps: f64) -> f64 {
    let rr = dot(r, r);
    if rr < 1e-24 {
        return 0.0;
    }
    (dot(w, r).powi(2) / rr - eps * eps).max(0.0)
}

/// Gradient of [`orthogonality_penalty`] as `(∂w, ∂r)`.
pub fn orthogonality_gradient(w: &[f64], r: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
    let d = w.len();
    if orthogonality_penalty(w, r, eps) == 0.0 {
        return (vec![0.0; d], vec![0.0; d]);
    }
    let rr = dot(r, r);
    let wr = dot(w, r);
    let gw = r.iter().map(|x| 2.0 * wr * x / rr).collect();
    let gr = (0..d).map(|i| 2.0 * wr * w[i] / rr - 2.0 * wr * wr * r[i] / (rr * rr)).collect();
    (gw, gr)
}

fn scale_to(x: &mut [f64], target: f64) {
    let n = norm_p(x, 2.0);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v *= target / n);
    } else {
        x[0] = target;
    }
}

fn clip(x: &mut [f64], max: f64) {
    let n = norm_p(x, 2.0);
    if n > max {
        x.iter_mut().for_each(|v| *v *= max / n);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Entity,
    Relation,
    Aux,
}

impl EmbeddingModel {
    fn lookup(&self, e: &Edge) -> Result<(usize, usize, usize), EmbeddingError> {
        let s = *self.entities.index.get(&e.s).ok_or_else(|| EmbeddingError::UnknownNode(e.s.clone()))?;
        let r = *self.relations.index.get(&e.p).ok_or_else(|| EmbeddingError::UnknownLabel(e.p.clone()))?;
        let o = *self.entities.index.get(&e.o).ok_or_else(|| EmbeddingError::UnknownNode(e.o.clone()))?;
        Ok((s, r, o))
    }

    fn aux_row(&self, r: usize) -> &[f64] {
        match self.kind {
            ModelKind::TransH => &self.aux.rows[r],
            _ => &[],
        }
    }

    fn score_idx(&self, s: usize, r: usize, o: usize) -> f64 {
        score_raw(self.kind, self.q, &self.entities.rows[s], &self.relations.rows[r], &self.entities.rows[o], self.aux_row(r))
    }

    pub fn score(&self, e: &Edge) -> Result<f64, EmbeddingError> {
        let (s, r, o) = self.lookup(e)?;
        Ok(self.score_idx(s, r, o))
    }

    pub fn gradient(&self, e: &Edge) -> Result<Gradient, EmbeddingError> {
        let (s, r, o) = self.lookup(e)?;
        let rel = &self.relations.rows[r];
        Ok(gradient_raw(self.kind, self.q, &self.entities.rows[s], rel, &self.entities.rows[o], self.aux_row(r)))
    }

    /// Mutable access to one parameter row, for perturbation checks.
    pub fn row_mut(&mut self, slot: Slot, name: &str) -> Option<&mut Vec<f64>> {
        let t = match slot {
            Slot::Entity => &mut self.entities,
            Slot::Relation => &mut self.relations,
            Slot::Aux => &mut self.aux,
        };
        let i = *t.index.get(name)?;
        Some(&mut t.rows[i])
    }

    /// Top-`k` objects for `(s, p, ?)` by score, ties broken by name.
    pub fn predict(&self, s: &str, p: &str, k: usize) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let si = *self.entities.index.get(s).ok_or_else(|| EmbeddingError::UnknownNode(s.to_string()))?;
        let ri = *self.relations.index.get(p).ok_or_else(|| EmbeddingError::UnknownLabel(p.to_string()))?;
        let mut ranked: Vec<(String, f64)> =
            self.entities.index.iter().map(|(name, &oi)| (name.clone(), self.score_idx(si, ri, oi))).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        Ok(ranked)
    }

    /// Applies the norm constraints of the model kind to every row.
    pub fn project(&mut self) {
        for i in 0..self.entities.rows.len() {
            self.project_entity(i);
        }
        for i in 0..self.relations.rows.len() {
            self.project_relation(i);
        }
    }

    fn project_entity(&mut self, i: usize) {
        let e = &mut self.entities.rows[i];
        match self.kind {
            ModelKind::TransE | ModelKind::DistMult => scale_to(e, 1.0),
            ModelKind::TransH | ModelKind::Rescal | ModelKind::ComplEx => clip(e, 1.0),
        }
    }

    fn project_relation(&mut self, i: usize) {
        match self.kind {
            ModelKind::TransE => {}
            ModelKind::TransH => scale_to(&mut self.aux.rows[i], 1.0),
            ModelKind::DistMult | ModelKind::ComplEx | ModelKind::Rescal => clip(&mut self.relations.rows[i], 1.0),
        }
    }

    /// Largest deviation from the model's norm constraints.
    pub fn constraint_violation(&self) -> f64 {
        let norms = |t: &Table| t.rows.iter().map(|r| norm_p(r, 2.0)).collect::<Vec<_>>();
        let eq = |v: Vec<f64>| v.into_iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
        let le = |v: Vec<f64>| v.into_iter().map(|n| (n - 1.0).max(0.0)).fold(0.0, f64::max);
        match self.kind {
            ModelKind::TransE => eq(norms(&self.entities)),
            ModelKind::TransH => le(norms(&self.entities)).max(eq(norms(&self.aux))),
            ModelKind::DistMult => eq(norms(&self.entities)).max(le(norms(&self.relations))),
            // The flat 2-norm of a d×d row equals its L^{2,2} norm.
            ModelKind::Rescal | ModelKind::ComplEx => le(norms(&self.entities)).max(le(norms(&self.relations))),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("H\tkind={}\td_e={}\td_r={}\tseed={}\tq={}\n", self.kind, self.dim, self.dim, self.seed, self.q);
        for (tag, table) in [("E", &self.entities), ("R", &self.relations), ("AUX", &self.aux)] {
            for (name, &i) in &table.index {
                out.push_str(tag);
                out.push('\t');
                out.push_str(name);
                for v in &table.rows[i] {
                    out.push('\t');
                    out.push_str(&v.to_string());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<EmbeddingModel, EmbeddingError> {
        let err = |line: usize, reason: String| EmbeddingError::Parse { line, reason };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let mut fields = header.split('\t');
        if fields.next() != Some("H") {
            return Err(err(hl + 1, "first line must be the `H` header".into()));
        }
        let mut kv = BTreeMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| err(hl + 1, format!("expected key=value, got `{f}`")))?;
            kv.insert(k, v);
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| err(hl + 1, format!("header lacks `{k}`")));
        let num = |k: &str| -> Result<u64, EmbeddingError> {
            get(k)?.parse().map_err(|_| err(hl + 1, format!("`{k}` is not a non-negative integer")))
        };
        let kind: ModelKind = get("kind")?.parse().map_err(|e: EmbeddingError| err(hl + 1, e.to_string()))?;
        let dim = num("d_e")? as usize;
        if dim == 0 || num("d_r")? as usize != dim {
            return Err(err(hl + 1, "d_e must be positive and equal to d_r".into()));
        }
        let q = kv.get("q").map_or(Ok(2), |_| num("q"))? as u32;
        let mut m = EmbeddingModel {
            kind,
            dim,
            seed: num("seed")?,
            q,
            entities: Table::default(),
            relations: Table::default(),
            aux: Table::default(),
        };
        let (elen, rlen) = kind.row_lens(dim);
        for (i, line) in lines {
            let mut parts = line.split('\t');
            let tag = parts.next().unwrap_or_default();
            let name = parts.next().ok_or_else(|| err(i + 1, "missing name".into()))?;
            let row: Vec<f64> = parts
                .map(|v| v.parse::<f64>().map_err(|_| err(i + 1, format!("`{v}` is not a number"))))
                .collect::<Result<_, _>>()?;
            let (table, len) = match tag {
                "E" => (&mut m.entities, elen),
                "R" => (&mut m.relations, rlen),
                "AUX" if kind == ModelKind::TransH => (&mut m.aux, dim),
                _ => return Err(err(i + 1, format!("unexpected row tag `{tag}` for {kind}"))),
            };
            if row.len() != len {
                return Err(err(i + 1, format!("expected {len} values, got {}", row.len())));
            }
            if !table.insert(name, row) {
                return Err(err(i + 1, format!("duplicate row for `{name}`")));
            }
        }
        if kind == ModelKind::TransH {
            let missing: Vec<&str> = m.relations.names().filter(|r| m.aux.get(r).is_none()).collect();
            if let Some(r) = missing.first() {
                return Err(err(0, format!("TransH relation `{r}` has no AUX row")));
            }
            let aux = std::mem::take(&mut m.aux);
            // Keep aux rows aligned with relation indices.
            for name in &m.relations.names {
                m.aux.insert(name, aux.get(name).expect("checked above").to_vec());
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub negatives: usize,
    pub seed: u64,
    /// TransE distance exponent.
    pub q: u32,
    pub orthogonality_weight: f64,
    pub orthogonality_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            epochs: 200,
            learning_rate: 0.01,
            margin: 1.0,
            negatives: 2,
            seed: 42,
            q: 2,
            orthogonality_weight: 0.1,
            orthogonality_eps: 1e-3,
        }
    }
}

impl TrainConfig {
    fn check(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.dim == 0 {
            return bad("dimension must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.negatives == 0 {
            return bad("at least one negative per positive is needed");
        }
        if self.q != 1 && self.q != 2 {
            return bad("q must be 1 or 2");
        }
        Ok(())
    }
}

/// Random model over the nodes and labels of `g`, initialised uniformly
/// in `±6/√d` and then projected.
pub fn init_model(g: &Graph, kind: ModelKind, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> EmbeddingModel {
    let d = cfg.dim;
    let bound = 6.0 / (d as f64).sqrt();
    let (elen, rlen) = kind.row_lens(d);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-bound..=bound)).collect() };
    let mut m = EmbeddingModel {
        kind,
        dim: d,
        seed: cfg.seed,
        q: cfg.q,
        entities: Table::default(),
        relations: Table::default(),
        aux: Table::default(),
    };
    for n in g.nodes() {
        m.entities.insert(n, draw(elen));
    }
    for l in g.labels() {
        m.relations.insert(l, draw(rlen));
        if kind == ModelKind::TransH {
            m.aux.insert(l, draw(d));
        }
    }
    m.project();
    m
}

pub fn train(g: &Graph, kind: ModelKind, cfg: &TrainConfig) -> Result<EmbeddingModel, EmbeddingError> {
    train_observed(g, kind, cfg, |_, _| {})
}

/// SGD on the margin-ranking loss `max(0, γ − f(pos) + f(neg))`, calling
/// `observe(epoch, model)` after each epoch.
///
/// Negatives replace the subject or the object (fair coin) with a uniformly
/// drawn node such that the result is not an edge of `g`. Norm constraints
/// are re-applied to the touched rows after every update.
pub fn train_observed<F>(g: &Graph, kind: ModelKind, cfg: &TrainConfig, mut observe: F) -> Result<EmbeddingModel, EmbeddingError>
where
    F: FnMut(usize, &EmbeddingModel),
{
    cfg.check()?;
    if g.is_empty() {
        return Err(EmbeddingError::Config("cannot train on an empty graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = init_model(g, kind, cfg, &mut rng);
    let positives: Vec<(usize, usize, usize)> = g.edges().iter().map(|e| m.lookup(e).expect("model covers g")).collect();
    let known: BTreeSet<(usize, usize, usize)> = positives.iter().copied().collect();
    let n = m.entities.len();
    let mut order: Vec<usize> = (0..positives.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (s, r, o) = positives[i];
            for _ in 0..cfg.negatives {
                let Some(neg) = corrupt(&mut rng, (s, r, o), n, &known) else { continue };
                let loss = cfg.margin - m.score_idx(s, r, o) + m.score_idx(neg.0, neg.1, neg.2);
                if loss > 0.0 {
                    let gp = m.raw_gradient(s, r, o);
                    let gn = m.raw_gradient(neg.0, neg.1, neg.2);
                    m.step((s, r, o), &gp, cfg.learning_rate);
                    m.step(neg, &gn, -cfg.learning_rate);
                    for e in [s, o, neg.0, neg.2] {
                        m.project_entity(e);
                    }
                    m.project_relation(r);
                }
            }
            if kind == ModelKind::TransH {
                let (gw, gr) = orthogonality_gradient(&m.aux.rows[r], &m.relations.rows[r], cfg.orthogonality_eps);
                let k = cfg.learning_rate * cfg.orthogonality_weight;
                m.aux.rows[r].iter_mut().zip(&gw).for_each(|(x, g)| *x -= k * g);
                m.relations.rows[r].iter_mut().zip(&gr).for_each(|(x, g)| *x -= k * g);
                m.project_relation(r);
            }
        }
        observe(epoch, &m);
    }
    Ok(m)
}

fn corrupt(
    rng: &mut ChaCha8Rng,
    (s, r, o): (usize, usize, usize),
    n: usize,
    known: &BTreeSet<(usize, usize, usize)>,
) -> Option<(usize, usize, usize)> {
    for _ in 0..64 {
        let x = rng.random_range(0..n);
        let cand = if rng.random::<bool>() { (x, r, o) } else { (s, r, x) };
        if !known.contains(&cand) {
            return Some(cand);
        }
    }
    None
}

impl EmbeddingModel {
    fn raw_gradient(&self, s: usize, r: usize, o: usize) -> Gradient {
        gradient_raw(self.kind, self.q, &self.entities.rows[s], &self.relations.rows[r], &self.entities.rows[o], self.aux_row(r))
    }

    /// Gradient ascent on the score with step `lr` (descent when negative).
    fn step(&mut self, (s, r, o): (usize, usize, usize), g: &Gradient, lr: f64) {
        let add = |row: &mut Vec<f64>, g: &[f64]| row.iter_mut().zip(g).for_each(|(x, d)| *x += lr * d);
        add(&mut self.entities.rows[s], &g.s);
        add(&mut self.entities.rows[o], &g.o);
        add(&mut self.relations.rows[r], &g.r);
        if self.kind == ModelKind::TransH {
            add(&mut self.aux.rows[r], &g.w);
        }
    }
}

/// Every edge obtained by replacing the subject or object of `e` with a
/// node of the model such that the result is not in `g`.
pub fn corruptions(m: &EmbeddingModel, g: &Graph, e: &Edge) -> Vec<Edge> {
    let mut out = BTreeSet::new();
    for x in m.entities.names() {
        for c in [Edge::new(x, &e.p, &e.o), Edge::new(&e.s, &e.p, x)] {
            if !g.contains_edge(&c) {
                out.insert(c);
            }
        }
    }
    out.into_iter().collect()
}

/// Complex view of a ComplEx row.
pub fn complex_row(row: &[f64]) -> Vec<Complex64> {
    split(row).data().to_vec()
}
