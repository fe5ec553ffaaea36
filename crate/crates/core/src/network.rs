//! Shallow and deep ReLU^k networks: evaluation, parameter counting, bounds,
//! and the JSON interchange format.
//!
//! A layer's sparse matrices store its free parameters. The parameter
//! support of a synthesized network is therefore exactly what the
//! construction allocates, including slots whose value happens to be zero.
//! JSON carries values only, so a deserialized network takes its nonzero
//! values as the support.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::rational::{self, format_rational, parse_rational, Rational};
use crate::exact::{SparseMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("input has dimension {found}, network expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape error at {path}: {message}")]
    Shape { path: String, message: String },
    #[error("invalid rational at {path}: {message}")]
    Rational { path: String, message: String },
    #[error("malformed network document at {path}: {message}")]
    Document { path: String, message: String },
}

/// `σ_k(t) = t^k` for `t > 0`, else 0.
pub fn sigma(t: &Rational, k: u32) -> Rational {
    if t.is_positive() {
        rational::pow(t, u64::from(k))
    } else {
        Rational::zero()
    }
}

pub fn sigma_f64(t: f64, k: u32) -> f64 {
    if t > 0.0 {
        t.powi(k as i32)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub weights: SparseMatrix,
    pub bias: SparseVector,
}

impl Layer {
    pub fn width(&self) -> usize {
        self.weights.rows()
    }

    pub fn pre_activation(&self, h: &[Rational]) -> Vec<Rational> {
        let mut z = self.weights.mul_vec(h);
        for (i, b) in self.bias.entries() {
            if !b.is_zero() {
                z[*i] += b;
            }
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclaredBounds {
    pub b: Rational,
    pub m: Rational,
}

/// `x ↦ Σ_m c_m σ_k(w_m·x + u_m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShallowNetwork {
    pub k: u32,
    pub layer: Layer,
    pub output: SparseVector,
    pub declared_bounds: Option<DeclaredBounds>,
}

/// `h₀ = x`, `h_i = σ_k(A_i h_{i−1} + b_i)`, output `c·h_L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeepNetwork {
    pub k: u32,
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    pub output: SparseVector,
    pub declared_bounds: Option<DeclaredBounds>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Network {
    Shallow(ShallowNetwork),
    Deep(DeepNetwork),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParameterCount {
    pub dense: usize,
    pub nonzero: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    #[serde(with = "rational::serde_str")]
    pub max_weight: Rational,
    #[serde(with = "rational::serde_str")]
    pub max_output: Rational,
    #[serde(rename = "declared_B", with = "rational::serde_str")]
    pub declared_b: Rational,
    #[serde(rename = "declared_M", with = "rational::serde_str")]
    pub declared_m: Rational,
    pub dense_count: usize,
    pub nonzero_count: usize,
    pub pass: bool,
}

impl ShallowNetwork {
    pub fn new(k: u32, weights: SparseMatrix, bias: SparseVector, output: SparseVector) -> Self {
        ShallowNetwork { k, layer: Layer { weights, bias }, output, declared_bounds: None }
    }

    pub fn input_dim(&self) -> usize {
        self.layer.weights.cols()
    }

    pub fn width(&self) -> usize {
        self.layer.width()
    }

    /// `(w_m, u_m, c_m)` for every unit, densely.
    pub fn units(&self) -> Vec<(Vec<Rational>, Rational, Rational)> {
        let rows = self.layer.weights.to_dense_rows();
        let bias = self.layer.bias.to_dense();
        let out = self.output.to_dense();
        rows.into_iter().zip(bias).zip(out).map(|((w, u), c)| (w, u, c)).collect()
    }

    pub fn into_deep(self) -> DeepNetwork {
        DeepNetwork {
            k: self.k,
            input_dim: self.layer.weights.cols(),
            layers: vec![self.layer],
            output: self.output,
            declared_bounds: self.declared_bounds,
        }
    }
}

impl Network {
    pub fn k(&self) -> u32 {
        match self {
            Network::Shallow(s) => s.k,
            Network::Deep(d) => d.k,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Network::Shallow(s) => s.input_dim(),
            Network::Deep(d) => d.input_dim,
        }
    }

    pub fn layers(&self) -> &[Layer] {
        match self {
            Network::Shallow(s) => std::slice::from_ref(&s.layer),
            Network::Deep(d) => &d.layers,
        }
    }

    pub fn output(&self) -> &SparseVector {
        match self {
            Network::Shallow(s) => &s.output,
            Network::Deep(d) => &d.output,
        }
    }

    pub fn declared_bounds(&self) -> Option<&DeclaredBounds> {
        match self {
            Network::Shallow(s) => s.declared_bounds.as_ref(),
            Network::Deep(d) => d.declared_bounds.as_ref(),
        }
    }

    pub fn set_declared_bounds(&mut self, bounds: Option<DeclaredBounds>) {
        match self {
            Network::Shallow(s) => s.declared_bounds = bounds,
            Network::Deep(d) => d.declared_bounds = bounds,
        }
    }

    pub fn is_shallow(&self) -> bool {
        matches!(self, Network::Shallow(_))
    }

    fn check_input(&self, len: usize) -> Result<(), NetworkError> {
        if len != self.input_dim() {
            return Err(NetworkError::DimensionMismatch { expected: self.input_dim(), found: len });
        }
        Ok(())
    }

    /// Post-activation values of every layer.
    pub fn trace_exact(&self, x: &[Rational]) -> Result<Vec<Vec<Rational>>, NetworkError> {
        self.check_input(x.len())?;
        let k = self.k();
        let mut trace: Vec<Vec<Rational>> = Vec::with_capacity(self.layers().len());
        for layer in self.layers() {
            let input = trace.last().map_or(x, Vec::as_slice);
            let h = layer.pre_activation(input).iter().map(|z| sigma(z, k)).collect();
            trace.push(h);
        }
        Ok(trace)
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<Rational, NetworkError> {
        let trace = self.trace_exact(x)?;
        let last = trace.last().map_or(x, Vec::as_slice);
        Ok(self.output().dot(last))
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64, NetworkError> {
        self.check_input(x.len())?;
        Ok(FloatNetwork::new(self).eval(x))
    }

    pub fn count_parameters(&self) -> ParameterCount {
        let mut dense = self.output().len();
        let mut nonzero = self.output().support_len();
        for layer in self.layers() {
            dense += layer.weights.rows() * (layer.weights.cols() + 1);
            nonzero += layer.weights.support_len() + layer.bias.support_len();
        }
        ParameterCount { dense, nonzero }
    }

    /// Largest hidden weight or bias, in absolute value.
    pub fn max_weight(&self) -> Rational {
        self.layers()
            .iter()
            .flat_map(|l| [l.weights.max_abs(), l.bias.max_abs()])
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn check_bounds(&self, b: &Rational, m: &Rational) -> BoundsReport {
        let max_weight = self.max_weight();
        let max_output = self.output().max_abs();
        let count = self.count_parameters();
        BoundsReport {
            pass: &max_weight <= b && &max_output <= m,
            max_weight,
            max_output,
            declared_b: b.clone(),
            declared_m: m.clone(),
            dense_count: count.dense,
            nonzero_count: count.nonzero,
        }
    }

    /// Removes units that cannot influence the output and zero-valued
    /// parameters. The realized function is unchanged.
    pub fn prune(&self) -> Network {
        let layers = self.layers();
        let depth = layers.len();
        // Forward: a unit whose row and bias are zero, or whose row only reads
        // dead units, always outputs σ(0) = 0.
        let mut alive_fwd: Vec<Vec<bool>> = Vec::with_capacity(depth);
        for (i, layer) in layers.iter().enumerate() {
            let alive: Vec<bool> = (0..layer.width())
                .map(|r| {
                    !layer.bias.get(r).is_zero()
                        || layer.weights.row(r).iter().any(|(c, v)| {
                            !v.is_zero() && (i == 0 || alive_fwd[i - 1][*c])
                        })
                })
                .collect();
            alive_fwd.push(alive);
        }
        // Backward: a unit nobody reads with a nonzero weight is dead.
        let mut keep: Vec<Vec<bool>> = vec![Vec::new(); depth];
        for i in (0..depth).rev() {
            let mut used = vec![false; layers[i].width()];
            if i + 1 == depth {
                for (r, v) in self.output().entries() {
                    used[*r] |= !v.is_zero();
                }
            } else {
                for (r, c, v) in layers[i + 1].weights.entries() {
                    if keep[i + 1][r] && !v.is_zero() {
                        used[c] = true;
                    }
                }
            }
            keep[i] = used.iter().zip(&alive_fwd[i]).map(|(u, a)| *u && *a).collect();
        }
        let all_inputs = vec![true; self.input_dim()];
        let new_layers: Vec<Layer> = layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let cols = if i == 0 { &all_inputs } else { &keep[i - 1] };
                Layer {
                    weights: drop_zeros_matrix(layer.weights.select(&keep[i], cols)),
                    bias: drop_zeros_vector(layer.bias.select(&keep[i])),
                }
            })
            .collect();
        let output = drop_zeros_vector(self.output().select(&keep[depth - 1]));
        match self {
            Network::Shallow(s) => {
                let layer = new_layers.into_iter().next().expect("one layer");
                Network::Shallow(ShallowNetwork { k: s.k, layer, output, declared_bounds: s.declared_bounds.clone() })
            }
            Network::Deep(d) => Network::Deep(DeepNetwork {
                k: d.k,
                input_dim: d.input_dim,
                layers: new_layers,
                output,
                declared_bounds: d.declared_bounds.clone(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = NetworkJson {
            kind: if self.is_shallow() { "shallow" } else { "deep" }.to_string(),
            k: self.k(),
            input_dim: self.input_dim(),
            layers: self
                .layers()
                .iter()
                .map(|l| LayerJson {
                    a: l.weights.to_dense_rows().iter().map(|row| row.iter().map(format_rational).collect()).collect(),
                    b: l.bias.to_dense().iter().map(format_rational).collect(),
                })
                .collect(),
            c: self.output().to_dense().iter().map(format_rational).collect(),
            declared_bounds: self.declared_bounds().map(|db| BoundsJson {
                b: format_rational(&db.b),
                m: format_rational(&db.m),
            }),
        };
        serde_json::to_string(&doc).expect("network documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Network, NetworkError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: NetworkJson = serde_path_to_error::deserialize(de).map_err(|e| NetworkError::Document {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        doc.into_network()
    }
}

fn drop_zeros_matrix(m: SparseMatrix) -> SparseMatrix {
    let mut out = SparseMatrix::zeros(m.rows(), m.cols());
    for (i, j, v) in m.entries() {
        if !v.is_zero() {
            out.insert(i, j, v.clone());
        }
    }
    out
}

fn drop_zeros_vector(v: SparseVector) -> SparseVector {
    SparseVector::from_dense(&v.to_dense())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    kind: String,
    k: u32,
    input_dim: usize,
    layers: Vec<LayerJson>,
    c: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_bounds: Option<BoundsJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    b: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsJson {
    #[serde(rename = "B")]
    b: String,
    #[serde(rename = "M")]
    m: String,
}

fn parse_at(s: &str, path: impl FnOnce() -> String) -> Result<Rational, NetworkError> {
    parse_rational(s).map_err(|e| NetworkError::Rational { path: path(), message: e.to_string() })
}

fn shape(path: impl Into<String>, message: impl Into<String>) -> NetworkError {
    NetworkError::Shape { path: path.into(), message: message.into() }
}

impl NetworkJson {
    fn into_network(self) -> Result<Network, NetworkError> {
        if self.k == 0 {
            return Err(shape("k", "activation exponent must be at least 1"));
        }
        if self.input_dim == 0 {
            return Err(shape("input_dim", "input dimension must be at least 1"));
        }
        if self.layers.is_empty() {
            return Err(shape("layers", "a network needs at least one layer"));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut prev = self.input_dim;
        for (li, layer) in self.layers.iter().enumerate() {
            let width = layer.a.len();
            if layer.b.len() != width {
                return Err(shape(
                    format!("layers[{li}].b"),
                    format!("length {} does not match the {width} rows of A", layer.b.len()),
                ));
            }
            let mut rows = Vec::with_capacity(width);
            for (r, row) in layer.a.iter().enumerate() {
                if row.len() != prev {
                    return Err(shape(
                        format!("layers[{li}].A[{r}]"),
                        format!("row has length {}, expected {prev}", row.len()),
                    ));
                }
                let parsed = row
                    .iter()
                    .enumerate()
                    .map(|(c, s)| parse_at(s, || format!("layers[{li}].A[{r}][{c}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(parsed);
            }
            let bias = layer
                .b
                .iter()
                .enumerate()
                .map(|(i, s)| parse_at(s, || format!("layers[{li}].b[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let weights = SparseMatrix::from_rows(&rows, prev).map_err(|e| shape(format!("layers[{li}].A"), e.to_string()))?;
            layers.push(Layer { weights, bias: SparseVector::from_dense(&bias) });
            prev = width;
        }
        if self.c.len() != prev {
            return Err(shape("c", format!("length {} does not match the last width {prev}", self.c.len())));
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, || format!("c[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let output = SparseVector::from_dense(&c);
        let declared_bounds = match self.declared_bounds {
            Some(db) => Some(DeclaredBounds {
                b: parse_at(&db.b, || "declared_bounds.B".into())?,
                m: parse_at(&db.m, || "declared_bounds.M".into())?,
            }),
            None => None,
        };
        match self.kind.as_str() {
            "shallow" => {
                if layers.len() != 1 {
                    return Err(shape("layers", "a shallow network has exactly one layer"));
                }
                let layer = layers.pop().expect("one layer");
                Ok(Network::Shallow(ShallowNetwork { k: self.k, layer, output, declared_bounds }))
            }
            "deep" => Ok(Network::Deep(DeepNetwork {
                k: self.k,
                input_dim: self.input_dim,
                layers,
                output,
                declared_bounds,
            })),
            other => Err(shape("kind", format!("unknown kind {other:?}, expected \"shallow\" or \"deep\""))),
        }
    }
}

type FloatLayer = (Vec<Vec<(usize, f64)>>, Vec<f64>);

/// A float copy of a network for fast batch evaluation.
#[derive(Debug, Clone)]
pub struct FloatNetwork {
    k: u32,
    layers: Vec<FloatLayer>,
    output: Vec<(usize, f64)>,
}

impl FloatNetwork {
    pub fn new(net: &Network) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| {
                let rows = (0..l.width())
                    .map(|r| l.weights.row(r).iter().map(|(c, v)| (*c, rational::to_f64(v))).collect())
                    .collect();
                (rows, l.bias.to_dense().iter().map(rational::to_f64).collect())
            })
            .collect();
        let output = net.output().entries().iter().map(|(i, v)| (*i, rational::to_f64(v))).collect();
        FloatNetwork { k: net.k(), layers, output }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms(x).iter().sum()
    }

    /// The output contributions `c_j h_j(x)` before summation.
    pub fn terms(&self, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        for (rows, bias) in &self.layers {
            h = rows
                .iter()
                .zip(bias)
                .map(|(row, b)| sigma_f64(row.iter().map(|(c, v)| v * h[*c]).sum::<f64>() + b, self.k))
                .collect();
        }
        self.output.iter().map(|(i, c)| c * h[*i]).collect()
    }
}

/// Exact evaluation with one integer denominator per layer and no gcds
/// until the final result. Fast when hidden values do not cancel, as in the
/// power-raising chains of compiled networks; the rational evaluator is
/// better when they do.
#[derive(Debug, Clone)]
pub struct CommonDenominatorNetwork {
    k: u32,
    layers: Vec<IntegerLayer>,
    output: Vec<(usize, BigInt)>,
    output_den: BigInt,
}

// (integer weights per row, integer biases, common denominator)
type IntegerLayer = (Vec<Vec<(usize, BigInt)>>, Vec<BigInt>, BigInt);

fn common_denominator<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn scaled_numerator(v: &Rational, den: &BigInt) -> BigInt {
    v.numer() * (den / v.denom())
}

impl CommonDenominatorNetwork {
    pub fn new(net: &Network) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| {
                let den = common_denominator(l.weights.entries().map(|e| e.2).chain(l.bias.entries().iter().map(|e| &e.1)));
                let rows = (0..l.width())
                    .map(|r| {
                        l.weights
                            .row(r)
                            .iter()
                            .filter(|(_, v)| !v.is_zero())
                            .map(|(c, v)| (*c, scaled_numerator(v, &den)))
                            .collect()
                    })
                    .collect();
                let bias = l.bias.to_dense().iter().map(|v| scaled_numerator(v, &den)).collect();
                (rows, bias, den)
            })
            .collect();
        let output_den = common_denominator(net.output().entries().iter().map(|e| &e.1));
        let output = net
            .output()
            .entries()
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (*i, scaled_numerator(v, &output_den)))
            .collect();
        CommonDenominatorNetwork { k: net.k(), layers, output, output_den }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut den = common_denominator(x.iter());
        let mut h: Vec<BigInt> = x.iter().map(|v| scaled_numerator(v, &den)).collect();
        for (rows, bias, q) in &self.layers {
            h = rows
                .iter()
                .zip(bias)
                .map(|(row, b)| {
                    let mut acc = b * &den;
                    for (c, w) in row {
                        if !h[*c].is_zero() {
                            acc += w * &h[*c];
                        }
                    }
                    if acc.is_positive() {
                        acc.pow(self.k)
                    } else {
                        BigInt::zero()
                    }
                })
                .collect();
            den = (q * &den).pow(self.k);
        }
        let mut acc = BigInt::zero();
        for (i, c) in &self.output {
            if !h[*i].is_zero() {
                acc += c * &h[*i];
            }
        }
        Rational::new(acc, &self.output_den * den)
    }
}
