#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reluk::exact::{MultiIndex, Polynomial, Rational, SparseMatrix, SparseVector};
use reluk::network::{Network, ShallowNetwork};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    Rational::new(rng.gen_range(-max_num..=max_num).into(), rng.gen_range(1..=max_den).into())
}

pub fn nonzero_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    loop {
        let r = small_rational(rng, max_num, max_den);
        if r != Rational::from_integer(0.into()) {
            return r;
        }
    }
}

/// Up to `max_terms` random monomials of degree ≤ `degree`.
pub fn random_polynomial(rng: &mut impl Rng, d: usize, degree: u32, max_terms: usize) -> Polynomial {
    let all = MultiIndex::all_up_to(d, degree);
    let terms = rng.gen_range(1..=max_terms.min(all.len()));
    let mut p = Polynomial::zero(d);
    for alpha in all.choose_multiple(rng, terms) {
        p.add_term(alpha.clone(), nonzero_rational(rng, 9, 7));
    }
    p
}

pub fn random_shallow(rng: &mut impl Rng, big_k: u32, n: usize, d: usize) -> ShallowNetwork {
    let mut weights = SparseMatrix::zeros(n, d);
    let mut bias = SparseVector::zeros(n);
    let mut output = SparseVector::zeros(n);
    for m in 0..n {
        for j in 0..d {
            weights.insert(m, j, small_rational(rng, 4, 3));
        }
        bias.insert(m, small_rational(rng, 3, 4));
        output.insert(m, nonzero_rational(rng, 5, 3));
    }
    ShallowNetwork::new(big_k, weights, bias, output)
}

/// Where a single parameter lives.
#[derive(Debug, Clone, Copy)]
pub enum Slot {
    Weight { layer: usize, row: usize, col: usize },
    Bias { layer: usize, row: usize },
    Output { row: usize },
}

pub fn slots(net: &Network) -> Vec<Slot> {
    let mut out = Vec::new();
    for (l, layer) in net.layers().iter().enumerate() {
        for (row, col, _) in layer.weights.entries() {
            out.push(Slot::Weight { layer: l, row, col });
        }
        for (row, _) in layer.bias.entries() {
            out.push(Slot::Bias { layer: l, row: *row });
        }
    }
    for (row, _) in net.output().entries() {
        out.push(Slot::Output { row: *row });
    }
    out
}

pub fn perturb(net: &Network, slot: Slot, delta: &Rational) -> Network {
    let mut net = net.clone();
    match &mut net {
        Network::Shallow(s) => match slot {
            Slot::Weight { row, col, .. } => {
                let v = s.layer.weights.get(row, col) + delta;
                s.layer.weights.insert(row, col, v);
            }
            Slot::Bias { row, .. } => {
                let v = s.layer.bias.get(row) + delta;
                s.layer.bias.insert(row, v);
            }
            Slot::Output { row } => {
                let v = s.output.get(row) + delta;
                s.output.insert(row, v);
            }
        },
        Network::Deep(dn) => match slot {
            Slot::Weight { layer, row, col } => {
                let v = dn.layers[layer].weights.get(row, col) + delta;
                dn.layers[layer].weights.insert(row, col, v);
            }
            Slot::Bias { layer, row } => {
                let v = dn.layers[layer].bias.get(row) + delta;
                dn.layers[layer].bias.insert(row, v);
            }
            Slot::Output { row } => {
                let v = dn.output.get(row) + delta;
                dn.output.insert(row, v);
            }
        },
    }
    net
}
