#![allow(dead_code)]

use cyclone::{Network, Regulation};
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};

pub fn hill(lambda: f64, r: f64) -> Regulation {
    Regulation::hill(lambda, r).unwrap()
}

pub fn toggle(alpha: f64) -> Network {
    Network::uniform(2, hill(0.0, 2.0), alpha).unwrap()
}

pub fn repressilator(alpha: f64) -> Network {
    Network::uniform(3, hill(0.0, 4.0), alpha).unwrap()
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random admissible stage: mostly Hill functions of either sign, some
/// affine and shifted ones.
pub fn random_stage<R: Rng>(rng: &mut R) -> Regulation {
    match rng.gen_range(0..10) {
        0 => Regulation::affine(rng.gen_range(0.2..3.0), rng.gen_range(0.1..2.0)).unwrap(),
        1 => Regulation::shifted_hill(rng.gen_range(0.0..0.8), rng.gen_range(1.0..4.0), rng.gen_range(0.0..1.0)).unwrap(),
        2..=5 => hill(rng.gen_range(0.0..0.8), rng.gen_range(1.0..5.0)),
        _ => hill(rng.gen_range(1.5..10.0), rng.gen_range(1.0..5.0)),
    }
}

/// Opposite-direction Hill stage with the same steepness.
pub fn flipped(f: &Regulation) -> Regulation {
    if f.is_decreasing() {
        hill(4.0, 2.0)
    } else {
        hill(0.0, 2.0)
    }
}

pub fn random_network<R: Rng>(rng: &mut R, d: usize) -> Network {
    loop {
        let functions: Vec<Regulation> = (0..d).map(|_| random_stage(rng)).collect();
        let alpha: Vec<f64> = (0..d).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
        if let Ok(net) = Network::new(functions, alpha) {
            return net;
        }
    }
}

/// Random network with an even number of decreasing stages.
pub fn random_even_network<R: Rng>(rng: &mut R, d: usize) -> Network {
    let net = random_network(rng, d);
    if net.is_even() {
        return net;
    }
    let mut functions = net.functions().to_vec();
    let k = rng.gen_range(0..d);
    functions[k] = flipped(&functions[k]);
    Network::new(functions, net.alpha().to_vec()).unwrap()
}

/// Largest distance between matched elements of two equally sized complex
/// multisets, matching greedily by nearest neighbour.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (k, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(dist);
    }
    worst
}

/// Eigenvalues of a dense matrix after diagonal balancing, the standard
/// preconditioning for nonsymmetric eigenproblems, followed by a random
/// orthogonal similarity. The balanced Jacobian of a loop is a multiple of a
/// cyclic permutation minus the identity, on which unshifted-restart QR
/// iterations stall.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..100 {
        let mut changed = false;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let f = (r / c).sqrt();
            if (f - 1.0).abs() > 1e-3 {
                for j in 0..n {
                    a[(j, i)] *= f;
                    a[(i, j)] /= f;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let a = q.transpose() * a * &q;
    nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 100_000)
        .expect("Schur iteration converges")
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect()
}
