//! Eigenvalues of small dense Hermitian matrices.
//!
//! 2×2 is closed form. Anything larger goes through cyclic Jacobi: each
//! off-diagonal element is first made real by a diagonal phase and then
//! annihilated by a real plane rotation. Only eigenvalues are tracked.

use super::{CMatrix, C64};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order. The input must be Hermitian; only the
/// upper triangle and the real part of the diagonal are read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values = match m.dim() {
        0 => Vec::new(),
        1 => vec![m.get(0, 0).re],
        2 => closed_form_2x2(m).to_vec(),
        _ => jacobi(m),
    };
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

fn closed_form_2x2(m: &CMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    [mean - radius, mean + radius]
}

fn jacobi(m: &CMatrix) -> Vec<f64> {
    let n = m.dim();
    // work on a Hermitian copy built from the upper triangle
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        a[i * n + i] = C64::new(m.get(i, i).re, 0.0);
        for j in (i + 1)..n {
            let x = m.get(i, j);
            a[i * n + j] = x;
            a[j * n + i] = x.conj();
        }
    }

    let scale: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let threshold = scale * f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

/// Zeroes `a[p][q]` (and `a[q][p]`) with a unitary similarity.
fn rotate(a: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // phase D = diag(.., e^{-iφ} at q, ..) makes a[p][q] real and positive
    let phase = apq / r;
    for k in 0..n {
        a[k * n + q] *= phase.conj();
        a[q * n + k] *= phase;
    }
    a[p * n + q] = C64::new(r, 0.0);
    a[q * n + p] = C64::new(r, 0.0);
    a[q * n + q] = C64::new(a[q * n + q].re, 0.0);

    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = akp * c - akq * s;
        let new_kq = akp * s + akq * c;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp.conj();
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq.conj();
    }
    a[p * n + p] = C64::new(app - t * r, 0.0);
    a[q * n + q] = C64::new(aqq + t * r, 0.0);
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
}
