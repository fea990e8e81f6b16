use super::{energy_vals, local_grad, AnisoProblem, Coeffs, Stencil};
use crate::numeric::abs_pow;

/// Relative floor on `|Δu|` in the Hessian weights, which are singular
/// (`p < 2`) or degenerate (`p > 2`) at zero jumps.
const JUMP_FLOOR: f64 = 1e-3;

/// Edge weights of the Hessian, per cell and neighbor slot, and its diagonal.
struct Hessian {
    w: Vec<f64>,
    diag: Vec<f64>,
}

fn hessian(s: &Stencil, c: &Coeffs, vals: &[f64], p: &AnisoProblem) -> Hessian {
    let d = s.dim;
    let n = s.cells.len();
    let jump = |ci: usize, slot: usize| {
        let k = s.cells[ci];
        let other = vals[s.nbr[2 * d * ci + slot]];
        (vals[k] - other).abs()
    };
    let mut floor = vec![0.0f64; d];
    for ci in 0..n {
        for slot in 0..2 * d {
            floor[slot / 2] = floor[slot / 2].max(jump(ci, slot));
        }
    }
    let mut w = vec![0.0; 2 * d * n];
    let mut diag = vec![0.0; n];
    for ci in 0..n {
        let mut acc = p.b.derivative(vals[s.cells[ci]]);
        for slot in 0..2 * d {
            let i = slot / 2;
            let q = c.p[i];
            let a = jump(ci, slot).max(JUMP_FLOOR * floor[i]).max(f64::MIN_POSITIVE);
            let wt = c.kappa[i] * (q - 1.0) * if q == 2.0 { 1.0 } else { abs_pow(a, q - 2.0) };
            w[2 * d * ci + slot] = wt;
            acc += wt;
        }
        diag[ci] = acc;
    }
    Hessian { w, diag }
}

impl Hessian {
    fn apply(&self, s: &Stencil, x: &[f64], out: &mut [f64]) {
        let m = 2 * s.dim;
        for ci in 0..x.len() {
            let mut acc = self.diag[ci] * x[ci];
            for slot in 0..m {
                let nb = s.nci[m * ci + slot];
                if nb != usize::MAX {
                    acc -= self.w[m * ci + slot] * x[nb];
                }
            }
            out[ci] = acc;
        }
    }

    /// Symmetric Gauss–Seidel preconditioner.
    fn precondition(&self, s: &Stencil, r: &[f64], z: &mut [f64]) {
        let m = 2 * s.dim;
        let n = r.len();
        for ci in 0..n {
            let mut acc = r[ci];
            for slot in 0..m {
                let nb = s.nci[m * ci + slot];
                if nb < ci {
                    acc += self.w[m * ci + slot] * z[nb];
                }
            }
            z[ci] = acc / self.diag[ci];
        }
        for ci in (0..n).rev() {
            let mut acc = 0.0;
            for slot in 0..m {
                let nb = s.nci[m * ci + slot];
                if nb != usize::MAX && nb > ci {
                    acc += self.w[m * ci + slot] * z[nb];
                }
            }
            z[ci] += acc / self.diag[ci];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for `H x = b` to relative residual `rtol`.
fn pcg(h: &Hessian, s: &Stencil, b: &[f64], rtol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    h.precondition(s, &r, &mut z);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let target = rtol * dot(b, b).sqrt();
    let mut hd = vec![0.0; n];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        h.apply(s, &dir, &mut hd);
        let curv = dot(&dir, &hd);
        if !(curv > 0.0) {
            break;
        }
        let alpha = rz / curv;
        for k in 0..n {
            x[k] += alpha * dir[k];
            r[k] -= alpha * hd[k];
        }
        h.precondition(s, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            dir[k] = z[k] + beta * dir[k];
        }
    }
    x
}

/// One damped Newton correction with a projected backtracking line search on
/// the energy. Returns the largest change of a cell value (0 when no step
/// lowered the energy).
pub(super) fn newton_step(s: &Stencil, c: &Coeffs, vals: &mut [f64], p: &AnisoProblem) -> f64 {
    let n = s.cells.len();
    let f = p.f.values();
    let m = 2 * s.dim;
    let mut nb = vec![0.0; m];
    let mut g = vec![0.0; n];
    for ci in 0..n {
        for (slot, &k) in nb.iter_mut().zip(s.neighbors(ci)) {
            *slot = vals[k];
        }
        let k = s.cells[ci];
        g[ci] = -local_grad(vals[k], &nb, c, &p.b, f[k]);
    }
    let h = hessian(s, c, vals, p);
    let dir = pcg(&h, s, &g, 1e-4, 4 * n.max(50));
    let slope = -dot(&g, &dir);
    if !(slope < 0.0) {
        return 0.0;
    }
    let e0 = energy_vals(s, c, vals, p);
    let base: Vec<f64> = s.cells.iter().map(|&k| vals[k]).collect();
    let mut alpha = 1.0;
    for _ in 0..40 {
        for ci in 0..n {
            vals[s.cells[ci]] = (base[ci] + alpha * dir[ci]).max(0.0);
        }
        let e = energy_vals(s, c, vals, p);
        if e <= e0 + 1e-4 * alpha * slope {
            return s.cells.iter().zip(&base).map(|(&k, b)| (vals[k] - b).abs()).fold(0.0, f64::max);
        }
        alpha *= 0.5;
    }
    for ci in 0..n {
        vals[s.cells[ci]] = base[ci];
    }
    0.0
}
