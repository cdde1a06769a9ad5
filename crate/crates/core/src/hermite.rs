//! Probabilists' Hermite polynomials: overflow-safe scaled recurrences and
//! zeros from the Jacobi matrix.

/// Magnitude at which running recurrences are rescaled.
const RESCALE: f64 = 1e150;

/// Values of a three-term recurrence carried as `(sign, ln|·|)`.
#[derive(Clone, Debug, Default)]
pub struct LogSigned {
    pub log_magnitude: Vec<f64>,
    pub sign: Vec<i8>,
}

impl LogSigned {
    pub fn len(&self) -> usize {
        self.sign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sign.is_empty()
    }

    pub fn value(&self, n: usize) -> f64 {
        f64::from(self.sign[n]) * self.log_magnitude[n].exp()
    }

    fn push(&mut self, v: f64, log_scale: f64) {
        if v == 0.0 {
            self.log_magnitude.push(f64::NEG_INFINITY);
            self.sign.push(0);
        } else {
            self.log_magnitude.push(v.abs().ln() + log_scale);
            self.sign.push(if v > 0.0 { 1 } else { -1 });
        }
    }
}

/// Runs `c₀ = 1`, `c₁ = a`, `c_{n+1} = (a cₙ - g √n c_{n-1}) / √(n+1)` for
/// `n = 0..=n_max`.
///
/// With `a = z √γ` and `g = γ` this is `cₙ = γ^(n/2) Heₙ(z) / √n!`. The pair of
/// running values is rescaled whenever it leaves `[1e-150, 1e150]`, so the
/// result is representable for `n` in the thousands.
pub fn scaled_recurrence(a: f64, g: f64, n_max: usize) -> LogSigned {
    let mut out = LogSigned {
        log_magnitude: Vec::with_capacity(n_max + 1),
        sign: Vec::with_capacity(n_max + 1),
    };
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur, log_scale);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (a * cur - g * nf.sqrt() * prev) / (nf + 1.0).sqrt();
        prev = cur;
        cur = next;
        let big = prev.abs().max(cur.abs());
        if big > RESCALE || (big < 1.0 / RESCALE && big > 0.0) {
            let s = big.ln();
            prev /= big;
            cur /= big;
            log_scale += s;
        }
        out.push(cur, log_scale);
    }
    out
}

/// Eigenvalues of a real symmetric tridiagonal matrix (implicit QL with
/// Wilkinson-type shifts), returned in ascending order.
///
/// `off[i]` couples rows `i` and `i+1`; `off.len()` must be `diag.len() - 1`.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 200, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    d
}

/// Ratio `Heₙ(z) / Heₙ'(z)` via the normalized recurrence.
fn newton_ratio(n: usize, z: f64) -> f64 {
    // h_k = He_k / √k!, so He_n / He_n' = h_n / (√n h_{n-1})
    let mut prev = 1.0;
    let mut cur = z;
    for k in 1..n {
        let kf = k as f64;
        let next = (z * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        let big = prev.abs().max(cur.abs());
        if big > RESCALE {
            prev /= big;
            cur /= big;
        }
    }
    cur / ((n as f64).sqrt() * prev)
}

/// All real zeros of `Heₙ`, in descending order.
///
/// The zeros are the eigenvalues of the Jacobi matrix with zero diagonal and
/// off-diagonal `√k`, each followed by a single Newton step on the recurrence.
pub fn hermite_e_zeros(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let mut z = symmetric_tridiagonal_eigenvalues(&diag, &off);
    for zi in z.iter_mut() {
        let step = newton_ratio(n, *zi);
        if step.is_finite() {
            *zi -= step;
        }
    }
    if n % 2 == 1 {
        // parity pins the middle root
        z[n / 2] = 0.0;
    }
    z.reverse();
    z
}
