//! Jacobi elliptic functions at modulus k = 1/√2 (parameter m = ½), by the
//! arithmetic–geometric mean and descending Landen transformation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

/// `(cn, sn, dn)` at modulus 1/√2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticTriple {
    pub cn: f64,
    pub sn: f64,
    pub dn: f64,
}

struct AgmTable {
    a: Vec<f64>,
    c: Vec<f64>,
}

fn agm_table() -> &'static AgmTable {
    static TABLE: OnceLock<AgmTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut a = vec![1.0];
        let mut b = FRAC_1_SQRT_2;
        let mut c = vec![FRAC_1_SQRT_2];
        for _ in 0..32 {
            let an = *a.last().unwrap();
            let cn = 0.5 * (an - b);
            let next_a = 0.5 * (an + b);
            b = (an * b).sqrt();
            a.push(next_a);
            c.push(cn);
            if cn.abs() < 1e-17 {
                break;
            }
        }
        AgmTable { a, c }
    })
}

/// K(1/√2) = π / (2·AGM(1, 1/√2)).
pub fn elliptic_k_half() -> f64 {
    let t = agm_table();
    PI / (2.0 * t.a.last().unwrap())
}

/// Jacobi `cn`, `sn`, `dn` at modulus 1/√2.
pub fn jacobi_cn_sn_dn(u: f64) -> EllipticTriple {
    let t = agm_table();
    let n = t.a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * t.a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (t.c[k] / t.a[k] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn > 0 for real u; the quotient cos φ₀ / cos(φ₁ − φ₀) is 0/0 at u = K
    let dn = (1.0 - 0.5 * sn * sn).sqrt();
    EllipticTriple { cn, sn, dn }
}
