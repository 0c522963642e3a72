//! Special functions and singular quadrature.

pub mod elliptic;
pub mod gfun;
pub mod hyper;
pub mod quad;

pub use elliptic::{elliptic_k_half, jacobi_cn_sn_dn, EllipticTriple};
pub use gfun::{c0, c0_gamma, c0_quadrature, c_star, g_inv, g_of, g_tail, gamma};
pub use hyper::{gauss_2f1, moment_integral, pfaff_a, pfaff_b};
pub use quad::{sqrt_singular_integral, GaussLegendre, QuadSpec};
