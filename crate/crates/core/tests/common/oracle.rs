//! Dense reference computations built with nalgebra, sharing no code with
//! the crate except the role-basis rotation.

use nalgebra::{DMatrix, DVector};
use rawr::linalg::{symmetric_eig, DenseMatrix, SymMatrix};
use rawr::{Graph, Partition, Variant};

pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

pub fn indicator(p: &Partition) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(p.num_nodes(), p.num_blocks());
    for u in 0..p.num_nodes() {
        r[(u, p.block_of(u))] = 1.0;
    }
    r
}

/// `(RᵀR)⁻¹ RᵀAR`.
pub fn quotient(a: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let sizes = r.transpose() * r;
    let inv = DMatrix::from_diagonal(&sizes.diagonal().map(|s| 1.0 / s));
    inv * r.transpose() * a * r
}

/// Augmented adjacency `[[A, R], [Rᵀ, B]]`.
pub fn rewired_adjacency(g: &Graph, p: &Partition, variant: Variant) -> DMatrix<f64> {
    let single;
    let p = if variant == Variant::MasterNode {
        single = Partition::single_block(g.num_nodes());
        &single
    } else {
        p
    };
    let a = adjacency(g);
    let r = indicator(p);
    let q = quotient(&a, &r);
    let (n, k) = (g.num_nodes(), p.num_blocks());
    let b = DMatrix::from_fn(k, k, |i, j| match variant {
        Variant::Full => (q[(i, j)] * q[(j, i)]).sqrt(),
        Variant::RepEdges => f64::from(q[(i, j)] > 0.0),
        Variant::RepNodes | Variant::MasterNode => 0.0,
    });
    let mut m = DMatrix::zeros(n + k, n + k);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, k)).copy_from(&r);
    m.view_mut((n, 0), (k, n)).copy_from(&r.transpose());
    m.view_mut((n, n), (k, k)).copy_from(&b);
    m
}

pub fn shift(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a + DMatrix::identity(a.nrows(), a.ncols());
    let d: Vec<f64> = m.row_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(d));
    &d * m * &d
}

pub fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_vec(m.nrows(), m.ncols(), m.transpose().as_slice().to_vec()).unwrap()
}

/// SRL evaluated symbol by symbol on dense matrices.
pub fn dense_srl(g: &Graph, p: &Partition, variant: Variant, y: &DenseMatrix) -> f64 {
    let single;
    let p = if variant == Variant::MasterNode {
        single = Partition::single_block(g.num_nodes());
        &single
    } else {
        p
    };
    let n = g.num_nodes();
    let k = p.num_blocks();
    let s_obs = shift(&adjacency(g));
    let s_rawr = shift(&rewired_adjacency(g, p, variant));
    let s_oo = s_rawr.view((0, 0), (n, n)).into_owned();
    let s_vo = s_rawr.view((n, 0), (k, n)).into_owned();
    let s_vv = s_rawr.view((n, n), (k, k)).into_owned();

    let r = indicator(p);
    let inv_sqrt = DMatrix::from_diagonal(&(r.transpose() * &r).diagonal().map(|s| 1.0 / s.sqrt()));
    let c0 = &r * inv_sqrt;
    let restricted = c0.transpose() * &s_obs * &c0;
    let sym = (&restricted + restricted.transpose()) * 0.5;
    let eig = symmetric_eig(&SymMatrix::new(from_nalgebra(&sym)).unwrap()).unwrap();
    let c = &c0 * to_nalgebra(&eig.vectors);

    let y = to_nalgebra(y);
    let e_tot = y.norm_squared();
    let beta = c.transpose() * &y;
    let e_roles = beta.norm_squared();
    if e_roles == 0.0 {
        return 0.0;
    }
    let rho = e_roles / e_tot;
    let mut total = 0.0;
    for j in 0..k {
        let cj = c.column(j);
        let mu_obs = cj.dot(&(&s_obs * cj));
        let mu_rawr = cj.dot(&(&s_oo * cj));
        let coupling = &s_vo * cj;
        let tau = coupling.norm();
        let lambda = if tau < 1e-12 {
            mu_rawr
        } else {
            let v = coupling / tau;
            let nu = v.dot(&(&s_vv * &v));
            let m = DMatrix::from_row_slice(2, 2, &[mu_rawr, tau, tau, nu]);
            m.symmetric_eigen().eigenvalues.max()
        };
        let omega = beta.row(j).norm_squared() / e_roles;
        total += omega * (lambda - mu_obs).powi(2);
    }
    rho * total
}

/// Mean effective resistance over pairs of the first `m` nodes, grounding
/// node 0 and inverting the reduced Laplacian.
pub fn grounded_mean_resistance(a: &DMatrix<f64>, m: usize) -> f64 {
    let n = a.nrows();
    let deg = DMatrix::from_diagonal(&DVector::from_iterator(n, a.row_iter().map(|r| r.sum())));
    let l = deg - a;
    let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let inv = reduced.try_inverse().expect("connected graph");
    let g = |u: usize, v: usize| if u == 0 || v == 0 { 0.0 } else { inv[(u - 1, v - 1)] };
    let mut sum = 0.0;
    let mut count = 0;
    for u in 0..m {
        for v in (u + 1)..m {
            sum += g(u, u) + g(v, v) - 2.0 * g(u, v);
            count += 1;
        }
    }
    sum / count as f64
}
