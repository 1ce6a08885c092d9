//! Spectral Role Lift.
//!
//! Both graphs are turned into normalized shifts `D^-1/2 (A + I) D^-1/2`.
//! The role basis `C = R (RᵀR)^-1/2` is rotated so that `Cᵀ S_obs C` is
//! diagonal; each rotated role direction then gets a 2×2 lift matrix
//!
//! ```text
//! M_j = [ c_jᵀ S_oo c_j   ‖S_vo c_j‖ ]
//!       [ ‖S_vo c_j‖      v̂ᵀ S_vv v̂  ]
//! ```
//!
//! whose top eigenvalue minus `c_jᵀ S_obs c_j` is the lift `Δ_j`. Label
//! energy in the role subspace weights the squared lifts into
//! `SRL = ρ Σ_j ω_j Δ_j²`.

use std::fmt::Write as _;

use crate::error::{RawrError, Result};
use crate::graph::{fmt6, Graph};
use crate::linalg::{dot, norm, symmetric_eig, DenseMatrix, SymMatrix};
use crate::partition::Partition;
use crate::rewire::RewiredGraph;

/// Couplings below this are treated as zero.
pub const TAU_EPS: f64 = 1e-12;

/// Normalized shift with self-loops of a (weighted, symmetric) adjacency.
pub fn normalized_shift(adjacency: &DenseMatrix) -> Result<SymMatrix> {
    let n = adjacency.rows();
    let mut a = adjacency.clone();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / a.row(i).iter().sum::<f64>().sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    SymMatrix::new(a)
}

/// Orthonormal basis of the role subspace, one column per role.
#[derive(Clone, Debug, PartialEq)]
pub struct RoleBasis {
    pub c: DenseMatrix,
}

impl RoleBasis {
    pub fn num_roles(&self) -> usize {
        self.c.cols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.c.column(j)
    }

    /// `‖CᵀC - I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.c.transpose().matmul(&self.c).expect("shape");
        g.sub(&DenseMatrix::identity(self.num_roles())).expect("shape").max_abs()
    }

    /// `Cᵀ M C`.
    pub fn restrict(&self, m: &SymMatrix) -> Result<SymMatrix> {
        let r = self.c.transpose().matmul(&m.matrix().matmul(&self.c)?)?;
        let mut sym = r.clone();
        // exact symmetry; the product only differs by rounding
        for i in 0..sym.rows() {
            for j in (i + 1)..sym.cols() {
                let avg = 0.5 * (r[(i, j)] + r[(j, i)]);
                sym[(i, j)] = avg;
                sym[(j, i)] = avg;
            }
        }
        SymMatrix::new(sym)
    }

    /// Projector `CCᵀ`.
    pub fn projector(&self) -> DenseMatrix {
        self.c.matmul(&self.c.transpose()).expect("shape")
    }
}

/// `C[u][j] = 1/sqrt(|B_j|)` for `u ∈ B_j`.
pub fn role_basis(partition: &Partition) -> RoleBasis {
    let mut c = DenseMatrix::zeros(partition.num_nodes(), partition.num_blocks());
    for (j, block) in partition.blocks().iter().enumerate() {
        let v = 1.0 / (block.len() as f64).sqrt();
        for &u in block {
            c[(u, j)] = v;
        }
    }
    RoleBasis { c }
}

/// Rotates `C` by the eigenvectors of `Cᵀ S_obs C` (ascending eigenvalues).
pub fn rotate_basis(basis: &RoleBasis, s_obs: &SymMatrix) -> Result<RoleBasis> {
    let restricted = basis.restrict(s_obs)?;
    let eig = symmetric_eig(&restricted)?;
    Ok(RoleBasis { c: basis.c.matmul(&eig.vectors)? })
}

/// Spectral quantities of one role direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoleLift {
    pub mu_obs: f64,
    pub mu_rawr: f64,
    pub tau: f64,
    pub nu: f64,
    pub lambda_plus: f64,
    pub delta: f64,
}

/// Larger eigenvalue of `[[a, b], [b, d]]`.
pub fn top_eigenvalue_2x2(a: f64, b: f64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    mean + half_gap.hypot(b)
}

/// Lift of one unit role direction `c`.
///
/// `s_oo` is `n×n`, `s_vo` is `k×n`, `s_vv` is `k×k`. When the coupling
/// `‖S_vo c‖` vanishes the lift matrix decouples and `λ₊ = μ_rawr`
/// (`ν` is then reported as 0).
pub fn per_role_lift(
    c: &[f64],
    s_obs: &DenseMatrix,
    s_oo: &DenseMatrix,
    s_vo: &DenseMatrix,
    s_vv: &DenseMatrix,
) -> RoleLift {
    let mu_obs = dot(c, &s_obs.mul_vec(c));
    let mu_rawr = dot(c, &s_oo.mul_vec(c));
    let coupling = s_vo.mul_vec(c);
    let tau = norm(&coupling);
    let (nu, lambda_plus) = if tau < TAU_EPS {
        (0.0, mu_rawr)
    } else {
        let v_hat: Vec<f64> = coupling.iter().map(|x| x / tau).collect();
        let nu = dot(&v_hat, &s_vv.mul_vec(&v_hat));
        (nu, top_eigenvalue_2x2(mu_rawr, tau, nu))
    };
    RoleLift { mu_obs, mu_rawr, tau, nu, lambda_plus, delta: lambda_plus - mu_obs }
}

/// Label energy split over role directions.
#[derive(Clone, Debug, PartialEq)]
pub struct RoleEnergies {
    /// Fraction of label energy inside the role subspace.
    pub rho: f64,
    /// Global role weights; all zero when the role energy is zero.
    pub omega: Vec<f64>,
    pub e_tot: f64,
    pub e_roles: f64,
    /// `β[j][c] = C_jᵀ y_c`, `k × classes`.
    pub beta: DenseMatrix,
}

pub fn role_energies(basis: &RoleBasis, y: &DenseMatrix) -> Result<RoleEnergies> {
    if y.rows() != basis.c.rows() {
        return Err(RawrError::DimensionMismatch(format!(
            "label matrix has {} rows, basis has {}",
            y.rows(),
            basis.c.rows()
        )));
    }
    let e_tot = y.frobenius_norm_sq();
    if e_tot == 0.0 {
        return Err(RawrError::EmptyLabels);
    }
    let beta = basis.c.transpose().matmul(y)?;
    let per_role: Vec<f64> = (0..beta.rows()).map(|j| beta.row(j).iter().map(|b| b * b).sum()).collect();
    let e_roles: f64 = per_role.iter().sum();
    let omega = if e_roles > 0.0 {
        per_role.iter().map(|e| e / e_roles).collect()
    } else {
        vec![0.0; per_role.len()]
    };
    Ok(RoleEnergies { rho: (e_roles / e_tot).min(1.0), omega, e_tot, e_roles, beta })
}

/// `‖M₁M₂ − M₂M₁‖_F` for `M₁ = Cᵀ S_obs C`, `M₂ = Cᵀ S_oo C`.
pub fn commutator_norm(basis: &RoleBasis, s_obs: &SymMatrix, s_oo: &SymMatrix) -> Result<f64> {
    let m1 = basis.restrict(s_obs)?.into_matrix();
    let m2 = basis.restrict(s_oo)?.into_matrix();
    Ok(m1.matmul(&m2)?.sub(&m2.matmul(&m1)?)?.frobenius_norm())
}

/// Error-bound constants for the filter `h(s) = s^L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundTerms {
    pub kappa0: f64,
    pub kappa_max: f64,
    pub bound_rhs: f64,
}

fn filter(s: f64, degree: usize) -> f64 {
    s.powi(degree as i32)
}

fn filter_derivative(s: f64, degree: usize) -> f64 {
    if degree == 0 {
        0.0
    } else {
        degree as f64 * s.powi(degree as i32 - 1)
    }
}

/// `κ₀ + κ_max · E_tot · SRL` for `h(s) = s^L`.
///
/// `h'(ξ)²` is bounded by its larger value at the two interval endpoints
/// `μ_obs` and `λ₊`, which is exact for `|h'|` convex (all `L ≥ 1`).
/// `beta_obs` is `k × classes` in the report's rotated basis.
pub fn bound_error(report: &SrlReport, filter_degree: usize, beta_obs: &DenseMatrix) -> BoundTerms {
    let mut kappa0 = 0.0;
    let mut kappa_max = 0.0f64;
    for (j, lift) in report.lifts.iter().enumerate() {
        let h_lambda = filter(lift.lambda_plus, filter_degree);
        if h_lambda.abs() < 1e-12 {
            kappa0 += beta_obs.row(j).iter().map(|b| b * b).sum::<f64>();
        } else {
            let slope = filter_derivative(lift.mu_obs, filter_degree)
                .abs()
                .max(filter_derivative(lift.lambda_plus, filter_degree).abs());
            kappa_max = kappa_max.max(slope * slope / (h_lambda * h_lambda));
        }
    }
    BoundTerms { kappa0, kappa_max, bound_rhs: kappa0 + kappa_max * report.e_tot * report.srl }
}

/// Full SRL evaluation of one rewiring.
#[derive(Clone, Debug, PartialEq)]
pub struct SrlReport {
    pub lifts: Vec<RoleLift>,
    pub omega: Vec<f64>,
    pub rho: f64,
    pub srl: f64,
    pub srl_per_class: Vec<f64>,
    pub e_tot: f64,
    pub commutator_norm: f64,
    /// Roles whose lift came out negative.
    pub negative_lifts: usize,
    pub filter_degree: usize,
    pub kappa0: f64,
    pub kappa_max: f64,
    pub bound_rhs: f64,
    /// Rotated role basis used for every per-role quantity.
    pub basis: RoleBasis,
    /// Label coefficients in `basis`, `k × classes`.
    pub beta: DenseMatrix,
}

impl SrlReport {
    /// One row per role followed by a `key,value` footer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("role,mu_obs,mu_rawr,tau,nu,lambda_plus,delta,omega\n");
        for (j, (l, w)) in self.lifts.iter().zip(&self.omega).enumerate() {
            let _ = writeln!(
                out,
                "{j},{},{},{},{},{},{},{}",
                fmt6(l.mu_obs),
                fmt6(l.mu_rawr),
                fmt6(l.tau),
                fmt6(l.nu),
                fmt6(l.lambda_plus),
                fmt6(l.delta),
                fmt6(*w)
            );
        }
        out.push_str("\nkey,value\n");
        for (key, value) in [
            ("rho", self.rho),
            ("srl", self.srl),
            ("commutator_norm", self.commutator_norm),
            ("kappa0", self.kappa0),
            ("kappa_max", self.kappa_max),
            ("bound_rhs", self.bound_rhs),
            ("E_tot", self.e_tot),
        ] {
            let _ = writeln!(out, "{key},{}", fmt6(value));
        }
        let _ = writeln!(out, "negative_lifts,{}", self.negative_lifts);
        out
    }
}

/// Block views of the normalized shift of a rewired graph.
#[derive(Clone, Debug)]
pub struct ShiftBlocks {
    pub s_oo: SymMatrix,
    pub s_vo: DenseMatrix,
    pub s_vv: DenseMatrix,
}

pub fn shift_blocks(rewired: &RewiredGraph) -> Result<(SymMatrix, ShiftBlocks)> {
    let s = normalized_shift(&rewired.dense_adjacency())?;
    let n = rewired.origin_count();
    let m = rewired.size();
    let blocks = ShiftBlocks {
        s_oo: SymMatrix::new(s.matrix().block(0, n, 0, n))?,
        s_vo: s.matrix().block(n, m, 0, n),
        s_vv: s.matrix().block(n, m, n, m),
    };
    Ok((s, blocks))
}

/// SRL of `rewired` (built from `partition`) against the label matrix `y`
/// (`n × classes`).
///
/// The κ terms use `h(s) = s^filter_degree`. Zero-response roles contribute
/// the label coefficients themselves to `κ₀` here; use [`bound_error`] with
/// the student's coefficients for the exact constant.
pub fn srl(
    graph: &Graph,
    rewired: &RewiredGraph,
    partition: &Partition,
    y: &DenseMatrix,
    filter_degree: usize,
) -> Result<SrlReport> {
    let n = graph.num_nodes();
    if rewired.origin_count() != n || partition.num_nodes() != n {
        return Err(RawrError::DimensionMismatch("graph, partition and rewiring disagree on n".into()));
    }
    if rewired.virtual_count() != partition.num_blocks() {
        return Err(RawrError::DimensionMismatch(format!(
            "rewiring has {} virtual nodes, partition has {} blocks",
            rewired.virtual_count(),
            partition.num_blocks()
        )));
    }
    let s_obs = normalized_shift(&graph.dense_adjacency())?;
    let (_, blocks) = shift_blocks(rewired)?;
    let basis = rotate_basis(&role_basis(partition), &s_obs)?;

    let lifts: Vec<RoleLift> = (0..basis.num_roles())
        .map(|j| {
            per_role_lift(&basis.column(j), s_obs.matrix(), blocks.s_oo.matrix(), &blocks.s_vo, &blocks.s_vv)
        })
        .collect();
    let energies = role_energies(&basis, y)?;
    let srl_value =
        energies.rho * energies.omega.iter().zip(&lifts).map(|(w, l)| w * l.delta * l.delta).sum::<f64>();

    let classes = y.cols();
    let srl_per_class = (0..classes)
        .map(|c| {
            let e_c: f64 = (0..n).map(|u| y[(u, c)] * y[(u, c)]).sum();
            if e_c == 0.0 {
                return 0.0;
            }
            // ρ_c Σ_j ω_jc Δ_j² = Σ_j β_jc² Δ_j² / E_c
            lifts
                .iter()
                .enumerate()
                .map(|(j, l)| energies.beta[(j, c)].powi(2) * l.delta * l.delta)
                .sum::<f64>()
                / e_c
        })
        .collect();

    let mut report = SrlReport {
        negative_lifts: lifts.iter().filter(|l| l.delta < 0.0).count(),
        lifts,
        omega: energies.omega,
        rho: energies.rho,
        srl: srl_value,
        srl_per_class,
        e_tot: energies.e_tot,
        commutator_norm: commutator_norm(&basis, &s_obs, &blocks.s_oo)?,
        filter_degree,
        kappa0: 0.0,
        kappa_max: 0.0,
        bound_rhs: 0.0,
        basis,
        beta: energies.beta,
    };
    let terms = bound_error(&report, filter_degree, &report.beta);
    report.kappa0 = terms.kappa0;
    report.kappa_max = terms.kappa_max;
    report.bound_rhs = terms.bound_rhs;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{quotient, refine_eps_be};
    use crate::rewire::{build_rewired, Variant};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shift_examples() {
        let k2 = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = normalized_shift(&k2).unwrap();
        assert!(s.matrix().sub(&DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]])).unwrap().max_abs() < 1e-15);

        let s = normalized_shift(&DenseMatrix::zeros(1, 1)).unwrap();
        assert_eq!(s.matrix()[(0, 0)], 1.0);

        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = normalized_shift(&p3.dense_adjacency()).unwrap();
        assert!(close(s.matrix()[(0, 1)], 1.0 / 6f64.sqrt(), 1e-15));
    }

    #[test]
    fn role_basis_examples() {
        let p = Partition::from_blocks(4, &[vec![0], vec![1, 2, 3]]).unwrap();
        let c = role_basis(&p);
        let r3 = 1.0 / 3f64.sqrt();
        assert_eq!(c.column(0), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.column(1), vec![0.0, r3, r3, r3]);
        assert!(c.orthonormality_error() < 1e-15);
        assert_eq!(role_basis(&Partition::singletons(3)).c, DenseMatrix::identity(3));
    }

    #[test]
    fn rotation_diagonalizes() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3)]).unwrap();
        let p = Partition::from_blocks(6, &[vec![0, 1], vec![2, 3, 4], vec![5]]).unwrap();
        let s = normalized_shift(&g.dense_adjacency()).unwrap();
        let rot = rotate_basis(&role_basis(&p), &s).unwrap();
        let d = rot.restrict(&s).unwrap().into_matrix();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(d[(i, j)].abs() < 1e-8);
                }
            }
        }
        assert!(rot.orthonormality_error() < 1e-10);

        let single = rotate_basis(&role_basis(&Partition::single_block(6)), &s).unwrap();
        assert_eq!(single.c, role_basis(&Partition::single_block(6)).c);
    }

    #[test]
    fn lift_examples() {
        assert!(close(top_eigenvalue_2x2(0.0, 1.0, 0.0), 1.0, 1e-15));
        assert_eq!(top_eigenvalue_2x2(0.3, 0.0, 0.7), 0.7);
        assert_eq!(top_eigenvalue_2x2(0.9, 0.0, 0.2), 0.9);

        let s = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let c = [1.0 / 2f64.sqrt(); 2];
        let lift = per_role_lift(&c, &s, &s, &DenseMatrix::zeros(1, 2), &DenseMatrix::zeros(1, 1));
        assert_eq!(lift.tau, 0.0);
        assert_eq!(lift.nu, 0.0);
        assert_eq!(lift.delta, 0.0);
    }

    #[test]
    fn energies_examples() {
        let p = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let basis = role_basis(&p);
        // columns orthogonal to both block indicators
        let y = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![2.0], vec![-2.0]]);
        let e = role_energies(&basis, &y).unwrap();
        assert_eq!(e.rho, 0.0);
        assert_eq!(e.omega, vec![0.0, 0.0]);

        // block-constant labels
        let y = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let e = role_energies(&basis, &y).unwrap();
        assert!(close(e.rho, 1.0, 1e-15));
        assert!(close(e.omega.iter().sum::<f64>(), 1.0, 1e-15));

        // singletons: ω ∝ squared row norms
        let y = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
        let e = role_energies(&role_basis(&Partition::singletons(3)), &y).unwrap();
        assert_eq!(e.rho, 1.0);
        assert_eq!(e.omega, vec![1.0 / 3.0, 0.0, 2.0 / 3.0]);

        assert_eq!(role_energies(&basis, &DenseMatrix::zeros(4, 1)), Err(RawrError::EmptyLabels));
    }

    #[test]
    fn commutator_examples() {
        // k = 1 commutes exactly
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = normalized_shift(&g.dense_adjacency()).unwrap();
        let basis = role_basis(&Partition::single_block(4));
        let s2 = SymMatrix::new(s.matrix().scale(0.3)).unwrap();
        assert_eq!(commutator_norm(&basis, &s, &s2).unwrap(), 0.0);

        // identity basis: M1 = [[0,1],[1,0]], M2 = [[1,0],[0,0]]
        let id = RoleBasis { c: DenseMatrix::identity(2) };
        let m1 = SymMatrix::new(DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        let m2 = SymMatrix::new(DenseMatrix::diag(&[1.0, 0.0])).unwrap();
        assert!(close(commutator_norm(&id, &m1, &m2).unwrap(), 2f64.sqrt(), 1e-15));
        let d1 = SymMatrix::new(DenseMatrix::diag(&[0.2, 0.4])).unwrap();
        assert_eq!(commutator_norm(&id, &d1, &m2).unwrap(), 0.0);
    }

    fn star_report(variant: Variant) -> SrlReport {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = refine_eps_be(&g, 0.0);
        let q = quotient(&g, &p).unwrap();
        let r = build_rewired(&g, &p, &q, variant, None).unwrap();
        let y = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        srl(&g, &r, &p, &y, 2).unwrap()
    }

    #[test]
    fn srl_formula_and_invariants() {
        let rep = star_report(Variant::RepNodes);
        let direct = rep.rho * rep.omega.iter().zip(&rep.lifts).map(|(w, l)| w * l.delta.powi(2)).sum::<f64>();
        assert!(close(rep.srl, direct, 1e-14));
        assert!(close(rep.rho, 1.0, 1e-12));
        assert!(close(rep.omega.iter().sum::<f64>(), 1.0, 1e-12));
        for l in &rep.lifts {
            assert!(l.lambda_plus >= l.mu_rawr.max(l.nu) - 1e-10);
        }
        // energy-weighted average of per-class values
        let e_c = [1.0, 3.0];
        let avg: f64 = rep.srl_per_class.iter().zip(e_c).map(|(s, e)| s * e).sum::<f64>() / rep.e_tot;
        assert!(close(avg, rep.srl, 1e-12));
    }

    #[test]
    fn zero_lift_gives_zero_bound() {
        let mut rep = star_report(Variant::RepNodes);
        for l in &mut rep.lifts {
            l.lambda_plus = 0.8;
            l.mu_obs = 0.8;
            l.delta = 0.0;
        }
        rep.srl = 0.0;
        let t = bound_error(&rep, 2, &rep.beta);
        assert_eq!(t.kappa0, 0.0);
        assert_eq!(t.bound_rhs, 0.0);
    }

    #[test]
    fn linear_filter_kappa() {
        let rep = star_report(Variant::RepEdges);
        let t = bound_error(&rep, 1, &rep.beta);
        let expected = rep.lifts.iter().map(|l| 1.0 / l.lambda_plus.powi(2)).fold(0.0, f64::max);
        assert!(close(t.kappa_max, expected, 1e-12));
    }

    #[test]
    fn csv_has_footer() {
        let csv = star_report(Variant::Full).to_csv();
        assert!(csv.starts_with("role,mu_obs,mu_rawr,tau,nu,lambda_plus,delta,omega\n0,"));
        assert!(csv.contains("\nsrl,"));
        assert!(csv.contains("\nE_tot,4.000000\n"));
    }
}
