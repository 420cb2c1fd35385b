//! Closed two-spin model: an electron spin and a nuclear spin, both 1/2.
//!
//! Product basis ordering is `|up Up>, |up Down>, |down Up>, |down Down>`
//! with the electron first. Spin operators carry eigenvalues `+-1/2`
//! (hbar = 1). Frequencies are unit-agnostic reals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Parameters of the rotating-frame Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinParams {
    /// Electron Zeeman frequency.
    pub omega_s: f64,
    /// Nuclear Zeeman frequency.
    pub omega_l: f64,
    /// Frequency of the rotating frame; the electron sees
    /// `Omega = omega_s - omega_rf`.
    pub omega_rf: f64,
    /// Secular hyperfine coupling `A`.
    pub a_hyper: f64,
    /// Pseudosecular hyperfine coupling `B`.
    pub b_hyper: f64,
    /// Dipolar coupling `D`.
    pub d_dip: f64,
    /// Tilt of the field from the hyperfine principal axis (rad).
    pub phi_tilt: f64,
    /// Isotropic exchange `lambda S1.S2`.
    pub exchange: f64,
}

impl SpinParams {
    pub fn omega(&self) -> f64 {
        self.omega_s - self.omega_rf
    }

    /// Sets `B = 3 D cos(phi) sin(phi)` from the dipolar coupling and tilt.
    pub fn with_dipolar_b(mut self) -> Self {
        self.b_hyper = 3.0 * self.d_dip * self.phi_tilt.cos() * self.phi_tilt.sin();
        self
    }
}

/// Hermitian matrix on the 4-dimensional two-spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    pub matrix: DMatrix<C>,
}

/// Single spin-1/2 operators.
pub fn spin_x() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE * 0.5, ONE * 0.5, ZERO])
}

pub fn spin_y() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[ZERO, -I * 0.5, I * 0.5, ZERO])
}

pub fn spin_z() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[ONE * 0.5, ZERO, ZERO, -ONE * 0.5])
}

fn identity(n: usize) -> DMatrix<C> {
    DMatrix::identity(n, n)
}

/// Operator acting as `op` on spin `site` of `n` spins.
pub fn site_operator(op: &DMatrix<C>, site: usize, n: usize) -> DMatrix<C> {
    (0..n).fold(DMatrix::identity(1, 1), |acc: DMatrix<C>, k| {
        let factor = if k == site { op.clone() } else { identity(2) };
        acc.kronecker(&factor)
    })
}

fn electron(op: &DMatrix<C>) -> DMatrix<C> {
    site_operator(op, 0, 2)
}

fn nuclear(op: &DMatrix<C>) -> DMatrix<C> {
    site_operator(op, 1, 2)
}

/// `lambda (S_i . S_j)` summed over the listed pairs of an `n`-spin chain.
pub fn heisenberg(n: usize, pairs: &[(usize, usize, f64)]) -> DMatrix<C> {
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for &(i, j, lambda) in pairs {
        for op in [spin_x(), spin_y(), spin_z()] {
            h += (site_operator(&op, i, n) * site_operator(&op, j, n)) * C::from(lambda);
        }
    }
    h
}

/// `H = Omega S_z + omega_l I_z + A S_z I_z + B S_z I_x + lambda S.I`.
pub fn build_hamiltonian(params: &SpinParams) -> SpinHamiltonian {
    let (sz, sx) = (spin_z(), spin_x());
    let ez = electron(&sz);
    let mut h = &ez * C::from(params.omega())
        + nuclear(&sz) * C::from(params.omega_l)
        + (&ez * nuclear(&sz)) * C::from(params.a_hyper)
        + (&ez * nuclear(&sx)) * C::from(params.b_hyper);
    if params.exchange != 0.0 {
        h += heisenberg(2, &[(0, 1, params.exchange)]);
    }
    SpinHamiltonian { matrix: h }
}

impl SpinHamiltonian {
    pub fn from_matrix(matrix: DMatrix<C>) -> Result<Self> {
        if matrix.shape() != (4, 4) {
            return Err(Error::Dimension(format!("expected 4x4, got {:?}", matrix.shape())));
        }
        Ok(Self { matrix })
    }

    /// Largest `|H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}

fn hermiticity_defect(m: &DMatrix<C>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C>,
}

/// Dense Hermitian eigendecomposition.
pub fn eigensystem(h: &DMatrix<C>) -> Result<Eigensystem> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("matrix {:?} is not square", h.shape())));
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-12 {
        return Err(Error::NotHermitian(defect));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    Ok(Eigensystem { values, vectors })
}

impl Eigensystem {
    /// Level whose eigenvector overlaps most with `state`.
    pub fn level_of(&self, state: &DVector<C>) -> f64 {
        let k = (0..self.values.len())
            .max_by(|&a, &b| {
                let pa = self.vectors.column(a).dotc(state).norm_sqr();
                let pb = self.vectors.column(b).dotc(state).norm_sqr();
                pa.total_cmp(&pb)
            })
            .expect("non-empty spectrum");
        self.values[k]
    }

    /// `(E(S), E(T0))` identified by overlap with the pair states.
    pub fn singlet_triplet_levels(&self) -> (f64, f64) {
        (self.level_of(&singlet()), self.level_of(&triplet_zero()))
    }
}

/// Spin singlet `(|ud> - |du>) / sqrt 2`.
pub fn singlet() -> DVector<C> {
    let r = C::from(std::f64::consts::FRAC_1_SQRT_2);
    DVector::from_vec(vec![ZERO, r, -r, ZERO])
}

/// Triplet `(|ud> + |du>) / sqrt 2`.
pub fn triplet_zero() -> DVector<C> {
    let r = C::from(std::f64::consts::FRAC_1_SQRT_2);
    DVector::from_vec(vec![ZERO, r, r, ZERO])
}

pub fn triplet_plus() -> DVector<C> {
    DVector::from_vec(vec![ONE, ZERO, ZERO, ZERO])
}

pub fn triplet_minus() -> DVector<C> {
    DVector::from_vec(vec![ZERO, ZERO, ZERO, ONE])
}

/// Exchange coupling `J = E(T0) - E(S)`.
pub fn exchange_coupling(singlet_energy: f64, triplet_energy: f64) -> f64 {
    triplet_energy - singlet_energy
}

/// Two electrons in spatial orbitals `X` and `X'`, written in the
/// singlet/triplet basis.
///
/// The 16-dimensional product space is ordered
/// `(orbital_1, orbital_2, spin_1, spin_2)`, orbital `0` being `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoElectronStates {
    pub singlet: C,
    pub t_zero: C,
    pub t_plus: C,
    pub t_minus: C,
}

impl TwoElectronStates {
    pub fn new(singlet: C, t_zero: C, t_plus: C, t_minus: C) -> Result<Self> {
        let s = Self { singlet, t_zero, t_plus, t_minus };
        let norm = [singlet, t_zero, t_plus, t_minus].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm - 1.0));
        }
        Ok(s)
    }

    fn basis(orbital_symmetric: bool, spin: &DVector<C>) -> DVector<C> {
        let r = C::from(std::f64::consts::FRAC_1_SQRT_2);
        let sign = if orbital_symmetric { r } else { -r };
        // (|X X'> +- |X' X>) / sqrt 2
        let orbital = DVector::from_vec(vec![ZERO, r, sign, ZERO]);
        orbital.kronecker(spin)
    }

    /// State vector in the 16-dimensional product space.
    pub fn state_vector(&self) -> DVector<C> {
        Self::basis(true, &singlet()) * self.singlet
            + Self::basis(false, &triplet_zero()) * self.t_zero
            + Self::basis(false, &triplet_plus()) * self.t_plus
            + Self::basis(false, &triplet_minus()) * self.t_minus
    }
}

/// Permutation exchanging the spin labels of the two electrons in the
/// 16-dimensional space.
pub fn spin_exchange_operator() -> DMatrix<C> {
    let mut swap = DMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = ONE;
    }
    identity(4).kronecker(&swap)
}

/// Permutation exchanging the electrons entirely (orbital and spin).
pub fn particle_exchange_operator() -> DMatrix<C> {
    let mut swap = DMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = ONE;
    }
    swap.kronecker(&swap)
}

/// Overlap measure and confinement quantities of a displaced electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    /// `l = exp((d/a)^2 (1/b - 2b))`.
    pub l: f64,
    /// `b = sqrt(1 + omega_s / Omega)`.
    pub b: f64,
    /// `epsilon = (d/a) f hbar omega_e`.
    pub epsilon: f64,
}

/// Orbital overlap of an electron displaced by `d_disp` in a confinement of
/// size `a`, with field parameter `b = sqrt(1 + omega_s / omega_0)`.
/// `f_factor` and `hbar_omega_e` enter only the discretised energy
/// `epsilon`.
pub fn overlap(
    d_disp: f64,
    a: f64,
    omega_s: f64,
    omega_0: f64,
    f_factor: f64,
    hbar_omega_e: f64,
) -> Result<Overlap> {
    if !(a > 0.0) {
        return Err(Error::Domain { op: "overlap", name: "a", value: a });
    }
    if omega_0 == 0.0 {
        return Err(Error::Domain { op: "overlap", name: "omega_0", value: omega_0 });
    }
    let radicand = 1.0 + omega_s / omega_0;
    if !(radicand >= 0.0) {
        return Err(Error::Domain { op: "overlap", name: "1 + omega_s/omega_0", value: radicand });
    }
    let b = radicand.sqrt();
    let ratio = d_disp / a;
    let l = if d_disp == 0.0 { 1.0 } else { (ratio * ratio * (1.0 / b - 2.0 * b)).exp() };
    Ok(Overlap { l, b, epsilon: ratio * f_factor * hbar_omega_e })
}

/// Transition frequency shifted by a transverse field of amplitude
/// `e_perp`: `omega - e_perp^2 (alpha2 - alpha1) / 2 + quartic e_perp^4`.
pub fn transition_frequency(omega: f64, e_perp: f64, alpha1: f64, alpha2: f64, quartic: f64) -> f64 {
    let e2 = e_perp * e_perp;
    omega - 0.5 * e2 * (alpha2 - alpha1) + quartic * e2 * e2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Electron,
    Nuclear,
}

/// Applies `exp(-i angle (n . sigma) / 2)` to one subsystem of a normalized
/// two-spin state. `axis` need not be unit length but must be non-zero.
pub fn rotate(state: &DVector<C>, subsystem: Subsystem, axis: [f64; 3], angle: f64) -> Result<DVector<C>> {
    if state.len() != 4 {
        return Err(Error::Dimension(format!("expected a 4-component state, got {}", state.len())));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm - 1.0));
    }
    let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(len > 0.0) {
        return Err(Error::Domain { op: "rotate", name: "axis length", value: len });
    }
    let n = axis.map(|c| c / len);
    // n . sigma with Pauli matrices = 2 n . S
    let n_sigma = (spin_x() * C::from(n[0]) + spin_y() * C::from(n[1]) + spin_z() * C::from(n[2])) * C::from(2.0);
    let u = identity(2) * C::from((0.5 * angle).cos()) - n_sigma * (I * (0.5 * angle).sin());
    let full = match subsystem {
        Subsystem::Electron => electron(&u),
        Subsystem::Nuclear => nuclear(&u),
    };
    Ok(full * state)
}

/// `||H Z - Z H||_inf` (maximum absolute row sum) with
/// `Z = sum_j sigma_z^j` on `n = log2(dim)` spins, `1 <= n <= 4`.
pub fn commutator_with_z(h: &DMatrix<C>) -> Result<f64> {
    let dim = h.nrows();
    if !h.is_square() || !dim.is_power_of_two() || !(2..=16).contains(&dim) {
        return Err(Error::Dimension(format!("expected a 2^n square matrix with n <= 4, got {:?}", h.shape())));
    }
    let n = dim.trailing_zeros() as usize;
    let sigma_z = spin_z() * C::from(2.0);
    let z = (0..n).fold(DMatrix::zeros(dim, dim), |acc, j| acc + site_operator(&sigma_z, j, n));
    let c = h * &z - &z * h;
    Ok(c.row_iter().map(|row| row.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max))
}

/// One row of a level diagram: the swept value, the four ascending levels,
/// and `J = E(T0) - E(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRow {
    pub value: f64,
    pub levels: [f64; 4],
    pub j: f64,
}

/// Parameter that a level diagram sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    OmegaS,
    OmegaL,
    AHyper,
    BHyper,
    Exchange,
}

/// Levels of `base` with one parameter replaced by each of `values`.
pub fn level_sweep(base: &SpinParams, parameter: SweepParameter, values: &[f64]) -> Result<Vec<LevelRow>> {
    values
        .iter()
        .map(|&value| {
            let mut p = *base;
            match parameter {
                SweepParameter::OmegaS => p.omega_s = value,
                SweepParameter::OmegaL => p.omega_l = value,
                SweepParameter::AHyper => p.a_hyper = value,
                SweepParameter::BHyper => p.b_hyper = value,
                SweepParameter::Exchange => p.exchange = value,
            }
            let eig = eigensystem(&build_hamiltonian(&p).matrix)?;
            let (s, t0) = eig.singlet_triplet_levels();
            let mut levels = [0.0; 4];
            levels.copy_from_slice(&eig.values);
            Ok(LevelRow { value, levels, j: exchange_coupling(s, t0) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(k: usize) -> DVector<C> {
        let mut v = DVector::zeros(4);
        v[k] = ONE;
        v
    }

    #[test]
    fn zero_parameters_give_zero_matrix() {
        let h = build_hamiltonian(&SpinParams::default());
        assert!(h.matrix.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn diagonal_levels_without_pseudosecular_term() {
        let p = SpinParams { omega_s: 1.0, omega_l: 0.1, a_hyper: 0.01, ..Default::default() };
        let h = build_hamiltonian(&p);
        let diag: Vec<f64> = (0..4).map(|k| h.matrix[(k, k)].re).collect();
        // Omega/2 +- omega_l/2 +- A/4 by hand
        let expected = [0.5 + 0.05 + 0.0025, 0.5 - 0.05 - 0.0025, -0.5 + 0.05 - 0.0025, -0.5 - 0.05 + 0.0025];
        for (d, e) in diag.iter().zip(expected) {
            assert!((d - e).abs() < 1e-15);
        }
        let eig = eigensystem(&h.matrix).unwrap();
        let mut sorted = expected.to_vec();
        sorted.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&sorted) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pseudosecular_tilt_in_upper_manifold() {
        let (wl, a, b) = (0.1, 0.02, 0.03);
        let p = SpinParams { omega_s: 1.0, omega_l: wl, a_hyper: a, b_hyper: b, ..Default::default() };
        let eig = eigensystem(&build_hamiltonian(&p).matrix).unwrap();
        // upper manifold block: (omega_l/2 + A/4) sigma_z-like plus B/4 off diagonal
        let tilt = (b / (2.0 * wl + a)).atan();
        let top = eig.vectors.column(3);
        let angle = (top[1].norm() / top[0].norm()).atan();
        assert!((2.0 * angle - tilt).abs() < 1e-12);
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = ONE;
        assert!(matches!(eigensystem(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn heisenberg_pair_levels() {
        let eig = eigensystem(&heisenberg(2, &[(0, 1, 2.0)])).unwrap();
        assert!((eig.values[0] + 1.5).abs() < 1e-14);
        for v in &eig.values[1..] {
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x_on_electron_flips_it() {
        let out = rotate(&basis(0), Subsystem::Electron, [1.0, 0.0, 0.0], std::f64::consts::PI).unwrap();
        assert!((out[2].norm() - 1.0).abs() < 1e-15);
        assert!(rotate(&(basis(0) * C::from(2.0)), Subsystem::Electron, [1.0, 0.0, 0.0], 1.0).is_err());
        assert!(rotate(&basis(0), Subsystem::Nuclear, [0.0, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn overlap_cases() {
        let o = overlap(0.0, 1.0, 3.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(o.l, 1.0);
        assert_eq!(o.b, 2.0);
        let o = overlap(0.5, 1.0, 0.0, 1.0, 2.0, 3.0).unwrap();
        assert!((o.l - (-0.25f64).exp()).abs() < 1e-15);
        assert!((o.epsilon - 3.0).abs() < 1e-15);
        assert!(overlap(1.0, 1.0, -2.0, 1.0, 1.0, 1.0).is_err());
        assert!(overlap(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn transition_frequency_shift() {
        assert_eq!(transition_frequency(5.0, 2.0, 1.0, 1.0, 0.0), 5.0);
        let s1 = 5.0 - transition_frequency(5.0, 1.0, 1.0, 2.0, 0.0);
        let s2 = 5.0 - transition_frequency(5.0, 2.0, 1.0, 2.0, 0.0);
        assert!(s1 > 0.0);
        assert!((s2 - 4.0 * s1).abs() < 1e-15);
    }

    #[test]
    fn dipolar_b() {
        let p = SpinParams { d_dip: 2.0, phi_tilt: std::f64::consts::FRAC_PI_4, ..Default::default() }.with_dipolar_b();
        assert!((p.b_hyper - 3.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_dimension_checks() {
        assert!(commutator_with_z(&DMatrix::zeros(3, 3)).is_err());
        assert!(commutator_with_z(&DMatrix::zeros(32, 32)).is_err());
        assert_eq!(commutator_with_z(&DMatrix::zeros(8, 8)).unwrap(), 0.0);
    }

    #[test]
    fn two_electron_state_normalization() {
        assert!(TwoElectronStates::new(ONE, ONE, ZERO, ZERO).is_err());
        let s = TwoElectronStates::new(ONE, ZERO, ZERO, ZERO).unwrap();
        assert!((s.state_vector().norm() - 1.0).abs() < 1e-15);
    }
}
