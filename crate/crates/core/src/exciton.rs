//! Frenkel exciton Hamiltonian in the single-excitation manifold and its
//! spectral descriptors.

use crate::error::{Error, Result};
use crate::geometry::{coupling_matrix, Chromophore, Configuration, CouplingModel};
use nalgebra::{DMatrix, DVector};

/// N×N real symmetric site-basis Hamiltonian in cm⁻¹: diagonal site
/// energies, off-diagonal dipole-dipole couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonHamiltonian {
    matrix: DMatrix<f64>,
}

/// Spectral summary of an exciton Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDescriptors {
    /// Eigenvalues sorted ascending (cm⁻¹).
    pub eigenvalues: Vec<f64>,
    /// |⟨trap|ψ_min⟩|²; for a degenerate ground level, the maximum over the
    /// degenerate subspace.
    pub ground_trap_overlap: f64,
    /// Mean adjacent-gap of the sorted spectrum, equal to (E_max − E_min)/(N−1).
    pub mean_gap: f64,
    /// Population standard deviation of the adjacent gaps.
    pub gap_std: f64,
    /// Set when the ground level is degenerate within 1e-9 cm⁻¹.
    pub ground_state_degenerate: bool,
}

impl ExcitonHamiltonian {
    /// Build from an explicit symmetric matrix.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..matrix.nrows() {
            for j in (i + 1)..matrix.ncols() {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "Hamiltonian not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    /// Build from a raw site list: diagonal from site energies, off-diagonal
    /// from pairwise dipole couplings.
    pub fn from_sites(sites: &[Chromophore], model: &CouplingModel) -> Result<Self> {
        let mut matrix = coupling_matrix(sites, model)?;
        for (j, site) in sites.iter().enumerate() {
            matrix[(j, j)] = site.site_energy;
        }
        Ok(Self { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigen-decomposition with eigenvalues sorted ascending; columns of the
    /// returned matrix are the matching orthonormal eigenvectors.
    pub fn eigen(&self) -> (DVector<f64>, DMatrix<f64>) {
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.column_mut(dst).copy_from(&eig.eigenvectors.column(src));
        }
        (values, vectors)
    }
}

/// Build the exciton Hamiltonian of a configuration.
pub fn build_hamiltonian(config: &Configuration, model: &CouplingModel) -> Result<ExcitonHamiltonian> {
    ExcitonHamiltonian::from_sites(&config.chromophores, model)
}

/// Diagonalize and summarize: sorted spectrum, ground-trap overlap, adjacent
/// gap statistics.
pub fn spectral_descriptors(h: &ExcitonHamiltonian, trap_index: usize) -> Result<SpectralDescriptors> {
    let n = h.n();
    if trap_index >= n {
        return Err(Error::InvalidParameter(format!(
            "trap index {trap_index} out of range for n={n}"
        )));
    }
    let (values, vectors) = h.eigen();
    let eigenvalues: Vec<f64> = values.iter().copied().collect();

    let degenerate_count = eigenvalues
        .iter()
        .take_while(|&&e| e - eigenvalues[0] < 1e-9)
        .count();
    let ground_state_degenerate = degenerate_count > 1;
    let mut ground_trap_overlap = 0.0f64;
    for k in 0..degenerate_count {
        let amp = vectors[(trap_index, k)];
        ground_trap_overlap = ground_trap_overlap.max(amp * amp);
    }

    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let (mean_gap, gap_std) = if gaps.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
        (mean, var.sqrt())
    };

    Ok(SpectralDescriptors {
        eigenvalues,
        ground_trap_overlap,
        mean_gap,
        gap_std,
        ground_state_degenerate,
    })
}
