use nalgebra::{ComplexField, DMatrix, SymmetricEigen};

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues;
/// column `k` of the returned matrix is the eigenvector of value `k`.
pub(crate) fn eigh<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = m.nrows();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    (values, vectors)
}

/// `max |H - H†| / max |H|`, zero for the zero matrix.
#[cfg(test)]
pub(crate) fn hermiticity_defect<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    let scale = m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let adj = m.adjoint();
    let defect = (m - adj).iter().map(|x| x.clone().modulus()).fold(0.0, f64::max);
    defect / scale
}

/// Largest eigen-residual `‖Hv − λv‖` relative to `max |H|`.
#[cfg(test)]
pub(crate) fn eigen_residual<T>(m: &DMatrix<T>, values: &[f64], vectors: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    let scale = m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let hv = m * vectors;
    let mut worst: f64 = 0.0;
    for (k, &lambda) in values.iter().enumerate() {
        let r = hv.column(k) - vectors.column(k) * T::from_real(lambda);
        worst = worst.max(r.norm());
    }
    worst / scale
}
