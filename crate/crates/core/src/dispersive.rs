//! Multilevel qubits coupled to explicit modes: the full rotating-wave
//! Hamiltonian, its first-order Schrieffer–Wolff generator, the dispersive
//! effective Hamiltonian, and `J` read off an exact avoided crossing.
//!
//! Matrices are `H/ħ` in rad/s. The basis is the tensor product
//! `|i₁⟩ ⊗ |i₂⟩ ⊗ |n₁⟩ ⊗ … ⊗ |n_M⟩` with the last factor running fastest.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::eigh;
use crate::modes::ModeSet;
use crate::transmon::TransmonSpectrum;
use crate::units::HBAR;

/// Photons per mode kept by default.
pub const DEFAULT_PHOTON_CUTOFF: usize = 3;
/// Largest Hilbert space handed to the dense solvers.
pub const MAX_DIMENSION: usize = 20_000;
/// Smallest eigenvector weight on the bare states for a doublet to count
/// as identified.
pub const MIN_DOUBLET_WEIGHT: f64 = 0.5;

/// Ladder data for one qubit truncated to `L` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitLevels {
    /// `q_{i,i+1}` for `i = 0..L-1`, rad/s.
    pub transitions: Vec<f64>,
    /// `n_{i,i+1}/n_{0,1}` for `i = 0..L-1`.
    pub charge_ratios: Vec<f64>,
}

impl QubitLevels {
    pub fn new(transitions: Vec<f64>, charge_ratios: Vec<f64>) -> Result<Self> {
        if transitions.len() != charge_ratios.len() || transitions.is_empty() {
            return Err(invalid("one charge ratio per transition is required"));
        }
        if transitions.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(invalid("transition frequencies must be positive"));
        }
        if charge_ratios.iter().any(|r| !r.is_finite()) {
            return Err(invalid("charge ratios must be finite"));
        }
        Ok(QubitLevels {
            transitions,
            charge_ratios,
        })
    }

    /// Lowest `levels` levels of a solved transmon.
    pub fn from_spectrum(spectrum: &TransmonSpectrum, levels: usize) -> Result<Self> {
        if levels < 2 || levels > spectrum.levels() {
            return Err(invalid(format!(
                "cannot keep {levels} levels from a spectrum with {}",
                spectrum.levels()
            )));
        }
        let ratios = spectrum.charge_ratios();
        QubitLevels::new(
            (0..levels - 1).map(|i| spectrum.transition(i)).collect(),
            ratios[..levels - 1].to_vec(),
        )
    }

    /// Duffing ladder `q_{i,i+1} = q + iα` with harmonic-oscillator charge
    /// ratios `√(i+1)`.
    pub fn duffing(q01: f64, anharmonicity: f64, levels: usize) -> Result<Self> {
        QubitLevels::new(
            (0..levels.saturating_sub(1))
                .map(|i| q01 + i as f64 * anharmonicity)
                .collect(),
            (0..levels.saturating_sub(1))
                .map(|i| ((i + 1) as f64).sqrt())
                .collect(),
        )
    }

    pub fn levels(&self) -> usize {
        self.transitions.len() + 1
    }

    /// `E_i/ħ` with `E_0 = 0`.
    pub fn energies(&self) -> Vec<f64> {
        let mut e = vec![0.0];
        for q in &self.transitions {
            e.push(e[e.len() - 1] + q);
        }
        e
    }
}

/// Qubits plus modes plus the photon truncation.
#[derive(Debug, Clone)]
pub struct FullSystem {
    qubits: Vec<QubitLevels>,
    modes: ModeSet,
    photon_cutoff: usize,
}

impl FullSystem {
    /// One or two qubits with at least three levels each; every mode must
    /// carry one coupling per qubit.
    pub fn new(qubits: Vec<QubitLevels>, modes: ModeSet, photon_cutoff: usize) -> Result<Self> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(invalid("one or two qubits are supported"));
        }
        if let Some(q) = qubits.iter().find(|q| q.levels() < 3) {
            return Err(invalid(format!(
                "at least three levels per qubit are required, got {}",
                q.levels()
            )));
        }
        if !modes.is_empty() && modes.qubit_count() != qubits.len() {
            return Err(invalid(format!(
                "modes carry {} couplings but there are {} qubits",
                modes.qubit_count(),
                qubits.len()
            )));
        }
        if photon_cutoff == 0 {
            return Err(invalid("photon cutoff must be at least 1"));
        }
        let sys = FullSystem {
            qubits,
            modes,
            photon_cutoff,
        };
        let dim = sys.dimension_checked();
        match dim {
            Some(d) if d <= MAX_DIMENSION => Ok(sys),
            _ => Err(Error::DimensionTooLarge {
                dim: dim.unwrap_or(usize::MAX),
                limit: MAX_DIMENSION,
            }),
        }
    }

    pub fn qubits(&self) -> &[QubitLevels] {
        &self.qubits
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    /// Same system with a different photon cutoff.
    pub fn with_photon_cutoff(&self, photon_cutoff: usize) -> Result<Self> {
        FullSystem::new(self.qubits.clone(), self.modes.clone(), photon_cutoff)
    }

    /// Same system with every coupling scaled.
    pub fn with_scaled_couplings(&self, factor: f64) -> Result<Self> {
        FullSystem::new(self.qubits.clone(), self.modes.scaled(factor), self.photon_cutoff)
    }

    fn dimension_checked(&self) -> Option<usize> {
        let mut d: usize = 1;
        for q in &self.qubits {
            d = d.checked_mul(q.levels())?;
        }
        for _ in 0..self.modes.len() {
            d = d.checked_mul(self.photon_cutoff + 1)?;
        }
        Some(d)
    }

    pub fn dimension(&self) -> usize {
        self.dimension_checked().expect("validated at construction")
    }

    fn basis(&self) -> Basis {
        let mut dims: Vec<usize> = self.qubits.iter().map(|q| q.levels()).collect();
        dims.extend(std::iter::repeat_n(self.photon_cutoff + 1, self.modes.len()));
        Basis::new(dims, self.qubits.len())
    }

    /// `g^{(l)}_{i,k}` = `g^{(l)}_{0,k} · n_{i,i+1}/n_{0,1}`.
    fn coupling(&self, l: usize, i: usize, k: usize) -> Complex64 {
        let q = &self.qubits[l];
        self.modes.modes()[k].couplings[l] * (q.charge_ratios[i] / q.charge_ratios[0])
    }

    fn detuning(&self, l: usize, i: usize, k: usize) -> Result<f64> {
        let w = self.modes.modes()[k].frequency;
        let d = self.qubits[l].transitions[i] - w;
        if d == 0.0 {
            return Err(Error::Resonance(w));
        }
        Ok(d)
    }

    /// Total excitation number of every basis state.
    pub fn excitations(&self) -> Vec<usize> {
        let basis = self.basis();
        (0..basis.size())
            .map(|s| basis.decode(s).iter().sum())
            .collect()
    }
}

/// Mixed-radix indexing of the product basis.
struct Basis {
    dims: Vec<usize>,
    strides: Vec<usize>,
    qubits: usize,
}

impl Basis {
    fn new(dims: Vec<usize>, qubits: usize) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Basis {
            dims,
            strides,
            qubits,
        }
    }

    fn size(&self) -> usize {
        self.dims.iter().product()
    }

    fn decode(&self, mut s: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, stride) in self.strides.iter().enumerate() {
            out[k] = s / stride;
            s %= stride;
        }
        out
    }

    fn encode(&self, state: &[usize]) -> usize {
        state.iter().zip(&self.strides).map(|(a, b)| a * b).sum()
    }

    /// Index of the photon configuration of state `s`.
    fn photon_block(&self, s: usize) -> usize {
        let qubit_stride = if self.qubits == 0 {
            self.size()
        } else {
            self.strides[self.qubits - 1]
        };
        s % qubit_stride
    }
}

fn bare_diagonal(sys: &FullSystem, basis: &Basis, state: &[usize]) -> f64 {
    let nq = sys.qubits.len();
    let mut e = 0.0;
    for (l, q) in sys.qubits.iter().enumerate() {
        e += q.energies()[state[l]];
    }
    for (k, m) in sys.modes.modes().iter().enumerate() {
        e += m.frequency * state[nq + k] as f64;
    }
    let _ = basis;
    e
}

/// `H/ħ = Σ E_j|j⟩⟨j| + Σ ω_k a_k†a_k + Σ [g_{j,k}|j⟩⟨j+1|a_k† + h.c.]`.
pub fn build_full_hamiltonian(sys: &FullSystem) -> Result<DMatrix<Complex64>> {
    let basis = sys.basis();
    let dim = basis.size();
    let nq = sys.qubits.len();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for s in 0..dim {
        let state = basis.decode(s);
        h[(s, s)] = Complex64::new(bare_diagonal(sys, &basis, &state), 0.0);
        // Qubit l lowers j+1 → j while mode k gains a photon.
        for l in 0..nq {
            let level = state[l];
            if level == 0 {
                continue;
            }
            for k in 0..sys.modes.len() {
                let n = state[nq + k];
                if n >= sys.photon_cutoff {
                    continue;
                }
                let mut target = state.clone();
                target[l] -= 1;
                target[nq + k] += 1;
                let t = basis.encode(&target);
                let amp = sys.coupling(l, level - 1, k) * ((n + 1) as f64).sqrt();
                h[(t, s)] += amp;
                h[(s, t)] += amp.conj();
            }
        }
    }
    Ok(h)
}

/// Anti-Hermitian `iS₁ = Σ_l Σ_{i,k} [B*_{i,k}|i+1⟩⟨i|a_k − B_{i,k}|i⟩⟨i+1|a_k†]`
/// with `B_{i,k} = g_{i,k}/(q_{i,i+1} − ω_k)`.
pub fn build_sw_generator(sys: &FullSystem) -> Result<DMatrix<Complex64>> {
    let basis = sys.basis();
    let dim = basis.size();
    let nq = sys.qubits.len();
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for s in 0..dim {
        let state = basis.decode(s);
        for l in 0..nq {
            let level = state[l];
            if level + 1 >= sys.qubits[l].levels() {
                continue;
            }
            for k in 0..sys.modes.len() {
                let n = state[nq + k];
                if n == 0 {
                    continue;
                }
                // |level, n⟩ → |level+1, n−1⟩
                let mut target = state.clone();
                target[l] += 1;
                target[nq + k] -= 1;
                let t = basis.encode(&target);
                let b = sys.coupling(l, level, k) / sys.detuning(l, level, k)?;
                let amp = b.conj() * (n as f64).sqrt();
                a[(t, s)] += amp;
                a[(s, t)] -= amp.conj();
            }
        }
    }
    Ok(a)
}

/// Largest Frobenius norm of a block of `e^{iS₁} H e^{−iS₁}` connecting two
/// different photon configurations, divided by `max |g|`.
pub fn sw_block_residual(sys: &FullSystem) -> Result<f64> {
    Ok(sw_block_norm(sys)? / sys.modes.max_coupling().max(f64::MIN_POSITIVE))
}

/// Unscaled largest off-block Frobenius norm (rad/s).
pub fn sw_block_norm(sys: &FullSystem) -> Result<f64> {
    if sys.modes.max_coupling() == 0.0 {
        return Ok(0.0);
    }
    let h = build_full_hamiltonian(sys)?;
    let gen = build_sw_generator(sys)?;
    let u = gen.exp();
    let transformed = &u * h * u.adjoint();
    let basis = sys.basis();
    let dim = basis.size();
    let blocks: Vec<usize> = (0..dim).map(|s| basis.photon_block(s)).collect();
    let nblocks = blocks.iter().max().map_or(0, |b| b + 1);
    let mut acc = vec![0.0; nblocks * nblocks];
    for r in 0..dim {
        for c in 0..dim {
            if blocks[r] != blocks[c] {
                acc[blocks[r] * nblocks + blocks[c]] += transformed[(r, c)].norm_sqr();
            }
        }
    }
    Ok(acc.into_iter().fold(0.0, f64::max).sqrt())
}

/// Dispersive model: shifts, exchange amplitudes and the block-diagonal
/// effective Hamiltonian.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    /// `chi[l][i][k] = |g^{(l)}_{i,k}|²/(q^{(l)}_{i,i+1} − ω_k)`, rad/s.
    pub chi: Vec<Vec<Vec<f64>>>,
    /// `exchange[i][j] = J_ij` in joules (two-qubit systems only).
    pub exchange: Vec<Vec<f64>>,
    /// `H_eff/ħ`, rad/s.
    pub matrix: DMatrix<Complex64>,
}

/// Effective Hamiltonian to second order in `g`.
///
/// Diagonal: bare energies plus, for qubit level `i` and `n` photons in mode
/// `k`, the shift `χ_{i−1,k}(n+1) − χ_{i,k} n` (terms with a level outside
/// the truncated ladder are absent). Exchange: within each photon
/// configuration `⟨i,j+1|H_eff|i+1,j⟩ = ½Σ_k g¹_{i,k} g²*_{j,k}
/// [1/(q¹_{i,i+1} − ω_k) + 1/(q²_{j,j+1} − ω_k)]`, independent of `n`.
pub fn build_heff(sys: &FullSystem) -> Result<EffectiveModel> {
    let nq = sys.qubits.len();
    let nm = sys.modes.len();
    let mut chi = Vec::with_capacity(nq);
    for (l, q) in sys.qubits.iter().enumerate() {
        let mut per_level = Vec::with_capacity(q.transitions.len());
        for i in 0..q.transitions.len() {
            let mut per_mode = Vec::with_capacity(nm);
            for k in 0..nm {
                per_mode.push(sys.coupling(l, i, k).norm_sqr() / sys.detuning(l, i, k)?);
            }
            per_level.push(per_mode);
        }
        chi.push(per_level);
    }

    let exchange = if nq == 2 {
        exchange_table(sys)?
    } else {
        Vec::new()
    };

    let basis = sys.basis();
    let dim = basis.size();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for s in 0..dim {
        let state = basis.decode(s);
        let mut e = bare_diagonal(sys, &basis, &state);
        for (l, chi_l) in chi.iter().enumerate() {
            let i = state[l];
            for k in 0..nm {
                let n = state[nq + k] as f64;
                if i >= 1 {
                    e += chi_l[i - 1][k] * (n + 1.0);
                }
                if i < chi_l.len() {
                    e -= chi_l[i][k] * n;
                }
            }
        }
        h[(s, s)] = Complex64::new(e, 0.0);

        if nq == 2 {
            // s = |i, j+1⟩ couples to |i+1, j⟩.
            let (i, j1) = (state[0], state[1]);
            if j1 == 0 || i + 1 >= sys.qubits[0].levels() {
                continue;
            }
            let j = j1 - 1;
            let mut target = state.clone();
            target[0] = i + 1;
            target[1] = j;
            let t = basis.encode(&target);
            let mut amp = Complex64::new(0.0, 0.0);
            for k in 0..nm {
                let g1 = sys.coupling(0, i, k);
                let g2 = sys.coupling(1, j, k);
                let inv = 1.0 / sys.detuning(0, i, k)? + 1.0 / sys.detuning(1, j, k)?;
                amp += 0.5 * g1 * g2.conj() * inv;
            }
            h[(s, t)] += amp;
            h[(t, s)] += amp.conj();
        }
    }
    Ok(EffectiveModel {
        chi,
        exchange,
        matrix: h,
    })
}

// J_ij of the mode-sum formula, evaluated here on its own rather than by
// calling the exchange module, so the two can be compared.
fn exchange_table(sys: &FullSystem) -> Result<Vec<Vec<f64>>> {
    let (a, b) = (&sys.qubits[0], &sys.qubits[1]);
    let mut table = vec![vec![0.0; b.transitions.len()]; a.transitions.len()];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let s1 = a.charge_ratios[i] / a.charge_ratios[0];
            let s2 = b.charge_ratios[j] / b.charge_ratios[0];
            let (q1, q2) = (a.transitions[i], b.transitions[j]);
            let mut t1 = Complex64::new(0.0, 0.0);
            let mut t2 = Complex64::new(0.0, 0.0);
            for mode in sys.modes.modes() {
                let w = mode.frequency;
                if q1 == w || q2 == w {
                    return Err(Error::Resonance(w));
                }
                let g1 = mode.couplings[0] * s1;
                let g2 = mode.couplings[1] * s2;
                let (d1, d2) = (q1 - w, q2 - w);
                t1 += g1.conj() * g2 / d1;
                t2 += g1 * g2.conj() / d2;
            }
            *cell = ((t1 + t2) * (0.5 * HBAR)).re;
        }
    }
    Ok(table)
}

/// Eigenvalues (rad/s, ascending) of `h` restricted to the states of total
/// excitation `n`. The rotating-wave Hamiltonians here conserve it.
pub fn sector_eigenvalues(sys: &FullSystem, h: &DMatrix<Complex64>, n: usize) -> Vec<f64> {
    let idx: Vec<usize> = sys
        .excitations()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == n)
        .map(|(s, _)| s)
        .collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
    eigh(&sub).0
}

/// Largest `|λ_eff − λ_exact|` (rad/s) over the complete excitation
/// sectors `0..=max_excitation`, eigenvalues paired in ascending order.
pub fn heff_eigen_error(sys: &FullSystem, max_excitation: usize) -> Result<f64> {
    let min_levels = sys.qubits.iter().map(|q| q.levels()).min().unwrap_or(0);
    if max_excitation + 1 > min_levels || max_excitation > sys.photon_cutoff {
        return Err(invalid(format!(
            "sector {max_excitation} is truncated by the level or photon cutoff"
        )));
    }
    let exact = build_full_hamiltonian(sys)?;
    let eff = build_heff(sys)?.matrix;
    let mut worst: f64 = 0.0;
    for n in 0..=max_excitation {
        let a = sector_eigenvalues(sys, &exact, n);
        let b = sector_eigenvalues(sys, &eff, n);
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Exchange rate from the exact avoided crossing of two degenerate qubits:
/// half the splitting of the eigenstates dominated by `|10, vac⟩` and
/// `|01, vac⟩`, signed so that `J > 0` when the symmetric combination lies
/// higher. Returns joules.
pub fn extract_j_from_splitting(sys: &FullSystem) -> Result<f64> {
    if sys.qubits.len() != 2 {
        return Err(invalid("splitting extraction needs two qubits"));
    }
    let (q1, q2) = (sys.qubits[0].transitions[0], sys.qubits[1].transitions[0]);
    if (q1 - q2).abs() > 1e-9 * q1.max(q2) {
        return Err(invalid("qubits must be degenerate for splitting extraction"));
    }
    let h = build_full_hamiltonian(sys)?;
    let basis = sys.basis();
    let mut s10 = vec![0; basis.dims.len()];
    s10[0] = 1;
    let mut s01 = vec![0; basis.dims.len()];
    s01[1] = 1;
    let (a, b) = (basis.encode(&s10), basis.encode(&s01));
    let (values, vectors) = eigh(&h);
    let mut weights: Vec<(usize, f64)> = (0..values.len())
        .map(|k| (k, vectors[(a, k)].norm_sqr() + vectors[(b, k)].norm_sqr()))
        .collect();
    weights.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (k1, w1) = weights[0];
    let (k2, w2) = weights[1];
    if w1 < MIN_DOUBLET_WEIGHT || w2 < MIN_DOUBLET_WEIGHT {
        return Err(Error::Labelling(format!(
            "qubit doublet not identifiable (weights {w1:.3}, {w2:.3})"
        )));
    }
    let symmetric = |k: usize| (vectors[(a, k)].conj() * vectors[(b, k)]).re > 0.0;
    let (sym, anti) = match (symmetric(k1), symmetric(k2)) {
        (true, false) => (k1, k2),
        (false, true) => (k2, k1),
        // Unmixed doublet (no coupling): the sign is undefined.
        _ => return Ok(0.5 * HBAR * (values[k1] - values[k2]).abs()),
    };
    Ok(0.5 * HBAR * (values[sym] - values[anti]))
}

/// [`extract_j_from_splitting`] at the system's photon cutoff and at twice
/// that cutoff.
pub fn splitting_photon_convergence(sys: &FullSystem) -> Result<(f64, f64)> {
    let base = extract_j_from_splitting(sys)?;
    let doubled = extract_j_from_splitting(&sys.with_photon_cutoff(2 * sys.photon_cutoff)?)?;
    Ok((base, doubled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigen_residual, hermiticity_defect};
    use crate::modes::Mode;
    use crate::units::{to_angular, GHZ, MHZ};

    fn ladder(q: f64) -> QubitLevels {
        QubitLevels::duffing(q, to_angular(-250.0 * MHZ), 3).unwrap()
    }

    fn one_mode(g1: f64, g2: f64, w: f64) -> ModeSet {
        ModeSet::new(vec![Mode::real(w, &[g1, g2])]).unwrap()
    }

    #[test]
    fn decoupled_spectrum() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(6.0 * GHZ);
        let sys = FullSystem::new(vec![ladder(q), ladder(q * 1.1)], one_mode(0.0, 0.0, w), 2).unwrap();
        let h = build_full_hamiltonian(&sys).unwrap();
        let (vals, _) = eigh(&h);
        let mut expected = Vec::new();
        let (e1, e2) = (ladder(q).energies(), ladder(q * 1.1).energies());
        for a in &e1 {
            for b in &e2 {
                for n in 0..3 {
                    expected.push(a + b + n as f64 * w);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (x, y) in vals.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
        }
        let heff = build_heff(&sys).unwrap().matrix;
        assert!((heff - h).iter().all(|z| z.norm() == 0.0));
        assert_eq!(build_sw_generator(&sys).unwrap().iter().filter(|z| z.norm() > 0.0).count(), 0);
        assert_eq!(sw_block_residual(&sys).unwrap(), 0.0);
    }

    #[test]
    fn jaynes_cummings_splitting() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(5.3 * GHZ);
        let g = to_angular(40.0 * MHZ);
        let sys = FullSystem::new(
            vec![ladder(q)],
            ModeSet::new(vec![Mode::real(w, &[g])]).unwrap(),
            3,
        )
        .unwrap();
        let h = build_full_hamiltonian(&sys).unwrap();
        assert!(hermiticity_defect(&h) < 1e-14);
        let (all, vecs) = eigh(&h);
        assert!(eigen_residual(&h, &all, &vecs) < 1e-10);
        let one = sector_eigenvalues(&sys, &h, 1);
        let delta = q - w;
        let expected = (delta * delta + 4.0 * g * g).sqrt();
        assert!(((one[1] - one[0]) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_elements() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(6.0 * GHZ);
        let g = to_angular(50.0 * MHZ);
        let sys = FullSystem::new(
            vec![ladder(q)],
            ModeSet::new(vec![Mode::real(w, &[g])]).unwrap(),
            3,
        )
        .unwrap();
        let a = build_sw_generator(&sys).unwrap();
        // basis index = level * 4 + n
        let elem = a[(4, 1)];
        assert!((elem.re - g / (q - w)).abs() < 1e-15);
        assert!((&a + a.adjoint()).iter().all(|z| z.norm() < 1e-14));
        // ⟨a|iS₁|b⟩ = V_ab/(E_a − E_b) wherever V connects two states.
        let h = build_full_hamiltonian(&sys).unwrap();
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                if r != c && h[(r, c)].norm() > 0.0 {
                    let expected = h[(r, c)] / (h[(r, r)].re - h[(c, c)].re);
                    assert!((a[(r, c)] - expected).norm() < 1e-12 * expected.norm());
                }
            }
        }
    }

    #[test]
    fn single_qubit_shift() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(6.0 * GHZ);
        let g = to_angular(50.0 * MHZ);
        let sys = FullSystem::new(
            vec![ladder(q)],
            ModeSet::new(vec![Mode::real(w, &[g])]).unwrap(),
            3,
        )
        .unwrap();
        let model = build_heff(&sys).unwrap();
        let chi0 = g * g / (q - w);
        assert_eq!(model.chi[0][0][0], chi0);
        // |1, 0⟩ is basis index 4.
        assert!((model.matrix[(4, 4)].re - (q + chi0)).abs() < 1e-6);
    }

    #[test]
    fn degenerate_exchange_amplitude() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(6.0 * GHZ);
        let (g1, g2) = (to_angular(60.0 * MHZ), to_angular(40.0 * MHZ));
        let sys = FullSystem::new(vec![ladder(q), ladder(q)], one_mode(g1, g2, w), 2).unwrap();
        let model = build_heff(&sys).unwrap();
        let expected = HBAR * g1 * g2 / (q - w);
        assert!((model.exchange[0][0] / expected - 1.0).abs() < 1e-12);
        // |0,1,0⟩ ↔ |1,0,0⟩: indices 3 and 9 with dims (3, 3, 3).
        let amp = model.matrix[(3, 9)];
        assert!((amp.re * HBAR / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let q = to_angular(5.0 * GHZ);
        let modes = ModeSet::new(
            (0..6)
                .map(|k| Mode::real(to_angular(6.0 * GHZ + k as f64 * 1e8), &[1e6, 1e6]))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            FullSystem::new(vec![ladder(q), ladder(q)], modes, 3),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(FullSystem::new(vec![QubitLevels::duffing(q, -1e9, 2).unwrap()], ModeSet::empty(), 3).is_err());
    }

    #[test]
    fn splitting_matches_mode_sum() {
        let q = to_angular(5.0 * GHZ);
        let w = to_angular(6.0 * GHZ);
        let g = to_angular(100.0 * MHZ);
        let sys = FullSystem::new(vec![ladder(q), ladder(q)], one_mode(g, g, w), 3).unwrap();
        let j = extract_j_from_splitting(&sys).unwrap();
        let reference = HBAR * g * g / (q - w);
        assert!((j / reference - 1.0).abs() < 0.02, "{} vs {}", j, reference);
        let (a, b) = splitting_photon_convergence(&sys).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs());
    }
}
