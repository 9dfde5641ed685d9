//! ZZ crosstalk of two qubits and a tunable coupler modelled as three
//! coupled Duffing oscillators.
//!
//! `H/ħ = Σ_i [q_i b_i†b_i − (α_i/2) b_i†b_i†b_i b_i] + Σ_{i<j} (J_ij/ħ)(b_i†b_j + b_i b_j†)`
//!
//! Each pair is counted once, so two degenerate harmonic modes split by
//! `2J`. Mode order is (qubit 1, qubit 2, coupler).

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::interp::MonotoneCubic;
use crate::linalg::eigh;
use crate::par::{self, Execution};
use crate::units::{HBAR, PLANCK};

pub const DEFAULT_TRUNCATION: usize = 5;
pub const MAX_DIMENSION: usize = 4096;
/// `2π · 1 kHz`: convergence and root tolerance for ζ.
pub const ZETA_TOLERANCE: f64 = 2.0 * PI * 1e3;
/// Coupler-frequency tolerance for refined crossings, rad/s (1e−4 GHz).
pub const CROSSING_TOLERANCE: f64 = 2.0 * PI * 1e5;
/// Smallest overlap accepted for a bare → dressed assignment.
pub const MIN_OVERLAP: f64 = 0.5;
/// Best and runner-up overlaps closer than this make a label ambiguous.
pub const AMBIGUITY_MARGIN: f64 = 1e-3;

/// Bare labels needed for ζ, as (qubit 1, qubit 2, coupler) occupations.
pub const NEEDED_LABELS: [[usize; 3]; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]];

#[derive(Debug, Clone, PartialEq)]
pub struct DuffingSystem {
    /// `q_i`, rad/s, order (qubit 1, qubit 2, coupler).
    pub frequencies: [f64; 3],
    /// `α_i > 0`, rad/s.
    pub anharmonicities: [f64; 3],
    /// Joules.
    pub j12: f64,
    pub j1c: f64,
    pub j2c: f64,
    pub truncation: usize,
}

impl DuffingSystem {
    pub fn new(frequencies: [f64; 3], anharmonicities: [f64; 3], j12: f64, j1c: f64, j2c: f64) -> Result<Self> {
        let sys = DuffingSystem {
            frequencies,
            anharmonicities,
            j12,
            j1c,
            j2c,
            truncation: DEFAULT_TRUNCATION,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(invalid("mode frequencies must be positive"));
        }
        if self.anharmonicities.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(invalid("anharmonicities are magnitudes and must be non-negative"));
        }
        if [self.j12, self.j1c, self.j2c].iter().any(|j| !j.is_finite()) {
            return Err(invalid("couplings must be finite"));
        }
        if self.truncation < 3 {
            return Err(invalid("truncation must keep at least three levels per mode"));
        }
        let dim = self.truncation.checked_pow(3).unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: MAX_DIMENSION,
            });
        }
        Ok(())
    }

    pub fn with_truncation(&self, d: usize) -> Self {
        DuffingSystem {
            truncation: d,
            ..self.clone()
        }
    }

    /// Same qubits with the coupler moved to `qc` and new coupler couplings.
    pub fn with_coupler(&self, qc: f64, j1c: f64, j2c: f64) -> Self {
        let mut s = self.clone();
        s.frequencies[2] = qc;
        s.j1c = j1c;
        s.j2c = j2c;
        s
    }

    /// Qubit labels exchanged.
    pub fn swapped_qubits(&self) -> Self {
        DuffingSystem {
            frequencies: [self.frequencies[1], self.frequencies[0], self.frequencies[2]],
            anharmonicities: [
                self.anharmonicities[1],
                self.anharmonicities[0],
                self.anharmonicities[2],
            ],
            j12: self.j12,
            j1c: self.j2c,
            j2c: self.j1c,
            truncation: self.truncation,
        }
    }

    pub fn dimension(&self) -> usize {
        self.truncation.pow(3)
    }

    /// Basis index of occupations `(n1, n2, nc)`.
    pub fn index(&self, n: [usize; 3]) -> usize {
        let d = self.truncation;
        (n[0] * d + n[1]) * d + n[2]
    }
}

pub fn bare_energy(sys: &DuffingSystem, n: [usize; 3]) -> f64 {
    let mut e = 0.0;
    for i in 0..3 {
        let k = n[i] as f64;
        e += sys.frequencies[i] * k - 0.5 * sys.anharmonicities[i] * k * (k - 1.0);
    }
    e
}

/// Dense `H/ħ` (rad/s) over `d³` product states.
pub fn build_duffing_hamiltonian(sys: &DuffingSystem) -> Result<DMatrix<f64>> {
    sys.validate()?;
    let d = sys.truncation;
    let dim = sys.dimension();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let pairs = [(0, 1, sys.j12), (0, 2, sys.j1c), (1, 2, sys.j2c)];
    for n1 in 0..d {
        for n2 in 0..d {
            for nc in 0..d {
                let n = [n1, n2, nc];
                let s = sys.index(n);
                h[(s, s)] = bare_energy(sys, n);
                // b_a† b_b: a gains, b loses.
                for &(a, b, j) in &pairs {
                    let j = j / HBAR;
                    for (up, down) in [(a, b), (b, a)] {
                        if n[down] == 0 || n[up] + 1 >= d {
                            continue;
                        }
                        let mut t = n;
                        t[up] += 1;
                        t[down] -= 1;
                        let amp = j * ((n[up] + 1) as f64).sqrt() * (n[down] as f64).sqrt();
                        h[(sys.index(t), s)] += amp;
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Dressed indices and overlaps for [`NEEDED_LABELS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labelling {
    pub indices: [usize; 4],
    pub overlaps: [f64; 4],
}

impl Labelling {
    /// Smallest assigned overlap.
    pub fn quality(&self) -> f64 {
        self.overlaps.iter().cloned().fold(1.0, f64::min)
    }
}

/// Maps each needed bare state to the dressed eigenvector (column of
/// `vectors`) with the largest squared overlap. Collisions are resolved by
/// the assignment maximising the summed overlap over each label's three
/// best candidates.
pub fn label_states(vectors: &DMatrix<f64>, sys: &DuffingSystem) -> Result<Labelling> {
    let dim = sys.dimension();
    if vectors.nrows() != dim {
        return Err(invalid("eigenvectors do not match the system dimension"));
    }
    let mut candidates: Vec<Vec<(usize, f64)>> = Vec::with_capacity(4);
    for label in NEEDED_LABELS {
        let row = sys.index(label);
        let mut ov: Vec<(usize, f64)> = (0..vectors.ncols())
            .map(|k| (k, vectors[(row, k)] * vectors[(row, k)]))
            .collect();
        ov.sort_by(|a, b| b.1.total_cmp(&a.1));
        if ov[0].1 < MIN_OVERLAP {
            return Err(Error::Labelling(format!(
                "bare state {label:?} has maximum overlap {:.3}",
                ov[0].1
            )));
        }
        if ov.len() > 1 && ov[0].1 - ov[1].1 < AMBIGUITY_MARGIN {
            return Err(Error::Labelling(format!(
                "bare state {label:?} is split evenly between dressed states ({:.4} vs {:.4})",
                ov[0].1, ov[1].1
            )));
        }
        ov.truncate(3);
        candidates.push(ov);
    }
    let greedy: Vec<usize> = candidates.iter().map(|c| c[0].0).collect();
    let injective = (0..4).all(|a| (a + 1..4).all(|b| greedy[a] != greedy[b]));
    let choice: [usize; 4] = if injective {
        [0; 4]
    } else {
        let mut best: Option<([usize; 4], f64)> = None;
        let m = candidates.iter().map(|c| c.len()).collect::<Vec<_>>();
        for a in 0..m[0] {
            for b in 0..m[1] {
                for c in 0..m[2] {
                    for e in 0..m[3] {
                        let pick = [a, b, c, e];
                        let idx: Vec<usize> =
                            (0..4).map(|l| candidates[l][pick[l]].0).collect();
                        if (0..4).any(|x| (x + 1..4).any(|y| idx[x] == idx[y])) {
                            continue;
                        }
                        let score: f64 = (0..4).map(|l| candidates[l][pick[l]].1).sum();
                        if best.is_none_or(|(_, s)| score > s) {
                            best = Some((pick, score));
                        }
                    }
                }
            }
        }
        best.ok_or_else(|| Error::Labelling("no injective assignment".into()))?
            .0
    };
    let mut out = Labelling {
        indices: [0; 4],
        overlaps: [0.0; 4],
    };
    for l in 0..4 {
        let (k, o) = candidates[l][choice[l]];
        out.indices[l] = k;
        out.overlaps[l] = o;
    }
    if out.quality() < MIN_OVERLAP {
        return Err(Error::Labelling(format!(
            "assignment overlap {:.3} below {MIN_OVERLAP}",
            out.quality()
        )));
    }
    Ok(out)
}

/// ζ and its labelling at one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzPoint {
    /// `E11 − E10 − E01 + E00`, rad/s.
    pub zeta: f64,
    pub labelling: Labelling,
}

/// ζ at the system's own truncation, without the convergence check.
pub fn zz_at_truncation(sys: &DuffingSystem) -> Result<ZzPoint> {
    let h = build_duffing_hamiltonian(sys)?;
    zz_from_hamiltonian(sys, &h)
}

/// ζ from a Hamiltonian in the product basis of `sys`, which may carry an
/// extra constant on the diagonal.
pub fn zz_from_hamiltonian(sys: &DuffingSystem, h: &DMatrix<f64>) -> Result<ZzPoint> {
    let (values, vectors) = eigh_by_excitation(sys, h)?;
    let labelling = label_states(&vectors, sys)?;
    // The diagonal parts of E11 − E10 − E01 + E00 cancel identically, so
    // only the dressing shifts are combined. This keeps ζ free of the
    // round-off of differencing ~1e11 rad/s level energies.
    let mut shift = [0.0; 4];
    for l in 0..4 {
        let s = sys.index(NEEDED_LABELS[l]);
        shift[l] = values[labelling.indices[l]] - h[(s, s)];
    }
    Ok(ZzPoint {
        zeta: (shift[3] - shift[1]) - (shift[2] - shift[0]),
        labelling,
    })
}

/// Eigenpairs of `h` (ascending) found sector by sector in the total
/// excitation number, which the Hamiltonian conserves. Sectors that are
/// already diagonal are taken as they stand.
pub fn eigh_by_excitation(sys: &DuffingSystem, h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = sys.dimension();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(invalid("Hamiltonian does not match the system dimension"));
    }
    let d = sys.truncation;
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); 3 * (d - 1) + 1];
    for s in 0..dim {
        let n = s / (d * d) + (s / d) % d + s % d;
        sectors[n].push(s);
    }
    let mut pairs: Vec<(f64, usize, Vec<f64>)> = Vec::with_capacity(dim);
    for idx in &sectors {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        let diagonal = (0..idx.len()).all(|r| (0..idx.len()).all(|c| r == c || sub[(r, c)] == 0.0));
        if diagonal {
            for (r, &s) in idx.iter().enumerate() {
                let mut v = vec![0.0; idx.len()];
                v[r] = 1.0;
                pairs.push((sub[(r, r)], s, v));
            }
        } else {
            let (vals, vecs) = eigh(&sub);
            for (k, &e) in vals.iter().enumerate() {
                pairs.push((e, idx[0], vecs.column(k).iter().cloned().collect()));
            }
        }
    }
    // Sort by energy; the basis index only breaks exact ties.
    let order: Vec<usize> = {
        let mut o: Vec<usize> = (0..pairs.len()).collect();
        o.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0).then(pairs[a].1.cmp(&pairs[b].1)));
        o
    };
    let sector_of: Vec<usize> = {
        let mut m = vec![0; dim];
        for (n, idx) in sectors.iter().enumerate() {
            for &s in idx {
                m[s] = n;
            }
        }
        m
    };
    let mut values = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        let (e, anchor, ref v) = pairs[k];
        values.push(e);
        for (r, &s) in sectors[sector_of[anchor]].iter().enumerate() {
            vectors[(s, col)] = v[r];
        }
    }
    Ok((values, vectors))
}

/// ζ (rad/s) checked against truncation `d + 2`.
pub fn zz_rate(sys: &DuffingSystem) -> Result<f64> {
    Ok(zz_converged(sys)?.0.zeta)
}

/// ζ at `d` and the absolute change when recomputed at `d + 2`.
pub fn zz_converged(sys: &DuffingSystem) -> Result<(ZzPoint, f64)> {
    let base = zz_at_truncation(sys)?;
    let finer = zz_at_truncation(&sys.with_truncation(sys.truncation + 2))?;
    let change = (finer.zeta - base.zeta).abs();
    if change >= ZETA_TOLERANCE {
        return Err(Error::TruncationNotConverged {
            d: sys.truncation,
            change,
        });
    }
    Ok((base, change))
}

/// Coupler couplings `J_1c(q_c)`, `J_2c(q_c)` on a grid, interpolated with
/// a monotone cubic.
#[derive(Debug, Clone)]
pub struct JCurve {
    /// rad/s.
    pub qc: Vec<f64>,
    /// Joules.
    pub j1c: Vec<f64>,
    pub j2c: Vec<f64>,
    i1: MonotoneCubic,
    i2: MonotoneCubic,
}

impl JCurve {
    pub fn new(qc: Vec<f64>, j1c: Vec<f64>, j2c: Vec<f64>) -> Result<Self> {
        if qc.len() != j1c.len() || qc.len() != j2c.len() {
            return Err(invalid("J curve columns differ in length"));
        }
        let i1 = MonotoneCubic::new(&qc, &j1c)?;
        let i2 = MonotoneCubic::new(&qc, &j2c)?;
        Ok(JCurve { qc, j1c, j2c, i1, i2 })
    }

    /// Samples `f1`, `f2` (joules) on `grid` (rad/s).
    pub fn from_fn(grid: &[f64], f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Result<Self> {
        JCurve::new(
            grid.to_vec(),
            grid.iter().map(|&q| f1(q)).collect(),
            grid.iter().map(|&q| f2(q)).collect(),
        )
    }

    pub fn eval(&self, qc: f64) -> Result<(f64, f64)> {
        Ok((self.i1.eval(qc)?, self.i2.eval(qc)?))
    }

    /// CSV with header `q_c_GHz,J1c_MHz,J2c_MHz` (cyclic, `J/h`).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let expected = ["q_c_GHz", "J1c_MHz", "J2c_MHz"];
        if header.len() != 3 || header.iter().zip(expected).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{}'", expected.join(",")),
            });
        }
        let (mut qc, mut j1, mut j2) = (Vec::new(), Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 columns, found {}", record.len()),
                });
            }
            let v = record
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid number '{s}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if let Some(&prev) = qc.last() {
                if !(2.0 * PI * v[0] * 1e9 > prev) {
                    return Err(Error::Parse {
                        line,
                        message: "coupler frequencies must be strictly increasing".into(),
                    });
                }
            }
            qc.push(2.0 * PI * v[0] * 1e9);
            j1.push(v[1] * 1e6 * PLANCK);
            j2.push(v[2] * 1e6 * PLANCK);
        }
        if qc.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "a J curve needs at least two rows".into(),
            });
        }
        JCurve::new(qc, j1, j2)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        JCurve::parse_csv(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_c_GHz,J1c_MHz,J2c_MHz\n");
        for k in 0..self.qc.len() {
            out.push_str(&format!(
                "{:.9},{:.9},{:.9}\n",
                self.qc[k] / (2.0 * PI * 1e9),
                self.j1c[k] / (PLANCK * 1e6),
                self.j2c[k] / (PLANCK * 1e6)
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ZzCurve {
    /// rad/s.
    pub qc: Vec<f64>,
    /// ζ in rad/s, `None` where labelling or convergence failed.
    pub zeta: Vec<Option<f64>>,
    /// Smallest assigned overlap per point (0 when labelling failed).
    pub label_quality: Vec<f64>,
    /// Refined zero crossings, rad/s.
    pub crossings: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ZzCurve {
    pub fn flagged(&self) -> usize {
        self.zeta.iter().filter(|z| z.is_none()).count()
    }

    /// CSV `q_c_GHz,zz_kHz,label_quality`; failed points print `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_c_GHz,zz_kHz,label_quality\n");
        for k in 0..self.qc.len() {
            let zz = match self.zeta[k] {
                Some(z) => format!("{:.6}", z / (2.0 * PI * 1e3)),
                None => "nan".to_string(),
            };
            out.push_str(&format!(
                "{:.9},{zz},{:.6}\n",
                self.qc[k] / (2.0 * PI * 1e9),
                self.label_quality[k]
            ));
        }
        out
    }
}

fn zeta_at(template: &DuffingSystem, curve: &JCurve, qc: f64) -> Result<f64> {
    let (j1, j2) = curve.eval(qc)?;
    Ok(zz_at_truncation(&template.with_coupler(qc, j1, j2))?.zeta)
}

/// ζ over the coupler grid with qubit parameters and `J12` from `template`
/// and coupler couplings from `curve`. Sign changes between neighbouring
/// good points are bisected with exact re-diagonalisation; a bracket is
/// kept only if ζ at the refined root is below [`ZETA_TOLERANCE`] (a sign
/// flip across a divergence is not a root).
pub fn sweep_coupler(
    template: &DuffingSystem,
    grid: &[f64],
    curve: &JCurve,
    exec: Execution,
) -> Result<ZzCurve> {
    template.validate()?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("coupler grid must be strictly increasing"));
    }
    let points = par::map(exec, grid, |&qc| -> Result<(ZzPoint, f64)> {
        let (j1, j2) = curve.eval(qc)?;
        zz_converged(&template.with_coupler(qc, j1, j2))
    });
    let mut zeta = Vec::with_capacity(grid.len());
    let mut quality = Vec::with_capacity(grid.len());
    let mut warnings = Vec::new();
    for (&qc, p) in grid.iter().zip(points) {
        match p {
            Ok((pt, _)) => {
                zeta.push(Some(pt.zeta));
                quality.push(pt.labelling.quality());
            }
            Err(e @ (Error::Labelling(_) | Error::TruncationNotConverged { .. })) => {
                warnings.push(format!("q_c = {:.6} GHz flagged: {e}", qc / (2.0 * PI * 1e9)));
                zeta.push(None);
                quality.push(0.0);
            }
            Err(e) => return Err(e),
        }
    }

    let brackets: Vec<(f64, f64, f64)> = (0..grid.len().saturating_sub(1))
        .filter_map(|k| match (zeta[k], zeta[k + 1]) {
            (Some(a), Some(b)) if a != 0.0 && b != 0.0 && a.signum() != b.signum() => {
                Some((grid[k], grid[k + 1], a))
            }
            _ => None,
        })
        .collect();
    let refined = par::map(exec, &brackets, |&(lo, hi, za)| refine_root(template, curve, lo, hi, za));
    let mut crossings = Vec::new();
    for r in refined {
        match r {
            Ok(Some(root)) => crossings.push(root),
            Ok(None) => {}
            Err(e) => warnings.push(format!("root refinement failed: {e}")),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ZzCurve {
        qc: grid.to_vec(),
        zeta,
        label_quality: quality,
        crossings,
        warnings,
    })
}

fn refine_root(
    template: &DuffingSystem,
    curve: &JCurve,
    mut lo: f64,
    mut hi: f64,
    mut z_lo: f64,
) -> Result<Option<f64>> {
    // Bisect well past the required tolerance so the root itself is tight.
    while hi - lo > 1e-2 * CROSSING_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let zm = zeta_at(template, curve, mid)?;
        if zm == 0.0 {
            return Ok(Some(mid));
        }
        if zm.signum() == z_lo.signum() {
            lo = mid;
            z_lo = zm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let z = zeta_at(template, curve, root)?;
    Ok((z.abs() < ZETA_TOLERANCE).then_some(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_angular, GHZ, MHZ};

    fn ghz(x: f64) -> f64 {
        to_angular(x * GHZ)
    }

    fn mhz_energy(x: f64) -> f64 {
        x * MHZ * PLANCK
    }

    fn base() -> DuffingSystem {
        DuffingSystem::new(
            [ghz(5.0), ghz(5.5), ghz(7.0)],
            [ghz(0.3), ghz(0.3), ghz(0.3)],
            mhz_energy(10.0),
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_ladders() {
        let sys = base().with_coupler(ghz(7.0), 0.0, 0.0);
        let sys = DuffingSystem { j12: 0.0, ..sys };
        let h = build_duffing_hamiltonian(&sys).unwrap();
        let (vals, vecs) = eigh(&h);
        let d = sys.truncation;
        let mut expected = Vec::new();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let n = [a, b, c];
                    expected.push(
                        (0..3)
                            .map(|i| {
                                let k = n[i] as f64;
                                sys.frequencies[i] * k - 0.5 * sys.anharmonicities[i] * k * (k - 1.0)
                            })
                            .sum::<f64>(),
                    );
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (x, y) in vals.iter().zip(&expected) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        let lab = label_states(&vecs, &sys).unwrap();
        let e = lab.indices.map(|k| vals[k]);
        for (x, y) in e.iter().zip([0.0, ghz(5.0), ghz(5.5), ghz(10.5)]) {
            assert!((x - y).abs() <= 1e-12 * y);
        }
        assert!(lab.overlaps.iter().all(|&o| o == 1.0));
        assert_eq!(zz_rate(&sys).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_normal_modes() {
        let j = mhz_energy(20.0);
        let sys = DuffingSystem::new([ghz(5.0), ghz(5.0), ghz(9.0)], [0.0; 3], j, 0.0, 0.0).unwrap();
        let h = build_duffing_hamiltonian(&sys).unwrap();
        let (vals, _) = eigh(&h);
        // Single-excitation doublet at q ± J/ħ.
        let split = vals[2] - vals[1];
        assert!((split / (2.0 * j / HBAR) - 1.0).abs() < 1e-10);
        assert!(h.iter().zip(h.transpose().iter()).all(|(a, b)| a == b));
    }

    #[test]
    fn convergence_and_symmetries() {
        let sys = base();
        let z4 = zz_at_truncation(&sys.with_truncation(4)).unwrap().zeta;
        let z8 = zz_at_truncation(&sys.with_truncation(8)).unwrap().zeta;
        assert!((z4 - z8).abs() < ZETA_TOLERANCE);
        let swapped = zz_rate(&sys.swapped_qubits()).unwrap();
        let z = zz_rate(&sys).unwrap();
        // Eigenvalue round-off on a ~1e11 rad/s spectrum.
        assert!((swapped - z).abs() < 1e-3 * z.abs(), "{swapped} vs {z}");
        let quarter = zz_rate(&DuffingSystem { j12: sys.j12 / 4.0, ..sys.clone() }).unwrap();
        assert!(((z / quarter) / 16.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn resonant_coupler_cannot_be_labelled() {
        let sys = DuffingSystem::new(
            [ghz(5.0), ghz(5.5), ghz(5.0)],
            [ghz(0.3); 3],
            0.0,
            mhz_energy(50.0),
            0.0,
        )
        .unwrap();
        assert!(matches!(zz_rate(&sys), Err(Error::Labelling(_))));
    }

    #[test]
    fn j_curve_csv() {
        let grid: Vec<f64> = (0..5).map(|k| ghz(3.0 + 0.25 * k as f64)).collect();
        let c = JCurve::from_fn(&grid, |q| q * 1e-30, |q| -q * 1e-30).unwrap();
        let back = JCurve::parse_csv(&c.to_csv()).unwrap();
        for (a, b) in c.j1c.iter().zip(&back.j1c) {
            assert!((a - b).abs() < 1e-6 * a.abs());
        }
        assert!(matches!(
            JCurve::parse_csv("q_c_GHz,J1c_MHz,J2c_MHz\n3.0,1,2\n3.1,x,2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            JCurve::parse_csv("q_c_GHz,J1c_MHz,J2c_MHz\n3.0,1,2\n3.1,1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
