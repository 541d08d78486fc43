//! Indicial roots of model pencils, their multiplicities and Jordan chains.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{ModeBlock, ModelOperator};
use crate::error::{Error, Result};

/// Roots closer than this (relative) are treated as one multiple root.
const CLUSTER_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub re: f64,
    pub im: f64,
    /// Number of independent solutions e^{iλt} Σ u_n tⁿ.
    pub d: usize,
    pub chains: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSpectrum {
    pub operator: String,
    pub strip: (f64, f64),
    pub entries: Vec<SpectrumEntry>,
}

impl AsymptoticSpectrum {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn eval_real(coeffs: &[DMatrix<f64>], x: f64) -> DMatrix<f64> {
    coeffs.iter().rev().fold(DMatrix::zeros(coeffs[0].nrows(), coeffs[0].ncols()), |acc, c| acc * x + c)
}

/// r-th derivative of P at k, divided by r!.
fn taylor_coeff(coeffs: &[DMatrix<f64>], k: Complex64, r: usize) -> DMatrix<Complex64> {
    let n = coeffs[0].nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (j, c) in coeffs.iter().enumerate().skip(r) {
        let kp = k.powu((j - r) as u32) * binom(j, r);
        out += c.map(|v| Complex64::new(v, 0.0)) * kp;
    }
    out
}

/// Finite roots k of det Σ C_j k^j via a shifted, reversed companion linearization,
/// which only needs the pencil to be regular.
pub fn pencil_roots(block: &ModeBlock) -> Result<Vec<Complex64>> {
    let c = &block.coeffs;
    let n = block.dim();
    let m = block.degree();
    if m == 0 {
        return Ok(vec![]);
    }
    let shifts = [0.371_9, -0.512_3, 0.813_7, -1.234_5, 1.618_0, 2.741_3];
    let (sigma, inv) = shifts
        .iter()
        .find_map(|&s| {
            let p = eval_real(c, s);
            let sv = p.clone().svd(false, false).singular_values;
            let (lo, hi) = (sv.min(), sv.max());
            if lo > 1e-8 * hi && hi > 0.0 {
                p.try_inverse().map(|i| (s, i))
            } else {
                None
            }
        })
        .ok_or_else(|| Error::Invalid("pencil is singular (det vanishes identically)".into()))?;
    // μ^m P(σ + 1/μ) = Σ_e D_e μ^e
    let mut d = vec![DMatrix::<f64>::zeros(n, n); m + 1];
    for (j, cj) in c.iter().enumerate() {
        for i in 0..=j {
            d[m - j + i] += cj * (binom(j, i) * sigma.powi(i as i32));
        }
    }
    let big = n * m;
    let mut comp = DMatrix::<f64>::zeros(big, big);
    for e in 0..m {
        let me = &inv * &d[e];
        // top block row holds −D_{m−1}, …, −D_0
        let col = (m - 1 - e) * n;
        comp.view_mut((0, col), (n, n)).copy_from(&(-me));
    }
    for b in 1..m {
        comp.view_mut((b * n, (b - 1) * n), (n, n)).fill_with_identity();
    }
    let mus = comp.schur().complex_eigenvalues();
    let norm = mus.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    Ok(mus
        .iter()
        .filter(|z| z.norm() > 1e-10 * norm)
        .map(|z| Complex64::new(sigma, 0.0) + Complex64::new(1.0, 0.0) / Complex64::new(z.re, z.im))
        .collect())
}

fn cluster(mut roots: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for r in roots {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|x| (x - r).norm() < CLUSTER_TOL * (1.0 + r.norm())))
        {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            (g.iter().sum::<Complex64>() / n as f64, n)
        })
        .collect()
}

/// Lengths of the Jordan chains of the pencil at k, from the kernel dimensions of the
/// block Toeplitz matrices [P, P', P''/2, …].
pub fn jordan_chains(block: &ModeBlock, k: Complex64, algebraic: usize) -> Vec<usize> {
    let n = block.dim();
    let taylor: Vec<_> = (0..=algebraic).map(|r| taylor_coeff(&block.coeffs, k, r)).collect();
    let scale = taylor.iter().map(|t| t.iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
    let mut ker = vec![0usize];
    for j in 1..=algebraic {
        let mut t = DMatrix::<Complex64>::zeros(j * n, j * n);
        for r in 0..j {
            for c in 0..=r {
                t.view_mut((r * n, c * n), (n, n)).copy_from(&taylor[r - c]);
            }
        }
        // relative to the pencil scale, so a vanishing P(k) counts as rank zero
        let sv = t.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|s| **s > 1e-6 * scale.max(1e-300)).count();
        ker.push(j * n - rank);
    }
    // at_least[i] = number of chains of length ≥ i
    let at_least: Vec<usize> = (1..=algebraic).map(|i| ker[i] - ker[i - 1]).collect();
    let mut chains = Vec::new();
    for i in 0..algebraic {
        let next = if i + 1 < algebraic { at_least[i + 1] } else { 0 };
        for _ in 0..at_least[i].saturating_sub(next) {
            chains.push(i + 1);
        }
    }
    chains.sort_unstable_by(|a, b| b.cmp(a));
    chains
}

/// All indicial roots λ (solutions e^{iλt}u) with δ₁ < Im λ < δ₂.
pub fn indicial_spectrum(op: &ModelOperator, strip: (f64, f64)) -> Result<AsymptoticSpectrum> {
    let (d1, d2) = strip;
    if !(d1.is_finite() && d2.is_finite() && d1 < d2) {
        return Err(Error::Invalid(format!("strip ({d1}, {d2}) must be finite and ordered")));
    }
    let height = d1.abs().max(d2.abs());
    if height >= op.certified_height {
        return Err(Error::ModeCutoff(format!(
            "strip height {height} reaches the certified height {} of the retained modes; widen the cutoff",
            op.certified_height
        )));
    }
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for block in &op.modes {
        for (k, alg) in cluster(pencil_roots(block)?) {
            // e^{kt} = e^{iλt} with λ = −ik
            let lam = Complex64::new(k.im, -k.re);
            if !(lam.im > d1 && lam.im < d2) {
                continue;
            }
            let chains = jordan_chains(block, k, alg);
            if chains.iter().sum::<usize>() != alg {
                return Err(Error::Inconclusive(format!(
                    "chain lengths {chains:?} do not add up to the algebraic multiplicity {alg} at λ = {lam}"
                )));
            }
            let mut all = Vec::new();
            for _ in 0..block.multiplicity {
                all.extend_from_slice(&chains);
            }
            let d = alg * block.multiplicity;
            let clean = |x: f64| if x.abs() < 1e-9 { 0.0 } else { x };
            match entries
                .iter_mut()
                .find(|e| (e.re - lam.re).abs() + (e.im - lam.im).abs() < 1e-6)
            {
                Some(e) => {
                    e.d += d;
                    e.chains.extend(all);
                    e.chains.sort_unstable_by(|a, b| b.cmp(a));
                }
                None => entries.push(SpectrumEntry { re: clean(lam.re), im: clean(lam.im), d, chains: all }),
            }
        }
    }
    entries.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap().then(a.re.partial_cmp(&b.re).unwrap()));
    Ok(AsymptoticSpectrum { operator: op.name.clone(), strip, entries })
}

/// Sorted distinct Im λ.
pub fn exceptional_weights(s: &AsymptoticSpectrum) -> Vec<f64> {
    let mut w: Vec<f64> = Vec::new();
    for e in &s.entries {
        if !w.iter().any(|x| (x - e.im).abs() < 1e-9) {
            w.push(e.im);
        }
    }
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w
}

/// First positive exceptional weight.
pub fn delta0(s: &AsymptoticSpectrum) -> Result<f64> {
    exceptional_weights(s)
        .into_iter()
        .find(|w| *w > 1e-9)
        .ok_or_else(|| Error::Undefined(format!("no positive exceptional weight in strip {:?}", s.strip)))
}

/// n(δ, δ′) = Σ d(λ) over δ < Im λ < δ′.
pub fn jump_count(s: &AsymptoticSpectrum, delta: f64, delta_p: f64) -> Result<usize> {
    if !(delta < delta_p) {
        return Err(Error::Invalid("jump_count needs δ < δ′".into()));
    }
    if delta <= s.strip.0 || delta_p >= s.strip.1 {
        return Err(Error::Invalid(format!(
            "({delta}, {delta_p}) leaves the computed strip {:?}",
            s.strip
        )));
    }
    for w in exceptional_weights(s) {
        for x in [delta, delta_p] {
            if (w - x).abs() < 1e-9 {
                return Err(Error::ExceptionalWeight(x));
            }
        }
    }
    Ok(s.entries.iter().filter(|e| e.im > delta && e.im < delta_p).map(|e| e.d).sum())
}

/// Eigenvalues of the Laplacian on the unit round S³ from a finite-difference solve of the
/// reduced radial problems −u'' + (l(l+1)/sin²χ − 1)u = μu, u(0) = u(π) = 0, each with
/// multiplicity 2l + 1, grouped into levels. Returns levels with μ ≤ mu_max.
pub fn s3_laplacian_levels(n_grid: usize, mu_max: f64) -> Result<Vec<(f64, usize)>> {
    if n_grid < 20 {
        return Err(Error::GridTooSmall("S³ eigensolve needs ≥ 20 interior nodes".into()));
    }
    let h = std::f64::consts::PI / (n_grid + 1) as f64;
    let mut raw: Vec<(f64, usize)> = Vec::new();
    let mut l = 0usize;
    loop {
        if (l * (l + 2)) as f64 > mu_max + 1.0 {
            break;
        }
        let mut a = DMatrix::<f64>::zeros(n_grid, n_grid);
        for j in 0..n_grid {
            let chi = (j + 1) as f64 * h;
            a[(j, j)] = 2.0 / (h * h) + (l * (l + 1)) as f64 / chi.sin().powi(2) - 1.0;
            if j + 1 < n_grid {
                a[(j, j + 1)] = -1.0 / (h * h);
                a[(j + 1, j)] = -1.0 / (h * h);
            }
        }
        let eig = SymmetricEigen::new(a).eigenvalues;
        raw.extend(eig.iter().filter(|&&m| m <= mu_max).map(|&m| (m, 2 * l + 1)));
        l += 1;
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut levels: Vec<(f64, usize, f64)> = Vec::new();
    for (m, mult) in raw {
        match levels.last_mut() {
            Some(last) if (m - last.2).abs() < 0.05 * (1.0 + m.abs()) => {
                last.0 += m * mult as f64;
                last.1 += mult;
            }
            _ => levels.push((m * mult as f64, mult, m)),
        }
    }
    Ok(levels.into_iter().map(|(s, n, _)| (s / n as f64, n)).collect())
}

/// Scalar S³ model built from the discrete cross-section eigensolve, retaining modes up to
/// height² + margin.
pub fn s3_scalar_discrete(n_grid: usize, height: f64, margin: f64) -> Result<ModelOperator> {
    let mu_max = height * height + margin;
    let levels = s3_laplacian_levels(n_grid, mu_max)?;
    ModelOperator::scalar_laplacian("s3-scalar-discrete", &levels, mu_max)
}
