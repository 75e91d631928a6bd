//! Direction finding from the sample covariance.
//!
//! In the noiseless case every noise eigenvector of `R_xx`, read as a
//! polynomial, lies in the ideal generated by `prod (x - alpha_l*)`. Noise
//! eigenvectors are therefore picked as the ones whose roots cluster around
//! `L` common points, and the cluster centres give the directions. Root-MUSIC
//! is provided as the classical baseline.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{direction_of_root, steering_vector, ArrayGeometry};
use crate::error::{bail, Error, Result};
use crate::linalg::{c, hermitian_eigen, CMat, CVec, C64};
use crate::polyideal::{generator_poly, poly_mul, Poly, Variety};

/// Narrowband snapshots `x(t) = A s(t) + n(t)` with circular complex Gaussian sources and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotModel {
    pub geom: ArrayGeometry,
    pub source_dirs: Vec<f64>,
    pub source_powers: Vec<f64>,
    pub noise_var: f64,
    pub snapshots: usize,
    pub seed: u64,
}

impl SnapshotModel {
    /// Unit-power sources.
    pub fn new(geom: ArrayGeometry, source_dirs: Vec<f64>, noise_var: f64, snapshots: usize, seed: u64) -> Result<Self> {
        let source_powers = vec![1.0; source_dirs.len()];
        let m = Self { geom, source_dirs, source_powers, noise_var, snapshots, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.geom.n();
        if self.source_dirs.len() >= n {
            bail!(Dimension, "{} sources need more than {n} sensors", self.source_dirs.len());
        }
        if self.source_powers.len() != self.source_dirs.len() {
            bail!(Dimension, "{} powers for {} sources", self.source_powers.len(), self.source_dirs.len());
        }
        if self.source_powers.iter().any(|&p| !(p >= 0.0)) {
            bail!(Domain, "source powers must be nonnegative");
        }
        if !(self.noise_var >= 0.0) {
            bail!(Domain, "noise variance must be nonnegative, got {}", self.noise_var);
        }
        if self.snapshots == 0 {
            bail!(Domain, "need at least one snapshot");
        }
        for &th in &self.source_dirs {
            steering_vector(&self.geom, th)?;
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.source_dirs.len()
    }

    /// `N x L` steering matrix.
    pub fn steering_matrix(&self) -> Result<CMat> {
        let n = self.geom.n();
        let mut a = CMat::zeros(n, self.l());
        for (j, &th) in self.source_dirs.iter().enumerate() {
            a.set_column(j, &steering_vector(&self.geom, th)?);
        }
        Ok(a)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_noise_var(&self, noise_var: f64) -> Self {
        Self { noise_var, ..self.clone() }
    }
}

fn cgauss(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(s * re, s * im)
}

/// `(1/T) sum x(t) x(t)^H` over simulated snapshots.
pub fn sample_covariance(model: &SnapshotModel) -> Result<CMat> {
    model.validate()?;
    let n = model.geom.n();
    let a = model.steering_matrix()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut r = CMat::zeros(n, n);
    let mut s = CVec::zeros(model.l());
    for _ in 0..model.snapshots {
        for (j, &p) in model.source_powers.iter().enumerate() {
            s[j] = cgauss(&mut rng, p);
        }
        let mut x = &a * &s;
        if model.noise_var > 0.0 {
            for xi in x.iter_mut() {
                *xi += cgauss(&mut rng, model.noise_var);
            }
        }
        r.gerc(c(1.0, 0.0), &x, &x, c(1.0, 0.0));
    }
    Ok(r.map(|z| z / model.snapshots as f64))
}

/// `A diag(p) A^H + sigma^2 I`.
pub fn exact_covariance(model: &SnapshotModel) -> Result<CMat> {
    model.validate()?;
    let n = model.geom.n();
    let a = model.steering_matrix()?;
    let p = CMat::from_diagonal(&CVec::from_iterator(model.l(), model.source_powers.iter().map(|&v| c(v, 0.0))));
    Ok(&a * p * a.adjoint() + CMat::identity(n, n) * c(model.noise_var, 0.0))
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigen_descending(r: &CMat) -> Eigen {
    let (mut values, vecs) = hermitian_eigen(r);
    let n = values.len();
    values.reverse();
    let mut vectors = CMat::zeros(n, n);
    for j in 0..n {
        vectors.set_column(j, &vecs.column(n - 1 - j));
    }
    Eigen { values, vectors }
}

fn horner_with_derivative(p: &[C64], z: C64) -> (C64, C64) {
    let mut v = c(0.0, 0.0);
    let mut d = c(0.0, 0.0);
    for &a in p.iter().rev() {
        d = d * z + v;
        v = v * z + a;
    }
    (v, d)
}

/// Roots of `sum_m p[m] x^m` (ascending coefficients), polished by Newton steps.
fn poly_roots(p: &[C64]) -> Result<Vec<C64>> {
    let top = p.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    // low-order zeros are roots at the origin; they also make the companion nilpotent
    let zeros = p.iter().take_while(|z| z.norm() <= 1e-15 * top).count().min(p.len() - 1);
    let mut roots = vec![c(0.0, 0.0); zeros];
    let p = &p[zeros..];
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    let lead = p[deg];
    // companion matrix: subdiagonal ones, last column -p[m]/lead
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let Some(schur) = nalgebra::linalg::Schur::try_new(comp, f64::EPSILON, 100 * deg.max(10)) else {
        bail!(Solver, "companion eigenvalues did not converge (degree {deg})");
    };
    let (_, t) = schur.unpack();
    let first = roots.len();
    roots.extend((0..deg).map(|i| t[(i, i)]));
    for z in roots[first..].iter_mut() {
        for _ in 0..4 {
            let (v, d) = horner_with_derivative(p, *z);
            if d.norm() == 0.0 {
                break;
            }
            let next = *z - v / d;
            if horner_with_derivative(p, next).0.norm() < v.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// Roots of the eigenvector polynomial `sum_m v[m] x^m`.
///
/// Trailing coefficients below `1e-12` of the largest are dropped first, so
/// the degree may be below `N - 1`.
pub fn eigenvector_roots(v: &[C64]) -> Result<Vec<C64>> {
    let top = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if top == 0.0 || !top.is_finite() {
        bail!(Domain, "eigenvector polynomial is zero");
    }
    let mut deg = v.len() - 1;
    while deg > 0 && v[deg].norm() <= 1e-12 * top {
        deg -= 1;
    }
    poly_roots(&v[..=deg])
}

/// Clustering thresholds for [`select_noise_subspace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    /// Complete-linkage cutoff; `None` means `0.1 / N`.
    pub cutoff: Option<f64>,
    /// Relative eigenvalue gap below which a selection boundary is ambiguous.
    pub degeneracy_tol: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self { cutoff: None, degeneracy_tol: 1e-9 }
    }
}

/// One root cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster {
    pub centroid: C64,
    /// Mean distance from the members to the centroid.
    pub dispersion: f64,
    /// Distinct eigenvectors with a root in the cluster.
    pub contributors: Vec<usize>,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct EigenSplit {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    /// Noise eigenvector indices, ascending.
    pub selected_noise_indices: Vec<usize>,
    /// Per eigenvector: how many of the signal clusters it contributes to.
    pub criterion_scores: Vec<f64>,
    /// The `L` signal clusters, best first.
    pub signal_clusters: Vec<RootCluster>,
    /// Set when the selection boundary cuts through (near-)equal eigenvalues.
    pub ambiguity: Option<String>,
}

impl EigenSplit {
    pub fn l(&self) -> usize {
        self.signal_clusters.len()
    }

    pub fn noise_basis(&self) -> CMat {
        let n = self.eigenvectors.nrows();
        let mut q = CMat::zeros(n, self.selected_noise_indices.len());
        for (dst, &src) in self.selected_noise_indices.iter().enumerate() {
            q.set_column(dst, &self.eigenvectors.column(src));
        }
        q
    }
}

/// Complete-linkage agglomerative clustering; returns member lists.
fn complete_linkage(points: &[C64], cutoff: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut alive = vec![true; n];
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (points[i] - points[j]).norm();
        }
    }
    loop {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in i + 1..n {
                if alive[j] && dist[i * n + j] < best.0 {
                    best = (dist[i * n + j], i, j);
                }
            }
        }
        let (d, i, j) = best;
        if !(d <= cutoff) {
            break;
        }
        let moved = core::mem::take(&mut members[j]);
        members[i].extend(moved);
        alive[j] = false;
        for k in 0..n {
            let m = dist[i * n + k].max(dist[j * n + k]);
            dist[i * n + k] = m;
            dist[k * n + i] = m;
        }
    }
    members.into_iter().zip(alive).filter(|(_, a)| *a).map(|(m, _)| m).collect()
}

/// Pick the `N - L` eigenvectors whose roots share `L` common clusters.
pub fn select_noise_subspace(eig: &Eigen, l: usize, opts: &ClusterOptions) -> Result<EigenSplit> {
    let n = eig.values.len();
    if l == 0 || l >= n {
        bail!(Domain, "need 1 <= L < N, got L = {l}, N = {n}");
    }
    let cutoff = opts.cutoff.unwrap_or(0.1 / n as f64);
    let mut points = Vec::new();
    let mut owner = Vec::new();
    for j in 0..n {
        let v: Vec<C64> = eig.vectors.column(j).iter().copied().collect();
        for z in eigenvector_roots(&v)? {
            points.push(z);
            owner.push(j);
        }
    }
    let mut clusters: Vec<(RootCluster, f64)> = complete_linkage(&points, cutoff)
        .into_iter()
        .map(|idx| {
            let size = idx.len();
            let centroid = idx.iter().map(|&i| points[i]).sum::<C64>() / size as f64;
            let dispersion = idx.iter().map(|&i| (points[i] - centroid).norm()).sum::<f64>() / size as f64;
            let mut contributors: Vec<usize> = idx.iter().map(|&i| owner[i]).collect();
            contributors.sort_unstable();
            contributors.dedup();
            let eig_sum = contributors.iter().map(|&j| eig.values[j]).sum::<f64>();
            (RootCluster { centroid, dispersion, contributors, size }, eig_sum)
        })
        .collect();
    clusters.sort_by(|(a, ea), (b, eb)| {
        b.contributors
            .len()
            .cmp(&a.contributors.len())
            .then(a.dispersion.total_cmp(&b.dispersion))
            .then(ea.total_cmp(eb))
    });
    let signal: Vec<RootCluster> = clusters.into_iter().take(l).map(|(c, _)| c).collect();
    if signal.len() < l {
        bail!(Precondition, "only {} root clusters for L = {l}", signal.len());
    }

    let mut scores = vec![0.0; n];
    for cl in &signal {
        for &j in &cl.contributors {
            scores[j] += 1.0;
        }
    }
    // full members first, then the remaining vectors by smallest eigenvalue
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let fa = scores[a] == l as f64;
        let fb = scores[b] == l as f64;
        fb.cmp(&fa).then(eig.values[a].total_cmp(&eig.values[b]))
    });
    let mut selected: Vec<usize> = order[..n - l].to_vec();
    selected.sort_unstable();

    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut ambiguity = None;
    'outer: for &s in &selected {
        for u in (0..n).filter(|j| !selected.contains(j)) {
            if (eig.values[s] - eig.values[u]).abs() <= opts.degeneracy_tol * scale {
                ambiguity = Some(alloc::format!(
                    "eigenvalues {} (selected) and {} (not selected) are degenerate",
                    eig.values[s],
                    eig.values[u]
                ));
                break 'outer;
            }
        }
    }
    Ok(EigenSplit {
        eigenvalues: eig.values.clone(),
        eigenvectors: eig.vectors.clone(),
        selected_noise_indices: selected,
        criterion_scores: scores,
        signal_clusters: signal,
        ambiguity,
    })
}

/// `N - L` eigenvectors with the smallest eigenvalues.
pub fn smallest_eigenvalue_indices(eig: &Eigen, l: usize) -> Vec<usize> {
    let n = eig.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));
    let mut out = order[..n - l.min(n)].to_vec();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionEstimate {
    /// Degrees, ascending.
    pub angles: Vec<f64>,
    /// Mean within-cluster dispersion.
    pub dispersion: f64,
}

/// Map the signal cluster centres `c` to directions through `c*`.
pub fn estimate_directions(split: &EigenSplit, geom: &ArrayGeometry) -> Result<DirectionEstimate> {
    if split.signal_clusters.is_empty() {
        bail!(Precondition, "split has no signal clusters");
    }
    let mut angles = split
        .signal_clusters
        .iter()
        .map(|cl| direction_of_root(geom, cl.centroid.conj()))
        .collect::<Result<Vec<_>>>()?;
    angles.sort_by(f64::total_cmp);
    let dispersion =
        split.signal_clusters.iter().map(|c| c.dispersion).sum::<f64>() / split.signal_clusters.len() as f64;
    Ok(DirectionEstimate { angles, dispersion })
}

/// Classical root-MUSIC on the `N - L` smallest-eigenvalue eigenvectors.
pub fn root_music_baseline(eig: &Eigen, l: usize, geom: &ArrayGeometry) -> Result<Vec<f64>> {
    let n = eig.values.len();
    if l == 0 || l >= n {
        bail!(Domain, "need 1 <= L < N, got L = {l}, N = {n}");
    }
    let idx = smallest_eigenvalue_indices(eig, l);
    let mut qn = CMat::zeros(n, idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        qn.set_column(dst, &eig.vectors.column(src));
    }
    let cmat = &qn * qn.adjoint();
    // z^{N-1} a(1/z*)^H C a(z): coefficient of z^{N-1+k} is the k-th diagonal sum
    let mut p = vec![c(0.0, 0.0); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            p[n - 1 + j - i] += cmat[(i, j)];
        }
    }
    let roots = poly_roots(&p)?;
    let mut inside: Vec<C64> = roots.into_iter().filter(|z| z.norm() <= 1.0 + 1e-6).collect();
    inside.sort_by(|a, b| (1.0 - a.norm()).abs().total_cmp(&(1.0 - b.norm()).abs()));
    let mut chosen: Vec<C64> = Vec::with_capacity(l);
    for z in inside {
        // both halves of a split double root can land inside
        if chosen.iter().all(|w| (w - z).norm() > 1e-6) {
            chosen.push(z);
        }
        if chosen.len() == l {
            break;
        }
    }
    // noiseless DOA roots are double, so refine them on the derivative
    let dp: Vec<C64> = (1..p.len()).map(|k| p[k] * k as f64).collect();
    for z in chosen.iter_mut() {
        let start = *z;
        for _ in 0..8 {
            let (v, d) = horner_with_derivative(&dp, *z);
            if d.norm() == 0.0 {
                break;
            }
            let next = *z - v / d;
            if (next - start).norm() < 1e-4 && horner_with_derivative(&dp, next).0.norm() < v.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    if chosen.len() < l {
        bail!(Precondition, "root-MUSIC found {} candidate roots for L = {l}", chosen.len());
    }
    let mut angles = chosen.iter().map(|&z| direction_of_root(geom, z)).collect::<Result<Vec<_>>>()?;
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Noise polynomial `f = g h` split against the generator of the source variety.
#[derive(Debug, Clone)]
pub struct NoiseFactor {
    pub quotient: Poly,
    /// Largest remainder coefficient relative to the largest coefficient of `f`.
    pub remainder: f64,
}

/// Divide each selected noise eigenvector polynomial by `prod (x - alpha_l*)`.
pub fn factor_noise_polynomials(split: &EigenSplit, source_dirs: &[f64], geom: &ArrayGeometry) -> Result<Vec<NoiseFactor>> {
    let variety = Variety::from_directions(geom, source_dirs)?;
    let g = generator_poly(&variety);
    split
        .selected_noise_indices
        .iter()
        .map(|&j| {
            let f = Poly::new(split.eigenvectors.column(j).iter().copied().collect());
            let (h, r) = f.div_rem(&g)?;
            let scale = f.coeffs().iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
            let rem = r.coeffs().iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale;
            Ok(NoiseFactor { quotient: h, remainder: rem })
        })
        .collect()
}

/// `|Res(a, b)|` from the roots: `|lc_a|^deg_b |lc_b|^deg_a prod |r_i - s_j|`.
pub fn resultant_magnitude(a: &Poly, b: &Poly) -> Result<f64> {
    let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
        bail!(Domain, "resultant of the zero polynomial");
    };
    let ra = eigenvector_roots(a.coeffs())?;
    let rb = eigenvector_roots(b.coeffs())?;
    let la = a.leading().map(|z| z.norm()).unwrap_or(0.0);
    let lb = b.leading().map(|z| z.norm()).unwrap_or(0.0);
    let mut r = la.powi(db as i32) * lb.powi(da as i32);
    for x in &ra {
        for y in &rb {
            r *= (x - y).norm();
        }
    }
    Ok(r)
}

/// Rebuild `g h` from a factor, for checks.
pub fn expand_factor(g: &Poly, f: &NoiseFactor) -> Poly {
    poly_mul(g, &f.quotient)
}

/// Estimator used in a Monte-Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    RootCluster,
    RootMusic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::RootCluster => "root_cluster",
            Method::RootMusic => "root_music",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub method: Method,
    /// Sorted estimates, or `None` when the estimator failed.
    pub estimate: Option<Vec<f64>>,
    /// RMS error against the sorted true directions (degrees).
    pub error: Option<f64>,
}

/// Seed of trial `i` derived from the base seed.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = base.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rms_error(est: &[f64], truth: &[f64]) -> f64 {
    let mut t = truth.to_vec();
    t.sort_by(f64::total_cmp);
    let s: f64 = est.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum();
    (s / t.len() as f64).sqrt()
}

/// Run both estimators on `trials` independent snapshot sets.
pub fn monte_carlo(model: &SnapshotModel, trials: usize, opts: &ClusterOptions) -> Result<Vec<TrialRecord>> {
    model.validate()?;
    let l = model.l();
    if l == 0 {
        bail!(Domain, "no sources to estimate");
    }
    let mut out = Vec::with_capacity(2 * trials);
    for trial in 0..trials {
        let m = model.with_seed(trial_seed(model.seed, trial));
        let eig = eigen_descending(&sample_covariance(&m)?);
        let clustered = select_noise_subspace(&eig, l, opts).and_then(|s| estimate_directions(&s, &m.geom));
        let music = root_music_baseline(&eig, l, &m.geom);
        for (method, est) in [
            (Method::RootCluster, clustered.map(|d| d.angles)),
            (Method::RootMusic, music),
        ] {
            let estimate = match est {
                Ok(v) => Some(v),
                Err(Error::Ambiguity(_) | Error::Domain(_) | Error::Precondition(_)) => None,
                Err(e) => return Err(e),
            };
            let error = estimate.as_ref().map(|v| rms_error(v, &model.source_dirs));
            out.push(TrialRecord { trial, method, estimate, error });
        }
    }
    Ok(out)
}

/// Root-mean-square error of one method over its successful trials, with the failure count.
pub fn summarize(records: &[TrialRecord], method: Method) -> (f64, usize) {
    let errs: Vec<f64> = records.iter().filter(|r| r.method == method).filter_map(|r| r.error).collect();
    let failures = records.iter().filter(|r| r.method == method && r.error.is_none()).count();
    if errs.is_empty() {
        return (f64::NAN, failures);
    }
    ((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt(), failures)
}
