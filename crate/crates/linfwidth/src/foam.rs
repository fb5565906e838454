//! Periodic foam construction: Cheeger-ratio sweep over level sets of the
//! cube eigenfunction and the random-shift union process that produces a
//! periodic separator with small boundary measure.
//!
//! The driving field is `f(x) = Π sin(π x_i)`, the first Dirichlet
//! eigenfunction of the cube. Sublevel domains `Ω_λ = {f ≤ λ}` are swept
//! over λ; the minimizer of the boundary-to-volume ratio feeds the union
//! process, which accumulates boundaries of randomly shifted copies of
//! `Ω_λ` on a torus grid until every free component is smaller than the
//! period on every axis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::{
    grid_components, isosurface, level_set_area_mc, mc_volume, Estimate, ScalarField, TorusGrid,
    TriMesh,
};
use crate::{Error, Result};

use std::f64::consts::PI;

/// Derives an independent sub-seed from a base seed and a stream index
/// (one splitmix64 round).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The product-of-sines eigenfunction `f(x) = Π sin(π x_i)` on `[0,1]^N`,
/// with its analytic gradient. Satisfies `−Δf = N π² f`.
pub fn eigenfield(n: usize) -> ScalarField {
    assert!(n >= 1);
    ScalarField::new(
        n,
        |x| x.iter().map(|&v| (PI * v).sin()).product(),
        |x, out| {
            let sines: Vec<f64> = x.iter().map(|&v| (PI * v).sin()).collect();
            for a in 0..x.len() {
                let rest: f64 = sines
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != a)
                    .map(|(_, s)| s)
                    .product();
                out[a] = PI * (PI * x[a]).cos() * rest;
            }
        },
    )
}

/// Verifies `−Δf = N π² f` for the eigenfield at seeded points, with the
/// Laplacian taken by central second differences. The comparison is
/// relative to `N π² max(|f|, 1e-3)` so that points near the zero set do
/// not dominate.
pub fn check_eigenfunction(n: usize, samples: usize, seed: u64) -> Result<()> {
    let f = eigenfield(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 3e-4;
    let eigenvalue = n as f64 * PI * PI;
    let mut x = vec![0.0; n];
    for s in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.random::<f64>();
        }
        let fx = f.eval(&x);
        let mut lap = 0.0;
        for a in 0..n {
            let orig = x[a];
            x[a] = orig + h;
            let fp = f.eval(&x);
            x[a] = orig - h;
            let fm = f.eval(&x);
            x[a] = orig;
            lap += (fp - 2.0 * fx + fm) / (h * h);
        }
        let rel = (lap + eigenvalue * fx).abs() / (eigenvalue * fx.abs().max(1e-3));
        if rel > 1e-6 {
            return Err(Error::Falsification(format!(
                "eigenfunction check failed at sample {s}: -Δf = {}, Nπ²f = {}",
                -lap,
                eigenvalue * fx
            )));
        }
    }
    Ok(())
}

/// Default coarea band width: 2% of the field's range (the eigenfield
/// ranges over [0, 1]).
pub const DEFAULT_BAND: f64 = 0.02;

/// One sampled point of the ratio sweep.
#[derive(Debug, Clone)]
pub struct RatioPoint {
    pub lambda: f64,
    /// Level-set area `vol_{N-1}(S_λ)`, coarea band estimate.
    pub area: Estimate,
    /// Sublevel volume `vol_N(Ω_λ)`.
    pub volume: Estimate,
    /// `area / volume` with first-order propagated standard error.
    pub ratio: f64,
    pub ratio_se: f64,
    /// Same numerator over `min(vol, 1 − vol)`.
    pub balanced_ratio: f64,
    pub balanced_ratio_se: f64,
    /// No sample landed in the coarea band, or the volume estimate
    /// vanished; the ratios are meaningless.
    pub degenerate: bool,
}

/// Consistency check of the band estimator at one λ: halving the band must
/// move the estimate by less than two combined standard errors.
#[derive(Debug, Clone)]
pub struct BandCheck {
    pub lambda: f64,
    pub full: Estimate,
    pub halved: Estimate,
    pub pass: bool,
}

/// Result of sweeping the Cheeger ratio over a λ grid.
#[derive(Debug, Clone)]
pub struct RatioCurve {
    pub dim: usize,
    pub band: f64,
    pub points: Vec<RatioPoint>,
    pub band_check: Option<BandCheck>,
}

impl RatioCurve {
    /// Minimizer of `area/volume` over points with `vol(Ω_λ) ≤ 1/2`, the
    /// ratio used for acceptance. The unrestricted ratio degenerates as
    /// λ → 1 (the sublevel set fills the torus); both are recorded.
    pub fn min_ratio_half(&self) -> Option<&RatioPoint> {
        self.points
            .iter()
            .filter(|p| !p.degenerate && p.volume.value <= 0.5)
            .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    /// Minimizer of `area/volume` over the full grid.
    pub fn min_ratio_unrestricted(&self) -> Option<&RatioPoint> {
        self.points
            .iter()
            .filter(|p| !p.degenerate)
            .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    /// Minimizer of the balanced ratio `area / min(vol, 1−vol)`.
    pub fn min_balanced_ratio(&self) -> Option<&RatioPoint> {
        self.points
            .iter()
            .filter(|p| !p.degenerate)
            .min_by(|a, b| a.balanced_ratio.total_cmp(&b.balanced_ratio))
    }
}

/// Log-spaced λ grid in (0,1).
pub fn log_lambda_grid(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let (lo, hi): (f64, f64) = (1e-2, 1.0 - 1e-2);
    (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

/// Sweeps the boundary-to-volume ratio of `Ω_λ = {f ≤ λ}` over a λ grid,
/// with Monte Carlo estimates of both measures at each point. λ points are
/// processed in parallel with per-point derived seeds; the curve is
/// deterministic given `(lambdas, samples, seed)`.
pub fn ratio_sweep(n: usize, lambdas: &[f64], samples: usize, seed: u64) -> Result<RatioCurve> {
    if n == 0 || n > 6 {
        return Err(Error::DimensionLimit(format!(
            "ratio sweep supports 1 ≤ N ≤ 6, got {n}"
        )));
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "lambda grid must be strictly increasing".into(),
        ));
    }
    let field = eigenfield(n);
    let band = DEFAULT_BAND;
    let points: Vec<RatioPoint> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let area = level_set_area_mc(
                &field,
                lambda,
                band,
                samples,
                derive_seed(seed, 2 * i as u64),
            );
            let volume = mc_volume(
                n,
                |x| field.eval(x) <= lambda,
                samples,
                derive_seed(seed, 2 * i as u64 + 1),
            );
            ratio_point(lambda, area, volume)
        })
        .collect();

    // Band self-check at the restricted minimizer.
    let band_check = points
        .iter()
        .filter(|p| !p.degenerate && p.volume.value <= 0.5)
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .map(|p| {
            let full = p.area;
            let halved = level_set_area_mc(
                &field,
                p.lambda,
                band / 2.0,
                samples,
                derive_seed(seed, 1_000_003),
            );
            let combined = (full.se * full.se + halved.se * halved.se).sqrt();
            BandCheck {
                lambda: p.lambda,
                full,
                halved,
                pass: (full.value - halved.value).abs() < 2.0 * combined,
            }
        });

    Ok(RatioCurve {
        dim: n,
        band,
        points,
        band_check,
    })
}

fn ratio_point(lambda: f64, area: Estimate, volume: Estimate) -> RatioPoint {
    let degenerate = area.is_degenerate() || volume.value <= 0.0;
    let (ratio, ratio_se, balanced_ratio, balanced_ratio_se) = if degenerate {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY)
    } else {
        let r = area.value / volume.value;
        let rel = ((area.se / area.value).powi(2) + (volume.se / volume.value).powi(2)).sqrt();
        let balanced_vol = volume.value.min(1.0 - volume.value);
        let (b, b_se) = if balanced_vol > 0.0 {
            let b = area.value / balanced_vol;
            (b, b * rel)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        (r, r * rel, b, b_se)
    };
    RatioPoint {
        lambda,
        area,
        volume,
        ratio,
        ratio_se,
        balanced_ratio,
        balanced_ratio_se,
        degenerate,
    }
}

/// State of the random-shift union process on a torus grid.
///
/// `grid` marks separator cells: both cells incident to every kept
/// boundary facet. This one-cell thickening is what makes face-adjacency
/// component analysis leak-free; the boundary measure is computed from the
/// facet count before any thickening.
#[derive(Debug, Clone)]
pub struct FoamState {
    pub dim: usize,
    pub res: usize,
    pub lambda: f64,
    pub grid: TorusGrid,
    /// The random shifts `v_1, …, v_k` in order.
    pub shifts: Vec<Vec<f64>>,
    pub steps: usize,
    /// Kept boundary facets: between a cell inside the newly shifted
    /// sublevel set and one outside it, not interior to the running union.
    pub facet_count: u64,
    /// `facet_count · res^{1−N}`: raw rasterized boundary measure.
    pub raw_boundary_measure: f64,
    /// Continuum correction: MC coarea area of `S_λ` divided by the raw
    /// rasterized measure of `∂Ω_λ` at this resolution.
    pub calibration: f64,
    /// `raw_boundary_measure · calibration`.
    pub boundary_measure: f64,
    pub separated: bool,
}

/// Outcome of [`union_process`]: either the grid separated, or the step
/// budget ran out; both carry the full state.
#[derive(Debug, Clone)]
pub enum UnionOutcome {
    Separated(FoamState),
    Exhausted(FoamState),
}

impl UnionOutcome {
    pub fn state(&self) -> &FoamState {
        match self {
            UnionOutcome::Separated(s) | UnionOutcome::Exhausted(s) => s,
        }
    }

    pub fn into_state(self) -> FoamState {
        match self {
            UnionOutcome::Separated(s) | UnionOutcome::Exhausted(s) => s,
        }
    }

    pub fn is_separated(&self) -> bool {
        matches!(self, UnionOutcome::Separated(_))
    }

    /// Converts the exhausted case into an error.
    pub fn require_separated(self) -> Result<FoamState> {
        match self {
            UnionOutcome::Separated(s) => Ok(s),
            UnionOutcome::Exhausted(s) => Err(Error::NotSeparated { steps: s.steps }),
        }
    }
}

/// Default step budget.
pub fn default_max_steps(n: usize) -> usize {
    64 * n
}

/// Runs the random-shift union process at level λ on a `res^N` torus grid:
/// at each step a uniform shift `v_i` is drawn, the boundary facets of the
/// shifted domain that are not interior to the current union are added to
/// the separator, and the union is extended. Stops as soon as no free
/// component winds around the torus and every free component has l∞ extent
/// below the resolution, or after `max_steps`.
///
/// The shifted domain is the bounded side of the level set,
/// `{f(· − v_i) ≥ λ}`, whose l∞ diameter is strictly below 1. This is the
/// side whose shifted unions can separate: once every cell is covered, a
/// free component cannot leave the first domain that covered it, because
/// every gap in that domain's kept boundary lies strictly inside an
/// earlier domain — and entering an earlier domain is blocked the same
/// way, down to the first domain, whose boundary is kept in full. The
/// unbounded side is a neighborhood of the coordinate hyperplanes; its
/// interior winds around the torus and never receives separator, so unions
/// of it cannot separate at any step count.
pub fn union_process(
    n: usize,
    lambda: f64,
    res: usize,
    max_steps: usize,
    seed: u64,
) -> Result<UnionOutcome> {
    if n == 0 || n > 4 {
        return Err(Error::DimensionLimit(format!(
            "union process supports 1 ≤ N ≤ 4, got {n}"
        )));
    }
    if !(0.0 < lambda && lambda <= 1.0) {
        return Err(Error::Precondition(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    let cells = res.pow(n as u32);
    let mut grid = TorusGrid::new(n, res)?;
    let mut omega = vec![false; cells];
    let mut in_shift = vec![false; cells];
    let mut facets = vec![false; cells * n];
    let mut facet_count: u64 = 0;
    let mut shifts: Vec<Vec<f64>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut separated = false;
    let mut steps = 0;

    // Per-axis table of sin(π((k + 1/2)/res − v)) rebuilt per shift; the
    // cell-center field value is the product of one entry per axis.
    let mut axis_sin = vec![vec![0.0f64; res]; n];

    while steps < max_steps {
        steps += 1;
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        for a in 0..n {
            for (k, slot) in axis_sin[a].iter_mut().enumerate() {
                let x = (k as f64 + 0.5) / res as f64 - v[a];
                *slot = (PI * (x - x.floor())).sin();
            }
        }
        let mut coords = vec![0usize; n];
        for cell in in_shift.iter_mut().take(cells) {
            let mut prod = 1.0;
            for a in 0..n {
                prod *= axis_sin[a][coords[a]];
            }
            *cell = prod >= lambda;
            for a in (0..n).rev() {
                coords[a] += 1;
                if coords[a] < res {
                    break;
                }
                coords[a] = 0;
            }
        }
        shifts.push(v);

        for idx in 0..cells {
            for axis in 0..n {
                let (nb, _) = grid.neighbor(idx, axis, 1);
                if in_shift[idx] != in_shift[nb]
                    && !(omega[idx] && omega[nb])
                    && !facets[idx * n + axis]
                {
                    facets[idx * n + axis] = true;
                    facet_count += 1;
                    grid.occupied_mut()[idx] = true;
                    grid.occupied_mut()[nb] = true;
                }
            }
        }
        for idx in 0..cells {
            omega[idx] |= in_shift[idx];
        }

        let labeling = grid_components(&grid, true);
        if labeling.separated(res) {
            separated = true;
            break;
        }
    }

    let raw = facet_count as f64 * (res as f64).powi(1 - n as i32);
    let calibration = boundary_calibration(n, lambda, res, seed)?;
    let state = FoamState {
        dim: n,
        res,
        lambda,
        grid,
        shifts,
        steps,
        facet_count,
        raw_boundary_measure: raw,
        calibration,
        boundary_measure: raw * calibration,
        separated,
    };
    Ok(if separated {
        UnionOutcome::Separated(state)
    } else {
        UnionOutcome::Exhausted(state)
    })
}

/// The grid-to-continuum boundary correction at level λ: the MC coarea
/// estimate of `vol_{N−1}(S_λ)` divided by the raw facet measure of the
/// rasterized `∂Ω_λ` at resolution `res`. Facet counting overcounts tilted
/// surfaces by up to `√N`; this undoes the average overcount for the
/// level-set geometry actually in play.
pub fn boundary_calibration(n: usize, lambda: f64, res: usize, seed: u64) -> Result<f64> {
    let field = eigenfield(n);
    let cells = res.pow(n as u32);
    let mut inside = vec![false; cells];
    let grid = TorusGrid::new(n, res)?;
    let mut coords = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    for cell in inside.iter_mut().take(cells) {
        for a in 0..n {
            x[a] = (coords[a] as f64 + 0.5) / res as f64;
        }
        *cell = field.eval(&x) <= lambda;
        for a in (0..n).rev() {
            coords[a] += 1;
            if coords[a] < res {
                break;
            }
            coords[a] = 0;
        }
    }
    let mut count: u64 = 0;
    for idx in 0..cells {
        for axis in 0..n {
            let (nb, _) = grid.neighbor(idx, axis, 1);
            if inside[idx] != inside[nb] {
                count += 1;
            }
        }
    }
    if count == 0 {
        return Ok(1.0);
    }
    let raw = count as f64 * (res as f64).powi(1 - n as i32);
    let mc = level_set_area_mc(
        &field,
        lambda,
        DEFAULT_BAND,
        200_000,
        derive_seed(seed, 0xCA11_B4A7),
    );
    if mc.is_degenerate() {
        return Ok(1.0);
    }
    Ok(mc.value / raw)
}

/// Triangle mesh of the separator surface of a 3-dimensional foam: the
/// union over steps of the level set `{f(· − v_i) = λ}` restricted to the
/// pieces not interior to the union of the earlier shifted domains (the
/// bounded sides `{f(· − v_j) ≥ λ}`, matching [`union_process`]).
pub fn foam_surface_mesh(state: &FoamState, mesh_res: usize) -> Result<TriMesh> {
    if state.dim != 3 {
        return Err(Error::DimensionLimit(format!(
            "foam surface meshes are implemented for N = 3, got {}",
            state.dim
        )));
    }
    let field = eigenfield(3);
    let lambda = state.lambda;
    let mut out = TriMesh::empty();
    for (i, v) in state.shifts.iter().enumerate() {
        let (v0, v1, v2) = (v[0], v[1], v[2]);
        let shifted = |x: f64, y: f64, z: f64| {
            let p = [x - v0, y - v1, z - v2];
            let w: Vec<f64> = p.iter().map(|c| c - c.floor()).collect();
            field.eval(&w)
        };
        let piece = isosurface(shifted, mesh_res, lambda);
        let earlier = &state.shifts[..i];
        let kept = piece.filter_by_centroid(|c| {
            earlier.iter().all(|u| {
                let w: Vec<f64> = (0..3)
                    .map(|a| {
                        let d = c[a] - u[a];
                        d - d.floor()
                    })
                    .collect();
                field.eval(&w) < lambda
            })
        });
        out.append(&kept);
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num *= (n - i) as u64;
        den *= (i + 1) as u64;
    }
    num / den
}

/// Rasterizes the cubic lattice separator of codimension `m+1` at spacing
/// `w` on a `res^N` torus grid: the union of all `(N−m−1)`-dimensional
/// coordinate affine planes through the `wZ^N` lattice. A cell is occupied
/// when at least `m+1` of its coordinate intervals contain a multiple of
/// `w`. Returns the grid together with the exact per-cell volume of the
/// continuum separator, `2^{m+1} C(N, m+1) w^{N−m−1}`.
pub fn cubic_separator(n: usize, m: usize, w: f64, res: usize) -> Result<(TorusGrid, f64)> {
    if m >= n {
        return Err(Error::Precondition(format!(
            "separator index m must satisfy 0 ≤ m ≤ N−1, got m={m}, N={n}"
        )));
    }
    if !(0.0 < w && w <= 1.0) {
        return Err(Error::Precondition(format!(
            "spacing w must lie in (0,1], got {w}"
        )));
    }
    let mut grid = TorusGrid::new(n, res)?;
    let mut axis_hit = vec![false; res];
    for (k, hit) in axis_hit.iter_mut().enumerate() {
        let lo = k as f64 / res as f64;
        let hi = (k + 1) as f64 / res as f64;
        *hit = lo == 0.0 || (lo / w).ceil() * w < hi;
    }
    let cells = grid.num_cells();
    let mut coords = vec![0usize; n];
    for idx in 0..cells {
        let hits = (0..n).filter(|&a| axis_hit[coords[a]]).count();
        if hits >= m + 1 {
            grid.occupied_mut()[idx] = true;
        }
        for a in (0..n).rev() {
            coords[a] += 1;
            if coords[a] < res {
                break;
            }
            coords[a] = 0;
        }
    }
    let formula = 2f64.powi(m as i32 + 1) * binomial(n, m + 1) as f64 * w.powi((n - m - 1) as i32);
    Ok((grid, formula))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenfield_values() {
        let f2 = eigenfield(2);
        assert!((f2.eval(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!(f2.eval(&[0.0, 0.3]).abs() < 1e-15);
        assert!((f2.eval(&[0.25, 0.25]) - 0.5).abs() < 1e-15);
        let f3 = eigenfield(3);
        assert!((f3.eval(&[0.5, 0.5, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenfield_gradient_and_eigenvalue() {
        eigenfield(3).check_gradient(1000, 2).unwrap();
        check_eigenfunction(2, 1000, 3).unwrap();
        check_eigenfunction(3, 1000, 4).unwrap();
    }

    #[test]
    fn ratio_sweep_n1_matches_arcsin_formula() {
        // In one dimension Ω_λ has measure 2·arcsin(λ)/π and S_λ is two
        // points, so ratio(λ) = π / arcsin(λ).
        let lambdas = [0.2, 0.5, 0.8];
        let curve = ratio_sweep(1, &lambdas, 100_000, 5).unwrap();
        for p in &curve.points {
            assert!(!p.degenerate);
            let exact = PI / p.lambda.asin();
            assert!(
                (p.ratio - exact).abs() < 6.0 * p.ratio_se + 0.05 * exact,
                "lambda={} ratio={} exact={exact}",
                p.lambda,
                p.ratio
            );
        }
    }

    #[test]
    fn ratio_sweep_minimum_beats_cheeger_bound_n1() {
        let curve = ratio_sweep(1, &log_lambda_grid(16), 50_000, 6).unwrap();
        let min = curve.min_ratio_half().unwrap();
        let bound = 2.0 * PI;
        assert!(min.ratio <= bound + 4.0 * min.ratio_se);
        // Unrestricted minimum approaches 2 near λ = 1.
        let unrestricted = curve.min_ratio_unrestricted().unwrap();
        assert!(unrestricted.ratio < 3.0);
    }

    #[test]
    fn ratio_sweep_is_deterministic() {
        let lambdas = [0.3, 0.6];
        let a = ratio_sweep(2, &lambdas, 20_000, 9).unwrap();
        let b = ratio_sweep(2, &lambdas, 20_000, 9).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.ratio, pb.ratio);
            assert_eq!(pa.area, pb.area);
        }
    }

    #[test]
    fn union_process_separates_small_case() {
        let curve = ratio_sweep(2, &log_lambda_grid(16), 50_000, 10).unwrap();
        let lambda = curve.min_ratio_half().unwrap().lambda;
        let outcome = union_process(2, lambda, 128, 128, 11).unwrap();
        assert!(outcome.is_separated(), "did not separate at λ={lambda}");
        let state = outcome.state();
        let labeling = grid_components(&state.grid, true);
        assert!(labeling.separated(state.res));
        assert!(state.boundary_measure > 0.0);
        assert_eq!(state.shifts.len(), state.steps);
    }

    #[test]
    fn union_process_lambda_one_never_separates() {
        // Ω_1 is the whole torus: no boundary, no separation.
        let outcome = union_process(2, 1.0, 32, 8, 12).unwrap();
        assert!(!outcome.is_separated());
        let state = outcome.into_state();
        assert_eq!(state.facet_count, 0);
        assert_eq!(state.steps, 8);
        assert!(!state.separated);
    }

    #[test]
    fn union_process_is_deterministic() {
        let a = union_process(2, 0.6, 64, 32, 13).unwrap();
        let b = union_process(2, 0.6, 64, 32, 13).unwrap();
        assert_eq!(a.state().facet_count, b.state().facet_count);
        assert_eq!(a.state().shifts, b.state().shifts);
        assert_eq!(a.state().grid, b.state().grid);
    }

    #[test]
    fn cubic_separator_formula_values() {
        let (_, v) = cubic_separator(3, 0, 1.0, 8).unwrap();
        assert_eq!(v, 6.0);
        let (_, v) = cubic_separator(2, 0, 1.0, 8).unwrap();
        assert_eq!(v, 4.0);
        let (_, v) = cubic_separator(3, 1, 1.0, 8).unwrap();
        assert_eq!(v, 12.0);
        assert!(cubic_separator(3, 3, 1.0, 8).is_err());
    }

    #[test]
    fn cubic_separator_n2_lattice_lines_separate() {
        let (grid, _) = cubic_separator(2, 0, 1.0, 64).unwrap();
        let labeling = grid_components(&grid, true);
        assert!(labeling.separated(64));
        assert_eq!(labeling.components.len(), 1);
        assert!(labeling.components[0].linf_extent() < 64);
    }

    #[test]
    fn foam_surface_mesh_has_area_near_boundary_measure() {
        let outcome = union_process(3, 0.5, 32, 64, 14).unwrap();
        let state = outcome.state();
        let mesh = foam_surface_mesh(state, 32).unwrap();
        assert!(!mesh.is_empty());
        let area = mesh.area();
        // The mesh area and the calibrated facet measure estimate the same
        // quantity.
        let rel = (area - state.boundary_measure).abs() / area;
        assert!(
            rel < 0.2,
            "mesh area {area} vs boundary measure {}",
            state.boundary_measure
        );
    }
}
