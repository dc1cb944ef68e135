//! Synthetic demand environment with a declared Hölder smoothness budget.
//!
//! Expected demand per SBS is a smooth function of the context, generated so
//! that the declared `(L, α)` pair genuinely bounds its variation (a safety
//! factor below the true constant, verifiable with [`check_holder`]).
//! Realized demands are normal draws around the mean, clipped to
//! `[0, demand_range]`.
//!
//! Context sequences mimic trace behavior: each SBS has a small set of
//! *active* cells of the context grid and every slot draws one of them
//! uniformly, then places the context uniformly inside that cell. Demand
//! patterns thus concentrate on a site-specific region of the context space
//! rather than spraying over the whole cube, matching how time-of-day and
//! daily-demand features behave in real traces. Set `active_cells_per_sbs`
//! to 0 to draw contexts uniformly over the whole cube instead.
//!
//! Everything is counter-based: draws depend only on
//! `(seed, replication, slot)`, never on call order.

use rand::Rng;

use crate::estimator::CellIndex;
use crate::rng::stream;

const TAG_MEANS: u64 = 0x11;
const TAG_ACTIVE: u64 = 0x12;
const TAG_CONTEXT: u64 = 0x13;
const TAG_DEMAND: u64 = 0x14;
const TAG_HOLDER: u64 = 0x15;

/// Expected-demand function of one SBS.
#[derive(Debug, Clone)]
pub enum MeanFn {
    Constant(f64),
    Linear { intercept: f64, slopes: Vec<f64> },
    /// Plane plus a per-dimension sinusoidal wiggle. The plane carries most
    /// of the smoothness budget, so cell means spread over a wide demand
    /// range while the gradient stays bounded.
    Ramp {
        base: f64,
        slopes: Vec<f64>,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
    },
}

impl MeanFn {
    fn eval_raw(&self, x: &[f64]) -> f64 {
        match self {
            MeanFn::Constant(c) => *c,
            MeanFn::Linear { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
            }
            MeanFn::Ramp {
                base,
                slopes,
                amplitudes,
                phases,
            } => {
                base + slopes.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
                    + amplitudes
                        .iter()
                        .zip(phases)
                        .zip(x)
                        .map(|((a, p), xi)| a * (2.0 * std::f64::consts::PI * xi + p).sin())
                        .sum::<f64>()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticModel {
    pub n_sbs: usize,
    pub dim: usize,
    /// Demand range bound `λ_max`; means and draws live in `[0, range]`.
    pub demand_range: f64,
    pub noise_std: f64,
    /// Declared Hölder constant.
    pub holder_l: f64,
    /// Declared Hölder exponent, in (0, 1].
    pub holder_alpha: f64,
    pub seed: u64,
    /// Context grid used by the active-cell process.
    pub context_cells_per_dim: u32,
    /// Active cells per SBS; 0 = uniform contexts over the whole cube.
    pub active_cells_per_sbs: usize,
    means: Vec<MeanFn>,
    active_cells: Vec<Vec<CellIndex>>,
}

impl SyntheticModel {
    /// Generate per-SBS sinusoidal means from the seed, with amplitudes
    /// scaled so the declared `(L, α)` holds with a 0.9 safety factor.
    #[allow(clippy::too_many_arguments)]
    pub fn generate(
        n_sbs: usize,
        dim: usize,
        demand_range: f64,
        noise_std: f64,
        holder_l: f64,
        holder_alpha: f64,
        seed: u64,
        context_cells_per_dim: u32,
        active_cells_per_sbs: usize,
    ) -> Self {
        assert!(holder_alpha > 0.0 && holder_alpha <= 1.0, "generator supports α ∈ (0, 1]");
        assert!(holder_l > 0.0 && demand_range > 0.0);
        let mut rng = stream(seed, &[TAG_MEANS]);
        // A gradient bound g makes the function L'-Hölder over the unit cube
        // with L' = g · √D^(1-α); budget for 0.9·L, split 4:1 between the
        // plane and the wiggle.
        let grad_budget = 0.9 * holder_l / (dim as f64).sqrt().powf(1.0 - holder_alpha);
        let plane_budget = 0.8 * grad_budget;
        let wiggle_budget = 0.2 * grad_budget;
        let means = (0..n_sbs)
            .map(|_| {
                // Random plane direction with per-dimension signs.
                let mut dir: Vec<f64> = (0..dim)
                    .map(|_| {
                        let v = rng.random_range(0.3..1.0);
                        if rng.random_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                dir.iter_mut().for_each(|d| *d *= plane_budget / norm);
                // Shift so the plane's minimum over the cube stays at base.
                let negative_span: f64 = dir.iter().map(|d| d.min(0.0)).sum();
                let base = rng.random_range(0.05..0.45) * demand_range - negative_span;

                let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..1.0)).collect();
                let wnorm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                let amplitudes = weights
                    .iter()
                    .map(|w| wiggle_budget * w / (2.0 * std::f64::consts::PI * wnorm))
                    .collect();
                let phases = (0..dim)
                    .map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI))
                    .collect();
                MeanFn::Ramp {
                    base,
                    slopes: dir,
                    amplitudes,
                    phases,
                }
            })
            .collect();

        let active_cells = Self::draw_active_cells(
            n_sbs,
            dim,
            context_cells_per_dim,
            active_cells_per_sbs,
            seed,
        );

        Self {
            n_sbs,
            dim,
            demand_range,
            noise_std,
            holder_l,
            holder_alpha,
            seed,
            context_cells_per_dim,
            active_cells_per_sbs,
            means,
            active_cells,
        }
    }

    /// Build a model around explicit mean functions (tests, demos).
    #[allow(clippy::too_many_arguments)]
    pub fn with_means(
        means: Vec<MeanFn>,
        dim: usize,
        demand_range: f64,
        noise_std: f64,
        holder_l: f64,
        holder_alpha: f64,
        seed: u64,
        context_cells_per_dim: u32,
        active_cells_per_sbs: usize,
    ) -> Self {
        let n_sbs = means.len();
        let active_cells = Self::draw_active_cells(
            n_sbs,
            dim,
            context_cells_per_dim,
            active_cells_per_sbs,
            seed,
        );
        Self {
            n_sbs,
            dim,
            demand_range,
            noise_std,
            holder_l,
            holder_alpha,
            seed,
            context_cells_per_dim,
            active_cells_per_sbs,
            means,
            active_cells,
        }
    }

    fn draw_active_cells(
        n_sbs: usize,
        dim: usize,
        cells_per_dim: u32,
        active_per_sbs: usize,
        seed: u64,
    ) -> Vec<Vec<CellIndex>> {
        if active_per_sbs == 0 {
            return vec![Vec::new(); n_sbs];
        }
        let total = (cells_per_dim as u64).pow(dim as u32);
        let k = (active_per_sbs as u64).min(total) as usize;
        let mut rng = stream(seed, &[TAG_ACTIVE]);
        (0..n_sbs)
            .map(|_| {
                // Partial Fisher–Yates over the linear cell indices.
                let mut indices: Vec<u64> = (0..total).collect();
                for i in 0..k {
                    let j = rng.random_range(i..indices.len());
                    indices.swap(i, j);
                }
                indices[..k]
                    .iter()
                    .map(|&linear| {
                        let mut coords = vec![0u32; dim];
                        let mut rest = linear;
                        for c in coords.iter_mut().rev() {
                            *c = (rest % u64::from(cells_per_dim)) as u32;
                            rest /= u64::from(cells_per_dim);
                        }
                        CellIndex(coords)
                    })
                    .collect()
            })
            .collect()
    }

    /// Latent demand level of SBS `n` at context `x`: the mean-function
    /// value clamped to `[0, range]`, before observation noise.
    pub fn latent_mean(&self, n: usize, x: &[f64]) -> f64 {
        self.means[n].eval_raw(x).clamp(0.0, self.demand_range)
    }

    /// Expected *realized* demand of SBS `n` at context `x`: the exact mean
    /// of the clipped normal draw around the latent level. This is what the
    /// oracle is entitled to know, and what estimators converge to. Both
    /// clamping and the clipped-mean transform are 1-Lipschitz in the
    /// latent value, so the declared Hölder pair still bounds it.
    pub fn mean(&self, n: usize, x: &[f64]) -> f64 {
        clipped_normal_mean(self.latent_mean(n, x), self.noise_std, self.demand_range)
    }

    pub fn means_at(&self, contexts: &[Vec<f64>]) -> Vec<f64> {
        contexts
            .iter()
            .enumerate()
            .map(|(n, x)| self.mean(n, x))
            .collect()
    }

    /// Cells each SBS's context process draws from (empty = whole cube).
    pub fn active_cells(&self, n: usize) -> &[CellIndex] {
        &self.active_cells[n]
    }

    /// Per-SBS contexts for `(replication, slot)`: an active cell drawn
    /// uniformly, then a uniform position inside it.
    pub fn contexts_at(&self, replication: u64, t: u64) -> Vec<Vec<f64>> {
        let mut rng = stream(self.seed, &[TAG_CONTEXT, replication, t]);
        let h = f64::from(self.context_cells_per_dim);
        (0..self.n_sbs)
            .map(|n| {
                if self.active_cells[n].is_empty() {
                    (0..self.dim).map(|_| rng.random_range(0.0..1.0)).collect()
                } else {
                    let cell = &self.active_cells[n][rng.random_range(0..self.active_cells[n].len())];
                    cell.0
                        .iter()
                        .map(|&c| (f64::from(c) + rng.random_range(0.0..1.0)) / h)
                        .collect()
                }
            })
            .collect()
    }

    /// Realized demands for `(replication, slot)`: normal draws around the
    /// latent level, clipped to `[0, range]`.
    pub fn demands_at(&self, replication: u64, t: u64, contexts: &[Vec<f64>]) -> Vec<f64> {
        let mut rng = stream(self.seed, &[TAG_DEMAND, replication, t]);
        contexts
            .iter()
            .enumerate()
            .map(|(n, x)| {
                let level = self.latent_mean(n, x);
                let draw = level + self.noise_std * standard_normal(&mut rng);
                draw.clamp(0.0, self.demand_range)
            })
            .collect()
    }
}

/// Box–Muller standard normal; deterministic given the rng state.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Abramowitz–Stegun 7.1.26 rational approximation of erf (|ε| < 1.5e-7).
fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact mean of `clip(N(level, std), 0, range)`.
pub fn clipped_normal_mean(level: f64, std: f64, range: f64) -> f64 {
    if std == 0.0 {
        return level.clamp(0.0, range);
    }
    let alpha = (0.0 - level) / std;
    let beta = (range - level) / std;
    range * (1.0 - normal_cdf(beta))
        + level * (normal_cdf(beta) - normal_cdf(alpha))
        - std * (normal_pdf(beta) - normal_pdf(alpha))
}

/// Free-function form of the demand draw, for callers holding the slot's
/// contexts.
pub fn synthesize(model: &SyntheticModel, contexts: &[Vec<f64>], replication: u64, t: u64) -> Vec<f64> {
    model.demands_at(replication, t, contexts)
}

/// Result of sampling the declared Hölder condition.
#[derive(Debug, Clone)]
pub struct HolderReport {
    pub pairs_checked: usize,
    /// Worst observed `|μ(x) − μ(x')| / (L·‖x − x'‖^α)`.
    pub worst_ratio: f64,
    pub violation: Option<HolderViolation>,
}

#[derive(Debug, Clone)]
pub struct HolderViolation {
    pub sbs: usize,
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub gap: f64,
    pub allowed: f64,
}

impl HolderReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Sample `n_pairs` random context pairs per SBS and check
/// `|μ(x) − μ(x')| ≤ tol · L · ‖x − x'‖^α`.
pub fn check_holder(model: &SyntheticModel, n_pairs: usize, tol: f64) -> HolderReport {
    let mut rng = stream(model.seed, &[TAG_HOLDER]);
    let mut worst_ratio: f64 = 0.0;
    let mut violation = None;
    for n in 0..model.n_sbs {
        for _ in 0..n_pairs {
            let x: Vec<f64> = (0..model.dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let x_prime: Vec<f64> = (0..model.dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let dist = x
                .iter()
                .zip(&x_prime)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist < 1e-12 {
                continue;
            }
            let gap = (model.mean(n, &x) - model.mean(n, &x_prime)).abs();
            let base = model.holder_l * dist.powf(model.holder_alpha);
            let ratio = gap / base;
            if ratio > worst_ratio {
                worst_ratio = ratio;
            }
            if gap > tol * base && violation.is_none() {
                violation = Some(HolderViolation {
                    sbs: n,
                    x: x.clone(),
                    x_prime: x_prime.clone(),
                    gap,
                    allowed: tol * base,
                });
            }
        }
    }
    HolderReport {
        pairs_checked: n_pairs * model.n_sbs,
        worst_ratio,
        violation,
    }
}
