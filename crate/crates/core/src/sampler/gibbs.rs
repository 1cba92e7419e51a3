use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::{ChainConfig, HyperParams, InitFill, PosteriorChain, SamplerError};
use crate::lattice::SelectionOperator;
use crate::sparse::{sample_with_factor, Ordering, SparseMatrix, SymbolicCholesky};

/// Complete-data sampler: every node carries an observation.
pub fn gibbs_complete(
    y: &[f64],
    q: &SparseMatrix,
    hp: &HyperParams,
    cfg: &ChainConfig,
) -> Result<PosteriorChain, SamplerError> {
    if y.len() != q.dim() {
        return Err(SamplerError::DimensionMismatch {
            expected: q.dim(),
            found: y.len(),
        });
    }
    run(y, q, &SelectionOperator::identity(q.dim()), hp, cfg)
}

/// Missing-data sampler: `y` holds the `m` observed values in slot order and
/// `h` maps them onto the `n` nodes of `q`.
pub fn gibbs_missing(
    y: &[f64],
    q: &SparseMatrix,
    h: &SelectionOperator,
    hp: &HyperParams,
    cfg: &ChainConfig,
) -> Result<PosteriorChain, SamplerError> {
    if h.n() != q.dim() {
        return Err(SamplerError::DimensionMismatch {
            expected: q.dim(),
            found: h.n(),
        });
    }
    if y.len() != h.m() {
        return Err(SamplerError::DimensionMismatch {
            expected: h.m(),
            found: y.len(),
        });
    }
    run(y, q, h, hp, cfg)
}

/// Mean of the full conditional of `x` at fixed precisions:
/// `(κ_x Q + κ_y HᵀH)⁻¹ κ_y Hᵀy`.
pub fn conditional_mean(
    y: &[f64],
    q: &SparseMatrix,
    h: &SelectionOperator,
    kappa_x: f64,
    kappa_y: f64,
) -> Result<Vec<f64>, SamplerError> {
    if h.n() != q.dim() || y.len() != h.m() {
        return Err(SamplerError::DimensionMismatch {
            expected: h.m(),
            found: y.len(),
        });
    }
    let q = q.with_full_diagonal();
    let (precision, b) = conditional_system(&q, h, &h.gram_diagonal(), &h.apply_transpose(y), kappa_x, kappa_y)?;
    let symbolic = SymbolicCholesky::analyze(&precision, Ordering::default())?;
    Ok(symbolic.factor(&precision)?.solve(&b)?)
}

fn conditional_system(
    q: &SparseMatrix,
    h: &SelectionOperator,
    gram: &[f64],
    hty: &[f64],
    kx: f64,
    ky: f64,
) -> Result<(SparseMatrix, Vec<f64>), SamplerError> {
    debug_assert_eq!(gram.len(), h.n());
    let shift: Vec<f64> = gram.iter().map(|g| ky * g).collect();
    let b = hty.iter().map(|v| ky * v).collect();
    Ok((q.scaled_plus_diagonal(kx, &shift)?, b))
}

fn gamma(shape: f64, rate: f64) -> Gamma<f64> {
    Gamma::new(shape, 1.0 / rate).expect("gamma parameters are positive by construction")
}

fn run(
    y: &[f64],
    q: &SparseMatrix,
    h: &SelectionOperator,
    hp: &HyperParams,
    cfg: &ChainConfig,
) -> Result<PosteriorChain, SamplerError> {
    hp.validate()?;
    cfg.validate()?;
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(SamplerError::NonFiniteInput(i));
    }
    let m = h.m();
    if m < 2 {
        return Err(SamplerError::TooFewObservations);
    }
    let q = q.with_full_diagonal();
    let gram = h.gram_diagonal();
    let hty = h.apply_transpose(y);
    let initial_x = initial_field(&hty, &gram, &q, cfg.init_x);

    let symbolic = SymbolicCholesky::analyze(&q, Ordering::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shape_x = hp.alpha_x + (m as f64 - 2.0) / 2.0;
    let shape_y = hp.alpha_y + m as f64 / 2.0;

    let mut kx = cfg.init_kappa_x;
    let mut ky = cfg.init_kappa_y;
    let total = cfg.burn_in + cfg.n_samples * cfg.thin;
    let mut x_draws = Vec::with_capacity(cfg.n_samples);
    let mut kx_draws = Vec::with_capacity(cfg.n_samples);
    let mut ky_draws = Vec::with_capacity(cfg.n_samples);

    for it in 0..total {
        let (precision, b) = conditional_system(&q, h, &gram, &hty, kx, ky)?;
        let factor = symbolic.factor(&precision)?;
        let x = sample_with_factor(&factor, &b, &mut rng)?;

        if !cfg.fixed_kappa {
            let qform = q.quadratic_form(&x)?.max(0.0);
            kx = gamma(shape_x, hp.beta_x + 0.5 * qform).sample(&mut rng);
            let hx = h.apply(&x);
            let rss: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b) * (a - b)).sum();
            ky = gamma(shape_y, hp.beta_y + 0.5 * rss).sample(&mut rng);
        }

        if it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 {
            x_draws.push(x);
            kx_draws.push(kx);
            ky_draws.push(ky);
        }
        if (it + 1) % 1000 == 0 {
            log::debug!("gibbs iteration {}/{total}: κ_x = {kx:.4}, κ_y = {ky:.4}", it + 1);
        }
    }

    let mut chain = PosteriorChain::from_draws(x_draws, kx_draws, ky_draws, cfg.clone(), *hp)?;
    chain.initial_x = initial_x;
    Ok(chain)
}

/// Initial state: observations where available; missing nodes are either
/// zero or filled layer by layer with the mean of already filled neighbours.
pub fn initial_field(
    scattered: &[f64],
    observed_weight: &[f64],
    q: &SparseMatrix,
    fill: InitFill,
) -> Vec<f64> {
    let mut x = scattered.to_vec();
    if fill == InitFill::ObservedWithZeroFill {
        return x;
    }
    let mut known: Vec<bool> = observed_weight.iter().map(|&g| g > 0.0).collect();
    loop {
        let mut updates = Vec::new();
        for i in (0..x.len()).filter(|&i| !known[i]) {
            let (cols, vals) = q.row(i);
            let (mut sum, mut count) = (0.0, 0usize);
            for (&j, &a) in cols.iter().zip(vals) {
                if j != i && a != 0.0 && known[j] {
                    sum += x[j];
                    count += 1;
                }
            }
            if count > 0 {
                updates.push((i, sum / count as f64));
            }
        }
        if updates.is_empty() {
            return x;
        }
        for (i, v) in updates {
            x[i] = v;
            known[i] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_regular_q, structure_matrix, AnisotropyWeights, Lattice};

    fn grid_q(n1: usize, n2: usize) -> SparseMatrix {
        let lat = Lattice::full(n1, n2, 1.0).unwrap();
        build_regular_q(&lat, AnisotropyWeights::isotropic()).unwrap()
    }

    fn short(seed: u64) -> ChainConfig {
        ChainConfig {
            burn_in: 20,
            n_samples: 30,
            seed,
            ..ChainConfig::default()
        }
    }

    #[test]
    fn seeded_chains_are_bit_identical() {
        let q = grid_q(4, 5);
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let hp = HyperParams::default();
        let a = gibbs_complete(&y, &q, &hp, &short(9)).unwrap();
        let b = gibbs_complete(&y, &q, &hp, &short(9)).unwrap();
        assert_eq!(a, b);
        let c = gibbs_complete(&y, &q, &hp, &short(10)).unwrap();
        assert_ne!(a.kappa_x(), c.kappa_x());
    }

    #[test]
    fn missing_sampler_with_identity_selection_equals_complete() {
        let q = grid_q(3, 4);
        let y: Vec<f64> = (0..12).map(|i| i as f64 * 0.1 - 0.5).collect();
        let hp = HyperParams::default();
        let a = gibbs_complete(&y, &q, &hp, &short(3)).unwrap();
        let b = gibbs_missing(&y, &q, &SelectionOperator::identity(12), &hp, &short(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn precision_draws_are_positive_and_finite() {
        let q = grid_q(5, 5);
        let y: Vec<f64> = (0..25).map(|i| ((i * 7) % 5) as f64).collect();
        let chain = gibbs_complete(&y, &q, &HyperParams::default(), &short(1)).unwrap();
        for &k in chain.kappa_x().iter().chain(chain.kappa_y()) {
            assert!(k.is_finite() && k > 0.0);
        }
        assert_eq!(chain.len(), 30);
    }

    #[test]
    fn thinning_keeps_every_kth_iteration() {
        let q = grid_q(3, 3);
        let y = vec![0.5; 9];
        let cfg = ChainConfig {
            burn_in: 5,
            n_samples: 4,
            thin: 3,
            ..ChainConfig::default()
        };
        let chain = gibbs_complete(&y, &q, &HyperParams::default(), &cfg).unwrap();
        assert_eq!(chain.len(), 4);
    }

    #[test]
    fn fixed_kappa_keeps_precisions() {
        let q = grid_q(3, 3);
        let y = vec![1.0; 9];
        let cfg = ChainConfig {
            fixed_kappa: true,
            init_kappa_x: 1.0,
            init_kappa_y: 2.0,
            ..short(4)
        };
        let chain = gibbs_complete(&y, &q, &HyperParams::default(), &cfg).unwrap();
        assert!(chain.kappa_x().iter().all(|&k| k == 1.0));
        assert!(chain.kappa_y().iter().all(|&k| k == 2.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = grid_q(2, 2);
        let hp = HyperParams::default();
        assert!(matches!(
            gibbs_complete(&[1.0, 2.0], &q, &hp, &short(1)),
            Err(SamplerError::DimensionMismatch { .. })
        ));
        assert_eq!(
            gibbs_complete(&[1.0, f64::NAN, 0.0, 0.0], &q, &hp, &short(1)),
            Err(SamplerError::NonFiniteInput(1))
        );
    }

    #[test]
    fn neighbour_fill_spreads_inward() {
        let q = structure_matrix(5).unwrap();
        let scattered = [2.0, 0.0, 0.0, 0.0, 4.0];
        let weight = [1.0, 0.0, 0.0, 0.0, 1.0];
        let x = initial_field(&scattered, &weight, &q, InitFill::NeighborMeanFill);
        assert_eq!(x, vec![2.0, 2.0, 3.0, 4.0, 4.0]);
        let z = initial_field(&scattered, &weight, &q, InitFill::ObservedWithZeroFill);
        assert_eq!(z, scattered.to_vec());
    }
}
