//! Finite-difference verification of every hand-written backward pass.
//!
//! Runs in f64 on small randomized shapes. Each component reports the worst
//! relative error seen across all seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::derive_seed;
use crate::error::Result;
use crate::loss::{total_loss, LossWeights};
use crate::model::{Model, ModelConfig, SiMlpeParams};
use crate::tensor::{fd_check, AffineLayer, LayerNormParams, Matrix, DEFAULT_LN_EPSILON};

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckOptions {
    pub seeds: usize,
    pub base_seed: u64,
    /// Central-difference step.
    pub step: f64,
    pub tolerance: f64,
    pub input_len: usize,
    pub output_len: usize,
    pub channels: usize,
    pub num_blocks: usize,
    /// Doubles the full-model analytic gradient so the check must fail.
    pub inject_fault: bool,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            seeds: 20,
            base_seed: 0,
            step: 1e-5,
            tolerance: 1e-4,
            input_len: 8,
            output_len: 4,
            channels: 6,
            num_blocks: 2,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCheck {
    pub name: &'static str,
    pub max_rel_error: f64,
    pub seeds: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub tolerance: f64,
    pub components: Vec<ComponentCheck>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.components {
            s.push_str(&format!(
                "{:<12} max rel err {:.3e} over {} seeds  {}\n",
                c.name,
                c.max_rel_error,
                c.seeds,
                if c.passed { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Matrix<f64> {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-scale..scale))
}

fn dot(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn check_affine(rng: &mut ChaCha8Rng, h: f64) -> Result<f64> {
    let rows = rng.gen_range(1..=8);
    let d = rng.gen_range(1..=8);
    let x = uniform(rng, rows, d, 1.0);
    let probe = uniform(rng, rows, d, 1.0);
    let layer = AffineLayer::new(
        uniform(rng, d, d, 1.0),
        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let g = layer.backward(&x, &probe)?;
    let theta = [x.data(), layer.weight.data(), &layer.bias].concat();
    let analytic = [g.grad_x.data(), g.grad_weight.data(), &g.grad_bias].concat();
    let n = rows * d;
    fd_check(
        |t| {
            let x = Matrix::new(rows, d, t[..n].to_vec()).expect("sized");
            let l = AffineLayer {
                weight: Matrix::new(d, d, t[n..n + d * d].to_vec()).expect("sized"),
                bias: t[n + d * d..].to_vec(),
            };
            dot(&l.forward(&x).expect("shapes"), &probe)
        },
        &theta,
        &analytic,
        h,
    )
}

fn check_layernorm(rng: &mut ChaCha8Rng, h: f64) -> Result<f64> {
    let rows = rng.gen_range(1..=8);
    let d = rng.gen_range(3..=8);
    let x = uniform(rng, rows, d, 2.0);
    let probe = uniform(rng, rows, d, 1.0);
    let ln = LayerNormParams {
        gamma: (0..d).map(|_| rng.gen_range(0.5..1.5)).collect(),
        beta: (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        epsilon: DEFAULT_LN_EPSILON,
    };
    let (_, cache) = ln.forward(&x)?;
    let g = ln.backward(&cache, &probe)?;
    let theta = [x.data(), &ln.gamma, &ln.beta].concat();
    let analytic = [g.grad_x.data(), &g.grad_gamma, &g.grad_beta].concat();
    let n = rows * d;
    fd_check(
        |t| {
            let x = Matrix::new(rows, d, t[..n].to_vec()).expect("sized");
            let p = LayerNormParams {
                gamma: t[n..n + d].to_vec(),
                beta: t[n + d..].to_vec(),
                epsilon: DEFAULT_LN_EPSILON,
            };
            dot(&p.forward(&x).expect("shapes").0, &probe)
        },
        &theta,
        &analytic,
        h,
    )
}

fn check_loss(rng: &mut ChaCha8Rng, h: f64) -> Result<f64> {
    let n = rng.gen_range(1..=10);
    let c = 3 * rng.gen_range(1..=4);
    let gt = uniform(rng, n, c, 1.0);
    let pred = uniform(rng, n, c, 1.0);
    let w = LossWeights::new(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0))?;
    let (_, g) = total_loss(&w, &pred, &gt)?;
    fd_check(
        |t| {
            let p = Matrix::new(n, c, t.to_vec()).expect("sized");
            total_loss(&w, &p, &gt).expect("shapes").0.total
        },
        pred.data(),
        g.data(),
        h,
    )
}

/// Gradient of a two-window batch loss with respect to all parameters and
/// inputs; every parameter (including `fc_out` and the norms) is randomized
/// so no path is silenced by the zero init.
fn check_model(rng: &mut ChaCha8Rng, cfg: ModelConfig, h: f64, fault: bool) -> Result<f64> {
    let (t, c, n) = (cfg.input_len, cfg.channels, cfg.output_len);
    let mut params = SiMlpeParams::<f64>::zeros(&cfg);
    for tensor in params.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = rng.gen_range(-0.6..0.6);
        }
    }
    for block in &mut params.blocks {
        if let Some(ln) = &mut block.ln {
            for g in &mut ln.gamma {
                *g += 1.0;
            }
        }
    }
    let model = Model::new(cfg, params.clone())?;
    let inputs = vec![uniform(rng, t, c, 1.0), uniform(rng, t, c, 1.0)];
    let targets = vec![uniform(rng, n, c, 1.0), uniform(rng, n, c, 1.0)];
    let weights = LossWeights::default();

    let (rec, grads) = crate::train::batch_loss(&model, &inputs, &targets, &weights)?;
    debug_assert!(rec.total.is_finite());
    let mut analytic = grads.params.flatten();
    if fault {
        for g in &mut analytic {
            *g *= 2.0;
        }
    }
    for gi in &grads.inputs {
        analytic.extend_from_slice(gi.data());
    }
    let mut theta = params.flatten();
    for x in &inputs {
        theta.extend_from_slice(x.data());
    }

    let np = params.scalar_count();
    let mut scratch = params;
    let f = |th: &[f64]| {
        scratch.assign_flat(&th[..np]).expect("sized");
        let m = Model::new(cfg, scratch.clone()).expect("valid");
        let xs: Vec<Matrix<f64>> = th[np..]
            .chunks(t * c)
            .map(|chunk| Matrix::new(t, c, chunk.to_vec()).expect("sized"))
            .collect();
        crate::train::batch_loss(&m, &xs, &targets, &weights)
            .expect("shapes")
            .0
            .total
    };
    fd_check(f, &theta, &analytic, h)
}

/// Runs every component check and collects the worst error per component.
pub fn run_gradcheck(opts: &GradcheckOptions) -> Result<GradcheckReport> {
    let full = ModelConfig::new(opts.channels)
        .with_lengths(opts.input_len, opts.output_len)
        .with_blocks(opts.num_blocks);
    let dct_path = ModelConfig::one_fc(opts.input_len, opts.output_len, opts.channels);
    full.validate()?;

    type Check<'a> = Box<dyn Fn(&mut ChaCha8Rng) -> Result<f64> + 'a>;
    let h = opts.step;
    let checks: Vec<(&'static str, Check)> = vec![
        ("affine", Box::new(|r| check_affine(r, h))),
        ("layernorm", Box::new(|r| check_layernorm(r, h))),
        ("loss", Box::new(|r| check_loss(r, h))),
        ("dct path", Box::new(|r| check_model(r, dct_path, h, false))),
        (
            "full model",
            Box::new(|r| check_model(r, full, h, opts.inject_fault)),
        ),
    ];

    let mut components = Vec::with_capacity(checks.len());
    for (k, (name, check)) in checks.iter().enumerate() {
        let mut worst = 0.0f64;
        for s in 0..opts.seeds {
            let seed = derive_seed(opts.base_seed, (k * 1_000_003 + s) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            worst = worst.max(check(&mut rng)?);
        }
        components.push(ComponentCheck {
            name,
            max_rel_error: worst,
            seeds: opts.seeds,
            passed: worst < opts.tolerance,
        });
    }
    Ok(GradcheckReport {
        tolerance: opts.tolerance,
        components,
    })
}
