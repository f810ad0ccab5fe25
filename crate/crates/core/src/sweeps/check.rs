//! Invariant suites behind `nclim check`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::allpass::{allpass_factorize, partial_eval, Side};
use crate::error::Result;
use crate::limits::{corollary_reduce, mimo_limit, CorollaryCase};
use crate::lti::{FrequencyResponse, PlantModel, RationalFn, TransferMatrix};
use crate::network::{butter1, spectral_factor, ChannelSpec, NetworkConstraints, Quantizer};
use crate::oracle::{doubly_coprime, QuadratureGrid};

/// Tolerances of the suites; the defaults are the documented invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckConfig {
    pub unitarity: f64,
    pub reconstruction: f64,
    pub spectral_identity: f64,
    pub corollary: f64,
    pub bezout: f64,
    pub quadrature: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            unitarity: 1e-9,
            reconstruction: 1e-8,
            spectral_identity: 1e-10,
            corollary: 1e-10,
            bezout: 1e-8,
            quadrature: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Default)]
struct Suite {
    checks: usize,
    failures: Vec<String>,
}

impl Suite {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn within(&mut self, name: &str, err: f64, tol: f64) {
        self.expect(err <= tol, || format!("{name}: {err:.3e} exceeds {tol:.1e}"));
    }

    fn absorb<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{name}: {e}"));
                None
            }
        }
    }
}

fn run(name: &'static str, body: impl FnOnce(&mut Suite)) -> SuiteReport {
    let t0 = Instant::now();
    let mut s = Suite::default();
    body(&mut s);
    SuiteReport {
        name,
        passed: s.failures.is_empty(),
        checks: s.checks,
        failures: s.failures,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

fn tf(num: &[f64], den: &[f64]) -> RationalFn {
    RationalFn::from_coeffs(num, den).expect("fixture")
}

fn lag(a: f64) -> RationalFn {
    tf(&[1.0], &[a, 1.0])
}

fn plant(rows: Vec<Vec<RationalFn>>) -> PlantModel {
    PlantModel::from_tf(TransferMatrix::from_rows(rows).expect("fixture")).expect("fixture")
}

fn channel(sigma_n: f64, sigma_q: f64, lambda: f64, filter: RationalFn) -> ChannelSpec {
    let q = (sigma_q > 0.0).then_some(Quantizer::Sigma { sigma_q });
    ChannelSpec::new(sigma_n, q, lambda, filter).expect("fixture")
}

fn net(channels: Vec<ChannelSpec>, sigma_r: Vec<f64>) -> NetworkConstraints {
    NetworkConstraints::new(channels, sigma_r).expect("fixture")
}

fn axis_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64)).collect()
}

/// One scenario per special case, each satisfying its hypotheses.
pub fn corollary_fixtures() -> Vec<(CorollaryCase, PlantModel, NetworkConstraints)> {
    use CorollaryCase::*;
    let coupled = plant(vec![vec![lag(-1.0), lag(3.0).scale(0.5)], vec![lag(-1.0).scale(0.7), lag(2.0)]]);
    let shared = tf(&[4.0, -1.0], &[4.0, 3.0, 1.0]);
    let u = &lag(-1.0) - &lag(-2.0).scale(1.5);
    let (c, s) = (0.6, 0.8);
    vec![
        (
            Co1Parallel,
            plant(vec![vec![u.clone(), lag(1.0)], vec![u, lag(1.0).scale(2.0)]]),
            net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()); 2], vec![0.1, 0.1]),
        ),
        (
            Co1Orthogonal,
            plant(vec![vec![lag(-1.0).scale(c), lag(-2.0).scale(-s)], vec![lag(-1.0).scale(s), lag(-2.0).scale(c)]]),
            net(vec![channel(0.3, 0.2, 1.2, butter1(5.0).expect("fixture")); 2], vec![0.0, 0.0]),
        ),
        (
            Cor1A,
            coupled.clone(),
            net(
                vec![channel(0.5, 0.0, 1.5, butter1(4.0).expect("fixture")), channel(0.2, 0.0, 1.0, butter1(6.0).expect("fixture"))],
                vec![0.1, 0.2],
            ),
        ),
        (
            Cor1B,
            coupled.clone(),
            net(
                vec![channel(0.0, 0.3, 1.5, butter1(4.0).expect("fixture")), channel(0.0, 0.1, 1.0, butter1(6.0).expect("fixture"))],
                vec![0.1, 0.2],
            ),
        ),
        (
            Cor1C,
            coupled.clone(),
            net(vec![channel(0.5, 0.1, 2.0, RationalFn::one()), channel(0.2, 0.3, 1.0, RationalFn::one())], vec![0.1, 0.2]),
        ),
        (
            Cor1D,
            coupled.clone(),
            net(vec![channel(0.5, 0.0, 1.0, shared.clone()), channel(0.2, 0.0, 1.0, shared.clone())], vec![0.1, 0.2]),
        ),
        (
            Cor1E,
            coupled,
            net(vec![channel(0.0, 0.4, 1.0, shared.clone()), channel(0.0, 0.1, 1.0, shared)], vec![0.1, 0.2]),
        ),
        (
            Cor2A,
            plant(vec![vec![tf(&[-4.0, 1.0], &[2.0, 3.0, 1.0]), lag(3.0).scale(0.5)], vec![lag(1.0).scale(0.7), lag(2.0)]]),
            net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.1, 1.0, RationalFn::one())], vec![0.3, 0.2]),
        ),
        (
            Cor2B,
            plant(vec![vec![tf(&[-2.0, 1.0], &[3.0, 4.0, 1.0]), RationalFn::zero()], vec![RationalFn::zero(), lag(-1.0)]]),
            net(
                vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.1, 1.5, butter1(4.0).expect("fixture"))],
                vec![0.3, 0.2],
            ),
        ),
        (
            Cor2C,
            plant(vec![vec![lag(-1.0), RationalFn::zero()], vec![lag(-1.0).scale(0.7), lag(-2.0)]]),
            net(
                vec![channel(0.5, 0.3, 1.5, butter1(4.0).expect("fixture")), channel(0.2, 0.1, 1.0, butter1(6.0).expect("fixture"))],
                vec![0.3, 0.2],
            ),
        ),
        (
            Cor2D,
            plant(vec![vec![tf(&[-2.0, 1.0], &[-3.0, 2.0, 1.0]), RationalFn::zero()], vec![RationalFn::zero(), lag(1.0)]]),
            net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.0, 1.0, RationalFn::one())], vec![0.3, 0.2]),
        ),
    ]
}

fn factorization_suite(cfg: &CheckConfig) -> SuiteReport {
    run("factorization", |s| {
        let rot = |t: f64| TransferMatrix::constant(&DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]));
        let d = TransferMatrix::diag(vec![tf(&[-1.0, 1.0], &[2.0, 1.0]), tf(&[-3.0, 1.0], &[0.5, 1.0])]);
        let g = rot(0.4).product(&d).and_then(|x| x.product(&rot(-1.1))).expect("fixture");
        let zeros = [Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)];
        for side in [Side::Left, Side::Right] {
            let Some(f) = s.absorb("allpass_factorize", allpass_factorize(&g, &zeros, side)) else { continue };
            let x = DVector::from_vec(vec![Complex64::new(0.3, -0.2), Complex64::new(-0.7, 0.5)]);
            for w in axis_grid(61) {
                let jw = Complex64::new(0.0, w);
                for b in &f.factors {
                    let err = ((b.eval(jw) * &x).norm() - x.norm()).abs() / x.norm();
                    s.within(&format!("unitarity {side:?} at w = {w:.3e}"), err, cfg.unitarity);
                }
                let (Some(bv), Some(mp), Some(gv)) = (
                    s.absorb("partial_eval", partial_eval(&f, jw, &[], false)),
                    s.absorb("mp_part", f.mp_part.eval(jw)),
                    s.absorb("plant", g.eval(jw)),
                ) else {
                    continue;
                };
                let rec = if side == Side::Left { bv * mp } else { mp * bv };
                s.within(&format!("reconstruction {side:?} at w = {w:.3e}"), (rec - &gv).norm() / gv.norm().max(1e-3), cfg.reconstruction);
            }
        }
    })
}

fn spectral_suite(cfg: &CheckConfig) -> SuiteReport {
    run("spectral_factor", |s| {
        let channels = [
            channel(1.0, 0.0, 1.0, RationalFn::one()),
            channel(0.1, 0.05, 2.0, butter1(2.0).expect("fixture")),
            channel(0.0, 0.3, 1.5, tf(&[4.0, -1.0], &[4.0, 3.0, 1.0])),
            channel(0.2, 0.4, 1.0, tf(&[0.5, 2.0, 1.0], &[1.0, 1.5, 1.0])),
        ];
        for (i, ch) in channels.iter().enumerate() {
            let Some(h) = s.absorb("spectral_factor", spectral_factor(ch)) else { continue };
            for w in axis_grid(50) {
                let jw = Complex64::new(0.0, w);
                let (Some(fv), Some(hv)) = (s.absorb("filter", ch.filter.eval(jw)), s.absorb("h", h.eval(jw))) else {
                    continue;
                };
                let target = (ch.sigma_n.powi(2) + fv.norm_sqr() * ch.sigma_q().powi(2)) / ch.lambda.powi(2);
                s.within(&format!("channel {i} axis identity at w = {w:.3e}"), (hv.norm_sqr() - target).abs() / target, cfg.spectral_identity);
            }
            let roots = h.poles().and_then(|p| Ok(p.into_iter().chain(h.zeros()?).collect::<Vec<_>>()));
            if let Some(roots) = s.absorb("roots", roots) {
                for r in roots {
                    s.expect(r.re < 0.0, || format!("channel {i}: root {r} of h is not strictly in the LHP"));
                }
            }
        }
    })
}

fn corollary_suite(cfg: &CheckConfig) -> SuiteReport {
    run("corollary_consistency", |s| {
        for (case, pm, nc) in corollary_fixtures() {
            let (Some(general), Some(special)) =
                (s.absorb(case.name(), mimo_limit(&pm, &nc)), s.absorb(case.name(), corollary_reduce(case, &pm, &nc)))
            else {
                continue;
            };
            let scale = general.total.abs().max(1e-12);
            s.within(case.name(), (general.total - special.total).abs() / scale, cfg.corollary);
        }
    })
}

fn oracle_suite(cfg: &CheckConfig) -> SuiteReport {
    run("oracle_calibration", |s| {
        let grid = QuadratureGrid::standard();
        let r2 = std::f64::consts::SQRT_2;
        let norms: [(&str, Box<dyn Fn(f64) -> f64>, f64); 3] = [
            ("1/(s+1)", Box::new(|w: f64| 1.0 / (1.0 + w * w)), 0.5),
            ("1/(s+1)^2", Box::new(|w: f64| 1.0 / (1.0 + w * w).powi(2)), 0.25),
            ("(s+sqrt2)/(s+1)^2", Box::new(move |w: f64| (w * w + r2 * r2) / (1.0 + w * w).powi(2)), 0.75),
        ];
        for (name, g, exact) in norms {
            let got = grid.integrate(g).value;
            s.within(&format!("quadrature {name}"), (got - exact).abs() / exact, cfg.quadrature);
        }
        let plants = [
            plant(vec![vec![lag(-1.0)]]),
            plant(vec![vec![tf(&[-2.0, 1.0], &[-3.0, -2.0, 1.0])]]),
            plant(vec![vec![lag(-1.0), lag(3.0).scale(0.5)], vec![lag(-1.0).scale(0.7), tf(&[-4.0, 1.0], &[6.0, 5.0, 1.0])]]),
        ];
        for (i, pm) in plants.iter().enumerate() {
            let m = pm.outputs();
            let f = TransferMatrix::diag(vec![butter1(3.0).expect("fixture"); m]);
            let Some(cf) = s.absorb("doubly_coprime", doubly_coprime(pm, &f)) else { continue };
            for w in axis_grid(20) {
                if let Some(r) = s.absorb("bezout", cf.bezout_residual(Complex64::new(0.0, w))) {
                    s.within(&format!("plant {i} Bezout at w = {w:.3e}"), r, cfg.bezout);
                }
            }
        }
    })
}

pub fn self_check_with(cfg: &CheckConfig) -> CheckReport {
    let suites = vec![factorization_suite(cfg), spectral_suite(cfg), corollary_suite(cfg), oracle_suite(cfg)];
    CheckReport { passed: suites.iter().all(|s| s.passed), suites }
}

pub fn self_check() -> CheckReport {
    self_check_with(&CheckConfig::default())
}
