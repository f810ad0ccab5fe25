//! Figure presets for the plant family `G = (s - k) / ((s + 1)(s - p))`.
//!
//! Captions leave out the quantizer range, the reference level in some figures and the
//! sweep endpoints; those are fixed here as conventions: `M = 1`, `sigma_r = 0.1`,
//! `sigma_n = 0.1` where missing.

use super::scenario::{BitsQuantizer, ChannelConfig, FilterConfig, Point, PlantConfig, QuantizerConfig, ReferenceConfig, ScenarioConfig};
use super::sweep::{Scale, SweepSpec, SweepValues};
use crate::error::{Error, Result};

pub const PRESETS: [&str; 7] = ["fig5", "fig6", "fig7", "fig8", "fig10", "fig11", "nmp_bandwidth"];

/// Caption parameters of one figure.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    pub k: f64,
    pub p: f64,
    pub cutoff: f64,
    pub sigma_n: f64,
    pub bits: u32,
    pub lambda: f64,
    pub sigma_r: f64,
}

pub fn family(params: &FamilyParams) -> ScenarioConfig {
    family_with_filter(params, FilterConfig::Butter1 { cutoff_rad_s: params.cutoff })
}

fn family_with_filter(params: &FamilyParams, filter: FilterConfig) -> ScenarioConfig {
    ScenarioConfig {
        plant: PlantConfig::Pz {
            zeros: vec![Point { re: params.k, im: 0.0 }],
            poles: vec![Point { re: -1.0, im: 0.0 }, Point { re: params.p, im: 0.0 }],
            gain: 1.0,
        },
        channels: vec![ChannelConfig {
            sigma_n: params.sigma_n,
            lambda: params.lambda,
            quantizer: Some(QuantizerConfig::Bits(BitsQuantizer { bits: params.bits, range: 1.0 })),
            filter: Some(filter),
        }],
        reference: Some(ReferenceConfig { sigma_r: vec![params.sigma_r] }),
        oracle: Default::default(),
    }
}

fn linear(from: f64, to: f64, steps: usize) -> SweepValues {
    SweepValues::Range { from, to, steps, scale: Scale::Linear }
}

fn log(from: f64, to: f64, steps: usize) -> SweepValues {
    SweepValues::Range { from, to, steps, scale: Scale::Log }
}

fn sweep(parameter: &str, values: SweepValues) -> SweepSpec {
    SweepSpec { parameter: parameter.into(), values }
}

/// Scenario and sweep for a named preset.
pub fn preset(name: &str) -> Result<(ScenarioConfig, SweepSpec)> {
    let base = FamilyParams { k: 2.0, p: 3.0, cutoff: 2.0, sigma_n: 0.1, bits: 9, lambda: 2.0, sigma_r: 0.1 };
    // Linear sweeps over [0.5, 6] with 56 points land exactly on 2.0, where pole and zero collide.
    let out = match name {
        "fig5" => (family(&base), sweep("plant.poles[1].re", linear(0.5, 6.0, 56))),
        "fig6" => (
            family(&FamilyParams { p: 2.0, bits: 8, ..base }),
            sweep("plant.zeros[0].re", linear(0.5, 6.0, 56)),
        ),
        "fig7" => (
            family(&FamilyParams { k: 3.0, p: 2.0, bits: 8, ..base }),
            sweep("channels[0].filter.cutoff_rad_s", log(0.1, 100.0, 31)),
        ),
        "fig8" => (
            family(&base),
            sweep("channels[0].quantizer.bits", SweepValues::List((1..=15).map(f64::from).collect())),
        ),
        "fig10" => (family(&FamilyParams { lambda: 1.0, ..base }), sweep("channels[0].sigma_n", log(1e-3, 1.0, 31))),
        // The caption fixes b = 9, so the quantization noise is varied through the range M.
        "fig11" => (
            family(&FamilyParams { lambda: 1.0, ..base }),
            sweep("channels[0].quantizer.range", log(0.1, 100.0, 31)),
        ),
        "nmp_bandwidth" => {
            let (wc, a) = (2.0, 4.0);
            let filter = FilterConfig::Tf { num: vec![wc * a, -wc], den: vec![wc * a, wc + a, 1.0] };
            (family_with_filter(&base, filter), sweep("plant.poles[1].re", linear(0.5, 6.0, 56)))
        }
        other => {
            return Err(Error::Scenario(format!("unknown preset `{other}`; available: {}", PRESETS.join(", "))));
        }
    };
    Ok(out)
}
