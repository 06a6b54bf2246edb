#![allow(dead_code)]

use fogsplit::experiments::Scenario;
use fogsplit::model::{evaluate_powers, PowerSplit};
use fogsplit::{Allocation, SystemInstance};
use proptest::prelude::*;
use rand::Rng;

/// Instance near the default scenario with both link gains, the workload and
/// the IoT SNR perturbed.
pub fn instance(gain_if: f64, gain_fc: f64, bits: f64, snr_if_db: f64) -> SystemInstance {
    let scenario = Scenario {
        gain_fc,
        ..Scenario::default()
    };
    scenario.instance(bits, snr_if_db, gain_if).unwrap()
}

pub fn random_instance<R: Rng>(rng: &mut R) -> SystemInstance {
    instance(
        rng.random_range(0.1..=4.0),
        rng.random_range(0.1..=4.0),
        rng.random_range(1e5..=2e6),
        rng.random_range(2.0..=10.0),
    )
}

pub fn arb_instance() -> impl Strategy<Value = SystemInstance> {
    (0.1..4.0f64, 0.1..4.0f64, 1e5..2e6f64, 2.0..10.0f64)
        .prop_map(|(gi, gf, b, snr)| instance(gi, gf, b, snr))
}

/// Allocation with strictly positive transmit fractions below the supremum
/// and `0 <= k <= m <= B` drawn from unit fractions.
pub fn allocation(inst: &SystemInstance, fm: f64, fk: f64, fa: f64, fg: f64) -> Allocation {
    let m = fm * inst.workload_bits;
    Allocation {
        m,
        k: fk * m,
        alpha: (0.01 + 0.98 * fa) * inst.alpha_max(),
        gamma: (0.01 + 0.98 * fg) * inst.gamma_max(),
    }
}

pub fn arb_point() -> impl Strategy<Value = (SystemInstance, Allocation)> {
    (arb_instance(), 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
        .prop_map(|(inst, fm, fk, fa, fg)| (inst, allocation(&inst, fm, fk, fa, fg)))
}

/// Worst-case latency increase from snapping an optimal `(m, k)` down to the
/// `B / n` lattice: every layer latency is affine with slopes bounded by the
/// unit costs.
pub fn lattice_gap(inst: &SystemInstance, alpha: f64, gamma: f64, n: usize) -> f64 {
    let c = inst.unit_costs(alpha, gamma).unwrap();
    let r = c.if_comm.finite().unwrap();
    let cc = c.cloud_path().finite().unwrap();
    let slope = c.iot_proc.max(r + 2.0 * c.fog_proc).max(r + cc);
    slope * inst.workload_bits / n as f64
}

/// Layer latencies `(T_I, T_F, T_C)` at an explicit power assignment.
pub fn layer_latencies(inst: &SystemInstance, m: f64, k: f64, p: &PowerSplit) -> [f64; 3] {
    let bd = *evaluate_powers(inst, m, k, p).unwrap().breakdown().unwrap();
    [bd.t_iot, bd.t_fog, bd.t_cloud]
}

/// Lowers each of the five powers of `alloc` by `rel_step` of its value in
/// turn and reports every layer latency that went down.
pub fn monotonicity_violations(inst: &SystemInstance, alloc: &Allocation, rel_step: f64) -> Vec<String> {
    let base = alloc.powers(inst);
    let before = layer_latencies(inst, alloc.m, alloc.k, &base);
    let mut out = Vec::new();
    for component in 0..5 {
        let mut p = base;
        let field = match component {
            0 => &mut p.iot_comm,
            1 => &mut p.iot_proc,
            2 => &mut p.fog_comm,
            3 => &mut p.fog_proc,
            _ => &mut p.cloud_proc,
        };
        *field -= rel_step * *field;
        let after = layer_latencies(inst, alloc.m, alloc.k, &p);
        for layer in 0..3 {
            if after[layer] < before[layer] {
                out.push(format!(
                    "power {component} lowered, layer {layer}: {} -> {}",
                    before[layer], after[layer]
                ));
            }
        }
    }
    out
}
