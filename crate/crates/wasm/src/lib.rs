//! Browser-facing operations for the demo page. Every operation takes a
//! JSON parameter string and returns a JSON string of the form
//! `{"ok": …}` or `{"error": "…"}`, so the JavaScript side needs no
//! bespoke error plumbing. The logic lives in plain functions that are
//! compiled and tested natively; `wasm-bindgen` wrappers are added only on
//! the wasm32 target.

use excitonet::ensemble::{run_cell, CellParams, SweepPlan};
use excitonet::pathways::path_metrics;
use excitonet::tc2::{ete_laplace, Method, PropagateOptions, SinkSpec};
use excitonet::{
    build_hamiltonian, propagate_with_options, sample_configuration, spectral_descriptors,
    z_axis_proximity, BathSpec, CouplingModel,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Demo limits keep any single click comfortably interactive.
const MAX_DEMO_SITES: usize = 12;
const MAX_DEMO_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DemoParams {
    sites: usize,
    diameter: f64,
    lambda: f64,
    gamma: f64,
    temp: f64,
    r_trap: f64,
    r_loss: f64,
    energy_window: f64,
    coupling_const: f64,
    seed: u64,
    samples: usize,
    t_max: f64,
    bins: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams {
            sites: 7,
            diameter: 30.0,
            lambda: 35.0,
            gamma: 50.0,
            temp: 298.0,
            r_trap: 1.0,
            r_loss: 1e-3,
            energy_window: 500.0,
            coupling_const: 134_000.0,
            seed: 1,
            samples: 100,
            t_max: 20.0,
            bins: 10,
        }
    }
}

impl DemoParams {
    fn parse(params: &str) -> Result<DemoParams, String> {
        let p: DemoParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
        if p.sites < 2 || p.sites > MAX_DEMO_SITES {
            return Err(format!("sites must be in 2..={MAX_DEMO_SITES}"));
        }
        if p.samples == 0 || p.samples > MAX_DEMO_SAMPLES {
            return Err(format!("samples must be in 1..={MAX_DEMO_SAMPLES}"));
        }
        Ok(p)
    }

    fn plan(&self) -> SweepPlan {
        SweepPlan {
            diameters: vec![self.diameter],
            site_counts: vec![self.sites],
            lambdas: vec![self.lambda],
            samples_per_cell: self.samples,
            master_seed: self.seed,
            gamma: self.gamma,
            temperature: self.temp,
            r_trap: self.r_trap,
            r_loss: self.r_loss,
            energy_window: self.energy_window,
            coupling_const: self.coupling_const,
            path_threshold: 1000.0,
            solver: Method::Laplace,
            t_max: 20_000.0,
        }
    }
}

fn wrap(result: Result<serde_json::Value, String>) -> String {
    let body = match result {
        Ok(value) => json!({ "ok": value }),
        Err(message) => json!({ "error": message }),
    };
    body.to_string()
}

#[derive(Serialize)]
struct SampleOut {
    seed: u64,
    diameter: f64,
    eta: f64,
    eta_loss: f64,
    mean_gap: f64,
    gap_std: f64,
    ground_trap_overlap: f64,
    z_proximity: Option<f64>,
    max_path_strength: f64,
    dominant_path_count: usize,
    positions: Vec<[f64; 3]>,
    initial: usize,
    trap: usize,
    /// Upper-triangular couplings as (site a, site b, J in cm⁻¹).
    couplings: Vec<(usize, usize, f64)>,
}

fn sample_impl(params: &str) -> Result<serde_json::Value, String> {
    let p = DemoParams::parse(params)?;
    let config = sample_configuration(p.sites, p.diameter, p.energy_window, p.seed)
        .map_err(|e| e.to_string())?;
    let model = CouplingModel::new(p.coupling_const).map_err(|e| e.to_string())?;
    let h = build_hamiltonian(&config, &model).map_err(|e| e.to_string())?;
    let bath = BathSpec::new(p.lambda, p.gamma, p.temp).map_err(|e| e.to_string())?;
    let sinks =
        SinkSpec::new(p.r_loss, p.r_trap, config.trap_index).map_err(|e| e.to_string())?;
    let result =
        ete_laplace(&h, &bath, &sinks, config.initial_index).map_err(|e| e.to_string())?;
    let descriptors =
        spectral_descriptors(&h, config.trap_index).map_err(|e| e.to_string())?;
    let metrics = path_metrics(&h, config.initial_index, config.trap_index, 1000.0)
        .map_err(|e| e.to_string())?;
    let z = if p.sites >= 3 {
        Some(z_axis_proximity(&config).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let positions: Vec<[f64; 3]> = config
        .chromophores
        .iter()
        .map(|c| [c.position.x, c.position.y, c.position.z])
        .collect();
    let hm = h.matrix();
    let mut couplings = Vec::new();
    for a in 0..p.sites {
        for b in a + 1..p.sites {
            couplings.push((a, b, hm[(a, b)]));
        }
    }
    let out = SampleOut {
        seed: p.seed,
        diameter: p.diameter,
        eta: result.eta,
        eta_loss: result.eta_loss,
        mean_gap: descriptors.mean_gap,
        gap_std: descriptors.gap_std,
        ground_trap_overlap: descriptors.ground_trap_overlap,
        z_proximity: z,
        max_path_strength: metrics.max_strength,
        dominant_path_count: metrics.count_over_threshold,
        positions,
        initial: config.initial_index,
        trap: config.trap_index,
        couplings,
    };
    serde_json::to_value(&out).map_err(|e| e.to_string())
}

fn trajectory_impl(params: &str) -> Result<serde_json::Value, String> {
    let p = DemoParams::parse(params)?;
    if !(p.t_max > 0.0 && p.t_max <= 500.0) {
        return Err("t_max must be in (0, 500] ps for the demo".into());
    }
    let config = sample_configuration(p.sites, p.diameter, p.energy_window, p.seed)
        .map_err(|e| e.to_string())?;
    let model = CouplingModel::new(p.coupling_const).map_err(|e| e.to_string())?;
    let h = build_hamiltonian(&config, &model).map_err(|e| e.to_string())?;
    let bath = BathSpec::new(p.lambda, p.gamma, p.temp).map_err(|e| e.to_string())?;
    let sinks =
        SinkSpec::new(p.r_loss, p.r_trap, config.trap_index).map_err(|e| e.to_string())?;
    let mut options = PropagateOptions::exponential(p.t_max, p.t_max / 400.0);
    options.sample_dt = Some(p.t_max / 400.0);
    let (traj, result) =
        propagate_with_options(&h, &bath, &sinks, config.initial_index, &options)
            .map_err(|e| e.to_string())?;
    Ok(json!({
        "times": traj.times,
        "populations": traj.populations,
        "trace": traj.trace,
        "eta_curve": traj.eta_curve,
        "eta": result.eta,
        "eta_loss": result.eta_loss,
        "initial": config.initial_index,
        "trap": config.trap_index,
    }))
}

fn histogram_impl(params: &str) -> Result<serde_json::Value, String> {
    let p = DemoParams::parse(params)?;
    let plan = p.plan();
    plan.validate().map_err(|e| e.to_string())?;
    let cell = CellParams {
        n: p.sites,
        diameter: p.diameter,
        lambda: p.lambda,
    };
    let mut etas = Vec::with_capacity(p.samples);
    for i in 0..p.samples as u64 {
        let record = run_cell(&plan, cell, i).map_err(|e| e.to_string())?;
        etas.push(record.eta);
    }
    let bins = p.bins.clamp(1, 100);
    let (counts, edges) = excitonet::ensemble::histogram(&etas, 0.0, 1.0, bins);
    Ok(json!({
        "counts": counts,
        "edges": edges,
        "mean": excitonet::ensemble::mean(&etas),
        "std": excitonet::ensemble::std_dev(&etas),
        "samples": etas.len(),
    }))
}

/// One random configuration: geometry, couplings, efficiency, descriptors.
pub fn run_sample_json(params: &str) -> String {
    wrap(sample_impl(params))
}

/// Site populations and the η accumulation curve over a short horizon.
pub fn run_trajectory_json(params: &str) -> String {
    wrap(trajectory_impl(params))
}

/// ETE histogram over an ensemble of random configurations.
pub fn run_histogram_json(params: &str) -> String {
    wrap(histogram_impl(params))
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn run_sample(params: &str) -> String {
        crate::run_sample_json(params)
    }

    #[wasm_bindgen]
    pub fn run_trajectory(params: &str) -> String {
        crate::run_trajectory_json(params)
    }

    #[wasm_bindgen]
    pub fn run_histogram(params: &str) -> String {
        crate::run_histogram_json(params)
    }
}
