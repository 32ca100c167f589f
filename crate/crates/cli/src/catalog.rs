//! Named maps, roofs and flow observables.

use semiflow_core::lab::FlowObservable;
use semiflow_core::phase_space::map::{doubling, markov_2d_product, perturbed_doubling, tripling};
use semiflow_core::phase_space::{AssumptionReport, MarkovMap, Roof, Semiflow};

use crate::config::{CatalogCall, ConfigError, ExperimentConfig};
use crate::run::RunError;

/// Largest grid per axis accepted for maps on the square.
pub const MAX_GRID_2D: usize = 513;

/// A verified semiflow in dimension one or two.
pub enum System {
    One(Semiflow<1>, AssumptionReport),
    Two(Semiflow<2>, AssumptionReport),
}

enum AnyMap {
    One(MarkovMap<1>),
    Two(MarkovMap<2>),
}

fn map_from(call: &CatalogCall) -> Result<AnyMap, RunError> {
    let eps = |default: f64| call.params.first().copied().unwrap_or(default);
    Ok(match call.name.as_str() {
        "doubling" => {
            call.expect_params("map", &[0])?;
            AnyMap::One(doubling())
        }
        "tripling" => {
            call.expect_params("map", &[0])?;
            AnyMap::One(tripling())
        }
        "perturbed_doubling" => {
            call.expect_params("map", &[0, 1])?;
            AnyMap::One(perturbed_doubling(eps(0.05))?)
        }
        "markov_2d_product" => {
            call.expect_params("map", &[0, 1])?;
            AnyMap::Two(markov_2d_product(eps(0.0))?)
        }
        other => {
            return Err(ConfigError::Invalid {
                key: "map",
                message: format!("unknown map `{other}`"),
            }
            .into())
        }
    })
}

fn roof_from<const D: usize>(call: &CatalogCall, alpha: f64) -> Result<Roof<D>, ConfigError> {
    let p = &call.params;
    let roof = match call.name.as_str() {
        "constant" => {
            call.expect_params("roof", &[1])?;
            Roof::constant(p[0])
        }
        "affine" => {
            call.expect_params("roof", &[2])?;
            Roof::affine(p[0], p[1])
        }
        "trig" => {
            call.expect_params("roof", &[3])?;
            Roof::trig(p[0], p[1], p[2])
        }
        "poly" => {
            if p.is_empty() {
                return Err(ConfigError::Invalid {
                    key: "roof",
                    message: "`poly` needs at least one coefficient".into(),
                });
            }
            Roof::poly(p.clone())
        }
        other => {
            return Err(ConfigError::Invalid {
                key: "roof",
                message: format!("unknown roof `{other}`"),
            })
        }
    };
    Ok(roof.with_alpha(alpha))
}

pub fn build_system(cfg: &ExperimentConfig) -> Result<System, RunError> {
    let map = map_from(&CatalogCall::parse("map", &cfg.map)?)?;
    let roof = CatalogCall::parse("roof", &cfg.roof)?;
    Ok(match map {
        AnyMap::One(m) => {
            let (sys, report) = Semiflow::new(m, roof_from(&roof, cfg.alpha)?, cfg.verify_grid)?;
            System::One(sys, report)
        }
        AnyMap::Two(m) => {
            for (key, v) in [("field_res", cfg.field_res), ("verify_grid", cfg.verify_grid)] {
                if v > MAX_GRID_2D {
                    return Err(ConfigError::Invalid {
                        key,
                        message: format!("{v} nodes per axis is too many for a two-dimensional map (at most {MAX_GRID_2D})"),
                    }
                    .into());
                }
            }
            let (sys, report) = Semiflow::new(m, roof_from(&roof, cfg.alpha)?, cfg.verify_grid)?;
            System::Two(sys, report)
        }
    })
}

pub fn observable_from(key: &'static str, text: &str) -> Result<FlowObservable, ConfigError> {
    let call = CatalogCall::parse(key, text)?;
    let k = || -> Result<f64, ConfigError> {
        call.expect_params(key, &[1])?;
        Ok(call.params[0])
    };
    Ok(match call.name.as_str() {
        "constant" => FlowObservable::Constant { value: k()? },
        "height" => {
            call.expect_params(key, &[0])?;
            FlowObservable::Height
        }
        "fiber_wave" => FlowObservable::FiberWave { k: k()? },
        "fiber_phase" => FlowObservable::FiberPhase { k: k()? },
        "trig_bump" => FlowObservable::TrigBump { k: k()? },
        "base_cos" => FlowObservable::BaseCos { k: k()? },
        other => {
            return Err(ConfigError::Invalid {
                key,
                message: format!("unknown observable `{other}`"),
            })
        }
    })
}
