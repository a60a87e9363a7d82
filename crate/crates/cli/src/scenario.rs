//! Builds the initial data for each backend and integrates it.

use std::sync::Arc;

use clebsch::clebsch::systems::MechanicalHamiltonian;
use clebsch::clebsch::{
    integrate_clebsch_hamilton_record, momentum_map, ClebschHamiltonian, ClebschState, LinearRepresentation, XiSchedule,
};
use clebsch::extended::{dirac_constraints, integrate_extended, ExtendedState};
use clebsch::gr::{fit_kasner_exponents, gr_momentum_map, integrate_adm, kasner_metric, kasner_state, Lapse};
use clebsch::integrators::StepperSpec;
use clebsch::lie::{Group, LieAlgebraElement};
use clebsch::ymh::checkpoint::{read_checkpoint, Checkpoint};
use clebsch::ymh::{
    integrate_ymh, project_gauss, smooth_random_state, LatticeGeometry, LatticeState, YmhParams,
};
use nalgebra::DVector;
use serde_json::{json, Map, Value};

use crate::config::{Backend, FiniteConfig, Representation, ScenarioConfig};
use crate::error::CliError;

/// Sampled diagnostics of one run.
#[derive(Debug, Clone)]
pub struct Series {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    /// Backend-specific summary entries.
    pub extras: Map<String, Value>,
    pub checkpoint: Option<Checkpoint>,
}

impl Series {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `max_t |c(t) − c(0)|` for a column.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        let c0 = *c.first()?;
        Some(c.iter().fold(0.0f64, |m, v| m.max((v - c0).abs())))
    }
}

/// CSV columns after `t`; a function of backend and group only.
pub fn columns(backend: Backend, group: Option<Group>) -> Vec<String> {
    let mut c: Vec<String> = match backend {
        Backend::Finite => vec!["H".into(), "C_norm".into()],
        Backend::Extended => vec!["H".into(), "C_norm".into(), "nu_norm".into()],
        Backend::Ymh => vec!["H".into(), "gauss_l2".into(), "gauss_linf".into()],
        Backend::Gr => clebsch::gr::ADM_COLUMNS.iter().map(|s| s.to_string()).collect(),
    };
    let k = match backend {
        Backend::Gr => 3,
        _ => group.expect("validated").dim(),
    };
    c.extend((1..=k).map(|a| format!("J_{a}")));
    c
}

/// The quantity whose drift a `sweep` measures.
pub fn constraint_column(backend: Backend) -> &'static str {
    match backend {
        Backend::Finite | Backend::Extended => "C_norm",
        Backend::Ymh => "gauss_linf",
        Backend::Gr => "ham_constraint",
    }
}

fn space(f: &FiniteConfig) -> LinearRepresentation {
    match f.representation {
        Representation::Vectors => LinearRepresentation::so3_vectors(f.copies),
        Representation::Planes => LinearRepresentation::u1_planes(f.copies, f.charge),
        Representation::Fundamental => LinearRepresentation::su2_fundamental(),
        Representation::Adjoint => LinearRepresentation::su2_adjoint(f.copies),
    }
}

fn algebra(group: Group, name: &str, v: &[f64]) -> Result<LieAlgebraElement, CliError> {
    LieAlgebraElement::new(group, v).map_err(|e| CliError::Validation(format!("{name}: {e}")))
}

fn schedule(group: Group, f: &FiniteConfig) -> Result<XiSchedule, CliError> {
    let offset = algebra(group, "finite.xi.offset", &f.xi.offset)?;
    Ok(match &f.xi.amplitude {
        None => XiSchedule::Constant(offset),
        Some(a) => XiSchedule::Sinusoidal {
            offset,
            amplitude: algebra(group, "finite.xi.amplitude", a)?,
            omega: f.xi.omega,
        },
    })
}

/// Everything a run needs before integration; building it is the `check`
/// command.
pub enum Prepared {
    Finite {
        space: LinearRepresentation,
        hamiltonian: MechanicalHamiltonian,
        schedule: XiSchedule,
        initial: ClebschState,
    },
    Ymh {
        initial: LatticeState,
        params: YmhParams,
        projection: Option<Value>,
    },
    Gr {
        initial: clebsch::gr::AdmState,
        lapse: Lapse,
        exponents: [f64; 3],
    },
}

pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared, CliError> {
    match cfg.backend {
        Backend::Finite | Backend::Extended => {
            let f = cfg.finite.as_ref().expect("validated");
            let group = cfg.group.expect("validated");
            let schedule = schedule(group, f)?;
            let initial = ClebschState::new(
                DVector::from_column_slice(&f.q),
                DVector::from_column_slice(&f.p),
                schedule.at(0.0),
                0.0,
            );
            Ok(Prepared::Finite {
                space: space(f),
                hamiltonian: MechanicalHamiltonian::new(f.mass, f.potential.clone()),
                schedule,
                initial,
            })
        }
        Backend::Ymh => {
            let y = cfg.ymh.as_ref().expect("validated");
            let group = cfg.group.expect("validated");
            let geom = LatticeGeometry::new(y.n, y.a)?;
            let params = YmhParams { mu: y.mu, v: y.v };
            let (mut initial, projection) = match &y.checkpoint_in {
                Some(path) => {
                    let cp = read_checkpoint(path)
                        .map_err(|e| CliError::Validation(format!("ymh.checkpoint_in: {e}")))?;
                    if cp.state.group != group {
                        return Err(CliError::Validation(format!(
                            "ymh.checkpoint_in: checkpoint group {} differs from group {group}",
                            cp.state.group
                        )));
                    }
                    if cp.state.geom != geom {
                        return Err(CliError::Validation(format!(
                            "ymh.checkpoint_in: checkpoint lattice n={}, a={} differs from ymh.n={}, ymh.a={}",
                            cp.state.geom.n, cp.state.geom.a, y.n, y.a
                        )));
                    }
                    (cp.state, None)
                }
                None => {
                    let s = smooth_random_state(geom, group, &y.init, y.seed)?;
                    if y.project {
                        let rep = project_gauss(&s, 1e-12)?;
                        let info = json!({
                            "newton_iterations": rep.newton_iterations,
                            "cg_iterations": rep.cg_iterations,
                            "initial_gauss_linf": rep.initial_linf,
                            "final_gauss_linf": rep.final_linf,
                        });
                        (rep.state, Some(info))
                    } else {
                        (s, None)
                    }
                }
            };
            if let Some(a0) = &y.a0 {
                for x in 0..geom.sites() {
                    initial.set_a0(x, a0);
                }
            }
            Ok(Prepared::Ymh {
                initial,
                params,
                projection,
            })
        }
        Backend::Gr => {
            let gr = cfg.gr.as_ref().expect("validated");
            let p = gr.exponents();
            let l = gr.lapse.clone();
            let lapse = if l.amplitude == 0.0 {
                Lapse::Constant(l.offset)
            } else {
                Lapse::Function(Arc::new(move |t| l.offset + l.amplitude * (l.omega * t).sin()))
            };
            let mut initial = kasner_state(p, gr.t0);
            initial.lapse = lapse.at(gr.t0);
            initial.check()?;
            Ok(Prepared::Gr {
                initial,
                lapse,
                exponents: p,
            })
        }
    }
}

/// Runs the scenario with the given stepper (the config's, or a sweep
/// value).
pub fn run(cfg: &ScenarioConfig, spec: &StepperSpec) -> Result<Series, CliError> {
    let prepared = prepare(cfg)?;
    let cadence = cfg.output.cadence;
    let columns = columns(cfg.backend, cfg.group);
    let mut extras = Map::new();
    let mut checkpoint = None;
    let (times, rows) = match prepared {
        Prepared::Finite {
            space,
            hamiltonian,
            schedule,
            initial,
        } => {
            if cfg.backend == Backend::Finite {
                let (rec, _) =
                    integrate_clebsch_hamilton_record(&space, &hamiltonian, &initial, &schedule, cfg.horizon, spec, cadence)?;
                (rec.times, rec.diagnostics)
            } else {
                let ext = ExtendedState::from_clebsch(&initial);
                let states = integrate_extended(&space, &hamiltonian, &ext, &schedule, cfg.horizon, spec, cadence)?;
                let mut rows = Vec::with_capacity(states.len());
                for s in &states {
                    let c = dirac_constraints(&space, &hamiltonian, s)?;
                    let j = momentum_map(&space, &s.q, &s.p)?;
                    let mut row = vec![hamiltonian.value(&s.q, &s.p, &s.xi)?, c.secondary.norm(), c.primary.norm()];
                    row.extend_from_slice(j.coords());
                    rows.push(row);
                }
                (states.iter().map(|s| s.t).collect(), rows)
            }
        }
        Prepared::Ymh {
            initial,
            params,
            projection,
        } => {
            if let Some(p) = projection {
                extras.insert("projection".into(), p);
            }
            let rec = integrate_ymh(&initial, &params, cfg.horizon, spec, cadence, false)?;
            if cfg.output.checkpoint {
                checkpoint = Some(Checkpoint {
                    state: rec.final_state.clone(),
                    params,
                    dt: spec.dt,
                });
            }
            (rec.times, rec.diagnostics)
        }
        Prepared::Gr {
            initial,
            lapse,
            exponents,
        } => {
            let traj = integrate_adm(&initial, &lapse, cfg.horizon, spec, cadence)?;
            let rows = traj
                .record
                .diagnostics
                .iter()
                .zip(&traj.states)
                .map(|(row, s)| {
                    let mut r = row.clone();
                    r.extend(gr_momentum_map(s).iter());
                    r
                })
                .collect();
            extras.insert("kasner_exponents".into(), json!(exponents));
            if traj.states.len() >= 2 {
                let fit = fit_kasner_exponents(&traj.states)?;
                let s1: f64 = fit.iter().sum();
                let s2: f64 = fit.iter().map(|p| p * p).sum();
                extras.insert("fitted_exponents".into(), json!(fit));
                extras.insert("fitted_sum".into(), json!(s1));
                extras.insert("fitted_sum_of_squares".into(), json!(s2));
                if let Some(last) = traj.states.last() {
                    let exact = kasner_metric(exponents, last.t);
                    let err = (0..3)
                        .map(|i| ((last.g[(i, i)] - exact[(i, i)]) / exact[(i, i)]).abs())
                        .fold(0.0f64, f64::max);
                    if matches!(lapse, Lapse::Constant(l) if l == 1.0) {
                        extras.insert("max_relative_metric_error".into(), json!(err));
                    }
                }
            }
            (traj.record.times, rows)
        }
    };
    Ok(Series {
        columns,
        times,
        rows,
        extras,
        checkpoint,
    })
}
