//! Python bindings. Results come back as small frozen records with plain
//! attributes (floats, ints, lists, strings).

use fermidicke::analytics::{closed_form_rate, rate_numeric, RateParams};
use fermidicke::collective::{
    classify_states, collective_jump, multimode_sector_graph, CollectiveModeSet,
};
use fermidicke::dynamics::{
    analytic_n0, dephasing_decay_rates as decay_rates, evolve_density_matrix, evolve_moments,
    linear_grid, regime_classify, CavityRegime, DensityMatrix, EvolveOptions, ModelParams,
    MomentState,
};
use fermidicke::hilbert::{all_parent_state, product_superposition_state, Basis, StatisticsConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: fermidicke::Error) -> PyErr {
    use fermidicke::Error as E;
    match e {
        E::InvalidStatistics(_)
        | E::Capacity { .. }
        | E::IndexOutOfRange { .. }
        | E::DimensionMismatch { .. }
        | E::InvalidParameter(_)
        | E::NoRadiationMode
        | E::NotOrthonormal { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for fermidicke::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn parse_stats(s: &str) -> fermidicke::Result<StatisticsConfig> {
    s.parse()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Density,
    Moments,
}

fn parse_engine(s: &str, stats: StatisticsConfig) -> fermidicke::Result<Engine> {
    match s {
        "density" => Ok(Engine::Density),
        "moments" if stats.emits_fermion() => Ok(Engine::Moments),
        "moments" => Err(fermidicke::Error::InvalidParameter(
            "the moment engine needs fermionic emission".into(),
        )),
        other => Err(fermidicke::Error::InvalidParameter(format!(
            "engine must be density or moments, got {other:?}"
        ))),
    }
}

#[pyclass(get_all, frozen)]
pub struct RateComparison {
    pub closed_form: f64,
    pub numeric: f64,
}

/// Closed-form and brute-force `<L^dagger L>` of a product superposition.
#[pyfunction]
#[pyo3(signature = (n, stats="bf", phi=0.0, gamma0=1.0, phases=None))]
fn emission_rate(
    n: usize,
    stats: &str,
    phi: f64,
    gamma0: f64,
    phases: Option<Vec<f64>>,
) -> PyResult<RateComparison> {
    let s = parse_stats(stats).py()?;
    let p = match phases {
        Some(ph) => RateParams::with_phases(gamma0, ph),
        None => RateParams::uniform(n, gamma0, phi),
    }
    .py()?;
    let b = Basis::new(p.n, 0, s).py()?;
    let psi = product_superposition_state(&b, &p.site_phases()).py()?;
    let l = collective_jump(&b, gamma0).py()?;
    Ok(RateComparison {
        closed_form: closed_form_rate(s, &p),
        numeric: rate_numeric(&psi, &l).py()?,
    })
}

#[pyclass(get_all, frozen)]
pub struct Spectrum {
    /// Distinct eigenvalues of `L^dagger L`, ascending.
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub bright: usize,
    pub dark: usize,
    pub bright_rates: Vec<f64>,
    /// `(bright, dark)` index pairs with `L b` proportional to `d`.
    pub pairs: Vec<(usize, usize)>,
}

#[pyfunction]
#[pyo3(signature = (n, stats="bf", gamma0=1.0))]
fn classify(n: usize, stats: &str, gamma0: f64) -> PyResult<Spectrum> {
    let b = Basis::new(n, 0, parse_stats(stats).py()?).py()?;
    let c = classify_states(&b, &collective_jump(&b, gamma0).py()?).py()?;
    Ok(Spectrum {
        eigenvalues: c.groups.iter().map(|g| g.value).collect(),
        multiplicities: c.groups.iter().map(|g| g.multiplicity).collect(),
        bright: c.bright.len(),
        dark: c.dark.len(),
        bright_rates: c.bright.iter().map(|s| s.rate).collect(),
        pairs: c.pairs,
    })
}

#[pyclass(get_all, frozen)]
pub struct SectorSummary {
    pub sector_sizes: Vec<usize>,
    pub hypercube: bool,
    pub dot: String,
    pub json: String,
}

/// Sector graph of `modes` Fourier modes; `rates` defaults to an even split
/// of `gamma0`.
#[pyfunction]
#[pyo3(signature = (n, modes, rates=None, stats="bf", gamma0=1.0))]
fn sector_graph(
    n: usize,
    modes: usize,
    rates: Option<Vec<f64>>,
    stats: &str,
    gamma0: f64,
) -> PyResult<SectorSummary> {
    if modes == 0 {
        return Err(PyValueError::new_err("need at least one mode"));
    }
    let rates = rates.unwrap_or_else(|| vec![gamma0 / modes as f64; modes]);
    let b = Basis::new(n, 0, parse_stats(stats).py()?).py()?;
    let set = CollectiveModeSet::dft(n, rates).py()?;
    let g = multimode_sector_graph(&b, &set).py()?;
    Ok(SectorSummary {
        sector_sizes: g.sectors().iter().map(Vec::len).collect(),
        hypercube: g.is_hypercube(),
        dot: g.to_dot(),
        json: g.to_json(),
    })
}

#[pyclass(get_all, frozen)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub n_c: Vec<f64>,
    pub n_nu: Vec<f64>,
    pub n_bar: Vec<f64>,
    pub emitted: Vec<f64>,
}

/// Evolution of the all-parent state with an empty cavity.
#[pyfunction]
#[pyo3(signature = (n, t_max, points=201, g=1.0, kappa=0.0, kappa_phi=0.0, stats="bf", engine="density", rtol=1e-8, atol=1e-10))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    n: usize,
    t_max: f64,
    points: usize,
    g: f64,
    kappa: f64,
    kappa_phi: f64,
    stats: &str,
    engine: &str,
    rtol: f64,
    atol: f64,
) -> PyResult<Trajectory> {
    let s = parse_stats(stats).py()?;
    let engine = parse_engine(engine, s).py()?;
    let p = ModelParams::new(g, n, kappa, kappa_phi).py()?;
    let grid = linear_grid(t_max, points).py()?;
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(PyValueError::new_err("tolerances must be positive"));
    }
    let opts = EvolveOptions {
        rtol,
        atol,
        ..EvolveOptions::default()
    };
    let tr = py
        .detach(|| match engine {
            Engine::Moments => evolve_moments(MomentState::all_parent(), &p, &grid, &opts),
            Engine::Density => {
                let b = Basis::new(n, 1, s)?;
                let rho0 = DensityMatrix::from_pure(&all_parent_state(&b));
                evolve_density_matrix(&b, &rho0, &p, &grid, &opts).map(|r| r.trajectory)
            }
        })
        .py()?;
    let col =
        |f: fn(&fermidicke::dynamics::TrajectoryPoint) -> f64| tr.points().iter().map(f).collect();
    Ok(Trajectory {
        t: col(|q| q.t),
        n_c: col(|q| q.n_c),
        n_nu: col(|q| q.n_nu),
        n_bar: col(|q| q.n_bar),
        emitted: col(|q| q.emitted),
    })
}

/// `(cavity, dephasing, warnings)` labels.
#[pyfunction]
#[pyo3(signature = (n, g, kappa, kappa_phi=0.0))]
fn regime(n: usize, g: f64, kappa: f64, kappa_phi: f64) -> PyResult<(String, String, Vec<String>)> {
    let r = regime_classify(&ModelParams::new(g, n, kappa, kappa_phi).py()?);
    Ok((
        r.cavity.name().into(),
        r.dephasing.name().into(),
        r.warnings,
    ))
}

/// Closed-form bright-mode population for the named cavity regime.
#[pyfunction]
fn bright_population(regime: &str, n: usize, g: f64, kappa: f64, t: f64) -> PyResult<f64> {
    let r = match regime {
        "lossless" => CavityRegime::Lossless,
        "weak_damping" => CavityRegime::WeakDamping,
        "bad_cavity" => CavityRegime::BadCavity,
        other => return Err(PyValueError::new_err(format!("unknown regime {other:?}"))),
    };
    analytic_n0(r, &ModelParams::new(g, n, kappa, 0.0).py()?, t).py()
}

/// `(lambda_plus, lambda_minus)` of the adiabatic dephasing system.
#[pyfunction]
fn dephasing_decay_rates(n: usize, g: f64, kappa: f64, kappa_phi: f64) -> PyResult<(f64, f64)> {
    let r = decay_rates(&ModelParams::new(g, n, kappa, kappa_phi).py()?).py()?;
    Ok((r.lambda_plus, r.lambda_minus))
}

#[pymodule]
fn pyfermidicke(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RateComparison>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<SectorSummary>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(emission_rate, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(sector_graph, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(regime, m)?)?;
    m.add_function(wrap_pyfunction!(bright_population, m)?)?;
    m.add_function(wrap_pyfunction!(dephasing_decay_rates, m)?)?;
    Ok(())
}
