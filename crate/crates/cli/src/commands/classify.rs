use std::collections::BTreeMap;

use fermidicke::collective::{classify_states, collective_jump, Classification, EigenGroup};
use fermidicke::hilbert::Basis;
use serde::Serialize;
use serde_json::json;

use crate::config::ClassifyConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, num};

/// Largest site count accepted by `classify`.
pub const MAX_SITES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcitationRow {
    pub n_e: Option<usize>,
    pub bright: usize,
    pub dark: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateRow {
    pub index: usize,
    pub kind: &'static str,
    pub n_e: Option<usize>,
    pub rate: f64,
    /// Dark partner of a bright state, bright partner of a dark one.
    pub partner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub summary: String,
    pub eigenvalues: Vec<EigenGroup>,
    pub bright: usize,
    pub dark: usize,
    pub excitations: Vec<ExcitationRow>,
    pub pairs: Vec<(usize, usize)>,
    pub cascading: Vec<usize>,
    /// Bright states first, then dark; `partner` refers to this numbering.
    pub states: Vec<StateRow>,
}

/// Dimension cap from `FERMIDICKE_MAX_DIM`, if set.
pub fn env_max_dim() -> CliResult<Option<usize>> {
    match std::env::var("FERMIDICKE_MAX_DIM") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|d| *d > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("FERMIDICKE_MAX_DIM: bad value {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("FERMIDICKE_MAX_DIM: {e}"))),
    }
}

fn basis(cfg: &ClassifyConfig) -> CliResult<Basis> {
    if cfg.n > MAX_SITES {
        return Err(CliError::Usage(format!(
            "classify supports n <= {MAX_SITES}, got {}",
            cfg.n
        )));
    }
    let cap = env_max_dim()?.unwrap_or(Basis::DEFAULT_CAP);
    Ok(Basis::with_cap(cfg.n, 0, cfg.stats, cap)?)
}

/// Weight of the antisymmetric combination in the one-parent bright state
/// of a two-site system.
fn singlet_weight(c: &Classification) -> Option<f64> {
    let b = c.bright.iter().find(|s| s.excitations == Some(1))?;
    let a = b.state.amplitudes();
    Some((a[1] - a[2]).norm_sqr() / 2.0)
}

fn report(basis: &Basis, c: &Classification) -> ClassifyReport {
    let nb = c.bright.len();
    let mut partner = vec![None; nb + c.dark.len()];
    for &(b, d) in &c.pairs {
        partner[b] = Some(nb + d);
        partner[nb + d] = Some(b);
    }
    let mut states = Vec::with_capacity(partner.len());
    for (i, s) in c.bright.iter().chain(&c.dark).enumerate() {
        states.push(StateRow {
            index: i,
            kind: if i < nb { "bright" } else { "dark" },
            n_e: s.excitations,
            rate: s.rate,
            partner: partner[i],
        });
    }
    let mut per: BTreeMap<Option<usize>, (usize, usize)> = BTreeMap::new();
    if c.bright
        .iter()
        .chain(&c.dark)
        .all(|s| s.excitations.is_some())
    {
        for k in 0..=basis.n_sites() {
            per.insert(Some(k), (0, 0));
        }
    }
    for s in &states {
        let e = per.entry(s.n_e).or_default();
        if s.kind == "bright" {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    let excitations = per
        .into_iter()
        .map(|(n_e, (bright, dark))| ExcitationRow { n_e, bright, dark })
        .collect();

    let mut summary = format!("{} bright, {} dark", nb, c.dark.len());
    if basis.n_sites() == 2 {
        if let Some(w) = singlet_weight(c) {
            let which = if w > 0.5 { "singlet" } else { "triplet" };
            summary.push_str(&format!("; {which} bright at N_e=1"));
        }
    }
    ClassifyReport {
        summary,
        eigenvalues: c.groups.clone(),
        bright: nb,
        dark: c.dark.len(),
        excitations,
        pairs: c.pairs.clone(),
        cascading: c.cascading.clone(),
        states,
    }
}

pub fn compute(cfg: &ClassifyConfig) -> CliResult<(ClassifyReport, Basis, Classification)> {
    let basis = basis(cfg)?;
    let l = collective_jump(&basis, cfg.gamma0)?;
    let c = classify_states(&basis, &l)?;
    Ok((report(&basis, &c), basis, c))
}

fn text(r: &ClassifyReport) -> String {
    let mut s = format!("{}\n", r.summary);
    s.push_str("eigenvalues:");
    for g in &r.eigenvalues {
        s.push_str(&format!(" {} (x{})", num(g.value), g.multiplicity));
    }
    s.push('\n');
    s.push_str("N_e  bright  dark\n");
    for e in &r.excitations {
        let k = e.n_e.map_or("-".to_string(), |k| k.to_string());
        s.push_str(&format!("{k:>3}  {:>6}  {:>4}\n", e.bright, e.dark));
    }
    s.push_str(&format!("pairs: {}", r.pairs.len()));
    if !r.cascading.is_empty() {
        s.push_str(&format!(", cascading bright states: {}", r.cascading.len()));
    }
    s.push('\n');
    s
}

fn dump(
    path: &std::path::Path,
    cfg: &ClassifyConfig,
    basis: &Basis,
    c: &Classification,
) -> CliResult<()> {
    let state = |kind: &str, s: &fermidicke::collective::ClassifiedState| {
        let amps: Vec<(usize, f64, f64)> = s
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-14)
            .map(|(i, a)| (i, a.re, a.im))
            .collect();
        json!({"kind": kind, "n_e": s.excitations, "rate": s.rate, "amplitudes": amps})
    };
    let states: Vec<_> = c
        .bright
        .iter()
        .map(|s| state("bright", s))
        .chain(c.dark.iter().map(|s| state("dark", s)))
        .collect();
    let labels: Vec<String> = (0..basis.dim()).map(|i| basis.label(i)).collect();
    let doc = json!({
        "config": cfg,
        "basis": labels,
        "amplitude_format": "[index, re, im], entries below 1e-14 omitted",
        "states": states,
    });
    output::write_file(path, &output::pretty(&doc)?)
}

const HEADER: [&str; 5] = ["index", "kind", "n_e", "rate", "partner"];

pub fn run(cfg: &ClassifyConfig) -> CliResult<()> {
    let (r, basis, c) = compute(cfg)?;
    if let Some(p) = &cfg.dump {
        dump(p, cfg, &basis, &c)?;
    }
    let records: Vec<Vec<String>> = r
        .states
        .iter()
        .map(|s| {
            vec![
                s.index.to_string(),
                s.kind.to_string(),
                s.n_e.map(|k| k.to_string()).unwrap_or_default(),
                num(s.rate),
                s.partner.map(|k| k.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    output::emit(
        cfg.out.as_deref(),
        cfg.format,
        cfg,
        || output::csv_text(&HEADER, &records),
        "classification",
        serde_json::to_value(&r)?,
    )?;
    let summary = text(&r);
    if cfg.out.is_some() {
        output::stdout(&summary)
    } else {
        output::stderr(&summary);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fermidicke::hilbert::StatisticsConfig;

    fn cfg(n: usize, stats: StatisticsConfig) -> ClassifyConfig {
        let mut c: ClassifyConfig = serde_json::from_value(json!({"n": n})).unwrap();
        c.stats = stats;
        c
    }

    #[test]
    fn two_sites_fermionic() {
        let (r, _, _) = compute(&cfg(2, StatisticsConfig::BOSON_FERMION)).unwrap();
        assert_eq!(r.summary, "2 bright, 2 dark; singlet bright at N_e=1");
        assert_eq!(r.pairs.len(), 2);
    }

    #[test]
    fn three_sites_split() {
        let (r, _, _) = compute(&cfg(3, StatisticsConfig::BOSON_FERMION)).unwrap();
        assert_eq!((r.bright, r.dark), (4, 4));
        for s in r.states.iter().filter(|s| s.kind == "bright") {
            assert!((s.rate - 3.0).abs() < 1e-10);
        }
        let total: usize = r.excitations.iter().map(|e| e.bright + e.dark).sum();
        assert_eq!(total, 8);
    }

    #[test]
    fn one_site() {
        let (r, _, _) = compute(&cfg(1, StatisticsConfig::FERMION_BOSON)).unwrap();
        assert_eq!(r.summary, "1 bright, 1 dark");
    }

    #[test]
    fn partners_are_symmetric() {
        let (r, _, _) = compute(&cfg(4, StatisticsConfig::BOSON_FERMION)).unwrap();
        for s in &r.states {
            if let Some(p) = s.partner {
                assert_eq!(r.states[p].partner, Some(s.index));
                assert_ne!(r.states[p].kind, s.kind);
            }
        }
    }

    #[test]
    fn too_many_sites() {
        assert!(matches!(
            compute(&cfg(13, StatisticsConfig::BOSON_FERMION)),
            Err(CliError::Usage(_))
        ));
    }
}
