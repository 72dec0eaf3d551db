use fermidicke::collective::{multimode_sector_graph, CollectiveModeSet, SectorGraph};
use fermidicke::hilbert::Basis;

use crate::config::GraphConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, with_suffix};

pub const MAX_SITES: usize = 12;

pub fn compute(cfg: &GraphConfig) -> CliResult<SectorGraph> {
    if cfg.n > MAX_SITES {
        return Err(CliError::Usage(format!(
            "graph supports n <= {MAX_SITES}, got {}",
            cfg.n
        )));
    }
    if cfg.modes == 0 || cfg.modes > cfg.n {
        return Err(CliError::Usage(format!(
            "modes must be in 1..={}, got {}",
            cfg.n, cfg.modes
        )));
    }
    let rates = match &cfg.rates {
        Some(r) if r.len() != cfg.modes => {
            return Err(CliError::Usage(format!(
                "{} rates given for {} modes",
                r.len(),
                cfg.modes
            )))
        }
        Some(r) => r.clone(),
        None => vec![cfg.gamma0 / cfg.modes as f64; cfg.modes],
    };
    if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::Usage("mode rates must be positive".into()));
    }
    let basis = Basis::new(cfg.n, 0, cfg.stats)?;
    let modes = CollectiveModeSet::dft(cfg.n, rates)?;
    Ok(multimode_sector_graph(&basis, &modes)?)
}

pub fn summary(g: &SectorGraph) -> String {
    let sizes: Vec<usize> = g.sectors().iter().map(Vec::len).collect();
    let size = if sizes.windows(2).all(|w| w[0] == w[1]) {
        sizes.first().map_or("0".to_string(), |s| s.to_string())
    } else {
        format!("{sizes:?}")
    };
    format!(
        "sectors={}, sector_size={}, hypercube={}",
        sizes.len(),
        size,
        if g.is_hypercube() { "ok" } else { "fail" }
    )
}

pub fn run(cfg: &GraphConfig) -> CliResult<()> {
    let g = compute(cfg)?;
    if let Some(base) = &cfg.out {
        output::write_file(&with_suffix(base, ".dot"), &g.to_dot())?;
        output::write_file(&with_suffix(base, ".json"), &format!("{}\n", g.to_json()))?;
        output::write_file(&with_suffix(base, ".config.json"), &output::pretty(cfg)?)?;
    }
    output::stdout(&format!("{}\n", summary(&g)))?;
    if !g.is_hypercube() {
        return Err(CliError::Numeric(
            "sector graph is not a union of hypercubes".into(),
        ));
    }
    Ok(())
}
