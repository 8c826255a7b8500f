use crate::error::{Error, Result};
use crate::fringe::{doppler_robustness, epsilon_scan, phase_shift, shift_sweep_kxl, FringeModel, Mode};
use crate::physics::{LaserGeometry, LaserDrive};

use super::config::RunConfig;
use super::table::{fmt_num, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fringe,
    ShiftScan,
    EpsilonScan,
    Doppler,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fringe => "fringe",
            Command::ShiftScan => "shift-scan",
            Command::EpsilonScan => "epsilon-scan",
            Command::Doppler => "doppler",
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<CsvTable> {
    match command {
        Command::Fringe => cmd_fringe(cfg),
        Command::ShiftScan => cmd_shift_scan(cfg),
        Command::EpsilonScan => cmd_epsilon_scan(cfg),
        Command::Doppler => cmd_doppler(cfg),
    }
}

fn preamble(command: Command, cfg: &RunConfig, header: &[&str]) -> CsvTable {
    let mut table = CsvTable::new(header);
    table.meta("command", command.name());
    for (key, value) in cfg.resolved() {
        table.meta(key, value);
    }
    table
}

fn check_inputs(cfg: &RunConfig) -> Result<()> {
    LaserGeometry::new(cfg.width, cfg.gap)?;
    LaserDrive::new(cfg.omega(), [0.0; 3])?;
    Ok(())
}

fn ok_or_warn<T>(value: Result<T>, context: impl FnOnce() -> String) -> Option<T> {
    match value {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{}: {e}", context());
            None
        }
    }
}

/// Columns Phi, P_scl, P_quantum_exact, P_quantum_MZ, P_quantum_direct.
pub fn cmd_fringe(cfg: &RunConfig) -> Result<CsvTable> {
    check_inputs(cfg)?;
    let setup = cfg.setup();
    let mut table = preamble(Command::Fringe, cfg, &["Phi", "P_scl", "P_quantum_exact", "P_quantum_MZ", "P_quantum_direct"]);
    let modes = [Mode::Semiclassical, Mode::QuantumExact, Mode::QuantumMz, Mode::QuantumDirect];
    let models: Vec<Option<FringeModel>> =
        modes.iter().map(|&m| ok_or_warn(FringeModel::new(&setup, m), || format!("{m} model"))).collect();
    let closed = models.iter().flatten().any(FringeModel::is_closed);
    table.meta("closed_channel", closed.to_string());
    if closed {
        log::warn!("excited channel is closed; quantum columns are zero");
    }

    let grid = crate::fringe::phase_grid(cfg.points);
    let rows = crate::par::map_collect(cfg.policy(), &grid, |&phi| {
        let mut row = vec![Some(phi)];
        for (mode, model) in modes.iter().zip(&models) {
            row.push(model.as_ref().and_then(|m| ok_or_warn(m.probability(phi), || format!("{mode} at Phi = {phi}"))));
        }
        row
    });
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

/// Columns kx_l, delta_phi_direct, delta_phi_exact.
pub fn cmd_shift_scan(cfg: &RunConfig) -> Result<CsvTable> {
    check_inputs(cfg)?;
    let mut table = preamble(Command::ShiftScan, cfg, &["kx_l", "delta_phi_direct", "delta_phi_exact"]);
    let rows = shift_sweep_kxl(&cfg.setup(), &cfg.kxl.grid(), cfg.policy());
    let mut flagged = Vec::new();
    for row in &rows {
        let direct = ok_or_warn(row.direct.clone(), || format!("direct shift at kx_l = {}", row.kx_l));
        let exact = ok_or_warn(row.exact.clone(), || format!("exact shift at kx_l = {}", row.kx_l));
        for (name, result) in [("direct", &row.direct), ("exact", &row.exact)] {
            if let Err(e) = result {
                table.meta("point_error", format!("kx_l={} {name}: {e}", fmt_num(row.kx_l)));
            }
        }
        if row.wild {
            flagged.push(fmt_num(row.kx_l));
        }
        table.push_row(vec![Some(row.kx_l), direct, exact]);
    }
    table.meta("flagged_low_velocity", if flagged.is_empty() { "none".into() } else { flagged.join(" ") });
    Ok(table)
}

/// Columns epsilon, abs_A2, abs_A3, delta_phi; the crossing goes in the metadata.
pub fn cmd_epsilon_scan(cfg: &RunConfig) -> Result<CsvTable> {
    check_inputs(cfg)?;
    let setup = cfg.setup();
    let mut table = preamble(Command::EpsilonScan, cfg, &["epsilon", "abs_A2", "abs_A3", "delta_phi"]);
    let scan = epsilon_scan(&setup, (cfg.eps.min, cfg.eps.max), cfg.eps.points, cfg.eps_model, cfg.policy())?;
    match scan.epsilon_o {
        Some(root) => table.meta("epsilon_o", fmt_num(root)),
        None => {
            let err = Error::NoBracket { lo: cfg.eps.min, hi: cfg.eps.max };
            log::warn!("{err}");
            table.meta("epsilon_o", format!("none ({err})"));
        }
    }
    table.meta("crossings", scan.crossings.to_string());
    let mode = cfg.eps_model.mode();
    let shifts = crate::par::map_collect(cfg.policy(), &scan.grid, |&eps| {
        phase_shift(&setup.with_pulse_offset(eps), mode).map(|s| s.delta_phi)
    });
    for (i, shift) in shifts.into_iter().enumerate() {
        let eps = scan.grid[i];
        if let Err(e) = &shift {
            table.meta("point_error", format!("epsilon={}: {e}", fmt_num(eps)));
        }
        let shift = ok_or_warn(shift, || format!("delta_phi at epsilon = {eps}"));
        table.push_row(vec![Some(eps), Some(scan.abs_a2[i]), Some(scan.abs_a3[i]), shift]);
    }
    Ok(table)
}

/// Columns delta, delta_phi at Delta - 2v/L, Delta, Delta + 2v/L.
pub fn cmd_doppler(cfg: &RunConfig) -> Result<CsvTable> {
    check_inputs(cfg)?;
    let report = doppler_robustness(&cfg.setup(), cfg.mode)?;
    let mut table = preamble(Command::Doppler, cfg, &["delta", "delta_phi"]);
    table.meta("relative_spread", fmt_num(report.relative_spread));
    table.meta("doppler_offset", fmt_num(2.0 * cfg.velocity() / cfg.gap));
    for (delta, shift) in report.rows {
        table.push_row(vec![Some(delta), Some(shift)]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{parse_config, parse_config_with};

    fn column(table: &CsvTable, i: usize) -> Vec<f64> {
        table.rows.iter().map(|r| r[i].unwrap()).collect()
    }

    #[test]
    fn fringe_defaults() {
        let table = cmd_fringe(&parse_config("").unwrap()).unwrap();
        assert_eq!(table.rows.len(), 1001);
        for row in &table.rows {
            let phi = row[0].unwrap();
            assert!((row[1].unwrap() - (phi / 2.0).sin().powi(2)).abs() < 1e-12);
        }
        assert!(table.metadata.iter().any(|(k, v)| k == "closed_channel" && v == "false"));
    }

    #[test]
    fn fringe_without_field_is_dark() {
        let cfg = parse_config_with("points = 11", &["omega=0".into()]).unwrap();
        let table = cmd_fringe(&cfg).unwrap();
        for i in 1..5 {
            assert!(column(&table, i).iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn fringe_is_deterministic() {
        let cfg = parse_config("points = 101\nmode = quantum-exact").unwrap();
        assert_eq!(cmd_fringe(&cfg).unwrap().render(), cmd_fringe(&cfg).unwrap().render());
    }

    #[test]
    fn closed_channel_fringe_is_flagged() {
        let cfg = parse_config("points = 5\ndelta = -1e9").unwrap();
        let table = cmd_fringe(&cfg).unwrap();
        assert!(table.metadata.iter().any(|(k, v)| k == "closed_channel" && v == "true"));
        assert!(column(&table, 2).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn shift_scan_tail_goes_to_zero() {
        let cfg = parse_config("kxl_min = 300\nkxl_max = 3000\nkxl_points = 3").unwrap();
        let table = cmd_shift_scan(&cfg).unwrap();
        let last = table.rows.last().unwrap();
        assert!(last[1].unwrap().abs() < 1e-4 && last[2].unwrap().abs() < 1e-4);
        assert!(last[1].unwrap().abs() < table.rows[0][1].unwrap().abs());
    }

    #[test]
    fn epsilon_scan_crosses_once() {
        let cfg = parse_config("eps_points = 21").unwrap();
        let table = cmd_epsilon_scan(&cfg).unwrap();
        assert_eq!(table.rows.len(), 21);
        assert!(table.metadata.iter().any(|(k, v)| k == "crossings" && v == "1"));
        let root = table.metadata.iter().find(|(k, _)| k == "epsilon_o").unwrap().1.parse::<f64>().unwrap();
        assert!(root.abs() > 0.0 && root.abs() < 0.5);
    }

    #[test]
    fn epsilon_scan_without_crossing_records_it() {
        let cfg = parse_config("eps_min = 0.3\neps_max = 0.5\neps_points = 3").unwrap();
        let table = cmd_epsilon_scan(&cfg).unwrap();
        assert!(table.metadata.iter().any(|(k, v)| k == "epsilon_o" && v.starts_with("none")));
    }

    #[test]
    fn doppler_rows_agree() {
        let table = cmd_doppler(&parse_config("").unwrap()).unwrap();
        let shifts = column(&table, 1);
        assert_eq!(shifts.len(), 3);
        for s in [shifts[0], shifts[2]] {
            assert!((s - shifts[1]).abs() < 0.01 * shifts[1].abs());
        }
    }

    #[test]
    fn doppler_on_closed_channel_fails() {
        let cfg = parse_config("delta = -1e9").unwrap();
        assert!(matches!(cmd_doppler(&cfg), Err(Error::ClosedChannel { .. })));
    }
}
