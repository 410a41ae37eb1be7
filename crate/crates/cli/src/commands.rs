use rayon::prelude::*;

use qspeed_core::analysis::{region_report, SpeedupInterval};
use qspeed_core::models::ModelSpec;
use qspeed_core::speed::{
    default_param_step, grid_derivative, speed_at, speed_samples, speedup_measure_bounded, SpeedupKind,
    DEFAULT_TIME_STEP,
};
use qspeed_core::MetricKind;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{Cell, Row, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn new_table(command: &str, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    t.meta("qspeed", VERSION).meta("command", command);
    t
}

fn describe(table: &mut Table, cfg: &RunConfig) {
    for (k, v) in cfg.describe() {
        table.meta(&k, v);
    }
}

/// Speed curve `S(t)` with `dS/dt` and, when the model defines one, `S/S₀`.
pub fn cmd_speed(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = cfg.model_spec()?;
    let traj = spec.trajectory()?;
    let ts = cfg.grid.values();
    let s0 = spec.initial_speed().filter(|&s| s > 0.0);

    let mut columns = vec!["t", "S", "dS_dt"];
    if s0.is_some() {
        columns.push("S_over_S0");
    }
    let mut table = new_table("speed", &columns);
    describe(&mut table, cfg);
    table
        .meta("grid", format!("t in [{}, {}], {} points", cfg.grid.tmin, cfg.grid.tmax, cfg.grid.points));
    if let Some(s0) = s0 {
        table.meta("S0", crate::table::fmt_num(s0));
    }

    let results = speed_samples(&traj, &ts, cfg.metric);
    let ok: Vec<(f64, f64)> =
        ts.iter().zip(&results).filter_map(|(&t, r)| r.as_ref().ok().map(|&s| (t, s))).collect();
    if ok.is_empty() {
        let err = results.into_iter().find_map(Result::err).expect("non-empty grid");
        return Err(CliError::from_speed(err, "t", ts[0]));
    }
    let (ok_t, ok_s): (Vec<f64>, Vec<f64>) = ok.iter().copied().unzip();
    let rates = if ok_t.len() >= 2 { grid_derivative(&ok_t, &ok_s) } else { vec![f64::NAN] };

    let mut k = 0;
    for (&t, r) in ts.iter().zip(&results) {
        match r {
            Ok(s) => {
                let mut cells = vec![Cell::Num(t), Cell::Num(*s), Cell::Num(rates[k])];
                if let Some(s0) = s0 {
                    cells.push(Cell::Num(s / s0));
                }
                table.rows.push(Row::new(cells));
                k += 1;
            }
            Err(e) => table.rows.push(Row::failed(columns.len(), Cell::Num(t), e.to_string())),
        }
    }
    Ok(table)
}

/// Admissible range of a sweep parameter.
fn param_domain(param: &str) -> (f64, f64) {
    match param {
        "alpha" | "C" => (0.0, 1.0),
        "t" => (0.0, f64::INFINITY),
        _ => (f64::MIN_POSITIVE, f64::INFINITY),
    }
}

/// `S(ξ)` with every other parameter fixed.
pub fn speed_along(spec: &ModelSpec, param: &str, xi: f64, time: f64, metric: MetricKind) -> Result<f64, CliError> {
    if param == "t" {
        let traj = spec.trajectory()?;
        return speed_at(&traj, xi, metric).map_err(|e| CliError::from_speed(e, "t", xi));
    }
    let mut s = *spec;
    s.set_param(param, xi)?;
    let traj = s.trajectory()?;
    speed_at(&traj, time, metric).map_err(|e| CliError::from_speed(e, param, xi))
}

/// `(S, ∂_ξS)` at each grid point, evaluated in parallel and returned in grid order.
pub fn sweep(
    spec: &ModelSpec,
    param: &str,
    grid: &[f64],
    time: f64,
    metric: MetricKind,
) -> Vec<Result<(f64, f64), CliError>> {
    let (lo, hi) = param_domain(param);
    grid.par_iter()
        .map(|&xi| {
            let s = speed_along(spec, param, xi, time, metric)?;
            let h = if param == "t" { DEFAULT_TIME_STEP } else { default_param_step(xi) };
            let d = speedup_measure_bounded(|x| speed_along(spec, param, x, time, metric), xi, h, lo, hi)?;
            Ok((s, d))
        })
        .collect()
}

/// Per-point `ξ, S, ∂_ξS, speedup` for the configured sweep.
pub fn cmd_detect(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::usage("detect requires --sweep <param>:<min>:<max>:<points>"))?;
    let spec = cfg.model_spec()?;
    let dname = format!("dS_d{}", sw.param);
    let columns = [sw.param.as_str(), "S", dname.as_str(), "speedup"];
    let mut table = new_table("detect", &columns);
    describe(&mut table, cfg);
    table.meta("classification", SpeedupKind::for_parameter(&sw.param).as_str());
    table.meta(
        "sweep",
        format!("{} in [{}, {}], {} points", sw.param, sw.grid.tmin, sw.grid.tmax, sw.grid.points),
    );
    if sw.param != "t" {
        table.meta("t", crate::table::fmt_num(cfg.time));
    }
    let grid = sw.grid.values();
    let results = sweep(&spec, &sw.param, &grid, cfg.time, cfg.metric);
    let mut any_ok = false;
    let mut first_err = None;
    for (&xi, r) in grid.iter().zip(results) {
        match r {
            Ok((s, d)) => {
                any_ok = true;
                table.rows.push(Row::new(vec![Cell::Num(xi), Cell::Num(s), Cell::Num(d), Cell::Bool(d > 0.0)]));
            }
            Err(CliError::Usage(msg)) => return Err(CliError::Usage(msg)),
            Err(e) => {
                table.rows.push(Row::failed(columns.len(), Cell::Num(xi), e.to_string()));
                first_err.get_or_insert(e);
            }
        }
    }
    match (any_ok, first_err) {
        (false, Some(e)) => Err(e),
        _ => Ok(table),
    }
}

/// Regime and memory/speedup interval table of an open model.
pub fn cmd_regions(cfg: &RunConfig) -> Result<Table, CliError> {
    if !cfg.model.is_open() {
        return Err(CliError::usage(format!("regions needs an open model (got {})", cfg.model)));
    }
    let spec = cfg.model_spec()?;
    let p = spec.open_params()?;
    let report = region_report(&p, cfg.n_max)?;
    let mut table = new_table("regions", &["n", "tau_n", "tau_n_prime", "tau_n_double_prime", "residual"]);
    table.meta("bath", describe_bath(&spec));
    table.meta("regime", report.regime);
    table.meta("n_max", report.n_max);
    let summary = if report.memory_intervals.is_empty() {
        format!("{}, no intervals", report.regime)
    } else {
        format!("{}, {} intervals", report.regime, report.memory_intervals.len())
    };
    table.meta("summary", summary);
    for (n, (&(tau, tau_p), &SpeedupInterval { end, residual, .. })) in
        report.memory_intervals.iter().zip(&report.speedup_intervals).enumerate()
    {
        table.rows.push(Row::new(vec![
            Cell::Int(n as i64 + 1),
            Cell::Num(tau),
            Cell::Num(tau_p),
            Cell::Num(end),
            Cell::Num(residual),
        ]));
    }
    Ok(table)
}

fn describe_bath(spec: &ModelSpec) -> String {
    match spec.bath {
        qspeed_core::Bath::MarkovianLimit => "markovian-limit".to_string(),
        qspeed_core::Bath::Lorentzian { gamma } => {
            format!("lorentzian, Gamma/gamma0 = {}", crate::table::fmt_num(gamma / spec.gamma0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;

    fn cfg(s: Settings) -> RunConfig {
        RunConfig::from_settings(&s).unwrap()
    }

    fn nums(t: &Table, col: &str) -> Vec<f64> {
        t.column(col)
            .unwrap()
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => *x,
                other => panic!("not a number: {other:?}"),
            })
            .collect()
    }

    #[test]
    fn speed_closed_qubit_constant() {
        let t = cmd_speed(&cfg(Settings {
            model: Some("closed-1q".into()),
            alpha: Some(0.6),
            omega: Some(1.0),
            tmin: Some(0.0),
            tmax: Some(2.0),
            points: Some(3),
            ..Default::default()
        }))
        .unwrap();
        assert_eq!(t.rows.len(), 3);
        for s in nums(&t, "S") {
            assert!((s - 0.48).abs() < 1e-12);
        }
        assert!(t.column("S_over_S0").is_none());
        assert!(t.to_csv().unwrap().contains("\n0,0.48,0\n"));
    }

    #[test]
    fn speed_markovian_reference_row() {
        let t = cmd_speed(&cfg(Settings {
            alpha: Some(1.0),
            markovian_limit: Some(true),
            tmin: Some(0.5),
            tmax: Some(1.0),
            points: Some(2),
            ..Default::default()
        }))
        .unwrap();
        assert!((nums(&t, "S")[1] - 0.381437).abs() < 1e-6);
    }

    #[test]
    fn speed_memoryless_rate_negative() {
        let t = cmd_speed(&cfg(Settings {
            alpha: Some(1.0),
            gamma_ratio: Some(10.0),
            tmin: Some(0.05),
            tmax: Some(10.0),
            points: Some(100),
            ..Default::default()
        }))
        .unwrap();
        assert!(nums(&t, "dS_dt").iter().all(|&r| r < 0.0));
        let ratio = nums(&t, "S_over_S0");
        assert!(ratio.iter().all(|&r| r <= 1.0 + 1e-9));
    }

    #[test]
    fn detect_closed_pairs() {
        let t = cmd_detect(&cfg(Settings {
            model: Some("closed-2q-aligned".into()),
            omega: Some(1.5),
            sweep: Some("C:0.1:1:10".into()),
            ..Default::default()
        }))
        .unwrap();
        assert_eq!(t.meta_value("classification"), Some("transverse"));
        for d in nums(&t, "dS_dC") {
            assert!((d - 1.5).abs() < 1e-6, "{d}");
        }
        assert!(t.column("speedup").unwrap().iter().all(|c| **c == Cell::Bool(true)));

        let t = cmd_detect(&cfg(Settings {
            model: Some("closed-2q-anti".into()),
            sweep: Some("C:0:1:11".into()),
            ..Default::default()
        }))
        .unwrap();
        assert!(nums(&t, "S").iter().all(|&s| s == 0.0));
        assert!(t.column("speedup").unwrap().iter().all(|c| **c == Cell::Bool(false)));
    }

    #[test]
    fn detect_transverse_in_markovian_band() {
        let t = cmd_detect(&cfg(Settings {
            alpha: Some(1.0),
            sweep: Some("Omega:0.02:0.49:48".into()),
            time: Some(1.0),
            ..Default::default()
        }))
        .unwrap();
        assert!(t.column("speedup").unwrap().iter().any(|c| **c == Cell::Bool(true)));
    }

    #[test]
    fn detect_longitudinal() {
        let t = cmd_detect(&cfg(Settings {
            alpha: Some(1.0),
            gamma_ratio: Some(10.0),
            sweep: Some("t:0:5:11".into()),
            ..Default::default()
        }))
        .unwrap();
        assert_eq!(t.meta_value("classification"), Some("longitudinal"));
        assert!(t.meta_value("t").is_none());
        assert!(t.column("speedup").unwrap().iter().all(|c| **c == Cell::Bool(false)));
    }

    #[test]
    fn detect_errors() {
        let err = cmd_detect(&cfg(Settings::default())).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = cmd_detect(&cfg(Settings { sweep: Some("C:0.1:0.9:3".into()), ..Default::default() })).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn regions_rows() {
        let t = cmd_regions(&cfg(Settings { gamma_ratio: Some(0.1), n_max: Some(1), ..Default::default() })).unwrap();
        assert_eq!(t.meta_value("regime"), Some("non_markovian"));
        assert_eq!(t.rows.len(), 1);
        assert!((nums(&t, "tau_n")[0] - 8.242034311692072).abs() < 1e-9);
        assert!((nums(&t, "tau_n_prime")[0] - 14.41461568291336).abs() < 1e-9);
        assert!(nums(&t, "residual")[0] <= 1e-10);

        let t = cmd_regions(&cfg(Settings { gamma_ratio: Some(10.0), ..Default::default() })).unwrap();
        assert_eq!(t.meta_value("summary"), Some("markovian, no intervals"));
        assert!(t.rows.is_empty());
        let t = cmd_regions(&cfg(Settings { gamma_ratio: Some(2.0), ..Default::default() })).unwrap();
        assert_eq!(t.meta_value("regime"), Some("critical"));
        let t = cmd_regions(&cfg(Settings { markovian_limit: Some(true), ..Default::default() })).unwrap();
        assert_eq!(t.meta_value("regime"), Some("markovian"));

        let err = cmd_regions(&cfg(Settings { model: Some("closed-1q".into()), ..Default::default() })).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
