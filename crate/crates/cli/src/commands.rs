use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use zcoupling::exchange::{fit_cc, j_capacitive, j_impedance, pv_integral_check, ImpedanceOptions};
use zcoupling::fixtures::{self, linear_grid};
use zcoupling::netlist::Netlist;
use zcoupling::network::touchstone::{
    read_touchstone, write_touchstone, DataFormat, FrequencyUnit, NetworkFile, ParameterKind,
};
use zcoupling::network::{self, ImpedanceTable};
use zcoupling::par::{self, Execution};
use zcoupling::selftest::{self, Selector};
use zcoupling::transmon::{
    calibrate_ej, charging_energy_from_capacitance, solve_spectrum, spec_from_capacitance,
    TransmonSpec, TransmonSpectrum,
};
use zcoupling::units::{
    cyclic_to_energy, energy_to_cyclic, energy_to_mhz, to_angular, to_cyclic, FEMTOFARAD, GHZ,
    HBAR, MHZ, PLANCK,
};
use zcoupling::zz::{sweep_coupler, DuffingSystem, JCurve};

use crate::config::{input_error, readable, required};
use crate::error::{usage, CliError, CliResult};
use crate::output::Outcome;
use crate::quantity::{Capacitance, Frequency};
use crate::{
    CalibrateArgs, FitccArgs, JcapArgs, JrateArgs, NetlistZArgs, OracleArgs, PvCheckArgs,
    SpectrumArgs, SweepMode, TableFormat, ZzArgs,
};

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report literals are objects"),
    }
}

fn ghz(omega: f64) -> f64 {
    to_cyclic(omega) / GHZ
}

fn mhz(omega: f64) -> f64 {
    to_cyclic(omega) / MHZ
}

/// Invalid-parameter errors raised while building inputs are usage errors.
fn checked<T>(r: zcoupling::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        zcoupling::Error::InvalidParameter(_) | zcoupling::Error::CutoffTooSmall(_) => usage(e.to_string()),
        other => CliError::Compute(other),
    })
}

fn sweep_grid(from: Option<Frequency>, to: Option<Frequency>, points: Option<usize>, default_points: usize) -> CliResult<Vec<f64>> {
    let from = required(from, "from")?.0;
    let points = points.unwrap_or(default_points);
    if points == 0 {
        return Err(usage("points must be at least 1"));
    }
    if points == 1 {
        return Ok(vec![to_angular(from)]);
    }
    let to = required(to, "to")?.0;
    if !(from > 0.0 && to > from) {
        return Err(usage(format!("sweep needs 0 < from < to, got {from} Hz .. {to} Hz")));
    }
    Ok(linear_grid(to_angular(from), to_angular(to), points))
}

fn load_table(path: &Path) -> CliResult<ImpedanceTable> {
    readable(path)?;
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let table = if is_csv {
        network::csv::read_csv(path)
    } else {
        read_touchstone(path).and_then(|f| f.to_impedance_table())
    };
    table.map_err(input_error(path))
}

fn port_pair(port1: Option<usize>, port2: Option<usize>, ports: usize) -> CliResult<(usize, usize)> {
    let (p1, p2) = (port1.unwrap_or(1), port2.unwrap_or(2));
    for p in [p1, p2] {
        if p == 0 || p > ports {
            return Err(usage(format!("port {p} out of range 1..={ports}")));
        }
    }
    if p1 == p2 {
        return Err(usage("port1 and port2 must differ"));
    }
    Ok((p1 - 1, p2 - 1))
}

fn spectrum_csv(s: &TransmonSpectrum) -> String {
    let mut out = String::from("level,energy_GHz,transition_GHz\n");
    for (k, e) in s.level_energies.iter().enumerate() {
        let t = if k + 1 < s.levels() {
            format!("{:.9}", ghz(s.transition(k)))
        } else {
            String::new()
        };
        let _ = writeln!(out, "{k},{:.9},{t}", ghz(*e));
    }
    out
}

fn charge_csv(s: &TransmonSpectrum) -> String {
    let n = s.levels();
    let mut out = String::from("i");
    for j in 0..n {
        let _ = write!(out, ",n_i{j}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "{i}");
        for j in 0..n {
            let _ = write!(out, ",{:.12}", s.charge_element(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn spectrum(a: SpectrumArgs) -> CliResult<Outcome> {
    let ec = required(a.ec, "ec")?;
    let ej = required(a.ej, "ej")?;
    let levels = a.levels.unwrap_or(4);
    let spec = checked(TransmonSpec::new(cyclic_to_energy(ec.0), cyclic_to_energy(ej.0)))?
        .with_offset_charge(a.ng.unwrap_or(0.0))
        .with_cutoff(a.cutoff.unwrap_or(zcoupling::transmon::DEFAULT_CUTOFF));
    checked(spec.validate())?;
    let s = checked(solve_spectrum(&spec, levels))?;
    let charge: Vec<Vec<f64>> = (0..s.levels())
        .map(|i| (0..s.levels()).map(|j| s.charge_element(i, j)).collect())
        .collect();
    let results = object(json!({
        "ec_MHz": ec.0 / MHZ,
        "ej_GHz": ej.0 / GHZ,
        "ej_over_ec": spec.ej_over_ec(),
        "ng": spec.offset_charge,
        "transmon_regime": spec.is_transmon_regime(),
        "cutoff": s.cutoff,
        "converged": s.converged,
        "q01_GHz": ghz(s.q01()),
        "alpha_MHz": mhz(s.anharmonicity()),
        "levels_GHz": s.level_energies.iter().map(|&e| ghz(e)).collect::<Vec<_>>(),
        "charge_matrix": charge,
    }));
    let mut outcome = Outcome::new(results)
        .file("spectrum.csv", spectrum_csv(&s))
        .file("charge_matrix.csv", charge_csv(&s));
    if !spec.is_transmon_regime() {
        outcome
            .warnings
            .push(format!("E_J/E_C = {:.2} is below the transmon regime", spec.ej_over_ec()));
    }
    Ok(outcome)
}

pub fn calibrate(a: CalibrateArgs) -> CliResult<Outcome> {
    let q01 = required(a.q01, "q01")?;
    let ng = a.ng.unwrap_or(0.0);
    let ec = match (a.ec, a.c) {
        (Some(ec), None) => cyclic_to_energy(ec.0),
        (None, Some(c)) => checked(Ok(c.0).and_then(|c| {
            if c > 0.0 {
                Ok(charging_energy_from_capacitance(c))
            } else {
                Err(zcoupling::Error::InvalidParameter("capacitance must be positive".into()))
            }
        }))?,
        _ => return Err(usage("give exactly one of 'ec' or 'c'")),
    };
    let ej = checked(calibrate_ej(to_angular(q01.0), ec, ng))?;
    let spec = checked(TransmonSpec::new(ec, ej))?.with_offset_charge(ng);
    let s = checked(solve_spectrum(&spec, 3))?;
    let mut results = object(json!({
        "ec_MHz": energy_to_mhz(ec),
        "ej_GHz": energy_to_cyclic(ej) / GHZ,
        "ej_over_ec": spec.ej_over_ec(),
        "transmon_regime": spec.is_transmon_regime(),
        "q01_GHz": ghz(s.q01()),
        "alpha_MHz": mhz(s.anharmonicity()),
        "n01": s.charge_element(0, 1).abs(),
    }));
    if let Some(c) = a.c {
        results.insert("c_fF".into(), json!(c.0 / FEMTOFARAD));
    }
    Ok(Outcome::new(results))
}

enum QubitDef {
    Capacitance(f64),
    Charging(f64),
}

impl QubitDef {
    fn from_args(c: Option<Capacitance>, ec: Option<Frequency>, which: u8) -> CliResult<Self> {
        match (c, ec) {
            (Some(c), None) if c.0 > 0.0 => Ok(QubitDef::Capacitance(c.0)),
            (None, Some(ec)) if ec.0 > 0.0 => Ok(QubitDef::Charging(cyclic_to_energy(ec.0))),
            (Some(_), None) | (None, Some(_)) => Err(usage(format!("qubit {which}: c{which}/ec{which} must be positive"))),
            _ => Err(usage(format!("qubit {which}: give exactly one of 'c{which}' or 'ec{which}'"))),
        }
    }

    fn at(&self, q01: f64, ng: f64) -> zcoupling::Result<TransmonSpectrum> {
        let spec = match *self {
            QubitDef::Capacitance(c) => spec_from_capacitance(c, q01, ng)?,
            QubitDef::Charging(ec) => TransmonSpec::new(ec, calibrate_ej(q01, ec, ng)?)?.with_offset_charge(ng),
        };
        solve_spectrum(&spec, 3)
    }
}

struct JRow {
    q1: f64,
    q2: f64,
    j: Option<f64>,
    terms: Option<[f64; 2]>,
    reliable: bool,
    warnings: Vec<String>,
}

pub fn jrate(a: JrateArgs, exec: Execution) -> CliResult<Outcome> {
    let path = required(a.impedance.clone(), "impedance")?;
    let q1def = QubitDef::from_args(a.c1, a.ec1, 1)?;
    let q2def = QubitDef::from_args(a.c2, a.ec2, 2)?;
    let mode = a.mode.unwrap_or(SweepMode::Equal);
    let grid = sweep_grid(a.from, a.to, a.points, 101)?;
    let fixed = match mode {
        SweepMode::Fixed => Some(to_angular(required(a.fixed, "fixed")?.0)),
        SweepMode::Equal => None,
    };
    let table = load_table(&path)?;
    let (port1, port2) = port_pair(a.port1, a.port2, table.port_count())?;
    let (lo, hi) = table.range();
    for w in grid.iter().chain(fixed.iter()) {
        if *w < lo || *w > hi {
            return Err(usage(format!(
                "qubit frequency {:.6} GHz lies outside the impedance data {:.6}..{:.6} GHz",
                ghz(*w),
                ghz(lo),
                ghz(hi)
            )));
        }
    }
    let ng = a.ng.unwrap_or(0.0);
    let opts = ImpedanceOptions {
        port1,
        port2,
        ..ImpedanceOptions::default()
    };
    let fixed_qubit = match fixed {
        Some(w) => Some(q1def.at(w, ng)?),
        None => None,
    };
    let rows: Vec<JRow> = par::map(exec, &grid, |&w| {
        let q1 = fixed.unwrap_or(w);
        let res = (|| {
            let s1 = match &fixed_qubit {
                Some(s) => s.clone(),
                None => q1def.at(w, ng)?,
            };
            let s2 = q2def.at(w, ng)?;
            j_impedance(&s1, &s2, &table, opts)
        })();
        match res {
            Ok(r) => JRow {
                q1,
                q2: w,
                j: Some(r.energy),
                terms: r.terms,
                reliable: r.reliable,
                warnings: r.warnings,
            },
            Err(e) => JRow {
                q1,
                q2: w,
                j: None,
                terms: None,
                reliable: false,
                warnings: vec![format!("error: {e}")],
            },
        }
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    let write_err = |e: csv::Error| CliError::Compute(zcoupling::Error::InvalidParameter(e.to_string()));
    w.write_record(["q1_GHz", "q2_GHz", "J_MHz", "term1_MHz", "term2_MHz", "reliable", "warnings"])
        .map_err(write_err)?;
    let f = |x: Option<f64>| x.map_or("nan".to_string(), |v| format!("{:.9}", energy_to_mhz(v)));
    for r in &rows {
        w.write_record([
            format!("{:.9}", ghz(r.q1)),
            format!("{:.9}", ghz(r.q2)),
            f(r.j),
            f(r.terms.map(|t| t[0])),
            f(r.terms.map(|t| t[1])),
            r.reliable.to_string(),
            r.warnings.join("; "),
        ])
        .map_err(write_err)?;
    }
    let csv_text = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv");

    let failed = rows.iter().filter(|r| r.j.is_none()).count();
    let unreliable = rows.iter().filter(|r| r.j.is_some() && !r.reliable).count();
    let js: Vec<f64> = rows.iter().filter_map(|r| r.j).map(energy_to_mhz).collect();
    let results = object(json!({
        "mode": match mode { SweepMode::Equal => "equal", SweepMode::Fixed => "fixed" },
        "ports": [port1 + 1, port2 + 1],
        "points": rows.len(),
        "unreliable_points": unreliable,
        "failed_points": failed,
        "j_min_MHz": js.iter().copied().reduce(f64::min),
        "j_max_MHz": js.iter().copied().reduce(f64::max),
        "discarded_loss": table.discarded_loss(),
    }));
    let x = if mode == SweepMode::Equal { "q (GHz)" } else { "q2 (GHz)" };
    let plot = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x}'\nset ylabel 'J/h (MHz)'\nplot 'jrate.csv' using 2:3 with linespoints\n"
    );
    let mut outcome = Outcome::new(results).file("jrate.csv", csv_text);
    outcome.plot = Some(plot);
    if unreliable > 0 {
        outcome
            .warnings
            .push(format!("{unreliable} point(s) near an impedance pole are marked unreliable"));
    }
    if failed > 0 {
        outcome.warnings.push(format!("{failed} point(s) failed"));
        outcome.passed = false;
    }
    Ok(outcome)
}

pub fn jcap(a: JcapArgs) -> CliResult<Outcome> {
    let (c1, c2, cc) = (required(a.c1, "c1")?, required(a.c2, "c2")?, required(a.cc, "cc")?);
    let (q1, q2) = (required(a.q1, "q1")?, required(a.q2, "q2")?);
    let r = checked(j_capacitive(c1.0, c2.0, cc.0, to_angular(q1.0), to_angular(q2.0)))?;
    Ok(Outcome::new(object(json!({
        "j_MHz": r.over_h_mhz(),
        "j_rad_per_s": r.energy / HBAR,
    }))))
}

pub fn fitcc(a: FitccArgs) -> CliResult<Outcome> {
    let j = required(a.j, "j")?;
    let (c1, c2) = (required(a.c1, "c1")?, required(a.c2, "c2")?);
    let (q1, q2) = (required(a.q1, "q1")?, required(a.q2, "q2")?);
    let cc = checked(fit_cc(j.0 * PLANCK, c1.0, c2.0, to_angular(q1.0), to_angular(q2.0)))?;
    Ok(Outcome::new(object(json!({ "cc_fF": cc / FEMTOFARAD }))))
}

pub fn zz(a: ZzArgs, exec: Execution) -> CliResult<Outcome> {
    let freq = |f: Option<Frequency>, k: &str| required(f, k).map(|v| to_angular(v.0));
    let (q1, q2) = (freq(a.q1, "q1")?, freq(a.q2, "q2")?);
    let alphas = [freq(a.alpha1, "alpha1")?, freq(a.alpha2, "alpha2")?, freq(a.alpha_c, "alpha_c")?];
    let j12 = required(a.j12, "j12")?.0 * PLANCK;
    let path = required(a.j_curve.clone(), "j_curve")?;
    let mut grid = sweep_grid(a.from, a.to, a.points, 101)?;
    readable(&path)?;
    let curve = JCurve::read_csv(&path).map_err(input_error(&path))?;
    let (lo, hi) = (curve.qc[0], curve.qc[curve.qc.len() - 1]);
    // The curve file stores 9 decimals of GHz; endpoints that agree to that
    // precision are clamped onto the curve's domain.
    let slack = 1e-9 * hi;
    for w in grid.iter_mut() {
        if *w < lo && *w > lo - slack {
            *w = lo;
        }
        if *w > hi && *w < hi + slack {
            *w = hi;
        }
    }
    if grid[0] < lo || grid[grid.len() - 1] > hi {
        return Err(usage(format!(
            "coupler sweep {:.6}..{:.6} GHz exceeds the J curve {:.6}..{:.6} GHz",
            ghz(grid[0]),
            ghz(grid[grid.len() - 1]),
            ghz(lo),
            ghz(hi)
        )));
    }
    let template = checked(DuffingSystem::new([q1, q2, grid[0]], alphas, j12, 0.0, 0.0))?
        .with_truncation(a.truncation.unwrap_or(zcoupling::zz::DEFAULT_TRUNCATION));
    checked(template.validate())?;
    let sweep = sweep_coupler(&template, &grid, &curve, exec)?;
    let mut crossings = String::from("crossing_GHz\n");
    for c in &sweep.crossings {
        let _ = writeln!(crossings, "{:.9}", ghz(*c));
    }
    let results = object(json!({
        "points": grid.len(),
        "truncation": template.truncation,
        "flagged_points": sweep.flagged(),
        "crossings_GHz": sweep.crossings.iter().map(|&c| ghz(c)).collect::<Vec<_>>(),
    }));
    let mut outcome = Outcome::new(results)
        .file("zz.csv", sweep.to_csv())
        .file("zz_crossings.csv", crossings);
    outcome.plot = Some(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'q_c (GHz)'\nset ylabel 'ZZ (kHz)'\nset xzeroaxis\nplot 'zz.csv' using 1:2 with linespoints\n"
            .to_string(),
    );
    outcome.warnings = sweep.warnings.clone();
    Ok(outcome)
}

pub fn netlist_z(a: NetlistZArgs, exec: Execution) -> CliResult<Outcome> {
    let path = required(a.netlist.clone(), "netlist")?;
    let grid = sweep_grid(a.from, a.to, a.points, 201)?;
    if grid.len() < 2 {
        return Err(usage("netlist-z needs at least two grid points"));
    }
    readable(&path)?;
    let net = Netlist::read(&path).map_err(input_error(&path))?;
    let ev = checked(net.evaluate_z(&grid, exec))?;
    let ports = net.port_count();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut poles = Map::new();
    for i in 0..ports {
        for j in i..ports {
            let p = checked(net.find_poles(i, j, lo, hi, 4001))?;
            poles.insert(format!("Z{}{}", i + 1, j + 1), json!(p.iter().map(|&w| ghz(w)).collect::<Vec<_>>()));
        }
    }
    let results = object(json!({
        "ports": ports,
        "points": ev.table.len(),
        "skipped_GHz": ev.skipped.iter().map(|&w| ghz(w)).collect::<Vec<_>>(),
        "poles_GHz": Value::Object(poles),
    }));
    let outcome = Outcome::new(results);
    Ok(match a.format.unwrap_or(TableFormat::Csv) {
        TableFormat::Csv => {
            let mut o = outcome.file("netlist_z.csv", network::csv::write_csv(&ev.table));
            // Column 2 + P² is Im Z11 in the freq_hz, re(...), im(...) layout.
            o.plot = Some(format!(
                "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'f (GHz)'\nset ylabel 'Im Z (ohm)'\nset logscale y\nplot 'netlist_z.csv' using ($1/1e9):(abs(${})) with lines\n",
                2 + ports * ports
            ));
            o
        }
        TableFormat::Touchstone => {
            let file = checked(NetworkFile::from_impedance_table(
                &ev.table,
                ParameterKind::Z,
                DataFormat::RealImag,
                FrequencyUnit::GHz,
            ))?;
            outcome.file(format!("netlist_z.s{ports}p"), write_touchstone(&file))
        }
    })
}

pub fn pv_check(a: PvCheckArgs, exec: Execution) -> CliResult<Outcome> {
    let tolerance = a.tolerance.unwrap_or(1e-2);
    let (table, probe, source) = match (&a.impedance, a.oracle_q) {
        (Some(p), None) => {
            let q = to_angular(required(a.q, "q")?.0);
            (load_table(p)?, q, p.display().to_string())
        }
        (None, Some(qf)) => {
            if !(qf > 0.0) {
                return Err(usage("oracle_q must be positive"));
            }
            let (t, probe) = checked(fixtures::pv_oracle(qf, exec))?;
            let q = a.q.map_or(probe, |f| to_angular(f.0));
            (t, q, format!("oracle Q={qf}"))
        }
        _ => return Err(usage("give exactly one of 'impedance' or 'oracle_q'")),
    };
    let (i, j) = port_pair(a.port1, a.port2, table.port_count())?;
    let pv = pv_integral_check(&table, i, j, probe)?;
    let passed = !pv.lossless && pv.relative_gap <= tolerance;
    let results = object(json!({
        "source": source,
        "q_GHz": ghz(probe),
        "pv_value": pv.pv_value,
        "reference": pv.reference,
        "relative_gap": pv.relative_gap,
        "tolerance": tolerance,
        "tail_fraction": pv.tail_fraction,
        "lossless": pv.lossless,
        "passed": passed,
    }));
    let mut outcome = Outcome::new(results);
    if pv.lossless {
        outcome
            .warnings
            .push("table is lossless; the identity needs a lossy table".to_string());
    }
    outcome.passed = passed;
    Ok(outcome)
}

pub fn oracle(a: OracleArgs, exec: Execution) -> CliResult<Outcome> {
    let selector: Selector = a
        .selector
        .as_deref()
        .unwrap_or("all")
        .parse()
        .map_err(|e: zcoupling::Error| usage(e.to_string()))?;
    let checks = selftest::run(&selector, exec);
    let passed = checks.iter().all(|c| c.passed);
    let list: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "group": c.group.name(),
                "name": c.name,
                "passed": c.passed,
                "value": c.value,
                "tolerance": c.tolerance,
                "detail": c.detail,
            })
        })
        .collect();
    let results = object(json!({
        "groups": selector.groups().iter().map(|g| g.name()).collect::<Vec<_>>(),
        "passed": checks.iter().filter(|c| c.passed).count(),
        "failed": checks.iter().filter(|c| !c.passed).count(),
        "checks": list,
    }));
    let mut outcome = Outcome::new(results);
    outcome.text = Some(checks.iter().map(|c| c.to_string()).collect());
    outcome.passed = passed;
    Ok(outcome)
}
