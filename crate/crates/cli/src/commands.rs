//! Subcommand bodies. Each builds a table, a JSON summary and optionally a
//! chart, then [`emit`] writes them.

use std::io::Write;

use nmdrive_core::blp::{pair_series, SearchConfig, StatePair};
use nmdrive_core::rates::{nondriven_rate, rate_sample};
use nmdrive_core::rhp::{max_cross_validation_error, rhp_measure, ChoiProbe, RhpMethod, RhpReport};
use nmdrive_core::{evolve, grid_propagators, Error, GeneratorSpec, QubitState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BlpArgs, Cli, Command, Common, EvolveArgs, Format, MethodChoice, RhpArgs, SearchArgs, SweepArgs};
use crate::compare::run_compare;
use crate::config::{setup_provenance, Scenario, ScenarioFile, Setup};
use crate::error::{CliError, Result};
use crate::measures;
use crate::output::{with_output, write_json, Cell, Provenance, Table};
use crate::plot::{emit_plot, Chart, Series};
use crate::sweep::{run_sweep, sweep_table, SweepSpec};

struct Report {
    provenance: Vec<(String, String)>,
    table: Table,
    summary: Value,
    chart: Option<Chart>,
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let (common, report) = match &cli.command {
        Command::Rates(c) => (c, rates(c)?),
        Command::Evolve(a) => (&a.common, evolve_cmd(a)?),
        Command::Rhp(a) => (&a.common, rhp(a)?),
        Command::Blp(a) => (&a.search.common, blp(a)?),
        Command::Compare(a) => (&a.common, compare(a)?),
        Command::Sweep(a) => (&a.search.common, sweep(a)?),
    };
    emit(common, report, stdout)
}

/// Defaults, then the config file, then flags.
pub fn scenario(c: &Common) -> Result<Scenario> {
    let mut sc = Scenario::default();
    if let Some(path) = &c.config {
        ScenarioFile::load(path)?.apply(&mut sc);
    }
    macro_rules! flag {
        ($($f:ident),*) => { $( if let Some(v) = c.$f { sc.$f = v; } )* };
    }
    flag!(regime, alpha, lambda, omega_0, omega_l, omega_a, rabi, tmax, step, substep, seed);
    if c.s.is_some() {
        sc.s = c.s;
    }
    if c.p.is_some() {
        sc.p = c.p;
    }
    Ok(sc)
}

fn search_config(a: &SearchArgs, seed: u64) -> SearchConfig {
    SearchConfig {
        directions: a.directions,
        random_pairs: a.random_pairs,
        refine: a.refine,
        max_iterations: a.max_iterations,
        seed,
    }
}

fn search_provenance(cfg: &SearchConfig) -> Vec<(String, String)> {
    vec![
        ("directions".into(), cfg.directions.to_string()),
        ("random_pairs".into(), cfg.random_pairs.to_string()),
        ("refine".into(), cfg.refine.to_string()),
        ("max_iterations".into(), cfg.max_iterations.to_string()),
    ]
}

fn prepare(command: &str, c: &Common) -> Result<(Scenario, Setup, Provenance)> {
    let sc = scenario(c)?;
    let setup = sc.resolve()?;
    for w in &setup.warnings {
        log::warn!("{w}");
    }
    let mut prov = vec![("command".to_string(), command.to_string())];
    prov.extend(sc.provenance());
    prov.extend(setup_provenance(&setup));
    Ok((sc, setup, prov))
}

fn time_label(setup: &Setup) -> &'static str {
    if matches!(setup.spec, GeneratorSpec::Undriven(_)) {
        "t"
    } else {
        "T"
    }
}

fn rates(c: &Common) -> Result<Report> {
    let (_, setup, provenance) = prepare("rates", c)?;
    let t = setup.grid.points().to_vec();
    let (table, summary, series) = match &setup.spec {
        GeneratorSpec::Undriven(u) => {
            let mut table = Table::new(&["t", "gamma"]);
            let mut gamma = Vec::with_capacity(t.len());
            for &ti in &t {
                let g = match nondriven_rate(ti, u.alpha, u.width) {
                    Ok(g) => g,
                    Err(Error::Pole { .. }) => f64::NAN,
                    Err(e) => return Err(e.into()),
                };
                table.push(vec![ti.into(), if g.is_nan() { Cell::Empty } else { g.into() }]);
                gamma.push(g);
            }
            let min = gamma.iter().copied().filter(|g| g.is_finite()).fold(f64::INFINITY, f64::min);
            let summary = json!({ "min_gamma": min, "markovian": u.is_markovian() });
            (table, summary, vec![Series::new("gamma", t.clone(), gamma)])
        }
        spec => {
            let p = spec.driven_params().expect("driven model");
            let cols = ["T", "gamma_minus", "gamma_zero", "gamma_plus", "lamb_minus", "lamb_zero", "lamb_plus"];
            let mut table = Table::new(&cols);
            let mut g = [Vec::new(), Vec::new(), Vec::new()];
            for &ti in &t {
                let r = rate_sample(ti, p.s(), p.p(), p.alpha)?;
                let (ga, la) = (r.gamma.as_array(), r.lamb.as_array());
                for k in 0..3 {
                    g[k].push(ga[k]);
                }
                let mut row = vec![Cell::Num(ti)];
                row.extend(ga.into_iter().chain(la).map(Cell::Num));
                table.push(row);
            }
            let min: Vec<f64> = g.iter().map(|v| v.iter().copied().fold(f64::INFINITY, f64::min)).collect();
            let summary = json!({
                "min_gamma_minus": min[0],
                "min_gamma_zero": min[1],
                "min_gamma_plus": min[2],
                "any_negative": min.iter().any(|m| *m < 0.0),
            });
            let [a, b, d] = g;
            let series = vec![
                Series::new("gamma_minus", t.clone(), a),
                Series::new("gamma_zero", t.clone(), b),
                Series::new("gamma_plus", t.clone(), d),
            ];
            (table, summary, series)
        }
    };
    let chart = Chart { title: "Decay rates".into(), x_label: time_label(&setup).into(), y_label: "gamma".into(), series };
    Ok(Report { provenance, table, summary, chart: Some(chart) })
}

fn evolve_cmd(a: &EvolveArgs) -> Result<Report> {
    let (_, setup, mut provenance) = prepare("evolve", &a.common)?;
    let r0: [f64; 3] = a.bloch.as_slice().try_into().map_err(|_| CliError::input("--bloch takes three values"))?;
    provenance.push(("bloch".into(), format!("{},{},{}", r0[0], r0[1], r0[2])));
    let rho0 = QubitState::from_bloch(r0)?;
    let traj = evolve(&rho0, &setup.spec, &setup.grid, &setup.integrator)?;
    let mut table = Table::new(&["t", "x", "y", "z", "purity"]);
    let mut xyz = [Vec::new(), Vec::new(), Vec::new()];
    for (&t, s) in setup.grid.points().iter().zip(&traj.states) {
        let b = s.bloch();
        for k in 0..3 {
            xyz[k].push(b[k]);
        }
        table.push(vec![t.into(), b[0].into(), b[1].into(), b[2].into(), s.purity().into()]);
    }
    let last = traj.states.last().expect("grid is nonempty");
    let summary = json!({ "final_bloch": last.bloch(), "final_purity": last.purity(), "diagnostics": traj.diagnostics });
    let t = setup.grid.points().to_vec();
    let [x, y, z] = xyz;
    let chart = Chart {
        title: "Bloch vector".into(),
        x_label: "t".into(),
        y_label: "component".into(),
        series: vec![Series::new("x", t.clone(), x), Series::new("y", t.clone(), y), Series::new("z", t, z)],
    };
    Ok(Report { provenance, table, summary, chart: Some(chart) })
}

#[derive(Serialize)]
struct RhpSummary {
    method: RhpMethod,
    integral: f64,
    measure: f64,
    divergent: bool,
    poles: Vec<f64>,
    tail_bound: f64,
}

impl From<&RhpReport> for RhpSummary {
    fn from(r: &RhpReport) -> Self {
        Self { method: r.method, integral: r.integral, measure: r.measure, divergent: r.divergent, poles: r.poles.clone(), tail_bound: r.tail_bound }
    }
}

fn rhp(a: &RhpArgs) -> Result<Report> {
    let (_, setup, mut provenance) = prepare("rhp", &a.common)?;
    provenance.push(("method".into(), format!("{:?}", a.method).to_lowercase()));
    let probe = ChoiProbe::default();
    let closed = RhpMethod::analytic_for(&setup.spec);
    let numeric = match a.method {
        MethodChoice::Numeric | MethodChoice::Both => Some(measures::divisibility(&setup)?),
        MethodChoice::Analytic => None,
    };
    let analytic = match (a.method, closed) {
        (MethodChoice::Numeric, _) => None,
        (MethodChoice::Analytic, None) => {
            return Err(CliError::input(format!("no closed form for the {} model", setup.spec.model())))
        }
        (MethodChoice::Both, None) => {
            log::warn!("no closed form for the {} model; numeric only", setup.spec.model());
            None
        }
        (_, Some(m)) => Some(rhp_measure(&setup.spec, &setup.grid, m, &probe)?),
    };
    let cross = if numeric.is_some() && analytic.is_some() {
        max_cross_validation_error(&setup.spec, &setup.grid, &probe)?
    } else {
        None
    };
    let tl = time_label(&setup);
    let mut table = Table::new(&[tl, "g_numeric", "g_analytic"]);
    let nan_empty = |v: Option<f64>| match v {
        Some(x) if x.is_finite() => Cell::Num(x),
        _ => Cell::Empty,
    };
    let t = setup.grid.points();
    for (i, &ti) in t.iter().enumerate() {
        table.push(vec![
            ti.into(),
            nan_empty(numeric.as_ref().map(|r| r.g[i])),
            nan_empty(analytic.as_ref().map(|r| r.g[i])),
        ]);
    }
    let summary = json!({
        "numeric": numeric.as_ref().map(RhpSummary::from),
        "analytic": analytic.as_ref().map(RhpSummary::from),
        "max_cross_validation_error": cross,
    });
    let mut series = Vec::new();
    if let Some(r) = &numeric {
        series.push(Series::new("g numeric", t.to_vec(), r.g.clone()));
    }
    if let Some(r) = &analytic {
        series.push(Series::new("g analytic", t.to_vec(), r.g.clone()));
    }
    let chart = Chart { title: "Divisibility rate".into(), x_label: tl.into(), y_label: "g".into(), series };
    Ok(Report { provenance, table, summary, chart: Some(chart) })
}

fn blp(a: &BlpArgs) -> Result<Report> {
    let (sc, setup, mut provenance) = prepare("blp", &a.search.common)?;
    let props = grid_propagators(&setup.spec, &setup.grid, &setup.integrator)?;
    let (pair, summary) = match &a.pair {
        Some(v) if v.len() != 6 => return Err(CliError::input("--pair takes six values")),
        Some(v) => {
            provenance.push(("pair".into(), v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")));
            let pair = StatePair::from_bloch([v[0], v[1], v[2]], [v[3], v[4], v[5]])?;
            let s = pair_series(&setup.grid, &props, &pair);
            (pair, json!({ "measure": s.backflow, "bloch1": [v[0], v[1], v[2]], "bloch2": [v[3], v[4], v[5]] }))
        }
        None => {
            let cfg = search_config(&a.search, sc.seed);
            provenance.extend(search_provenance(&cfg));
            let report = nmdrive_core::blp::search_pairs(&setup.grid, &props, &cfg);
            let summary = serde_json::to_value(&report).expect("report serializes");
            (report.best_pair(), summary)
        }
    };
    let s = pair_series(&setup.grid, &props, &pair);
    let mut table = Table::new(&["t", "D", "sigma"]);
    for ((&t, &d), &g) in s.t.iter().zip(&s.distance).zip(&s.sigma) {
        table.push(vec![t.into(), d.into(), g.into()]);
    }
    let chart = Chart {
        title: "Trace distance of the best pair".into(),
        x_label: time_label(&setup).into(),
        y_label: "D, sigma".into(),
        series: vec![Series::new("D", s.t.clone(), s.distance.clone()), Series::new("sigma", s.t.clone(), s.sigma.clone())],
    };
    Ok(Report { provenance, table, summary, chart: Some(chart) })
}

fn compare(a: &SearchArgs) -> Result<Report> {
    let sc = scenario(&a.common)?;
    let cfg = search_config(a, sc.seed);
    let mut provenance = vec![("command".to_string(), "compare".to_string())];
    provenance.extend(sc.provenance());
    provenance.extend(search_provenance(&cfg));
    let cmp = run_compare(&sc, &cfg)?;
    provenance.push(("driven_model".into(), cmp.driven.model.clone()));
    let mut table = Table::new(&["system", "model", "n_rhp", "rhp_integral", "rhp_divergent", "n_blp", "best_bloch1", "best_bloch2"]);
    let fmt = |b: [f64; 3]| format!("{} {} {}", b[0], b[1], b[2]);
    for (name, m) in [("undriven", &cmp.undriven), ("driven", &cmp.driven)] {
        table.push(vec![
            Cell::Text(name.into()),
            Cell::Text(m.model.clone()),
            m.n_rhp.into(),
            m.rhp_integral.into(),
            Cell::Text(m.rhp_divergent.to_string()),
            m.n_blp.into(),
            Cell::Text(fmt(m.best_bloch1)),
            Cell::Text(fmt(m.best_bloch2)),
        ]);
    }
    let summary = serde_json::to_value(&cmp).expect("comparison serializes");
    let chart = if a.common.plot.is_some() {
        // both rates against lambda t
        let mut series = Vec::new();
        let off = Scenario { regime: crate::config::RegimeChoice::Undriven, ..sc.clone() };
        let mut on = sc.clone();
        if on.regime == crate::config::RegimeChoice::Undriven {
            on.regime = crate::config::RegimeChoice::Auto;
        }
        for (label, s) in [("undriven", off), ("driven", on)] {
            let setup = s.resolve()?;
            let r = measures::divisibility(&setup)?;
            let x = setup.grid.points().iter().map(|t| t * setup.spec.time_unit()).collect();
            series.push(Series::new(label, x, r.g));
        }
        Some(Chart { title: "Divisibility rate".into(), x_label: "lambda t".into(), y_label: "g".into(), series })
    } else {
        None
    };
    Ok(Report { provenance, table, summary, chart })
}

fn sweep(a: &SweepArgs) -> Result<Report> {
    let base = scenario(&a.search.common)?;
    let cfg = search_config(&a.search, base.seed);
    let spec = SweepSpec { axes: a.axes.clone(), base, output: a.outputs, search: cfg };
    let mut provenance = vec![("command".to_string(), "sweep".to_string())];
    provenance.extend(spec.base.provenance());
    for ax in &spec.axes {
        provenance.push(("axis".into(), format!("{}={}:{}:{}", ax.name, ax.start, ax.stop, ax.steps)));
    }
    provenance.push(("outputs".into(), serde_json::to_value(spec.output).expect("enum").as_str().unwrap_or("").to_string()));
    if matches!(spec.output, crate::sweep::SweepOutput::Blp | crate::sweep::SweepOutput::BothMeasures) {
        provenance.extend(search_provenance(&cfg));
    }
    let rows = run_sweep(&spec)?;
    let table = sweep_table(&spec, &rows);
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = json!({ "points": rows.len(), "failures": failures, "rows": rows });
    let chart = sweep_chart(&spec, &table);
    Ok(Report { provenance, table, summary, chart })
}

/// First measure column against the first axis, one line per combination
/// of the remaining axes.
fn sweep_chart(spec: &SweepSpec, table: &Table) -> Option<Chart> {
    let n_axes = spec.axes.len();
    let y_col = table.columns.iter().skip(n_axes + 3).find(|c| c.as_str() != "error")?.clone();
    let y = table.column(&y_col)?;
    let first = spec.axes[0].values();
    let per_line = first.len();
    let lines = table.rows.len() / per_line;
    let mut series = Vec::new();
    for k in 0..lines {
        // rows for fixed outer values are strided when the first axis is slowest
        let idx: Vec<usize> = (0..per_line).map(|i| i * lines + k).collect();
        let label = spec.axes[1..]
            .iter()
            .enumerate()
            .map(|(j, ax)| match &table.rows[idx[0]][j + 1] {
                Cell::Num(v) => format!("{}={v}", ax.name),
                _ => ax.name.clone(),
            })
            .collect::<Vec<_>>()
            .join(", ");
        let label = if label.is_empty() { y_col.clone() } else { label };
        series.push(Series::new(label, first.clone(), idx.iter().map(|&i| y[i]).collect()));
    }
    Some(Chart { title: format!("{y_col} sweep"), x_label: spec.axes[0].name.clone(), y_label: y_col, series })
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => json!(v),
        Cell::Num(v) => json!(v.to_string()),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

fn emit(c: &Common, report: Report, stdout: &mut dyn Write) -> Result<()> {
    let Report { provenance, table, summary, chart } = report;
    if let (Some(path), Some(chart)) = (&c.plot, &chart) {
        emit_plot(chart, path)?;
    } else if c.plot.is_some() {
        return Err(CliError::input("nothing to plot for this command"));
    }
    if let Some(path) = &c.summary {
        with_output(Some(path), stdout, |w| write_json(w, &summary))?;
    } else {
        log::info!("summary: {summary}");
    }
    match c.format {
        Format::Csv => with_output(c.out.as_deref(), stdout, |w| table.write_csv(w, &provenance)),
        Format::Json => {
            let rows: Vec<Vec<Value>> = table.rows.iter().map(|r| r.iter().map(cell_json).collect()).collect();
            let doc = json!({
                "provenance": provenance.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
                "columns": table.columns,
                "rows": rows,
                "summary": summary,
            });
            with_output(c.out.as_deref(), stdout, |w| write_json(w, &doc))
        }
    }
}
