use std::fmt::Write;

use pdm_core::coherent::y_moments;
use pdm_core::special_fns::hermite_function;
use pdm_core::{
    apply_ladder, build_second_kind, coordinate_map, effective_problem, energy_moments, fmt_sig, ladder_coefficient,
    mass_at, poisson_prob, pullback_potential, pullback_wavefunction, solve_halfline, solve_levels, uncertainty_product,
    wkb_level, CoherentState, CoordinateMap, EigenSolution, FirstKindOscillator, Ladder, MassFamily, OrderingParameter,
    PdmError, PotentialSpec, SecondKindPotential, SolverConfig, Space, WaveSample,
};
use serde_json::{json, Value};

use crate::config::{Command, Direction, Format, PotentialArg, RunConfig, SpaceArg};

type Result<T> = std::result::Result<T, PdmError>;

/// Runs one command and returns the text to emit.
pub fn run(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Eigenfunction => eigenfunction(cfg),
        Command::WkbCompare => wkb_compare(cfg),
        Command::Ladder => ladder(cfg),
        Command::Coherent => coherent(cfg),
        Command::Catalog => catalog(cfg),
        Command::FirstKind => first_kind(cfg),
        Command::SecondKind => second_kind(cfg),
    }
}

/// `v` rounded to the nine significant digits that CSV output carries.
fn sig(v: f64) -> Value {
    if v.is_finite() {
        json!(fmt_sig(v).parse::<f64>().unwrap_or(v))
    } else {
        Value::Null
    }
}

fn sigs(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| sig(x)).collect())
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn solve(v: &PotentialSpec, levels: usize, solver: &SolverConfig) -> Result<Vec<EigenSolution>> {
    if v.domain.lo.is_finite() {
        solve_halfline(v, levels - 1, solver)
    } else {
        solve_levels(v, levels - 1, solver)
    }
}

fn ordering(cfg: &RunConfig, fam: &MassFamily) -> OrderingParameter {
    cfg.ordering.map(OrderingParameter::new).unwrap_or_else(|| fam.natural_ordering())
}

/// The y-problem of the PDM Hamiltonian whose x-potential is the pull-back of
/// the configured potential.
fn pdm_problem(cfg: &RunConfig) -> Result<(MassFamily, CoordinateMap, f64, PotentialSpec)> {
    let fam = cfg.mass_family()?;
    let map = coordinate_map(&fam)?;
    let a = ordering(cfg, &fam).a;
    let vx = pullback_potential(&cfg.potential_spec()?, &map)?;
    let vy = effective_problem(&vx, &map, a);
    Ok((fam, map, a, vy))
}

/// Every `stride`-th point plus the last, about `points` in all.
fn thin(w: &WaveSample, points: usize) -> Result<WaveSample> {
    let n = w.len();
    let stride = ((n - 1) / (points - 1).max(1)).max(1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    let grid = idx.iter().map(|&i| w.grid[i]).collect();
    let re = idx.iter().map(|&i| w.re[i]).collect();
    match &w.im {
        None => WaveSample::real(grid, re, w.space),
        Some(im) => {
            let vals: Vec<_> = idx
                .iter()
                .map(|&i| pdm_core::Complex64::new(w.re[i], im[i]))
                .collect();
            WaveSample::complex(grid, &vals, w.space)
        }
    }
}

fn in_space(w: &WaveSample, space: SpaceArg, map: &CoordinateMap) -> Result<WaveSample> {
    match space {
        SpaceArg::Y => Ok(w.clone()),
        SpaceArg::X => pullback_wavefunction(w, map),
    }
}

fn wave_json(w: &WaveSample) -> Value {
    let mut obj = json!({
        "space": match w.space { Space::X => "x", Space::Y => "y" },
        "grid": sigs(&w.grid),
        "re": sigs(&w.re),
    });
    if let Some(im) = &w.im {
        obj["im"] = sigs(im);
    }
    obj
}

fn levels_json(sols: &[EigenSolution]) -> Value {
    Value::Array(
        sols.iter()
            .map(|s| json!({"k": s.k, "energy": sig(s.energy)}))
            .collect(),
    )
}

fn spectrum(cfg: &RunConfig) -> Result<String> {
    let (fam, _, a, vy) = pdm_problem(cfg)?;
    let sols = solve(&vy, cfg.levels, &cfg.solver())?;
    Ok(match cfg.format {
        Format::Csv => csv(
            &["k", "E"],
            sols.iter().map(|s| vec![s.k.to_string(), fmt_sig(s.energy)]),
        ),
        Format::Json => json_text(&json!({
            "command": "spectrum",
            "family": fam.name(),
            "potential": cfg.potential_arg(),
            "ordering": sig(a),
            "levels": levels_json(&sols),
        })),
    })
}

fn eigenfunction(cfg: &RunConfig) -> Result<String> {
    let (fam, map, _, vy) = pdm_problem(cfg)?;
    let sols = solve(&vy, cfg.k + 1, &cfg.solver())?;
    let s = &sols[cfg.k];
    let wave = in_space(&thin(&s.wave, cfg.points)?, cfg.space, &map)?;
    Ok(match cfg.format {
        Format::Csv => wave.to_csv(),
        Format::Json => json_text(&json!({
            "command": "eigenfunction",
            "family": fam.name(),
            "potential": cfg.potential_arg(),
            "k": s.k,
            "energy": sig(s.energy),
            "wave": wave_json(&wave),
        })),
    })
}

fn wkb_compare(cfg: &RunConfig) -> Result<String> {
    let v = cfg.potential_spec()?;
    let numeric = solve(&v, cfg.levels, &cfg.solver())?;
    let wkb = (0..cfg.levels)
        .map(|k| wkb_level(&v, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(match cfg.format {
        Format::Csv => csv(
            &["k", "E_wkb", "E_schrodinger"],
            wkb.iter()
                .zip(&numeric)
                .map(|(w, s)| vec![w.k.to_string(), fmt_sig(w.energy), fmt_sig(s.energy)]),
        ),
        Format::Json => json_text(&json!({
            "command": "wkb-compare",
            "potential": cfg.potential_arg(),
            "levels": wkb.iter().zip(&numeric).map(|(w, s)| json!({
                "k": w.k,
                "E_wkb": sig(w.energy),
                "E_schrodinger": sig(s.energy),
                "turning_points": [sig(w.turning_points.0), sig(w.turning_points.1)],
            })).collect::<Vec<_>>(),
        })),
    })
}

fn ladder(cfg: &RunConfig) -> Result<String> {
    let (dir, step, name) = match cfg.direction {
        Direction::Raise => (Ladder::Raise, 1isize, "raise"),
        Direction::Lower => (Ladder::Lower, -1isize, "lower"),
    };
    let top = cfg.k + if step > 0 { cfg.steps } else { 0 };
    let half = (2.0 * top as f64 + 1.0).sqrt() + 10.0;
    let n = cfg.grid_points;
    let h = 2.0 * half / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| -half + i as f64 * h).collect();
    let re = grid.iter().map(|&y| hermite_function(cfg.k, y)).collect();
    let start = WaveSample::real(grid, re, Space::Y)?;
    let mut wave = start.clone();
    let mut expected = 1.0;
    let mut level = cfg.k as isize;
    for _ in 0..cfg.steps {
        wave = apply_ladder(dir, &wave)?;
        let from = level as f64;
        expected *= if step > 0 { (2.0 * (from + 1.0)).sqrt() } else { (2.0 * from.max(0.0)).sqrt() };
        level = (level + step).max(0);
    }
    let coefficient = ladder_coefficient(&wave) / ladder_coefficient(&start);
    let map = coordinate_map(&cfg.mass_family()?)?;
    let out = in_space(&thin(&wave, cfg.points)?, cfg.space, &map)?;
    Ok(match cfg.format {
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "# k={} direction={} steps={} coefficient={} expected={}",
                cfg.k,
                name,
                cfg.steps,
                fmt_sig(coefficient),
                fmt_sig(expected)
            );
            s.push_str(&out.to_csv());
            s
        }
        Format::Json => json_text(&json!({
            "command": "ladder",
            "k": cfg.k,
            "direction": name,
            "steps": cfg.steps,
            "coefficient": sig(coefficient),
            "expected": sig(expected),
            "wave": wave_json(&out),
        })),
    })
}

fn coherent(cfg: &RunConfig) -> Result<String> {
    let z = cfg.z_value()?;
    let fam = cfg.mass_family()?;
    let state = CoherentState::new(z, fam)?;
    let (mean, stddev) = energy_moments(z);
    let product = uncertainty_product(&state)?;
    let half = 8.0 + z.im.abs();
    let y = state.y_sample(half, cfg.points)?;
    let (ybar, _, pbar, _) = y_moments(&state.y_sample(12.0 + z.im.abs(), 4001)?)?;
    let x = pullback_wavefunction(&y, state.oscillator().map())?;
    let density = x.density();
    Ok(match cfg.format {
        Format::Csv => csv(
            &["x", "density"],
            x.grid.iter().zip(&density).map(|(g, d)| vec![fmt_sig(*g), fmt_sig(*d)]),
        ),
        Format::Json => json_text(&json!({
            "command": "coherent",
            "family": fam.name(),
            "z": [sig(z.re), sig(z.im)],
            "n_trunc": state.n_trunc,
            "mean": sig(mean),
            "stddev": sig(stddev),
            "uncertainty_product": sig(product),
            "mean_y": sig(ybar),
            "mean_p": sig(pbar),
            "poisson": (0..=state.n_trunc)
                .map(|n| json!({"n": n, "p": sig(poisson_prob(z, n))}))
                .collect::<Vec<_>>(),
            "density": {"x": sigs(&x.grid), "value": sigs(&density)},
        })),
    })
}

struct CatalogRow {
    family: MassFamily,
    mappable: bool,
    closed_form: bool,
    jacobian_error: Option<f64>,
}

/// Largest relative `|J^2 m0 - m| / m` over a few interior points.
fn jacobian_error(fam: &MassFamily, map: &CoordinateMap) -> Result<f64> {
    let dom = map.x_domain;
    let lo = if dom.lo.is_finite() { dom.lo } else { -3.0 };
    let hi = if dom.hi.is_finite() { dom.hi } else { lo.max(0.0) + 3.0 };
    let poles = map.singular_points();
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let x = lo + (hi - lo) * (i as f64 - 0.37) / 9.0;
        if poles.iter().any(|p| (x - p).abs() < 1e-6) {
            continue;
        }
        let m = mass_at(fam, x)?;
        let j = map.jacobian(x);
        worst = worst.max((j * j * fam.m0 - m).abs() / m);
    }
    Ok(worst)
}

fn catalog_families() -> Vec<MassFamily> {
    [
        MassFamily::singular0(0.0, 1.0),
        MassFamily::singular_n(1, 0.0, 1.0),
        MassFamily::singular_n(2, 0.0, 1.0),
        MassFamily::singular_n(3, 0.0, 1.0),
        MassFamily::regular(1.0),
        MassFamily::rational_w(0.5),
        MassFamily::quadratic_c(1.0),
        MassFamily::constant(1.0),
    ]
    .into_iter()
    .map(|f| f.expect("catalog parameters are valid"))
    .collect()
}

fn catalog(cfg: &RunConfig) -> Result<String> {
    let mut rows = Vec::new();
    for family in catalog_families() {
        let row = match coordinate_map(&family) {
            Ok(map) => CatalogRow {
                family,
                mappable: true,
                closed_form: map.is_closed_form(),
                jacobian_error: Some(jacobian_error(&family, &map)?),
            },
            Err(PdmError::NonBijective(_)) => CatalogRow {
                family,
                mappable: false,
                closed_form: false,
                jacobian_error: None,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(match cfg.format {
        Format::Csv => csv(
            &["family", "x_lo", "x_hi", "natural_a", "mappable", "closed_form", "jacobian_error"],
            rows.iter().map(|r| {
                let dom = r.family.domain();
                vec![
                    r.family.name().replace(',', ";"),
                    fmt_sig(dom.lo),
                    fmt_sig(dom.hi),
                    fmt_sig(r.family.natural_ordering().a),
                    r.mappable.to_string(),
                    r.closed_form.to_string(),
                    r.jacobian_error.map(fmt_sig).unwrap_or_default(),
                ]
            }),
        ),
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|r| {
                    let dom = r.family.domain();
                    json!({
                        "family": r.family.name(),
                        "descriptor": r.family,
                        "x_domain": [sig(dom.lo), sig(dom.hi)],
                        "natural_a": sig(r.family.natural_ordering().a),
                        "mappable": r.mappable,
                        "closed_form": r.closed_form,
                        "jacobian_error": r.jacobian_error.map(sig),
                    })
                })
                .collect(),
        )),
    })
}

fn eigen_json(sols: &[EigenSolution], map: &CoordinateMap, points: usize) -> Result<Value> {
    let mut out = Vec::new();
    for s in sols {
        let x = pullback_wavefunction(&thin(&s.wave, points)?, map)?;
        out.push(json!({"k": s.k, "x": sigs(&x.grid), "psi": sigs(&x.re)}));
    }
    Ok(Value::Array(out))
}

fn first_kind(cfg: &RunConfig) -> Result<String> {
    let fam = cfg.mass_family()?;
    let osc = FirstKindOscillator::with_ordering(fam, ordering(cfg, &fam))?;
    let sols = osc.spectrum(cfg.levels - 1, &cfg.solver())?;
    let exact = osc.is_exact();
    Ok(match cfg.format {
        Format::Csv if exact => csv(
            &["k", "E_exact", "E_numeric"],
            sols.iter()
                .map(|s| vec![s.k.to_string(), fmt_sig(osc.energy(s.k)), fmt_sig(s.energy)]),
        ),
        Format::Csv => csv(
            &["k", "E_numeric"],
            sols.iter().map(|s| vec![s.k.to_string(), fmt_sig(s.energy)]),
        ),
        Format::Json => json_text(&json!({
            "command": "first-kind",
            "family": fam.name(),
            "ordering": sig(osc.ordering.a),
            "exact": exact,
            "levels": sols.iter().map(|s| json!({
                "k": s.k,
                "E_exact": if exact { sig(osc.energy(s.k)) } else { Value::Null },
                "E_numeric": sig(s.energy),
            })).collect::<Vec<_>>(),
            "eigenfunctions": eigen_json(&sols, osc.map(), cfg.points)?,
        })),
    })
}

fn second_kind(cfg: &RunConfig) -> Result<String> {
    let fam = cfg.mass_family()?;
    let pot = match cfg.potential_arg() {
        PotentialArg::Harmonic => SecondKindPotential::Harmonic,
        PotentialArg::Squeezed => SecondKindPotential::Squeezed,
        other => {
            return Err(PdmError::InvalidParameter(format!(
                "second-kind takes a harmonic or squeezed potential, got {other:?}"
            )))
        }
    };
    let osc = build_second_kind(fam, pot)?;
    let sols = osc.spectrum(cfg.levels - 1, &cfg.solver())?;
    let wkb = osc.wkb_spectrum(cfg.levels - 1)?;
    Ok(match cfg.format {
        Format::Csv => csv(
            &["k", "E_numeric", "E_wkb"],
            sols.iter()
                .zip(&wkb)
                .map(|(s, w)| vec![s.k.to_string(), fmt_sig(s.energy), fmt_sig(w.energy)]),
        ),
        Format::Json => json_text(&json!({
            "command": "second-kind",
            "family": fam.name(),
            "x_potential": osc.x_potential.name(),
            "y_potential": osc.y_potential.name(),
            "levels": sols.iter().zip(&wkb).map(|(s, w)| json!({
                "k": s.k,
                "E_numeric": sig(s.energy),
                "E_wkb": sig(w.energy),
            })).collect::<Vec<_>>(),
            "eigenfunctions": eigen_json(&sols, &coordinate_map(&fam)?, cfg.points)?,
        })),
    })
}
