use serde_json::json;
use spinhom::bulk_density::{all_spin_vectors, PhiTable};
use spinhom::connectivity::{classify, coarsening_side, ConnectivitySummary};
use spinhom::examples::run_examples;
use spinhom::gamma_limit::{broken_bonds, converge_report, energy_parts, extend, f_eps, f_hom, DomainSpec, MultiphaseField, SpinField};
use spinhom::rational::{format, to_f64};
use spinhom::surface_tension::SurfaceTable;
use spinhom::{Error, LatticeModel, Result, Spin};

use crate::output::Report;
use crate::{Command, Global, Input, TableArgs};

pub struct Outcome {
    pub report: Report,
    pub success: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self { report, success: true }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn spins(z: &[Spin]) -> String {
    join(&z.iter().map(|s| s.value()).collect::<Vec<_>>())
}

/// Parses a model and refuses it unless every hypothesis holds.
fn load(input: &Input) -> Result<(LatticeModel, ConnectivitySummary)> {
    let model = LatticeModel::from_json(&input.text)?;
    let report = model.validate();
    if !report.passed {
        let rules: Vec<String> = report.violations.iter().map(|v| format!("{} ({})", v.rule, v.witness)).collect();
        return Err(Error::InvalidModel(format!("{} fails validation: {}", input.path.display(), rules.join("; "))));
    }
    let summary = classify(&model);
    Ok((model, summary))
}

fn load_target(input: &Input, d: usize) -> Result<(DomainSpec, MultiphaseField)> {
    let (omega, target) = MultiphaseField::from_json(&input.text)?;
    Ok((omega.unwrap_or_else(|| DomainSpec::unit_cube(d)), target))
}

fn tables(model: &LatticeModel, summary: &ConnectivitySummary, target: &MultiphaseField, args: &TableArgs, g: &Global) -> Result<(SurfaceTable, PhiTable)> {
    let d = model.dimension();
    let phases: Vec<usize> = (1..=model.num_phases()).collect();
    let surface = SurfaceTable::compute(model, summary, &phases, &target.interface_normals(d)?, &args.t, g.execution())?;
    let phi = PhiTable::compute(model, summary, &all_spin_vectors(model.num_phases()), &args.m, &g.solve_options())?;
    Ok((surface, phi))
}

pub fn run(command: &Command, g: &Global) -> Result<Outcome> {
    Ok(match command {
        Command::Validate { model } => {
            let m = LatticeModel::from_json(&model.text)?;
            let v = m.validate();
            let mut r = Report::new(
                json!({
                    "dimension": m.dimension(),
                    "period": m.period(),
                    "num_phases": m.num_phases(),
                    "num_residues": m.num_residues(),
                    "passed": v.passed,
                    "violations": v.violations,
                }),
                vec!["rule", "witness", "message"],
            );
            for x in &v.violations {
                r.row(vec![x.rule.to_string(), x.witness.clone(), x.message.clone()]);
            }
            Outcome { report: r, success: v.passed }
        }
        Command::Components { model } => {
            let (m, s) = load(model)?;
            let sides: Vec<Option<i64>> = (1..=m.num_phases())
                .map(|j| s.has_infinite_component(j).then(|| coarsening_side(&m, &s, j, g.coarsening_cap)).transpose())
                .collect::<Result<_>>()?;
            let mut r = Report::new(
                json!({ "summary": s, "coarsening_sides": sides }),
                vec!["phase", "component", "residues", "classification", "displacement", "lift_diameter"],
            );
            for p in &s.phases {
                for (c, comp) in p.components.iter().enumerate() {
                    r.row(vec![
                        p.phase.to_string(),
                        c.to_string(),
                        join(&comp.residues),
                        serde_json::to_value(comp.classification)?.as_str().unwrap_or_default().to_string(),
                        comp.displacement.describe(),
                        comp.lift_diameter.map(|x| x.to_string()).unwrap_or_default(),
                    ]);
                }
            }
            r.into()
        }
        Command::Fhom { model, phase, normal, t } => {
            let (m, s) = load(model)?;
            let phases: Vec<usize> = if phase.is_empty() { (1..=m.num_phases()).collect() } else { phase.clone() };
            let table = SurfaceTable::compute(&m, &s, &phases, std::slice::from_ref(normal), t, g.execution())?;
            let mut r = Report::new(
                serde_json::to_value(&table)?,
                vec!["phase", "normal", "T", "value", "value_f64", "free_sites", "below_coarsening_side"],
            );
            for row in &table.rows {
                for c in &row.cells {
                    r.row(vec![
                        row.phase.to_string(),
                        join(&row.normal),
                        c.t_cell.to_string(),
                        format(&c.value),
                        c.value_f64.to_string(),
                        c.free_sites.to_string(),
                        c.below_coarsening_side.to_string(),
                    ]);
                }
            }
            r.into()
        }
        Command::Phi { model, z, m: m_list } => {
            let (m, s) = load(model)?;
            let zs = if z.is_empty() { all_spin_vectors(m.num_phases()) } else { z.clone() };
            let table = PhiTable::compute(&m, &s, &zs, m_list, &g.solve_options())?;
            let mut r = Report::new(
                serde_json::to_value(&table)?,
                vec!["z", "M", "phi", "phi_tilde", "periodic", "phi_f64", "phi_tilde_f64", "periodic_f64"],
            );
            for row in &table.rows {
                for e in &row.entries {
                    r.row(vec![
                        spins(&row.z),
                        e.m.to_string(),
                        format(&e.phi),
                        format(&e.phi_tilde),
                        e.periodic.as_ref().map(format).unwrap_or_default(),
                        to_f64(&e.phi).to_string(),
                        to_f64(&e.phi_tilde).to_string(),
                        e.periodic.as_ref().map(|p| to_f64(p).to_string()).unwrap_or_default(),
                    ]);
                }
            }
            r.into()
        }
        Command::Energy { model, field } => {
            let m = LatticeModel::from_json(&model.text)?;
            let f = SpinField::from_json(&field.text)?;
            let parts = energy_parts(&m, &f)?;
            let e = f_eps(&m, &f)?;
            let cells = vec![format(&f.eps), format(&parts.strong), format(&parts.weak), format(&parts.forcing), format(&e), to_f64(&e).to_string()];
            let mut r = Report::new(
                json!({
                    "eps": cells[0], "strong": cells[1], "weak": cells[2], "forcing": cells[3],
                    "energy": cells[4], "energy_f64": to_f64(&e),
                }),
                vec!["eps", "strong", "weak", "forcing", "energy", "energy_f64"],
            );
            r.row(cells);
            r.into()
        }
        Command::Extend { model, field, phase, m: side, field_out } => {
            let (m, s) = load(model)?;
            let f = SpinField::from_json(&field.text)?;
            let e = extend(&m, &s, *phase, &f, *side)?;
            let k = broken_bonds(&m, &s, *phase, &f);
            if let Some(path) = field_out {
                std::fs::write(path, e.field.to_json() + "\n").map_err(|err| Error::Precondition(format!("cannot write {}: {err}", path.display())))?;
            }
            let sm = &e.summary;
            let mut r = Report::new(
                json!({ "m": sm.m, "cubes_in_range": sm.cubes_in_range, "marked": sm.marked, "broken_bonds": k }),
                vec!["M", "cubes_in_range", "marked", "broken_bonds"],
            );
            r.row(vec![sm.m.to_string(), sm.cubes_in_range.to_string(), sm.marked.to_string(), k.to_string()]);
            r.into()
        }
        Command::GammaEval { model, target, tables: args } => {
            let (m, s) = load(model)?;
            let (omega, t) = load_target(target, m.dimension())?;
            let (surface, phi) = tables(&m, &s, &t, args, g)?;
            let v = f_hom(&omega, &t, &surface, &phi)?;
            let mut r = Report::new(
                json!({ "value": v, "surface_table": surface, "phi_table": phi }),
                vec!["surface", "bulk", "total"],
            );
            r.row(vec![v.surface.to_string(), v.bulk.to_string(), v.total.to_string()]);
            r.into()
        }
        Command::Converge { model, target, eps, paste_m, tables: args } => {
            let (m, s) = load(model)?;
            let (omega, t) = load_target(target, m.dimension())?;
            let (surface, phi) = tables(&m, &s, &t, args, g)?;
            let report = converge_report(&m, &s, &omega, &t, eps, *paste_m, &surface, &phi, &g.solve_options())?;
            let mut r = Report::new(serde_json::to_value(&report)?, vec!["eps", "energy", "energy_f64", "reference", "gap"]);
            for row in &report.rows {
                r.row(vec![format(&row.eps), format(&row.energy), row.energy_f64.to_string(), report.reference.to_string(), row.gap.to_string()]);
            }
            r.into()
        }
        Command::Examples => {
            let outcomes = run_examples(g.execution())?;
            let success = outcomes.iter().all(|o| o.pass);
            let mut r = Report::new(
                json!({ "passed": success, "checks": outcomes }),
                vec!["name", "model", "expected", "computed", "tolerance", "status"],
            );
            for o in &outcomes {
                r.row(vec![
                    o.name.clone(),
                    o.model.clone(),
                    o.expected.to_string(),
                    o.computed.to_string(),
                    o.tolerance.to_string(),
                    if o.pass { "PASS" } else { "FAIL" }.to_string(),
                ]);
            }
            Outcome { report: r, success }
        }
    })
}
