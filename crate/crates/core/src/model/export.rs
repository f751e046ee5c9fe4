//! CPLEX LP and free-MPS writers.
//!
//! Objective coefficients are multiplied by the weight scale (the lcm of the
//! weight denominators) so every coefficient is an integer; the factor is
//! written as a comment in the header. Divide a solver's reported optimum by
//! it to recover the exact objective.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Ratio;

use super::{IlpModel, Sense, VariableRef};
use crate::error::RwaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Lp,
    Mps,
}

impl FromStr for ExportFormat {
    type Err = RwaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lp" => Ok(ExportFormat::Lp),
            "mps" => Ok(ExportFormat::Mps),
            other => Err(RwaError::UnsupportedFormat(other.to_string())),
        }
    }
}

const TERMS_PER_LINE: usize = 8;

fn scaled_objective(model: &IlpModel) -> (i64, Vec<(usize, i64)>) {
    let scale = model.weights.scale();
    let k = Ratio::from_integer(scale);
    let terms = model.objective.iter().map(|&(v, c)| (v, (c * k).to_integer())).collect();
    (scale, terms)
}

fn write_terms(out: &mut String, model: &IlpModel, terms: &[(usize, i64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
    }
    for (i, &(v, coef)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if coef < 0 { '-' } else { '+' };
        if i == 0 && coef >= 0 {
            write!(out, " {} {}", coef, model.variables[v]).unwrap();
        } else {
            write!(out, " {sign} {} {}", coef.abs(), model.variables[v]).unwrap();
        }
    }
}

fn header_comment(model: &IlpModel, marker: &str, scale: i64) -> String {
    let m = &model.metadata;
    format!(
        "{marker} rwa model topology={} variant={} nodes={} links={} channels={} demands={} protected={}\n\
         {marker} objective scale={} (alpha1={}, alpha2={})\n",
        m.topology,
        m.variant,
        m.nodes,
        m.links,
        m.channels,
        m.demands,
        m.protected_demands,
        scale,
        model.weights.alpha1,
        model.weights.alpha2
    )
}

fn write_lp(model: &IlpModel) -> String {
    let (scale, objective) = scaled_objective(model);
    let mut out = header_comment(model, "\\", scale);
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, &objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        write!(out, " {}:", c.name).unwrap();
        write_terms(&mut out, model, &c.terms);
        let sense = match c.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        writeln!(out, " {sense} {}", c.rhs).unwrap();
    }
    out.push_str("Binaries\n");
    for chunk in model.variables.chunks(TERMS_PER_LINE) {
        out.push(' ');
        let names: Vec<String> = chunk.iter().map(ToString::to_string).collect();
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn write_mps(model: &IlpModel) -> String {
    let (scale, objective) = scaled_objective(model);
    let mut out = header_comment(model, "*", scale);
    writeln!(out, "NAME {}_{}", model.metadata.topology, model.metadata.variant).unwrap();
    out.push_str("ROWS\n N obj\n");
    for c in &model.constraints {
        let sense = match c.sense {
            Sense::Eq => 'E',
            Sense::Le => 'L',
            Sense::Ge => 'G',
        };
        writeln!(out, " {sense} {}", c.name).unwrap();
    }
    let mut columns: Vec<Vec<(&str, i64)>> = vec![Vec::new(); model.variables.len()];
    for &(v, coef) in &objective {
        columns[v].push(("obj", coef));
    }
    for c in &model.constraints {
        for &(v, coef) in &c.terms {
            columns[v].push((c.name.as_str(), coef));
        }
    }
    out.push_str("COLUMNS\n");
    out.push_str(" MARKER 'MARKER' 'INTORG'\n");
    for (v, entries) in columns.iter().enumerate() {
        let name = model.variables[v].to_string();
        if entries.is_empty() {
            writeln!(out, " {name} obj 0").unwrap();
        }
        for (row, coef) in entries {
            writeln!(out, " {name} {row} {coef}").unwrap();
        }
    }
    out.push_str(" MARKER 'MARKER' 'INTEND'\n");
    out.push_str("RHS\n");
    for c in model.constraints.iter().filter(|c| c.rhs != 0) {
        writeln!(out, " RHS {} {}", c.name, c.rhs).unwrap();
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        writeln!(out, " BV BND {v}").unwrap();
    }
    out.push_str("ENDATA\n");
    out
}

/// Renders `model` in the requested text format.
pub fn export_model(model: &IlpModel, format: ExportFormat) -> String {
    match format {
        ExportFormat::Lp => write_lp(model),
        ExportFormat::Mps => write_mps(model),
    }
}

/// Inverse of the variable naming scheme, e.g. `x_d3_e17_c2`.
pub fn parse_variable_name(name: &str) -> Result<VariableRef, RwaError> {
    let err = || RwaError::VariableName(name.to_string());
    let mut parts = name.split('_');
    let kind = parts.next().ok_or_else(err)?;
    let mut field = |prefix: char| -> Result<usize, RwaError> {
        let part = parts.next().ok_or_else(err)?;
        let digits = part.strip_prefix(prefix).ok_or_else(err)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        digits.parse().map_err(|_| err())
    };
    let var = match kind {
        "x" => VariableRef::X { demand: field('d')?, link: field('e')?, channel: field('c')? },
        "y" => VariableRef::Y { demand: field('d')?, link: field('e')?, channel: field('c')? },
        "theta" => VariableRef::Theta { demand: field('d')?, channel: field('c')? },
        "gamma" => VariableRef::Gamma { link: field('e')?, channel: field('c')? },
        "delta" => VariableRef::Delta { channel: field('c')? },
        _ => return Err(err()),
    };
    if parts.next().is_some() {
        return Err(err());
    }
    Ok(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, DesignConfig, Variant};
    use crate::topology::NetworkTopology;
    use crate::traffic::{LoadLevel, TrafficMatrix};

    fn ring_model(variant: Variant) -> IlpModel {
        let t = NetworkTopology::from_fiber_pairs("ring", 3, 2, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = TrafficMatrix::from_pairs([(0, 1, variant.protection())], 0, LoadLevel::Custom).unwrap();
        build_model(&t, &m, &DesignConfig::new(variant, &t)).unwrap()
    }

    #[test]
    fn lp_declares_every_binary() {
        let lp = export_model(&ring_model(Variant::RwaWc), ExportFormat::Lp);
        let binaries = lp.split("Binaries\n").nth(1).unwrap().split("End").next().unwrap();
        assert_eq!(binaries.split_whitespace().count(), 28);
        assert!(lp.contains(" provision_d0: 1 theta_d0_c0 + 1 theta_d0_c1 = 1\n"));
        assert!(lp.contains(" usage_c1: 1 gamma_e0_c1"));
        assert!(lp.contains(" - 6 delta_c1 <= 0\n"));
    }

    #[test]
    fn lexicographic_objective_is_scaled() {
        let lp = export_model(&ring_model(Variant::RwaIntwc), ExportFormat::Lp);
        assert!(lp.contains("objective scale=13"));
        assert!(lp.starts_with("\\ rwa model topology=ring variant=rwa_intwc"));
        assert!(lp.contains(" obj: 13 delta_c0 + 13 delta_c1 + 1 gamma_e0_c0"));
    }

    #[test]
    fn mps_sections() {
        let mps = export_model(&ring_model(Variant::RwaWcP), ExportFormat::Mps);
        for section in ["NAME ring_rwa_wc_p", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(mps.contains(section), "{section}");
        }
        assert_eq!(mps.matches(" BV BND ").count(), 40);
        assert!(mps.contains(" RHS provision_d0 1\n"));
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(parse_variable_name("x_d3_e17_c2").unwrap(), VariableRef::X { demand: 3, link: 17, channel: 2 });
        for var in ring_model(Variant::RwaIntwcP).variables {
            assert_eq!(parse_variable_name(&var.to_string()).unwrap(), var);
        }
        for bad in ["x_d3_e17", "z_d1", "delta_c", "gamma_e1_c2_c3", "theta_dx_c1"] {
            assert!(parse_variable_name(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_format() {
        assert_eq!("xyz".parse::<ExportFormat>(), Err(RwaError::UnsupportedFormat("xyz".into())));
    }
}
