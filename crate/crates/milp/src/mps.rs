//! Free-format MPS writer and a minimal reader.
//!
//! Output is deterministic: rows and columns appear in id order and numbers
//! use the shortest representation that parses back to the same `f64`, so
//! write -> parse -> write reproduces the bytes exactly.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::model::{Constraint, MilpModel, ModelError, Sense, VarId, VarKind, Variable};

const OBJ_ROW: &str = "OBJ";

#[derive(Debug, Error)]
pub enum MpsError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Syntax {
        line,
        message: message.into(),
    }
}

/// Writes `model` as free-format MPS.
pub fn write_mps<W: Write>(model: &MilpModel, name: &str, out: &mut W) -> io::Result<()> {
    let name = if name.is_empty() || name.chars().any(char::is_whitespace) {
        "MODEL"
    } else {
        name
    };
    writeln!(out, "NAME {name}")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N {OBJ_ROW}")?;
    for row in model.constraints() {
        let tag = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        writeln!(out, " {tag} {}", row.name)?;
    }

    // column-major view of the constraint matrix, row ids ascending per column
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (r, row) in model.constraints().iter().enumerate() {
        for &(var, coeff) in &row.terms {
            columns[var.0].push((r, coeff));
        }
    }

    writeln!(out, "COLUMNS")?;
    let mut in_int_block = false;
    let mut marker = 0usize;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int_block {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            writeln!(out, " MARKER{marker} 'MARKER' '{tag}'")?;
            marker += 1;
            in_int_block = is_int;
        }
        let c = model.objective()[j];
        if c != 0.0 || columns[j].is_empty() {
            writeln!(out, " {} {OBJ_ROW} {}", var.name, fmt_num(c))?;
        }
        for &(r, coeff) in &columns[j] {
            writeln!(
                out,
                " {} {} {}",
                var.name,
                model.constraints()[r].name,
                fmt_num(coeff)
            )?;
        }
    }
    if in_int_block {
        writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'")?;
    }

    writeln!(out, "RHS")?;
    if model.objective_offset() != 0.0 {
        writeln!(out, " RHS {OBJ_ROW} {}", fmt_num(-model.objective_offset()))?;
    }
    for row in model.constraints() {
        if row.rhs != 0.0 {
            writeln!(out, " RHS {} {}", row.name, fmt_num(row.rhs))?;
        }
    }

    writeln!(out, "RANGES")?;

    writeln!(out, "BOUNDS")?;
    for var in model.variables() {
        write_bounds(out, var)?;
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

fn write_bounds<W: Write>(out: &mut W, var: &Variable) -> io::Result<()> {
    let name = &var.name;
    let (lo, up) = (var.lower, var.upper);
    if var.kind == VarKind::Binary {
        // explicit bounds keep the column binary for readers that default
        // integer columns to [0, +inf)
        if lo == up {
            return writeln!(out, " FX BND {name} {}", fmt_num(lo));
        }
        writeln!(out, " LO BND {name} {}", fmt_num(lo))?;
        return writeln!(out, " UP BND {name} {}", fmt_num(up));
    }
    if lo == up {
        return writeln!(out, " FX BND {name} {}", fmt_num(lo));
    }
    match (lo.is_finite(), up.is_finite()) {
        (false, false) => writeln!(out, " FR BND {name}"),
        (false, true) => {
            writeln!(out, " MI BND {name}")?;
            writeln!(out, " UP BND {name} {}", fmt_num(up))
        }
        (true, false) => {
            if lo != 0.0 {
                writeln!(out, " LO BND {name} {}", fmt_num(lo))?;
            }
            Ok(())
        }
        (true, true) => {
            if lo != 0.0 {
                writeln!(out, " LO BND {name} {}", fmt_num(lo))?;
            }
            writeln!(out, " UP BND {name} {}", fmt_num(up))
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct PendingColumn {
    name: String,
    integer: bool,
    obj: f64,
    entries: Vec<(usize, f64)>,
}

/// Reads a free-format MPS model.
///
/// Supports what [`write_mps`] emits plus the common bound types. Integer
/// columns must end up with bounds inside `[0, 1]`; general integers and
/// RANGES entries are rejected.
pub fn parse_mps<R: BufRead>(input: R) -> Result<MilpModel, MpsError> {
    let mut section = Section::Start;
    let mut obj_name: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: std::collections::HashMap<String, usize> = Default::default();
    let mut rhs: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut columns: Vec<PendingColumn> = Vec::new();
    let mut col_index: std::collections::HashMap<String, usize> = Default::default();
    let mut in_int = false;
    let mut bounds: Vec<(f64, Option<f64>)> = Vec::new();

    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(char::is_whitespace) {
            section = match fields[0] {
                "NAME" => Section::Start,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(syntax(lineno, format!("unknown section `{other}`"))),
            };
            if section == Section::Bounds && bounds.len() != columns.len() {
                bounds = vec![(0.0, None); columns.len()];
            }
            continue;
        }
        match section {
            Section::Start | Section::End => {
                return Err(syntax(lineno, "data outside of a section"));
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(syntax(lineno, "expected `<type> <name>`"));
                }
                let sense = match fields[0] {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(fields[1].to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    t => return Err(syntax(lineno, format!("unknown row type `{t}`"))),
                };
                row_index.insert(fields[1].to_string(), rows.len());
                rows.push((fields[1].to_string(), sense));
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1] == "'MARKER'" {
                    match fields[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        m => return Err(syntax(lineno, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(syntax(lineno, "expected `<col> <row> <value> [<row> <value>]`"));
                }
                let col = match col_index.get(fields[0]) {
                    Some(&c) if c + 1 == columns.len() => c,
                    Some(_) => return Err(syntax(lineno, "column entries are not contiguous")),
                    None => {
                        col_index.insert(fields[0].to_string(), columns.len());
                        columns.push(PendingColumn {
                            name: fields[0].to_string(),
                            integer: in_int,
                            obj: 0.0,
                            entries: Vec::new(),
                        });
                        columns.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(lineno, pair[1])?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        columns[col].obj += value;
                    } else {
                        let &r = row_index
                            .get(pair[0])
                            .ok_or_else(|| syntax(lineno, format!("unknown row `{}`", pair[0])))?;
                        columns[col].entries.push((r, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(syntax(lineno, "expected `<set> <row> <value> [<row> <value>]`"));
                }
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(lineno, pair[1])?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        offset = -value;
                    } else {
                        let &r = row_index
                            .get(pair[0])
                            .ok_or_else(|| syntax(lineno, format!("unknown row `{}`", pair[0])))?;
                        rhs[r] = value;
                    }
                }
            }
            Section::Ranges => {
                return Err(syntax(lineno, "RANGES entries are not supported"));
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(syntax(lineno, "expected `<type> <set> <col> [<value>]`"));
                }
                let &c = col_index
                    .get(fields[2])
                    .ok_or_else(|| syntax(lineno, format!("unknown column `{}`", fields[2])))?;
                let value = || -> Result<f64, MpsError> {
                    fields
                        .get(3)
                        .ok_or_else(|| syntax(lineno, "missing bound value"))
                        .and_then(|v| parse_num(lineno, v))
                };
                let b = &mut bounds[c];
                match fields[0] {
                    "LO" => b.0 = value()?,
                    "UP" => b.1 = Some(value()?),
                    "FX" => {
                        let v = value()?;
                        *b = (v, Some(v));
                    }
                    "FR" => *b = (f64::NEG_INFINITY, Some(f64::INFINITY)),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = Some(f64::INFINITY),
                    "BV" => *b = (0.0, Some(1.0)),
                    t => return Err(syntax(lineno, format!("unsupported bound type `{t}`"))),
                }
            }
        }
    }

    if bounds.len() != columns.len() {
        bounds = vec![(0.0, None); columns.len()];
    }

    let mut model = MilpModel::new();
    for (col, &(lo, up)) in columns.iter().zip(&bounds) {
        let upper = up.unwrap_or(f64::INFINITY);
        let var = if col.integer {
            if lo < 0.0 || upper > 1.0 {
                return Err(syntax(
                    0,
                    format!("integer column `{}` is not binary", col.name),
                ));
            }
            Variable {
                name: col.name.clone(),
                kind: VarKind::Binary,
                lower: lo,
                upper,
            }
        } else {
            Variable::continuous(col.name.clone(), lo, upper)
        };
        let id = model.add_variable(var)?;
        model.set_objective_coefficient(id, col.obj);
    }
    let mut terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); rows.len()];
    for (j, col) in columns.iter().enumerate() {
        for &(r, a) in &col.entries {
            terms[r].push((VarId(j), a));
        }
    }
    for (((name, sense), terms), rhs) in rows.into_iter().zip(terms).zip(rhs) {
        model.add_constraint(Constraint::new(name, terms, sense, rhs))?;
    }
    model.set_objective_offset(offset);
    Ok(model)
}

fn parse_num(line: usize, s: &str) -> Result<f64, MpsError> {
    s.parse::<f64>()
        .map_err(|_| syntax(line, format!("bad number `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_string(model: &MilpModel) -> String {
        let mut buf = Vec::new();
        write_mps(model, "test", &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn binary_columns_are_wrapped_in_markers() {
        let mut m = MilpModel::new();
        let x = m.add_variable(Variable::nonneg("x")).unwrap();
        let y = m.add_variable(Variable::binary("y")).unwrap();
        m.add_objective_term(y, 5.0);
        m.add_constraint(Constraint::new("c", vec![(x, 1.0), (y, 3.0)], Sense::Ge, 3.0))
            .unwrap();
        let text = to_string(&m);
        let intorg = text.find("'INTORG'").expect("INTORG marker");
        let intend = text.find("'INTEND'").expect("INTEND marker");
        let ycol = text.find(" y OBJ 5").unwrap();
        assert!(intorg < ycol && ycol < intend);
        assert!(text.contains(" LO BND y 0\n UP BND y 1\n"));
        for section in ["ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"] {
            assert!(text.lines().any(|l| l == section), "missing {section}");
        }
    }

    #[test]
    fn emission_is_deterministic_and_round_trips() {
        let mut m = MilpModel::new();
        let a = m.add_variable(Variable::continuous("a", -1.5, 2.25)).unwrap();
        let b = m.add_variable(Variable::free("b")).unwrap();
        let c = m.add_variable(Variable::binary("c")).unwrap();
        let d = m
            .add_variable(Variable::continuous("d", f64::NEG_INFINITY, 4.0))
            .unwrap();
        let e = m.add_variable(Variable::continuous("e", 3.0, 3.0)).unwrap();
        m.add_objective_term(a, 0.1);
        m.add_objective_term(c, -7.0);
        m.set_objective_offset(12.5);
        m.add_constraint(Constraint::new("r1", vec![(a, 1.0 / 3.0), (b, -2.0)], Sense::Le, 1e-9))
            .unwrap();
        m.add_constraint(Constraint::new("r2", vec![(d, 1.0), (e, 1.0)], Sense::Eq, 0.0))
            .unwrap();
        m.add_constraint(Constraint::new("r3", vec![], Sense::Ge, -2.0)).unwrap();

        let first = to_string(&m);
        assert_eq!(first, to_string(&m));

        let parsed = parse_mps(first.as_bytes()).unwrap();
        assert_eq!(parsed.variables(), m.variables());
        assert_eq!(parsed.constraints(), m.constraints());
        assert_eq!(parsed.objective(), m.objective());
        assert_eq!(parsed.objective_offset(), 12.5);
        assert_eq!(to_string(&parsed), first);
    }

    #[test]
    fn reader_rejects_general_integers() {
        let text = "NAME x\nROWS\n N OBJ\nCOLUMNS\n M 'MARKER' 'INTORG'\n z OBJ 1\n M 'MARKER' 'INTEND'\nRHS\nBOUNDS\n UP BND z 5\nENDATA\n";
        assert!(parse_mps(text.as_bytes()).is_err());
    }

    #[test]
    fn reader_accepts_two_pairs_per_line() {
        let text = "NAME x\nROWS\n N COST\n L lim\nCOLUMNS\n x COST 1 lim 2\nRHS\n RHS lim 4\nBOUNDS\nENDATA\n";
        let m = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(m.objective(), &[1.0]);
        assert_eq!(m.constraints()[0].terms, vec![(VarId(0), 2.0)]);
        assert_eq!(m.constraints()[0].rhs, 4.0);
    }
}
