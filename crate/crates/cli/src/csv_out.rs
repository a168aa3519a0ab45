//! Deterministic CSV output: columns `t,v,u,residual`, one row per node,
//! 17 significant digits, '.' decimal separator, no thousands separators.
//! The residual column is empty below the derivative cutoff.

use fracivp_core::{GridFunction, Samples};

/// 17 significant digits round-trips any f64 exactly.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn solution_csv(v: &GridFunction, u: &GridFunction, residual: Option<&Samples>) -> String {
    let nodes = v.grid().nodes();
    let n = nodes.len();
    let res_offset = residual.map(|r| n - r.times.len());
    let mut out = String::with_capacity(n * 80);
    out.push_str("t,v,u,residual\n");
    for (i, &node) in nodes.iter().enumerate() {
        out.push_str(&fmt(node));
        out.push(',');
        out.push_str(&fmt(v.values()[i]));
        out.push(',');
        out.push_str(&fmt(u.values()[i]));
        out.push(',');
        if let (Some(r), Some(off)) = (residual, res_offset) {
            if i >= off {
                out.push_str(&fmt(r.values[i - off]));
            }
        }
        out.push('\n');
    }
    out
}

/// Read back the `t` and `u` columns of a solution CSV.
pub fn read_solution_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    if header.trim() != "t,v,u,residual" {
        return Err(format!("unexpected CSV header: {header}"));
    }
    let mut t = Vec::new();
    let mut u = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(format!("line {}: expected 4 columns", ln + 2));
        }
        t.push(cols[0].parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 2))?);
        u.push(cols[2].parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 2))?);
    }
    Ok((t, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracivp_core::Grid;

    #[test]
    fn format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.6, 1e-300, 123456.789, -0.4] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_shape_and_empty_residual() {
        let g = Grid::graded(1.0, 4, 1.0).unwrap();
        let v = GridFunction::sample(g.clone(), |t| t).unwrap();
        let u = GridFunction::sample(g.clone(), |t| t * t).unwrap();
        let r = Samples { times: g.nodes()[2..].to_vec(), values: vec![0.5, 0.25, 0.125] };
        let text = solution_csv(&v, &u, Some(&r));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "t,v,u,residual");
        assert!(lines[1].ends_with(',')); // below cutoff: residual empty
        assert!(lines[2].ends_with(','));
        assert!(!lines[3].ends_with(','));
        let (t, u2) = read_solution_csv(&text).unwrap();
        assert_eq!(t, g.nodes());
        assert_eq!(u2, u.values());
    }
}
