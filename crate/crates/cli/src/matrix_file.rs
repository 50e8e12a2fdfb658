//! Dense matrices stored as CSV, one row per line.

use std::path::Path;

use diagscale::CovarianceMatrix;

/// Reads a square symmetric matrix. Blank lines and lines starting with `#`
/// are skipped; errors name the offending line.
pub fn read_matrix(path: &Path) -> Result<CovarianceMatrix, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_matrix(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_matrix(text: &str) -> Result<CovarianceMatrix, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| format!("line {lineno}: not a number: {:?}", f.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format!(
                    "line {lineno}: expected {} entries, found {}",
                    first.len(),
                    row.len()
                ));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format!("line {lineno}: non-finite entry"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no matrix rows".into());
    }
    if rows.len() != rows[0].len() {
        return Err(format!("matrix is {}x{}, expected square", rows.len(), rows[0].len()));
    }
    CovarianceMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_symmetric_matrix() {
        let m = parse_matrix("# comment\n1, 0.5\n\n0.5,1\n").unwrap();
        assert_eq!(m.p(), 2);
        assert_eq!(m.matrix()[(0, 1)], 0.5);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_matrix("1,0\n0\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_matrix("1,0\n0,abc\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("1,2\n").is_err());
        assert!(parse_matrix("1,2\n3,1\n").is_err());
    }
}
