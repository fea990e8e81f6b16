use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GridFunction, MaskKind};
use crate::error::{invalid, Result};

/// JSON sidecar describing the grid of a CSV grid function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub spacing: f64,
    pub lower: Vec<f64>,
    pub shape: Vec<usize>,
    pub mask: MaskKind,
}

/// Writes the masked cells as `x1,…,xN,value` rows and returns the sidecar.
pub fn write_grid_function(u: &GridFunction, csv: &mut impl Write) -> Result<GridSidecar> {
    let d = u.dim();
    let mut w = csv::Writer::from_writer(csv);
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    w.write_record(&header).map_err(csv_err)?;
    let mut x = vec![0.0; d];
    for k in 0..u.len() {
        if !u.mask()[k] {
            continue;
        }
        u.center(k, &mut x);
        let row: Vec<String> = x.iter().chain(std::iter::once(&u.values()[k])).map(|v| format!("{v:.17e}")).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(GridSidecar { spacing: u.h(), lower: u.lower().to_vec(), shape: u.shape().to_vec(), mask: u.mask_kind().clone() })
}

/// Reads a grid function back. Rows give the masked cells; for `square` and
/// `disk` sidecars the mask is rebuilt from the description and must agree.
pub fn read_grid_function(csv: impl Read, sidecar: &GridSidecar) -> Result<GridFunction> {
    let d = sidecar.shape.len();
    let total: usize = sidecar.shape.iter().product();
    let mut mask = vec![false; total];
    let mut values = vec![0.0; total];
    let probe = GridFunction::explicit(sidecar.lower.clone(), sidecar.spacing, sidecar.shape.clone(), vec![true; total])?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != d + 1 {
            return Err(invalid(format!("expected {} columns, found {}", d + 1, rec.len())));
        }
        let nums: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| invalid(format!("bad number {f:?}: {e}"))))
            .collect::<Result<_>>()?;
        let k = probe.locate(&nums[..d]).ok_or_else(|| invalid("row lies outside the grid"))?;
        mask[k] = true;
        values[k] = nums[d];
    }
    let mut g = match &sidecar.mask {
        MaskKind::Explicit => GridFunction::explicit(sidecar.lower.clone(), sidecar.spacing, sidecar.shape.clone(), mask.clone())?,
        MaskKind::Square => {
            let n = sidecar.shape[0];
            if sidecar.shape.iter().any(|m| *m != n) {
                return Err(invalid("square mask needs equal cell counts per axis"));
            }
            GridFunction::square(d, sidecar.lower.clone(), sidecar.spacing * n as f64, n)?
        }
        MaskKind::Disk { center, radius } => GridFunction::disk(d, center.clone(), *radius, sidecar.shape[0])?,
    };
    if g.mask().iter().zip(&mask).any(|(a, b)| a != b) && sidecar.mask != MaskKind::Explicit {
        return Err(invalid("CSV rows do not match the mask described by the sidecar"));
    }
    g.set_values(values)?;
    Ok(g)
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    invalid(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_disk() {
        let u = GridFunction::disk(2, vec![0.0, 0.0], 0.5, 24).unwrap().with_values(|x| x[0] * x[0] - x[1]);
        let mut buf = Vec::new();
        let side = write_grid_function(&u, &mut buf).unwrap();
        let json = serde_json::to_string(&side).unwrap();
        let side2: GridSidecar = serde_json::from_str(&json).unwrap();
        let v = read_grid_function(buf.as_slice(), &side2).unwrap();
        assert_eq!(u, v);
    }
}
