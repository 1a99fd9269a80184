//! Legacy ASCII VTK export for visualization.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::DirectorField;

/// `RECTILINEAR_GRID` with the director as point vector data `director`.
pub fn vtk_string(t: f64, field: &DirectorField) -> String {
    let grid = field.grid();
    let dims = grid.dims();
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0").unwrap();
    writeln!(s, "director field t={t:e}").unwrap();
    writeln!(s, "ASCII").unwrap();
    writeln!(s, "DATASET RECTILINEAR_GRID").unwrap();
    writeln!(s, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]).unwrap();
    for (axis, name) in ["X", "Y", "Z"].iter().enumerate() {
        writeln!(s, "{name}_COORDINATES {} double", dims[axis]).unwrap();
        let coords: Vec<String> = (0..dims[axis]).map(|j| format!("{:e}", grid.coordinate(axis, j))).collect();
        writeln!(s, "{}", coords.join(" ")).unwrap();
    }
    writeln!(s, "POINT_DATA {}", grid.len()).unwrap();
    writeln!(s, "VECTORS director double").unwrap();
    // VTK orders points with x fastest.
    for i3 in 0..dims[2] {
        for i2 in 0..dims[1] {
            for i1 in 0..dims[0] {
                let v = field.at(grid.index(i1, i2, i3));
                writeln!(s, "{:e} {:e} {:e}", v[0], v[1], v[2]).unwrap();
            }
        }
    }
    s
}

pub fn write_vtk(path: &Path, t: f64, field: &DirectorField) -> Result<()> {
    std::fs::write(path, vtk_string(t, field)).map_err(|e| Error::io(path, e))
}
