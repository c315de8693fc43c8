//! Lloyd-relaxed Voronoi meshes of the unit square, generated by
//! `scripts/make_fixtures.py` and embedded at build time.

use stdg_core::{parse_mesh, Result, SpatialMesh};

pub const SIZES: [usize; 5] = [16, 64, 256, 1024, 4096];

pub fn voronoi_json(cells: usize) -> Option<&'static str> {
    Some(match cells {
        16 => include_str!("../fixtures/voronoi_16.json"),
        64 => include_str!("../fixtures/voronoi_64.json"),
        256 => include_str!("../fixtures/voronoi_256.json"),
        1024 => include_str!("../fixtures/voronoi_1024.json"),
        4096 => include_str!("../fixtures/voronoi_4096.json"),
        _ => return None,
    })
}

pub fn voronoi(cells: usize) -> Result<SpatialMesh> {
    let text = voronoi_json(cells).ok_or_else(|| {
        stdg_core::Error::InvalidArgument(format!("no Voronoi fixture with {cells} cells, have {SIZES:?}"))
    })?;
    parse_mesh(text)
}
