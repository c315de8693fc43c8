//! Shared fixtures for the criterion benchmarks.

use stdg_core::*;

/// First slab of Example 1 on an `n x n` mesh with total-degree `p` elements.
pub struct SlabCase {
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
    pub spec: BasisSpec,
    pub data: ProblemData,
}

impl SlabCase {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        Ok(SlabCase {
            mesh: build_rectangular_mesh(n, n, Rect::UNIT)?,
            grid: uniform_partition(1.0, 10 * n)?,
            spec: BasisSpec::uniform(IndexKind::TotalDegree, p),
            data: example1(),
        })
    }

    pub fn space(&self) -> Result<SlabSpace> {
        SlabSpace::build(&self.mesh, &self.grid, 0, &self.spec)
    }

    pub fn system(&self, space: &SlabSpace) -> Result<SlabSystem> {
        let u0 = self.data.initial.clone();
        let initial = move |x: f64, y: f64| u0(x, y, 0.0);
        assemble_slab(
            &self.mesh,
            space,
            &self.data,
            &PrevTrace::Function(&initial),
            &Default::default(),
        )
    }
}
