//! Shared inputs for the solver benchmarks in `benches/`.

use catconv::{flux_integral, picard_iterate, BoundaryField, Prepared, ProblemSpec};

/// The reference problem at a given resolution scale, prepared once, with a
/// converged wall field and its channel flux for benchmarking the maps.
pub struct Fixture {
    pub spec: ProblemSpec,
    pub prep: Prepared,
    pub u_s: BoundaryField,
    pub flux: BoundaryField,
}

impl Fixture {
    /// `scale = 1` is the reference grid; each step doubles `n_r`, `n_z`
    /// intervals and the mode count.
    pub fn reference(scale: usize) -> Self {
        let mut spec = ProblemSpec::reference();
        spec.grid.n_r *= scale;
        spec.grid.n_z = (spec.grid.n_z - 1) * scale + 1;
        spec.grid.m *= scale;
        let prep = spec.prepare().expect("reference problem is valid");
        let sol = picard_iterate(&prep, None, 1e-10, 60).expect("reference problem converges");
        let flux = flux_integral(&sol.u_f, &prep.disc, &prep.basis).expect("shapes match");
        Self {
            spec,
            prep,
            u_s: sol.u_s,
            flux,
        }
    }
}
