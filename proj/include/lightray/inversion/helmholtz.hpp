#pragma once

#include "lightray/inversion/grid.hpp"

namespace lightray {

/// alpha = alpha_s + d psi with psi = 0 outside the open disk and div alpha_s = 0 at the unknown nodes.
struct HelmholtzSplit {
    GridOneForm alpha;
    GridOneForm solenoidal;
    GridField potential;
    double poisson_residual = 0.0; ///< relative residual of the discrete Poisson solve
};

/// Solves div grad psi = div alpha with the central-difference pair, so grad and -div are
/// adjoint on the grid. Unknown nodes are those inside the disk at least two nodes from the
/// edge of the square. Throws NumericalError if the relative residual exceeds tol.
HelmholtzSplit helmholtz_project(const GridOneForm& alpha, double tol = 1e-8);

/// Discrete L2 inner product over all nodes, sum a . conj(b) h^2.
cd grid_inner(const GridOneForm& a, const GridOneForm& b);

} // namespace lightray
