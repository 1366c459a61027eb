#pragma once

#include "lightray/inversion/helmholtz.hpp"
#include "lightray/transforms/light_ray.hpp"

#include <Eigen/SparseCore>

namespace lightray {

using SparseRM = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Nodes per side of the reconstruction grid. With 96 x 96 rays a 129 grid has more unknowns
/// than rays, and the null space then limits the error to about 3%.
inline constexpr int kDefaultReconstructionGrid = 97;

/// Discrete X-ray transform on grid nodes within R + 1.5h, assembled from the
/// Simpson footprints of the family's rays with bilinear interpolation.
struct XrayProjector {
    DiskGrid grid;
    std::vector<int> nodes; ///< grid index of every unknown
    SparseRM P;             ///< scalar part, rays x unknowns
    SparseRM P1, P2;        ///< one-form components weighted by the ray velocity (empty for scalar only)
    double norm2 = 0.0;     ///< ||A||^2 of the operator actually used, by power iteration

    static XrayProjector build(const RayFamily& family, const DiskGrid& grid, bool with_oneform);

    bool has_oneform() const { return P1.rows() > 0; }
    int unknowns() const { return int(nodes.size()); }
    int blocks() const { return has_oneform() ? 3 : 1; }
    /// y = A x for the stacked unknowns [f, a1, a2].
    MatX apply(const MatX& x) const;
    MatX apply_adjoint(const MatX& y) const;
    /// Scatters block b of the stacked real/imaginary columns onto the full grid.
    GridField field(const MatX& x, int block) const;
};

struct CglsOptions {
    double lambda_rel = 1e-4; ///< Tikhonov weight in units of ||A||^2
    double tol = 1e-6;        ///< stop when ||A^T r - lambda x|| <= max(tol ||A^T b||, abs_tol)
    double abs_tol = 1e-13;   ///< keeps round-off level data from being fitted
    int max_iter = 2000;
};

struct CglsReport {
    int iterations = 0;
    double lambda = 0.0;
    double gradient_ratio = 0.0; ///< final ||A^T r - lambda x|| / ||A^T b||, worst column
};

/// Solves min ||A x - b||^2 + lambda ||x||^2 column by column. Throws ConditioningError
/// after max_iter iterations without convergence.
MatX cgls(const XrayProjector& A, const MatX& b, const CglsOptions& opt, CglsReport* report = nullptr);

GridField xray_invert_scalar(const std::vector<cd>& data, const XrayProjector& proj, const CglsOptions& opt = {},
                             CglsReport* report = nullptr);
/// Builds the scalar projector on the default reconstruction grid.
GridField xray_invert_scalar(const std::vector<cd>& data, const RayFamily& family, double lambda_rel = 1e-4);

/// Gauge-fixed joint reconstruction, alpha replaced by its solenoidal part.
struct PairReconstruction {
    GridField f;
    GridOneForm alpha;    ///< raw least-squares one-form
    HelmholtzSplit split; ///< split.solenoidal is alpha^s
    CglsReport report;
};

PairReconstruction xray_invert_pair(const std::vector<cd>& data, const XrayProjector& proj,
                                    const CglsOptions& opt = {});
PairReconstruction xray_invert_pair(const std::vector<cd>& data, const RayFamily& family, double lambda_rel = 1e-4);

} // namespace lightray
