#pragma once

#include "lightray/common.hpp"

#include <functional>

namespace lightray {

/// s -> D(s), a real symmetric n x n matrix.
using DField = std::function<MatX(double s)>;

/// C = diag(0, 2, ..., 2).
MatX riccati_C(int n);

/// Solution of H' + HCH + D = 0 through the linear pair Y' = CZ, Z' = -DY,
/// Y(s_minus) = I, Z(s_minus) = H0, H = Z Y^{-1}.
struct RiccatiSolution {
    int n = 0;
    double s_minus = 0.0;
    std::vector<double> s_grid;
    std::vector<MatXc> H, Y, Z;
    MatXc H0;
    /// D sampled at the grid nodes and step midpoints, sorted in s.
    std::vector<double> d_s;
    std::vector<MatX> d_val;

    /// Index of the node closest to s.
    size_t nearest(double s) const;
    /// Y and Z by cubic Hermite interpolation between nodes.
    void yz_at(double s, MatXc& Y, MatXc& Z) const;
    MatXc H_at(double s) const;
    /// D(s) and dD/ds by cubic interpolation of the stored samples.
    MatX D_at(double s) const;
    MatX dD_at(double s) const;
    /// dH/ds = -HCH - D and its derivative.
    MatXc dH_at(double s) const;
    MatXc d2H_at(double s) const;
};

/// Integrates with RK4 from s_minus forwards to b0 and backwards to a0 with steps
/// no larger than max_step. Throws SingularityError if |det Y| < 1e-12.
RiccatiSolution solve_riccati(const DField& D, const MatXc& H0, double a0, double b0, double s_minus,
                              double max_step = 0.01);

} // namespace lightray
