#pragma once

#include "lightray/geometry/chart.hpp"

#include <functional>
#include <iosfwd>

namespace lightray {

/// Uniform n x n node grid on the bounding square of a disk.
struct DiskGrid {
    int n = 129;
    Vec2 center = Vec2::Zero();
    double radius = 1.0;
    double h = 0.0;

    static DiskGrid make(const Domain& disk, int n = 129);

    int size() const { return n * n; }
    int index(int i, int j) const { return i + n * j; }
    Vec2 node(int i, int j) const;
    Vec2 node(int k) const { return node(k % n, k / n); }
    /// Node strictly inside the open disk.
    bool inside(int k) const;
    /// Node within dist of the closed disk.
    bool near(int k, double dist) const;
};

/// Complex node values on the full grid, bilinearly interpolated, zero outside the square.
struct GridField {
    DiskGrid grid;
    VecXc values;

    GridField() = default;
    explicit GridField(const DiskGrid& g) : grid(g), values(VecXc::Zero(g.size())) {}

    cd operator()(const Vec2& x) const;
    /// Samples f at every node (inside_only zeroes nodes outside the open disk).
    static GridField sample(const DiskGrid& g, const std::function<cd(const Vec2&)>& f, bool inside_only = false);

    /// L2 norm over the open disk with node weight h^2.
    double norm_inside() const;
};

/// Two components on the same grid.
struct GridOneForm {
    GridField a1, a2;
    Vec2c operator()(const Vec2& x) const { return Vec2c(a1(x), a2(x)); }
    static GridOneForm sample(const DiskGrid& g, const std::function<Vec2c(const Vec2&)>& f, bool inside_only = false);
};

/// Central differences at every node; one-sided at the outer ring of the square.
GridOneForm grid_gradient(const GridField& f);
GridField grid_divergence(const GridOneForm& a);
/// d1 a2 - d2 a1
GridField grid_curl(const GridOneForm& a);

/// Relative L2 difference over the open disk, ||a - b|| / ||b||.
double relative_error_inside(const GridField& a, const GridField& b);

/// CSV "x1,x2,value_re,value_im" over nodes inside the disk.
void write_grid_csv(const GridField& f, std::ostream& out);

} // namespace lightray
