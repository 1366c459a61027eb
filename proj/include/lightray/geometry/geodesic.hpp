#pragma once

#include "lightray/geometry/chart.hpp"

#include <iosfwd>

namespace lightray {

/// Christoffel symbols, G[i](j, k) = Gamma^i_{jk}.
using Christoffel = std::array<Mat2, 2>;

/// Christoffel symbols with their first derivatives, dG[m][i](j, k) = d_m Gamma^i_{jk}.
struct ChristoffelJet {
    Christoffel G;
    std::array<Christoffel, 2> dG;
};

/// Riemann tensor R[i][j](k, l) = R^i_{jkl}, with
/// R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}.
using RiemannTensor = std::array<std::array<Mat2, 2>, 2>;

/// Christoffel symbols of the chart metric at an interior point.
Christoffel christoffel(const RiemannianChart& chart, const Vec2& x);

/// Christoffel symbols from a metric jet, no domain check.
Christoffel christoffel_from_jet(const MetricJet& j);
ChristoffelJet christoffel_jet(const MetricJet& j);

/// Riemann tensor of the (extended) chart metric.
RiemannTensor riemann(const RiemannianChart& chart, const Vec2& x);

/// -Gamma^i_{jk} a^j b^k
Vec2 contract_christoffel(const Christoffel& G, const Vec2& a, const Vec2& b);

struct GeodesicSample {
    double t;
    Vec2 x;
    Vec2 v;
};

/// Geodesic of the spatial metric sampled at the integrator nodes.
struct GeodesicPath {
    Vec2 start_point;
    Vec2 start_velocity;
    std::vector<GeodesicSample> samples;
    double exit_time = 0.0;
    double step = 0.0;
    bool maximal = false;
};

/// Integrates a unit-speed geodesic with fixed step RK4 until it leaves the
/// domain. The exit point is located by bisection to 1e-10.
/// Throws TrappingError if the arc length exceeds 50 diam(M).
GeodesicPath integrate_geodesic(const RiemannianChart& chart, const Vec2& y, const Vec2& v, double h);

/// Two passes: the second uses h = tau_exit / n_steps so the last node
/// falls on the boundary.
GeodesicPath integrate_maximal_geodesic(const RiemannianChart& chart, const Vec2& y, const Vec2& v,
                                        int n_steps = 2000);

/// Integrates a fixed arc length in the extended metric without boundary checks.
GeodesicPath integrate_geodesic_length(const RiemannianChart& chart, const Vec2& y, const Vec2& v, double length,
                                       int n_steps);

/// Parallel transport of frame0 (columns) along a path; one frame per sample.
std::vector<Mat2> parallel_transport(const RiemannianChart& chart, const GeodesicPath& path, const Mat2& frame0);

/// Unit-speed rescaling of v at y.
Vec2 normalize_velocity(const RiemannianChart& chart, const Vec2& y, const Vec2& v);

/// Unit vector g-orthogonal to v, oriented so (v, e) is positive.
Vec2 orthonormal_complement(const Mat2& g, const Vec2& v);

void write_geodesic_csv(const GeodesicPath& path, std::ostream& out);

} // namespace lightray
