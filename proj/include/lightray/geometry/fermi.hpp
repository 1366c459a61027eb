#pragma once

#include "lightray/geometry/geodesic.hpp"

#include <memory>

namespace lightray {

/// Small dynamic matrices for space-time quantities (at most 1+2 dimensions).
using VecS = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using MatS = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using VecSc = Eigen::Matrix<cd, Eigen::Dynamic, 1, 0, 3, 1>;

/// Window constants of a null geodesic beta(t) = (t_offset + t, gamma(t)),
/// t in [tau_minus, tau_plus], extended by eps on both sides.
struct RayWindow {
    double tau_minus = 0.0, tau_plus = 1.0, eps = 0.1;
    double a() const { return kSqrt2 * (tau_minus - eps); }
    double b() const { return kSqrt2 * (tau_plus + eps); }
    double a0() const { return kSqrt2 * (tau_minus - 0.5 * eps); }
    double b0() const { return kSqrt2 * (tau_plus + 0.5 * eps); }
    double s_minus() const { return kSqrt2 * tau_minus; }
    double s_plus() const { return kSqrt2 * tau_plus; }
};

/// Null geodesic of -dt^2 + g built from a maximal spatial geodesic.
struct NullGeodesic {
    double time_offset = 0.0;
    GeodesicPath spatial;
    RayWindow window;

    /// Uses tau_minus = 0 and tau_plus = exit time of the spatial path.
    static NullGeodesic make(double time_offset, GeodesicPath spatial, double eps = 0.1);
};

/// Point of space-time (t, x) with the Jacobian d(t,x)/dz of the Fermi map.
struct FermiPoint {
    VecS p;
    MatS jac;
};

/// Fermi coordinates z = (s, r, z'') along a null geodesic.
class FermiChart {
public:
    virtual ~FermiChart() = default;

    /// Spatial dimension n; z has n+1 components.
    virtual int n() const = 0;
    virtual FermiPoint from_fermi(const VecS& z) const = 0;
    virtual VecS to_fermi(const VecS& p) const = 0;
    /// Space-time metric diag(-1, g(x)) at the point p.
    virtual MatS spacetime_metric(const VecS& p) const = 0;
    virtual double time_offset() const = 0;

    MatS metric_fermi(const VecS& z) const;

    const RayWindow& window() const { return window_; }
    double tube_radius() const { return delta_prime_; }

    /// Space-time point of beta at ray parameter t.
    VecS beta(double t) const;
    VecS beta_velocity(double t) const;

protected:
    RayWindow window_;
    double delta_prime_ = 0.0;
    virtual Vec2 gamma_point(double t) const = 0;
    virtual Vec2 gamma_velocity(double t) const = 0;
};

/// Options for the 1+2 dimensional Fermi chart.
struct FermiOptions {
    std::vector<double> radius_candidates{0.2, 0.1, 0.05, 0.025};
    double max_condition = 10.0;
    int exp_steps = 24;
};

/// Fermi chart built from the exponential map of the spatial metric along the
/// parallel transported normal e2. Holds a reference-counted copy of the chart.
class FermiChart2D : public FermiChart {
public:
    FermiChart2D(const RiemannianChart& chart, const NullGeodesic& ray, const FermiOptions& opt = {});

    int n() const override { return 2; }
    FermiPoint from_fermi(const VecS& z) const override;
    VecS to_fermi(const VecS& p) const override;
    MatS spacetime_metric(const VecS& p) const override;
    double time_offset() const override { return ttilde_; }

    const RiemannianChart& chart() const { return chart_; }
    /// Parallel frame (gamma', e2) at ray parameter t.
    Mat2 frame(double t) const;
    /// Maximal condition number of the chart Jacobian found while selecting the radius.
    double tube_condition() const { return tube_cond_; }

    Vec2 gamma_point(double t) const override;
    Vec2 gamma_velocity(double t) const override;

private:
    struct Base {
        Vec2 x, v, e, de;
    };
    RiemannianChart chart_;
    FermiOptions opt_;
    double ttilde_;
    double margin_ = 0.3, dy_ = 0.0, y_lo_ = 0.0;
    std::vector<Vec2> tx_, tv_, te_;
    double tube_cond_ = 0.0;

    Base base(double y1) const;
    /// x = exp_{gamma(y1)}(y2 e2(y1)) with Jacobian dx/d(y1,y2).
    std::pair<Vec2, Mat2> exp_map(double y1, double y2) const;
};

/// Fermi chart of a straight ray on an interval with the flat metric.
/// direction = +1 or -1, entry is the boundary point where the ray enters.
class FlatFermiChart1D : public FermiChart {
public:
    FlatFermiChart1D(double time_offset, double entry, int direction, RayWindow window, double tube_radius);

    int n() const override { return 1; }
    FermiPoint from_fermi(const VecS& z) const override;
    VecS to_fermi(const VecS& p) const override;
    MatS spacetime_metric(const VecS& p) const override;
    double time_offset() const override { return ttilde_; }
    Vec2 gamma_point(double t) const override { return Vec2(entry_ + dir_ * t, 0.0); }
    Vec2 gamma_velocity(double) const override { return Vec2(dir_, 0.0); }

private:
    double ttilde_, entry_;
    int dir_;
};

std::shared_ptr<FermiChart> build_fermi_chart(const RiemannianChart& chart, const NullGeodesic& ray,
                                              const FermiOptions& opt = {});

/// D_ij = 1/4 d^2 g^{rr} / dz'_i dz'_j at (s, 0) by central differences with step h.
MatX curvature_D(const FermiChart& fchart, double s, double h = 1e-3);

/// Same matrix from the Riemann tensor, D_ij = -1/2 R(E_0, E_i, E_0, E_j).
MatX curvature_D_from_riemann(const FermiChart2D& fchart, double s);

} // namespace lightray
