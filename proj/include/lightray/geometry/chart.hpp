#pragma once

#include "lightray/common.hpp"

#include <array>
#include <memory>
#include <string>

namespace lightray {

enum class DomainKind { Disk, Rect };

/// Spatial domain M: a disk or an axis-aligned rectangle in R^2.
struct Domain {
    DomainKind kind = DomainKind::Disk;
    Vec2 center = Vec2::Zero();
    double radius = 1.0;
    Vec2 lo = Vec2(-1.0, -1.0);
    Vec2 hi = Vec2(1.0, 1.0);

    static Domain disk(double radius = 1.0, Vec2 center = Vec2::Zero());
    static Domain rect(Vec2 lo, Vec2 hi);

    bool contains(const Vec2& x, double tol = 0.0) const;
    /// Negative inside, zero on the boundary, positive outside. Smooth for the disk.
    double defining_function(const Vec2& x) const;
    Vec2 outward_normal(const Vec2& x) const;
    /// Euclidean diameter of the domain.
    double diameter() const;
    /// Bounding box of the domain.
    Vec2 box_lo() const;
    Vec2 box_hi() const;
};

/// Metric with first and second derivatives at one point.
/// dg[k] = d_k g, d2g[k][l] = d_k d_l g.
struct MetricJet {
    Mat2 g;
    std::array<Mat2, 2> dg;
    std::array<std::array<Mat2, 2>, 2> d2g;
};

/// Source of the interior metric. Implementations must be valid on the
/// domain plus the blending collar.
class MetricSource {
public:
    virtual ~MetricSource() = default;
    virtual MetricJet jet(const Vec2& x) const = 0;
    virtual bool is_euclidean() const { return false; }
    virtual std::string name() const = 0;
};

/// Width of the collar over which the metric is blended to the Euclidean one.
inline constexpr double kCollarWidth = 0.2;

/// Riemannian metric on a 2D domain, extended smoothly outside it by
/// blending to the Euclidean metric across a collar of width 0.2.
class RiemannianChart {
public:
    RiemannianChart(Domain domain, std::shared_ptr<const MetricSource> source);

    static RiemannianChart euclidean(const Domain& domain);
    /// g = exp(2 a |x - c|^2) delta.
    static RiemannianChart conformal(const Domain& domain, double amplitude, Vec2 center = Vec2::Zero());
    /// Samples another chart's interior metric on an n x n grid covering the
    /// domain and collar; derivatives come from finite differences.
    static RiemannianChart sampled(const RiemannianChart& source, int n);

    int dim() const { return 2; }
    const Domain& domain() const { return domain_; }
    bool is_euclidean() const { return source_->is_euclidean(); }
    std::string mode() const;

    /// Metric jet of the extended metric. Valid everywhere, no domain check.
    MetricJet jet(const Vec2& x) const;
    Mat2 metric(const Vec2& x) const;
    /// Interior metric jet; throws DomainError outside the closed domain.
    MetricJet jet_checked(const Vec2& x) const;

    /// Bounds on the metric eigenvalues sampled on an n x n grid over the domain.
    std::pair<double, double> eigen_bounds(int n = 41) const;

    /// Norm of a vector in the metric at x.
    double norm(const Vec2& x, const Vec2& v) const;

private:
    Domain domain_;
    std::shared_ptr<const MetricSource> source_;
};

/// Metric source described by a grid of samples with finite-difference
/// derivatives (4th order gradient, 2nd order Hessian) and bicubic interpolation.
class GridMetric : public MetricSource {
public:
    GridMetric(Vec2 lo, Vec2 hi, int n, std::vector<Mat2> samples);
    MetricJet jet(const Vec2& x) const override;
    std::string name() const override { return "grid"; }

private:
    Vec2 lo_, hi_;
    int n_;
    double h_[2];
    // components (00, 01, 11) of g, dg/dk, d2g/dkdl stored per node
    std::vector<std::array<double, 3>> g_, dg0_, dg1_, d00_, d01_, d11_;

    double interp(const std::vector<std::array<double, 3>>& f, int comp, const Vec2& x) const;
};

} // namespace lightray
