#pragma once

#include "lightray/geometry/geodesic.hpp"
#include "lightray/transforms/coefficients.hpp"

#include <json.hpp>

#include <iosfwd>

namespace lightray {

/// One maximal geodesic sampled uniformly in arc length from its entry point.
struct RaySamples {
    double angle = 0.0;
    double offset = 0.0;
    double length = 0.0;
    std::vector<Vec2> x, v;

    double dt() const { return length / double(x.size() - 1); }
};

struct RayFamilyOptions {
    int n_angles = 96;
    int n_offsets = 96;
    double max_offset = 0.995; ///< chords with |offset| above this are grazing and skipped
    int samples = 513;         ///< Simpson nodes per ray
    int steps = 2048;          ///< RK4 steps per ray, a multiple of samples - 1
    int n_ttilde = 257;
    double T = 6.0;
    bool full_circle = false; ///< angles over [0, 2pi) instead of [0, pi)
};

/// Maximal geodesics entering the domain, together with the uniform t~ grid
/// on [-L, T + L] where L is the longest ray.
struct RayFamily {
    Domain domain;
    RayFamilyOptions options;
    std::vector<RaySamples> rays;
    std::vector<double> ttilde;

    double max_length() const;
    size_t size() const { return rays.size(); }

    /// Radon-style (angle, offset) family on a disk domain; offsets are in units of the radius.
    static RayFamily disk(const RiemannianChart& chart, const RayFamilyOptions& opt = {});
    /// Family from explicit entry points and directions (directions are normalized in g).
    static RayFamily from_entries(const RiemannianChart& chart, const std::vector<std::pair<Vec2, Vec2>>& entries,
                                  const RayFamilyOptions& opt = {});
};

/// Samples a single maximal geodesic with the family's resolution.
RaySamples sample_ray(const RiemannianChart& chart, const Vec2& y, const Vec2& v, int samples, int steps);

enum class TransformKind { Scalar, OneForm };

/// Light ray transform values, rows indexed by t~ and columns by ray.
struct LightRayData {
    TransformKind kind = TransformKind::Scalar;
    std::vector<double> ttilde;
    std::vector<double> angle, offset;
    MatXc values;
};

struct TransformOptions {
    /// Simpson on all nodes against every other node; negative disables the check.
    double refine_tol = 1e-6;
};

/// L q(t~, gamma) = int_I q(t~ + t, gamma(t)) dt for every (t~, ray).
LightRayData light_ray_scalar(const CoefficientPair& coeffs, const RayFamily& family, const TransformOptions& opt = {});
/// L A(t~, gamma) = int_I [b + omega(gamma')](t~ + t, gamma(t)) dt.
LightRayData light_ray_oneform(const CoefficientPair& coeffs, const RayFamily& family,
                               const TransformOptions& opt = {});

using SpatialScalar = std::function<cd(const Vec2& x)>;
using SpatialOneForm = std::function<Vec2c(const Vec2& x)>;

/// I(f, alpha) = int_I f(gamma) + alpha(gamma') dt per ray; either callback may be empty.
std::vector<cd> geodesic_xray(const SpatialScalar& f, const SpatialOneForm& alpha, const RayFamily& family);

/// int_I (i t)^k f(gamma(t)) dt per ray, t measured from the entry point, or from the
/// midpoint of the ray when centered is set.
std::vector<cd> weighted_xray_moment(const SpatialScalar& f, int k, const RayFamily& family, bool centered = false);
/// Same weight applied to a one-form, int_I (i t)^k alpha(gamma') dt.
std::vector<cd> weighted_xray_moment(const SpatialOneForm& alpha, int k, const RayFamily& family,
                                     bool centered = false);

/// CSV "ttilde,angle,offset,value_re,value_im", one line per (t~, ray).
void write_light_ray_csv(const LightRayData& data, std::ostream& out);
LightRayData read_light_ray_csv(std::istream& in, TransformKind kind);

/// Options and domain of a family; RayFamily::disk with the same chart rebuilds it.
nlohmann::json family_manifest(const RayFamily& family);
RayFamilyOptions family_options_from_json(const nlohmann::json& j);

} // namespace lightray
