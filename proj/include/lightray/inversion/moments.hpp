#pragma once

#include "lightray/transforms/light_ray.hpp"

namespace lightray {

/// mu[k][ray] = int (-i (t~ + shift[ray] - t_center))^k data(t~, ray) dt~ for k = 0..K.
struct MomentSequence {
    TransformKind kind = TransformKind::Scalar;
    int K = 0;
    double t_center = 0.0;
    std::vector<double> shift; ///< empty means zero for every ray
    std::vector<std::vector<cd>> mu;
};

/// Trapezoid quadrature on the data's t~ grid. Throws SupportViolation when the first or
/// last t~ row is not negligible (above 1e-10 of the data maximum).
MomentSequence moments_from_data(const LightRayData& data, int K, double t_center = 0.0,
                                 const std::vector<double>& shift = {});
/// Per-ray shift L/2 that moves the time origin of every ray to its midpoint.
std::vector<double> midpoint_shift(const RayFamily& family);

} // namespace lightray
