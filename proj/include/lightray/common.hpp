#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightray {

using cd = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2c = Eigen::Vector2cd;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline const cd kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Point outside the admissible domain.
class DomainError : public Error { using Error::Error; };
/// Singular or ill-conditioned linear algebra.
class NumericalError : public Error { using Error::Error; };
/// Geodesic did not leave the domain within the length cap.
class TrappingError : public Error { using Error::Error; };
/// A chart or family could not be constructed.
class ConstructionError : public Error { using Error::Error; };
/// Riccati or transport integration lost regularity.
class SingularityError : public Error { using Error::Error; };
/// Quadrature, finite-difference step or refinement failure.
class AccuracyError : public Error { using Error::Error; };
/// Data does not decay at the end of its grid.
class SupportViolation : public Error { using Error::Error; };
/// Iterative solver did not converge.
class ConditioningError : public Error { using Error::Error; };
/// Inconsistent or invalid user configuration.
class ConfigError : public Error { using Error::Error; };
/// Time stepping became unstable.
class InstabilityError : public Error { using Error::Error; };
/// Input violates a documented precondition.
class PreconditionError : public Error { using Error::Error; };
/// Recovered moments fail an internal consistency check.
class InconsistentDataError : public Error { using Error::Error; };

/// Grid too coarse for the requested frequency.
class ResolutionError : public Error { using Error::Error; };

/// Quintic smoothstep S on [0,1], clamped outside. Returns S, S', S''.
struct Smooth3 {
    double v, d1, d2;
};

inline Smooth3 smoothstep5(double x)
{
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const double x2 = x * x, x3 = x2 * x;
    return {x3 * (10.0 - 15.0 * x + 6.0 * x2),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)};
}

/// Beam cutoff: 1 on [0, 1/4], 0 on [1/2, inf).
inline Smooth3 cutoff_chi(double u)
{
    auto s = smoothstep5(4.0 * u - 1.0);
    return {1.0 - s.v, -4.0 * s.d1, -16.0 * s.d2};
}

/// Composite Simpson weights for n (odd) equispaced nodes with spacing h.
std::vector<double> simpson_weights(int n, double h);

/// Composite trapezoid weights for n equispaced nodes with spacing h.
std::vector<double> trapezoid_weights(int n, double h);

/// Weights of the local cubic (4-point Lagrange) interpolant on sorted nodes xs
/// at x, with derivative weights. i0 receives the first of the 4 nodes.
void local_cubic_weights(const std::vector<double>& xs, double x, size_t& i0, double w[4], double dw[4]);

inline double binomial(int n, int k)
{
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

} // namespace lightray
