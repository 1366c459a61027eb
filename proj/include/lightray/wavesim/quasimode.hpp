#pragma once

#include "lightray/beams/beam.hpp"
#include "lightray/wavesim/solver.hpp"

namespace lightray {

struct QuasimodeRow {
    double rho = 0.0;
    double source_norm = 0.0; ///< discrete L2 norm of F_rho on the grid
    double R_l2 = 0.0;
    double R_h1_scaled = 0.0; ///< rho^{-1} |R|_{H1}
};

struct QuasimodeReport {
    std::vector<QuasimodeRow> rows;
    bool l2_decreasing = false;
    bool h1_decreasing = false;
};

/// F_rho(t, x) = -L(u_rho) for the forward beam, zero outside the cutoff tube.
SpaceTimeFunction beam_source(const GaussianBeam& beam, const CoefficientPair& coeffs);

/// Solves L R = F_rho with zero Cauchy and boundary data for every rho of the ladder
/// on one grid. Throws ResolutionError unless hx <= 1 / (20 pi rho) for every rho.
QuasimodeReport quasimode_check(const SpaceTimeGrid& grid, const CoefficientPair& coeffs, const GaussianBeam& beam,
                                const std::vector<double>& rho_ladder);

struct ReductionIntegral {
    cd value = 0.0;
    double magnitude = 0.0; ///< integral of the absolute integrand
    double relative() const { return magnitude > 0.0 ? std::abs(value) / magnitude : std::abs(value); }
};

/// Space-time trapezoid rule for the integral of (A grad u1) u2 + q u1 u2, where
/// A grad u = -b u_t + omega . grad u. Both solutions must store every time level.
ReductionIntegral reduction_integral(const WaveSolution& u1, const WaveSolution& u2, const CoefficientPair& diff);

struct LimitCheck {
    double rho = 0.0;
    cd lhs = 0.0; ///< rho^{-1} of the integral of (A grad u1) u2 + q u1 u2
    cd rhs = 0.0; ///< i times the integral of (A grad phi) e^{-2 rho Im phi} v1 conj(v2)
    double relative_gap() const { return std::abs(lhs - rhs) / std::abs(rhs); }
};

/// Both sides by tensor Simpson quadrature over the Fermi tube of the forward beam.
/// `forward` and `adjoint` must share the Fermi chart and frequency.
LimitCheck reduction_limit_check(const GaussianBeam& forward, const GaussianBeam& adjoint, const CoefficientPair& diff,
                                 int n_s = 201, int n_z = 201);

} // namespace lightray
