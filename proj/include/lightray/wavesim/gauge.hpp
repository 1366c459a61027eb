#pragma once

#include "lightray/transforms/phantoms.hpp"
#include "lightray/wavesim/solver.hpp"

namespace lightray {

/// (A1, q1) with A1 = A2 + 2 d psi and q1 = q2 + Box psi - A2 grad psi - <grad psi, grad psi>
/// for -dt^2 + Euclidean g. Throws PreconditionError when psi does not vanish on the
/// lateral boundary of the grid.
CoefficientPair gauge_transform(const CoefficientPair& c2, const BumpField& psi, const SpaceTimeGrid& grid);

struct GaugeDatumResult {
    std::string name;
    double dn_norm = 0.0;
    double dn_rel_error = 0.0;        ///< |L1 h - L2 h| / |L1 h|
    double conjugation_error = 0.0;   ///< |u1 - e^psi u2| / |u1| over stored levels
};

struct GaugeReport {
    std::vector<GaugeDatumResult> data;
    double max_dn_error = 0.0;
    double max_conjugation_error = 0.0;
};

/// Solves both problems for every datum and compares DN samples and solutions.
GaugeReport verify_gauge_invariance(const SpaceTimeGrid& grid, const CoefficientPair& c2, const BumpField& psi,
                                    const std::vector<BoundaryDatum>& data);

} // namespace lightray
