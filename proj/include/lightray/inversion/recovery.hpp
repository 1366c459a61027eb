#pragma once

#include "lightray/inversion/moments.hpp"
#include "lightray/inversion/xray_solver.hpp"

#include <optional>

namespace lightray {

/// Coefficients of the form w(t) * sum_{m <= K} t^m p_m(x), with w = time_window(t, t1, t2, ramp).
struct ModelClass {
    int K = 3;
    double t1 = 2.1, t2 = 3.9, ramp = 0.5;

    double center() const { return 0.5 * (t1 + t2); }
    double half_width() const { return 0.5 * (t2 - t1); }
    /// phi_m(t) = ((t - center) / half_width)^m, the internal basis.
    double basis(int m, double t) const;
    /// M(j, m) = int (-i (t - center))^j phi_m(t) w(t) dt, j = 0..rows-1.
    MatXc moment_matrix(int rows) const;
    /// Coefficients in the internal basis to monomial coefficients p_m of t^m.
    MatX basis_to_monomial() const;
    void validate() const;
};

struct RecoveryOptions {
    int grid_n = kDefaultReconstructionGrid;
    CglsOptions cgls;
    /// Relative mismatch of the predicted and measured order K+1 residual above which the model warning is raised.
    double model_tol = 0.25;
    /// Data with max |data| at or below this is treated as identically zero (pure gauge).
    double zero_data_tol = 1e-8;
};

struct MomentStep {
    int k = 0;
    double residual = 0.0;          ///< ||P x - r_k|| / ||r_k|| of the X-ray solve
    double consistency_error = 0.0; ///< one-form recovery only
    int iterations = 0;
};

struct ScalarRecovery {
    ModelClass model;
    std::vector<GridField> moments; ///< f_k = int (-i (t - center))^k q dt
    std::vector<GridField> basis;   ///< c_m in the internal basis
    std::vector<GridField> monomial; ///< p_m
    std::vector<MomentStep> steps;
    double model_mismatch = 0.0;
    bool model_warning = false;

    cd value(double t, const Vec2& x) const;
};

/// Moment recursion followed by X-ray inversion of every order; q is assembled from the moment map of the model.
ScalarRecovery recover_scalar(const LightRayData& data, const RayFamily& family, const ModelClass& model,
                              const RecoveryOptions& opt = {});
ScalarRecovery recover_scalar(const LightRayData& data, const RayFamily& family, const XrayProjector& proj,
                              const ModelClass& model, const RecoveryOptions& opt = {});

/// Moments of the field strength F = dA in the gauge where every omega-moment is solenoidal:
/// F12_k = curl alpha_k, F0i_k = i k alpha_{k-1,i} - d_i f_k.
struct FieldStrengthMoments {
    std::vector<GridField> F01, F02, F12;
};

/// Space-time samples of psi(t, x) = int_0^t b(s, x) ds on the grid nodes.
struct GaugePotential {
    std::vector<double> t;
    std::vector<GridField> psi;
    std::string source; ///< which coefficients fed the construction
    /// max |psi| over (0,T) x boundary nodes and max |psi(t >= T)|.
    double boundary_max = 0.0, final_max = 0.0;
};

struct OneFormRecovery {
    ModelClass model;
    std::vector<GridField> b_moments;     ///< f_k in the recovered gauge
    std::vector<GridOneForm> w_moments;   ///< alpha_k^s
    std::vector<GridField> psi_moments;   ///< Helmholtz potentials of the omega-moments of the supplied coefficients
    FieldStrengthMoments field_strength;
    std::vector<MomentStep> steps;
    std::optional<GaugePotential> gauge;
    double data_norm = 0.0; ///< max |data|
};

/// Moment recursion for A. With supplied coefficients the consistency error
/// ||b_k - i k psi_{k-1}|| / max_k ||b_k|| is reported for every k. If in addition the data is
/// identically zero, the gauge psi = int_0^t b is built and a consistency error above
/// consistency_tol throws InconsistentDataError.
OneFormRecovery recover_oneform(const LightRayData& data, const RayFamily& family, const XrayProjector& proj,
                                const ModelClass& model, const RecoveryOptions& opt = {},
                                const CoefficientPair* coeffs = nullptr, double consistency_tol = 1e-3);
OneFormRecovery recover_oneform(const LightRayData& data, const RayFamily& family, const ModelClass& model,
                                const RecoveryOptions& opt = {}, const CoefficientPair* coeffs = nullptr,
                                double consistency_tol = 1e-3);

/// Relative L2 error of the recovered q against the truth over n_t times in the model
/// window and the grid nodes inside the disk.
double spacetime_relative_error(const ScalarRecovery& rec, const CoefficientPair& truth, int n_t = 21);

/// Moments in t of the components of the coefficients' field strength, by Simpson in t and central differences
/// in x (step fd), evaluated at the grid nodes inside the disk.
FieldStrengthMoments field_strength_moments(const CoefficientPair& coeffs, const ModelClass& model,
                                            const DiskGrid& grid, double fd = 1e-4);
/// Omega and b moments of the supplied coefficients at the grid nodes.
std::vector<GridOneForm> omega_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid);
std::vector<GridField> b_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid);

/// Helmholtz potentials psi_k of the omega-moments, Richardson-extrapolated from the grid and
/// its two-fold refinement (the second-order error of the wide stencil cancels for potentials
/// supported inside the disk).
std::vector<GridField> potential_moments(const CoefficientPair& coeffs, const ModelClass& model, const DiskGrid& grid);

/// Relative L2 error over the disk of all components and orders together.
double relative_error(const FieldStrengthMoments& a, const FieldStrengthMoments& truth);

GaugePotential gauge_potential(const CoefficientPair& coeffs, const DiskGrid& grid, double T, int n_t);

} // namespace lightray
