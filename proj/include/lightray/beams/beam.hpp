#pragma once

#include "lightray/beams/riccati.hpp"
#include "lightray/geometry/fermi.hpp"
#include "lightray/transforms/coefficients.hpp"

#include <iosfwd>
#include <memory>

namespace lightray {

using MatSc = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// Leading amplitude v0(s) on the Riccati grid, stored through its logarithm
/// with a continuously tracked branch.
struct Amplitude {
    int sign = +1;
    std::vector<double> s_grid;
    std::vector<cd> log_v0;
    std::vector<cd> dlog_v0;
    double delta = 0.1;
    double rho_power = 0.5;

    cd v0(double s) const;
    /// v0, dv0/ds, d2v0/ds2
    std::array<cd, 3> jet(double s) const;
};

/// s -> (A beta')(s, 0) = A(d_s) on the ray.
using RayOneForm = std::function<cd(double s)>;

/// sign = +1: v0 = det(Y)^{-1/2} exp(+1/2 int A); sign = -1: det(Y)^{-1/2} exp(-1/2 int conj(A)).
/// Throws SingularityError when the argument of det Y jumps by more than pi/2 between nodes.
Amplitude solve_transport(const RiccatiSolution& ric, const RayOneForm& A_along_ray, int sign, double delta,
                          double rho_power);

/// A(d_s) along beta for a coefficient pair, (b + omega(gamma')) / sqrt(2).
RayOneForm ray_oneform(const FermiChart& fc, const CoefficientPair& coeffs);

enum class BeamVariant { Forward, Adjoint };

/// u = rho^{n/4} e^{i rho phi} v0 chi(|z'|/delta) (forward) or
/// u = rho^{n/4} e^{-i rho conj(phi)} conj(v0) chi(|z'|/delta) (adjoint).
struct GaussianBeam {
    double rho = 1.0;
    std::shared_ptr<const FermiChart> fchart;
    std::shared_ptr<const RiccatiSolution> riccati;
    Amplitude amplitude;
    BeamVariant variant = BeamVariant::Forward;

    int n() const { return fchart->n(); }
    double delta() const { return amplitude.delta; }
    /// phi = r + z'^T H(s) z'
    cd phase(const VecS& z) const;
};

struct BeamOptions {
    MatXc H0;           ///< defaults to i I
    double delta = 0.0; ///< defaults to min(delta'/2, 0.1)
    double riccati_step = 0.01;
    double fd_step = 1e-3; ///< step for curvature_D
};

/// Builds Riccati, transport and beam for the given variant and coefficients.
GaussianBeam build_beam(std::shared_ptr<const FermiChart> fc, const CoefficientPair& coeffs, double rho,
                        BeamVariant variant, const BeamOptions& opt = {});

/// Same beam at a different frequency.
GaussianBeam with_rho(const GaussianBeam& beam, double rho);

/// Phase and amplitude with derivatives in Fermi coordinates at z.
/// psi is the effective phase (phi or -conj(phi)), W includes rho^{n/4} and the cutoff.
struct BeamLocal {
    cd psi, W;
    VecSc dpsi, dW;
    MatSc d2psi, d2W;
};
BeamLocal beam_local(const GaussianBeam& beam, const VecS& z);

struct BeamValue {
    cd u;
    VecSc grad; ///< gradient in (t, x)
};

/// Value and space-time gradient at p = (t, x). Zero outside the cutoff support.
BeamValue evaluate_beam(const GaussianBeam& beam, const VecS& p);

/// Metric quantities in Fermi coordinates needed by second order operators.
struct FermiMetricData {
    MatS g, ginv;
    double sqrt_det = 1.0;
    VecS div; ///< |g|^{-1/2} d_i(|g|^{1/2} g^{ij})
    FermiPoint point;
};
FermiMetricData fermi_metric_data(const FermiChart& fc, const VecS& z, double h = 1e-4);

/// Terms of the conjugated operator: P(e^{i rho psi} W) = e^{i rho psi}(rho^2 S W - i rho T + L W).
struct ResidualTerms {
    cd S;  ///< <d psi, d psi>
    cd SW; ///< S W
    cd T;  ///< transport term
    cd LW; ///< operator on the amplitude
    cd F;  ///< -e^{i rho psi}(rho^2 S W - i rho T + L W)
};

/// Residual at z for the operator matching the beam variant: L_{A,q} for forward
/// beams, -Delta - A grad + (q - div A) for adjoint beams.
ResidualTerms beam_residual(const GaussianBeam& beam, const CoefficientPair& coeffs, const VecS& z,
                            const FermiMetricData& md);
ResidualTerms beam_residual(const GaussianBeam& beam, const CoefficientPair& coeffs, const VecS& z);

/// Space-time divergence of A for -dt^2 + g by central differences.
cd spacetime_divergence(const FermiChart& fc, const CoefficientPair& coeffs, const VecS& p, double h = 1e-4);

struct EikonalReport {
    double max_on_beta = 0.0;       ///< max |S phi| on beta
    double max_ratio = 0.0;         ///< max |S phi| / |z'|^2 over the sample set
    double transverse_hessian = 0.0; ///< max entry of the FD transverse Hessian of S phi on beta
    std::vector<double> radii, max_abs; ///< max |S phi| per sampled radius
};

/// Samples S phi on rays in the z' directions at the given radii for each s.
EikonalReport eikonal_residual(const GaussianBeam& beam, const std::vector<double>& s_values,
                               const std::vector<double>& radii, int n_directions = 16, double h_fd = 1e-3);

struct ResidualRow {
    double rho = 0.0;
    double F_norm = 0.0;
    double ratio = 0.0;
    double eikonal_norm = 0.0;   ///< || rho^{n/4} S e^{i rho phi} ||  (amplitude included)
    double transport_norm = 0.0; ///< || T e^{i rho phi} ||
};

struct QuadratureOptions {
    int n_s = 97;
    int n_z = 33;
    bool check_refinement = true;
    double refinement_tol = 0.05;
};

/// L2 norms over the tube by tensor Simpson quadrature with |g|^{1/2}.
std::vector<ResidualRow> pde_residual_norm(const GaussianBeam& beam, const CoefficientPair& coeffs,
                                           const std::vector<double>& rho_list, const QuadratureOptions& q = {});

/// CSV "s,r,z2,Re_u,Im_u" on a structured tube grid (z2 column omitted when n = 1).
void write_beam_csv(const GaussianBeam& beam, int n_s, int n_z, std::ostream& out);

} // namespace lightray
