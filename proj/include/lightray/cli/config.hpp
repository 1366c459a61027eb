#pragma once

#include "lightray/common.hpp"

#include <json.hpp>

#include <string>

namespace lightray {

struct GeometrySpec {
    double radius = 1.0;
    Vec2 center = Vec2::Zero();
    std::string metric = "euclidean"; ///< "euclidean" or "conformal"
    double conformal_amplitude = 0.0;
};

/// q = poly(t) P(|x - center| / radius) window(t).
struct ScalarPhantomSpec {
    std::vector<double> poly{1.0, 2.0, -1.0};
    Vec2 center{0.2, 0.1};
    double radius = 0.5;
};

/// b = b_poly(t) P(|x - b_center| / b_radius) window(t) and a swirl
/// omega = P(|x - c| / r) window(t) (drift - rate (t - 3) d_y, rate (t - 3) d_x), d = x - c.
struct OneFormPhantomSpec {
    std::vector<double> b_poly{1.0, 1.0};
    Vec2 b_center{0.2, 0.1};
    double b_radius = 0.5;
    Vec2 swirl_center{-0.15, 0.05};
    double swirl_radius = 0.5;
    double swirl_rate = 1.0;
    double drift = 0.5;
};

struct CoefficientSpec {
    double t1 = 2.1, t2 = 3.9, ramp = 0.5; ///< phantom time window
    ScalarPhantomSpec scalar;
    OneFormPhantomSpec oneform;
};

struct RaySpec {
    int n_angles = 96;
    int n_offsets = 96;
    int samples = 513;
    int n_ttilde = 257;
    double max_offset = 0.995;
};

struct BeamSpec {
    std::vector<double> rho{8.0, 16.0, 32.0, 64.0, 128.0};
    double H0_real = 0.0, H0_imag = 1.0; ///< H0 = (H0_real + i H0_imag) I
    double delta = 0.1;
    double angle = 0.3, offset = 0.2, ttilde = 1.0;
    int n_s = 97, n_z = 33;
    int csv_s = 41, csv_z = 21;
};

struct InversionSpec {
    int K = 3;
    int oneform_K = 2;
    bool oneform = true;
    double lambda_rel = 1e-4;
    int grid = 97;
    double t1 = 2.1, t2 = 3.9, ramp = 0.5; ///< model window
    std::string scalar_data; ///< optional light-ray CSV used instead of the forward oracle
};

struct WavesimSpec {
    std::vector<int> gauge_cells{128, 256, 512};
    double gauge_T = 2.0;
    int field_cells = 64;
    double field_T = 2.0;
    int field_levels = 21;
    std::vector<double> quasimode_rho{2.0, 4.0, 8.0};
    int quasimode_cells = 504;
    double quasimode_T = 3.0;
};

struct ThresholdSpec {
    double invert_rel_error = 0.05;
    double field_strength_error = 0.10;
    double gauge_dn_error = 2e-3;
};

/// Fully resolved experiment configuration.
struct ExperimentConfig {
    int version = 1;
    std::uint64_t seed = 7;
    double T = 6.0;
    GeometrySpec geometry;
    CoefficientSpec coefficients;
    RaySpec rays;
    BeamSpec beam;
    InversionSpec inversion;
    WavesimSpec wavesim;
    ThresholdSpec thresholds;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// The versioned defaults; configs/defaults.json is a copy.
nlohmann::json default_config_json();

/// Checks keys and types of `user` against the defaults. Throws ConfigError naming the field path.
void check_schema(const nlohmann::json& user, const nlohmann::json& schema, const std::string& path = "config");

/// Merges a user document over the defaults, checks schema and value ranges.
ExperimentConfig resolve_config(const nlohmann::json& user);
ExperimentConfig load_config(const std::string& path);

/// Longest geodesic chord D of the domain (2 R for the Euclidean disk).
double longest_chord(const GeometrySpec& g);

/// Range checks. With `inversion` set also requires T > 2 D and phantom and model windows inside (D, T - D).
void validate(const ExperimentConfig& c, bool inversion);

} // namespace lightray
