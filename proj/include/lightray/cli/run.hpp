#pragma once

#include "lightray/cli/config.hpp"
#include "lightray/geometry/chart.hpp"
#include "lightray/transforms/light_ray.hpp"

#include <iosfwd>
#include <optional>

namespace lightray {

RiemannianChart make_chart(const GeometrySpec& g);
RayFamilyOptions family_options(const ExperimentConfig& c, bool full_circle);

/// Phantoms of the coefficient spec, supported in the phantom window.
CoefficientPair scalar_phantom(const CoefficientSpec& s);
CoefficientPair oneform_phantom(const CoefficientSpec& s);

struct RunOptions {
    std::string subcommand = "all"; ///< beam | forward | invert | gauge-check | wavesim | all
    std::string config_path;        ///< empty: defaults only
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = 0; ///< 0 keeps the OpenMP default
    bool strict = false;
};

struct ThresholdResult {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = true;
};

struct RunResult {
    nlohmann::json manifest;
    std::vector<ThresholdResult> thresholds;
    int exit_code = 0;
};

/// Runs one subcommand and writes its artifacts and manifest.json under out_dir.
/// Exit code 1 when strict and a threshold fails. Module errors propagate with context.
RunResult run(const RunOptions& opt, std::ostream& log);

/// Wraps run() for the command line: maps ConfigError to exit code 2 and other errors to 3.
int run_main(const RunOptions& opt, std::ostream& log);

} // namespace lightray
