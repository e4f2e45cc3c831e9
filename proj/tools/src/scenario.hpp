#pragma once

// Scenario configuration for the command-line tools: initial state, bath,
// sweep grid, optional grid-oracle block, and output destination.  Loaded
// from a single JSON document; individual fields can be overridden from the
// command line with dot-path flags (--bath.gamma 1e-3).

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbd/bath.hpp"
#include "qbd/gaussian.hpp"

namespace qbd::cli {

struct StateConfig {
    std::string type = "gaussian";  // gaussian | gaussian_ac | displaced |
                                    // cat | mehler
    double sigma = 1.0;             // gaussian, cat
    double a = 1.0, c = 0.0;        // gaussian_ac, displaced
    double b = 0.0;                 // displaced: center offset
    double r = 0.0;                 // cat: packet displacement (+-r)
    double u = 0.0, omega0 = 1.0;   // mehler
};

struct SweepConfig {
    double tMin = 1e-3;
    double tMax = 1e7;
    int nPoints = 200;
    std::string spacing = "log";  // log | linear
    bool inTauD = false;          // emit t / tau_D instead of raw t
};

struct OracleConfig {
    int N = 256;
    double L = 0.0;       // 0 = auto box
    double dt = 0.0;      // 0 = auto step
    double tMaxGrid = 0.5;  // far enough to expose an under-resolved grid
};

struct ScenarioConfig {
    StateConfig state;
    BathParams bath{1e-3, 100.0};  // reference free-expansion scenario
    SweepConfig sweep;
    std::optional<OracleConfig> oracle;
    std::string outputPath = "sweep.csv";

    /// The constructed initial state (unit trace).
    GaussianMixtureState make_state() const;

    /// (a, c) of the state's envelope kernel: exact for single-kernel
    /// states; for cats the direct-kernel envelope (a = 1/sigma^2, c = 0).
    void envelope(double* a, double* c) const;
};

/// Parse a JSON document (with `overrides` as dot-path/value pairs applied
/// on top).  Throws ValidationError with a field diagnostic on bad input.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
void apply_override(nlohmann::json& doc, const std::string& dotPath,
                    const std::string& value);
nlohmann::json load_json_file(const std::string& path);

}  // namespace qbd::cli
