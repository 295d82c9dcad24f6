#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rswave/carleman_params.hpp"
#include "rswave/coefficients.hpp"
#include "rswave/geometry.hpp"
#include "rswave/grid.hpp"

namespace rswave::cli {

/// Flat section.key -> value map read from an INI file. Every key is checked
/// against a fixed schema; unknown sections or keys raise ConfigError.
class RawConfig {
public:
    static RawConfig from_file(const std::string& path);
    static RawConfig from_string(const std::string& text);
    static RawConfig from_stream(std::istream& in, const std::string& origin);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    /// Sorted "section.key=value" lines.
    std::string canonical() const;
    /// FNV-1a 64 of canonical().
    std::uint64_t hash() const;

private:
    std::map<std::string, std::string> values_;  // "section.key" -> value
};

struct DiscretizationConfig {
    std::vector<int> nx;
    double dt = 0.0;  ///< 0: T / (2 nx[0])
    Scheme scheme = Scheme::Midpoint;
    double cfl = 1.0;
};

struct CarlemanConfig {
    double r2 = -1.0;  ///< negative: computed from the coefficients
    double beta = 0.0;  ///< positive: forced instead of searched
    double beta_cap = 1e7;
    std::vector<double> positivity_lambdas{10.0};
    std::vector<double> positivity_mus{1.0, 3.0, 10.0};
    int positivity_samples = 32;
    bool check_zd3 = false;
    std::string identity_case = "manufactured";  ///< manufactured | zero
    double identity_beta = 0.5, identity_lambda = 1.0, identity_mu = 1.0;
    std::vector<int> ladder{80, 160, 320, 640};
    int ladder_steps_per_cell = 2;
    int mc_nx = 320;
    int mc_steps = 100;
    double mc_noise = 1.0;
    std::vector<double> ratio_lambdas{1.0};
    std::vector<double> ratio_mus{0.05, 0.1, 0.2};
    int ratio_nx = 200;
    int ratio_steps_per_cell = 5;
    double ratio_delta = 0.5;  ///< 0 keeps the searched delta
};

struct McConfig {
    int paths = 1000;
    std::uint64_t seed = 1;
    int workers = 0;
};

struct ControlConfig {
    std::string zT = "sin(pi*x)";
    std::string zhatT = "0";
    std::vector<std::string> family{"sine1", "sine2", "sine3", "bump", "wave"};
    std::vector<double> scan_T{1.0, 1.5, 2.0, 2.5, 3.0};
    std::string y0 = "sin(pi*x)";
    std::string yhat0 = "0";
    std::string y1 = "0";
    std::string yhat1 = "0";
    double tol = 1e-8;
    int max_iter = 200;
    bool filter = true;
    double filter_fraction = 0.6;
    bool strict = false;
};

struct OutputConfig {
    std::string dir = ".";
    std::string prefix;
    bool dump = false;
    int stride = 10;
};

struct ExperimentConfig {
    GeometrySpec geometry;
    DiscretizationConfig discretization;
    std::array<std::string, 5> coefficients{"0", "0", "0", "0", "0"};
    CarlemanConfig carleman;
    McConfig mc;
    ControlConfig control;
    OutputConfig output;
    std::uint64_t hash = 0;

    /// Parses and validates; geometry errors surface as GeometryError, the rest
    /// as ConfigError.
    static ExperimentConfig from_raw(const RawConfig& raw);

    CoefficientSet coefficient_set() const;
    Grid grid() const;
    /// r2 from config, or from the coefficient sizes on grid() when not given.
    double r2() const;
    /// Searched or forced weight parameters (the latter are not verified).
    CarlemanParams carleman_params() const;
    /// RSWAVE_WORKERS wins over mc.workers; hardware concurrency otherwise.
    int workers() const;
};

}  // namespace rswave::cli
