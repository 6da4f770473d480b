#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "chi2cav/model.hpp"
#include "chi2cav/spectra.hpp"

namespace chi2cav {

// Parse or validation failure while loading a run configuration (exit 2).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class Spacing { linear, log };
enum class OutputFormat { csv, json };

struct SweepSpec {
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 50;
    Spacing spacing = Spacing::linear;
};

struct SpectrumSpec {
    SpectrumModel model = SpectrumModel::eq6;
    double n_scaled = 1.25;
    double omega_max_over_gamma1 = 20.0;
    std::size_t points = 401;
    double v1_in = 1.0;
};

struct CascadeSpec {
    double delta_hz = 0.0;
    int order = default_cascade_order;
};

struct OutputSpec {
    std::string path;  // empty: standard output
    OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
    CavityConfig cavity;
    std::optional<double> pump_power;
    double tol = 1e-10;
    double kick = 1e-3;
    std::optional<SweepSpec> sweep;
    std::optional<SpectrumSpec> spectrum;
    CascadeSpec cascade;
    OutputSpec output;
};

// Strict: unknown keys are rejected. Cavity invariants are re-checked.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

std::vector<double> sweep_grid(const SweepSpec& sweep);

}  // namespace chi2cav
