#pragma once

// Experiment configuration: a JSON document (comments allowed) whose
// physical keys carry their units in the name. See README.md for the key
// reference.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cdqkd/channel.hpp"
#include "cdqkd/keyrates.hpp"
#include "cdqkd/mc_sim.hpp"
#include "cdqkd/monitor.hpp"

namespace cdqkd {

enum class Mode { AnalyticSweep, Fig2, Fig3, OptimalMu, Table3, MonteCarlo, EveRoc };

std::string to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct DistanceGrid {
    double min_km = 0.0;
    double max_km = 300.0;
    int points = 100;

    std::vector<double> values() const;
    friend bool operator==(const DistanceGrid&, const DistanceGrid&) = default;
};

struct EveRocSettings {
    int trials = 20;
    std::vector<double> thresholds_sigma{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0};

    friend bool operator==(const EveRocSettings&, const EveRocSettings&) = default;
};

struct ExperimentConfig {
    Mode mode = Mode::Fig3;
    std::uint64_t seed = 1;
    std::uint64_t n_pulses = 1'000'000;
    std::string output_dir = "out";
    bool click_log = false;

    SourceParams source;
    std::vector<double> mu_list{0.13, 0.19, 0.22, 0.32, 0.41};
    ChannelParams channel;
    LinkBudget link;
    DistanceGrid distance;
    MuGrid mu_grid;
    RateSettings rates;
    EveStrategy eve;
    AbortSettings monitor;
    EveRocSettings eve_roc;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Either a fully defaulted, valid configuration or every problem found.
struct ValidationResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return config.has_value(); }
};

/// Parses and validates configuration text. Overrides are `dotted.key=value`
/// strings applied before validation; values are read as JSON when they
/// parse and as strings otherwise.
ValidationResult validate_config_text(std::string_view text,
                                      const std::vector<std::string>& overrides = {});

ValidationResult validate_config(const std::filesystem::path& path,
                                 const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

/// validate_config_text that throws ConfigError listing every problem.
ExperimentConfig parse_config(std::string_view text);

}  // namespace cdqkd
