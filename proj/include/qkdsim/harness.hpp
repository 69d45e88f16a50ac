#pragma once

#include <string>
#include <vector>

#include "qkdsim/config.hpp"
#include "qkdsim/errors.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {

/// Parses and validates a JSON config document, filling defaults. Throws
/// config_error with field diagnostics.
ExperimentConfig parse_config(const std::string& text);

/// Full JSON echo of a config, defaults included; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

/// Dispatches to the selected protocol runner, attaches the key-rate report,
/// applies classical post-processing when configured, and writes the output
/// file named in the config (if any).
RunReport run_experiment(const ExperimentConfig& cfg);

// Theta sweep over a base config. Row i runs the base config with theta fixed
// to values[i] and a seed derived from (base seed, i), so reordering the
// values changes per-row randomness.
struct SweepSpec {
    std::string parameter = "theta";
    std::vector<double> values;
    ExperimentConfig base;
};

struct SweepRow {
    double theta = 0.0;
    RunReport report;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Structured (JSON) serialization of a report; byte-stable for a given run.
std::string report_to_json(const RunReport& report);

inline constexpr const char* kCsvHeader =
    "theta,sent,delivered,accepted,r_b,r_b_se,t_p,t_p_se,key_rate";

/// One CSV summary row (no header). theta is the configured fixed angle, nan
/// when the config draws theta from a distribution.
std::string report_to_csv_row(const RunReport& report);

/// Header plus one row per sweep value.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Bits packed MSB-first into lowercase hex (see README for the layout).
std::string bits_to_hex(const std::vector<std::uint8_t>& bits);

}  // namespace qkdsim
