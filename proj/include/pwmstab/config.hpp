#pragma once

#include <optional>
#include <string>

#include "pwmstab/model.hpp"
#include "pwmstab/types.hpp"

namespace pwmstab {

struct ControlConfig {
    double i_c = 0.0;            // A
    double m_c = 0.0;            // A/s
    std::string feedback = "i_L"; // selector: i_L, or comma-separated row
};

struct SolverConfig {
    double orbit_tol = 1e-10;
    double bisect_tol = 1e-12;
    double event_tol_rel = 1e-12; // event bisection width relative to T
};

struct SweepConfig {
    SweepParam param = SweepParam::m_c;
    double lo = 0.0;
    double hi = 0.0;
    int points = 0;
};

struct OutputConfig {
    std::string dir = ".";
    std::string format = "csv"; // csv | csv+svg
};

/// Everything a run needs, as parsed from the flat key/value config document.
struct RunConfig {
    ConverterParams converter;
    ControlConfig control;
    SolverConfig solver;
    std::optional<SweepConfig> sweep;
    OutputConfig output;

    SwitchingRule make_rule() const;
    void validate() const;
};

/// Parses the key/value document (dotted sections, '#' comments, one
/// `key = value` per line). Unknown keys are rejected with their line
/// number; missing required fields and bad values raise ValidationError
/// naming the field.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

/// Canonical serialization: fixed key order, all defaults written out,
/// 12 significant digits. parse(serialize(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

} // namespace pwmstab
