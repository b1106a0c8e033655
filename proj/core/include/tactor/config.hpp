#pragma once

#include "tactor/mechanism.hpp"

#include <stdexcept>
#include <string>

namespace tactor {

/// Raised for malformed or non-physical configuration input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses a mechanism config from a JSON document. All keys are required,
/// unknown keys are rejected. Lengths are in mm; q_limits in degrees
/// (converted to radians on load).
///
/// Schema: { "L", "l", "d1", "h1", "d", "h", "base_radius", "base_z",
///           "q_limits": [min_deg, max_deg], "tau_max" }
MechanismParams load_mechanism_json(const std::string& json_text);

/// Reads and parses a config file; throws ConfigError on IO or parse failure.
MechanismParams load_mechanism_file(const std::string& path);

/// Serializes params back to the config schema (q_limits in degrees).
std::string mechanism_to_json(const MechanismParams& p);

}  // namespace tactor
