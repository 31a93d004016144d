#pragma once

#include "habm/dynamics.h"
#include "habm/harness.h"

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace habm
{

/// Bad configuration: unknown key, wrong type or out-of-range value. `key()`
/// names the offending entry.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what)
        , m_key(std::move(key))
    {
    }
    const std::string& key() const
    {
        return m_key;
    }

private:
    std::string m_key;
};

/// Every tunable of a run: model parameters, environment layout, and the
/// sweep protocol. Resolution order is defaults, then file, then flags.
struct RunConfig {
    ModelParams model;
    SweepSpec sweep;
    int workers = 1;

    /// Overlays the keys present in `j` (a flat JSON object). Unknown keys throw.
    void apply(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    void validate() const;
};

/// Reads a JSON config file. Throws ConfigError with key "config" when the
/// file is missing or unparsable.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Parses a comma-separated list of numbers ("0.05,0.5").
std::vector<double> parse_number_list(const std::string& text, const std::string& key);

} // namespace habm
