#include "habm/config.h"

#include <fstream>
#include <functional>
#include <sstream>

namespace habm
{

using nlohmann::json;
using nlohmann::ordered_json;

namespace
{

template <class T>
T checked(const std::string& key, const json& v)
{
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
            throw ConfigError(key, "expected true or false");
        }
    }
    else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) {
            throw ConfigError(key, "expected a non-negative integer");
        }
    }
    else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            throw ConfigError(key, "expected an integer");
        }
    }
    else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) {
            throw ConfigError(key, "expected a number");
        }
    }
    else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) {
            throw ConfigError(key, "expected an array of numbers");
        }
        for (const auto& x : v) {
            if (!x.is_number()) {
                throw ConfigError(key, "expected an array of numbers");
            }
        }
    }
    return v.get<T>();
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const json&)> set;
    std::function<ordered_json(const RunConfig&)> get;
};

template <class T, class Ref>
Field field(std::string key, Ref ref)
{
    return {key, [ref, key](RunConfig& c, const json& v) { ref(c) = checked<T>(key, v); },
            [ref](const RunConfig& c) { return ordered_json(ref(c)); }};
}

#define HABM_REF(expr) [](auto& cfg) -> auto& { return cfg.expr; }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(field<double>("fertility", HABM_REF(model.fertility)));
        f.push_back(field<double>("carrying_capacity", HABM_REF(model.carrying_capacity)));
        f.push_back(field<int>("initial_population", HABM_REF(model.initial_population)));
        f.push_back(field<double>("capability_mean", HABM_REF(model.capability.mean)));
        f.push_back(field<double>("c", HABM_REF(model.capability.spread)));
        f.push_back(field<double>("u", HABM_REF(model.capability.mutation_sd)));
        f.push_back(field<double>("heritability", HABM_REF(model.capability.heritability)));
        f.push_back(field<double>("mutation_prob", HABM_REF(model.capability.mutation_prob)));
        f.push_back(field<double>("initial_energy", HABM_REF(model.initial_energy)));
        f.push_back(field<double>("metabolic_cost", HABM_REF(model.metabolic_cost)));
        f.push_back(field<double>("movement_cost", HABM_REF(model.movement_cost)));
        f.push_back(field<double>("food_energy", HABM_REF(model.food_energy)));
        f.push_back(field<double>("reproduction_cost", HABM_REF(model.reproduction_cost)));
        f.push_back(field<double>("energy_threshold", HABM_REF(model.energy_threshold)));
        f.push_back(field<double>("hazard_base", HABM_REF(model.hazard_base)));
        f.push_back(field<double>("hazard_age", HABM_REF(model.hazard_age)));
        f.push_back(field<int>("age_threshold", HABM_REF(model.age_threshold)));
        f.push_back(field<int>("age_tick_interval", HABM_REF(model.age_tick_interval)));
        f.push_back(field<double>("arena_width", HABM_REF(model.env.arena.width)));
        f.push_back(field<double>("arena_height", HABM_REF(model.env.arena.height)));
        f.push_back(field<int>("food_count", HABM_REF(model.env.food_count)));
        f.push_back(field<double>("food_radius", HABM_REF(model.env.food_radius)));
        f.push_back(field<double>("neighbor_radius", HABM_REF(model.env.neighbor_radius)));
        f.push_back(field<double>("speed", HABM_REF(model.env.speed)));
        f.push_back(field<double>("regen_rate", HABM_REF(model.env.regen_rate)));
        f.push_back(field<std::vector<double>>("grid_c", HABM_REF(sweep.c_values)));
        f.push_back(field<std::vector<double>>("grid_u", HABM_REF(sweep.u_values)));
        f.push_back(field<int>("replicates", HABM_REF(sweep.replicates)));
        f.push_back(field<std::int64_t>("steps", HABM_REF(sweep.steps)));
        f.push_back(field<std::int64_t>("sample_every", HABM_REF(sweep.sample_every)));
        f.push_back(field<std::uint64_t>("base_seed", HABM_REF(sweep.base_seed)));
        f.push_back(field<int>("stability_window", HABM_REF(sweep.stability_window)));
        f.push_back(field<double>("rebound_margin", HABM_REF(sweep.rebound_margin)));
        f.push_back(field<bool>("survivors_only", HABM_REF(sweep.survivors_only)));
        f.push_back(field<int>("workers", HABM_REF(workers)));

        f.push_back({"villages",
                     [](RunConfig& c, const json& v) {
                         if (!v.is_array() || v.empty()) {
                             throw ConfigError("villages", "expected a non-empty array");
                         }
                         std::vector<Village> out;
                         int id = 1;
                         for (const auto& e : v) {
                             if (!e.is_object() || e.size() != 3 || !e.contains("x") ||
                                 !e.contains("y") || !e.contains("radius")) {
                                 throw ConfigError("villages",
                                                   "each entry needs exactly x, y and radius");
                             }
                             out.push_back({id++,
                                            {checked<double>("villages.x", e["x"]),
                                             checked<double>("villages.y", e["y"])},
                                            checked<double>("villages.radius", e["radius"])});
                         }
                         c.model.env.villages = std::move(out);
                     },
                     [](const RunConfig& c) {
                         ordered_json arr = ordered_json::array();
                         for (const auto& v : c.model.env.villages) {
                             arr.push_back(
                                 {{"x", v.center.x}, {"y", v.center.y}, {"radius", v.radius}});
                         }
                         return arr;
                     }});
        return f;
    }();
    return table;
}

#undef HABM_REF

} // namespace

void RunConfig::apply(const json& j)
{
    if (!j.is_object()) {
        throw ConfigError("config", "top level must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const Field& f) { return f.key == key; });
        if (it == table.end()) {
            throw ConfigError(key, "unknown configuration key");
        }
        it->set(*this, value);
    }
}

ordered_json RunConfig::to_json() const
{
    ordered_json j;
    for (const auto& f : fields()) {
        j[f.key] = f.get(*this);
    }
    return j;
}

void RunConfig::validate() const
{
    // map the library's messages back onto config keys
    try {
        model.validate();
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError("model", e.what());
    }
    try {
        sweep.validate();
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError("sweep", e.what());
    }
    if (workers < 1) {
        throw ConfigError("workers", "must be >= 1");
    }
}

json read_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    }
    catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
}

std::vector<double> parse_number_list(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
                ++used;
            }
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        }
        catch (const std::logic_error&) {
            throw ConfigError(key, "not a number: '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError(key, "empty list");
    }
    return out;
}

} // namespace habm
