#include "ipend/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "ipend/errors.hpp"

namespace ipend {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& field) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not a number: '" + text + "'");
    }
}

long parse_long(const std::string& text, const std::string& field) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not an integer: '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& text, const std::string& field) {
    try {
        std::size_t pos = 0;
        if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
        const std::uint64_t v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not an unsigned integer: '" + text + "'");
    }
}

struct Entry {
    std::string key;  // "section.name", or bare "name" for globals
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&)> set;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        auto dbl = [&e](const char* key, double& (*ref)(Config&)) {
            e.push_back({key,
                         [ref](const Config& c) { return fmt_double(ref(const_cast<Config&>(c))); },
                         [ref, key = std::string(key)](Config& c, const std::string& v) {
                             ref(c) = parse_double(v, key);
                         }});
        };
        auto num = [&e](const char* key, int& (*ref)(Config&)) {
            e.push_back({key,
                         [ref](const Config& c) {
                             return std::to_string(ref(const_cast<Config&>(c)));
                         },
                         [ref, key = std::string(key)](Config& c, const std::string& v) {
                             ref(c) = static_cast<int>(parse_long(v, key));
                         }});
        };

        e.push_back({"seed",
                     [](const Config& c) { return std::to_string(c.seed); },
                     [](Config& c, const std::string& v) { c.seed = parse_u64(v, "seed"); }});

        dbl("plant.cart_mass", [](Config& c) -> double& { return c.plant.cart_mass; });
        dbl("plant.rod_mass", [](Config& c) -> double& { return c.plant.rod_mass; });
        dbl("plant.rod_length", [](Config& c) -> double& { return c.plant.rod_length; });
        dbl("plant.gravity", [](Config& c) -> double& { return c.plant.gravity; });
        dbl("plant.motor_gain", [](Config& c) -> double& { return c.plant.motor_gain; });
        dbl("plant.dynamic_friction",
            [](Config& c) -> double& { return c.plant.dynamic_friction; });
        dbl("plant.static_friction",
            [](Config& c) -> double& { return c.plant.static_friction; });
        dbl("plant.rail_half_length",
            [](Config& c) -> double& { return c.plant.rail_half_length; });
        dbl("plant.angle_limit", [](Config& c) -> double& { return c.plant.angle_limit; });
        dbl("plant.dead_zone_volts",
            [](Config& c) -> double& { return c.plant.dead_zone_volts; });
        dbl("plant.voltage_mid", [](Config& c) -> double& { return c.plant.voltage_mid; });
        dbl("plant.voltage_span", [](Config& c) -> double& { return c.plant.voltage_span; });
        dbl("plant.force_max", [](Config& c) -> double& { return c.plant.force_max; });

        dbl("sensors.offset_p", [](Config& c) -> double& { return c.sensors.offset_p; });
        dbl("sensors.offset_theta", [](Config& c) -> double& { return c.sensors.offset_theta; });
        dbl("sensors.quant_p", [](Config& c) -> double& { return c.sensors.quant_p; });
        dbl("sensors.quant_theta", [](Config& c) -> double& { return c.sensors.quant_theta; });
        dbl("sensors.noise_std_p", [](Config& c) -> double& { return c.sensors.noise_std_p; });
        dbl("sensors.noise_std_theta",
            [](Config& c) -> double& { return c.sensors.noise_std_theta; });

        dbl("lqg.q_p", [](Config& c) -> double& { return c.lqg.q_diag(0); });
        dbl("lqg.q_p_dot", [](Config& c) -> double& { return c.lqg.q_diag(1); });
        dbl("lqg.q_theta", [](Config& c) -> double& { return c.lqg.q_diag(2); });
        dbl("lqg.q_theta_dot", [](Config& c) -> double& { return c.lqg.q_diag(3); });
        dbl("lqg.r", [](Config& c) -> double& { return c.lqg.r; });
        dbl("lqg.process_noise", [](Config& c) -> double& { return c.lqg.process_noise; });
        dbl("lqg.ts", [](Config& c) -> double& { return c.lqg_ts; });

        dbl("sim.plant_dt", [](Config& c) -> double& { return c.plant_dt; });

        num("ga.population", [](Config& c) -> int& { return c.ga.population; });
        num("ga.generations", [](Config& c) -> int& { return c.ga.generations; });
        num("ga.tournament", [](Config& c) -> int& { return c.ga.tournament; });
        dbl("ga.crossover_rate", [](Config& c) -> double& { return c.ga.crossover_rate; });
        dbl("ga.blend_alpha", [](Config& c) -> double& { return c.ga.blend_alpha; });
        dbl("ga.mutation_rate", [](Config& c) -> double& { return c.ga.mutation_rate; });
        dbl("ga.mutation_sigma", [](Config& c) -> double& { return c.ga.mutation_sigma; });
        num("ga.elites", [](Config& c) -> int& { return c.ga.elites; });

        dbl("fitness.position_weight",
            [](Config& c) -> double& { return c.fitness.position_weight; });
        dbl("fitness.angle_weight", [](Config& c) -> double& { return c.fitness.angle_weight; });
        dbl("fitness.episode_length",
            [](Config& c) -> double& { return c.fitness.episode_length; });
        num("fitness.n_episodes", [](Config& c) -> int& { return c.fitness.n_episodes; });

        // Symmetric half-widths about the regulation point.
        for (int i = 0; i < 4; ++i) {
            static const char* names[4] = {"safe.p", "safe.p_dot", "safe.theta",
                                           "safe.theta_dot"};
            e.push_back({names[i],
                         [i](const Config& c) { return fmt_double(c.safe.box.hi[i]); },
                         [i, key = std::string(names[i])](Config& c, const std::string& v) {
                             const double half = parse_double(v, key);
                             c.safe.box.lo[i] = -half;
                             c.safe.box.hi[i] = half;
                         }});
        }

        dbl("switch.t_sw", [](Config& c) -> double& { return c.sw.t_sw; });
        dbl("switch.lhc_margin", [](Config& c) -> double& { return c.sw.lhc_margin; });
        dbl("switch.coverage", [](Config& c) -> double& { return c.sw.coverage; });
        dbl("switch.calibration_duration",
            [](Config& c) -> double& { return c.sw.calibration_duration; });

        dbl("scenario.duration", [](Config& c) -> double& { return c.scenario.duration; });
        dbl("scenario.square_amplitude",
            [](Config& c) -> double& { return c.scenario.square_amplitude; });
        dbl("scenario.freq_low", [](Config& c) -> double& { return c.scenario.freq_low; });
        dbl("scenario.freq_high", [](Config& c) -> double& { return c.scenario.freq_high; });
        num("scenario.repeats", [](Config& c) -> int& { return c.scenario.repeats; });
        dbl("scenario.zero_ic_mag", [](Config& c) -> double& { return c.scenario.zero_ic_mag; });
        dbl("scenario.offset_p", [](Config& c) -> double& { return c.scenario.offset_p; });
        return e;
    }();
    return entries;
}

const std::map<std::string, const Entry*>& registry_index() {
    static const std::map<std::string, const Entry*> index = [] {
        std::map<std::string, const Entry*> m;
        for (const Entry& e : registry()) m[e.key] = &e;
        return m;
    }();
    return index;
}

}  // namespace

Config parse_config(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        const auto it = registry_index().find(full);
        if (it == registry_index().end()) {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + full + "'");
        }
        try {
            it->second->set(config, value);
        } catch (const ConfigError& err) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + err.what());
        }
    }
    validate(config);
    return config;
}

Config load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const Config& config) {
    std::ostringstream out;
    std::string section;
    for (const Entry& e : registry()) {
        const auto dot = e.key.find('.');
        const std::string key_section = dot == std::string::npos ? "" : e.key.substr(0, dot);
        const std::string key_name = dot == std::string::npos ? e.key : e.key.substr(dot + 1);
        if (key_section != section) {
            section = key_section;
            out << "\n[" << section << "]\n";
        }
        out << key_name << " = " << e.get(config) << "\n";
    }
    return out.str();
}

std::string reference_config() {
    std::ostringstream out;
    out << "# Inverted-pendulum laboratory configuration (all values are the defaults).\n"
           "# Lines are 'key = value' under [section] headers; '#' starts a comment.\n"
           "# The [safe] entries are half-widths of the training box about the\n"
           "# regulation point; switch.t_sw may be 'inf' to disable switching.\n";
    out << serialize_config(Config{});
    return out.str();
}

void validate(const Config& config) {
    validate(config.plant);
    validate(config.sensors);
    validate(config.lqg);
    if (!(config.lqg_ts > 0.0) || config.lqg_ts > 0.1) {
        throw ConfigError("lqg.ts: must be in (0, 0.1]");
    }
    if (!(config.plant_dt > 0.0) || config.plant_dt > 0.02) {
        throw ConfigError("sim.plant_dt: must be in (0, 0.02]");
    }
    const double ratio = config.lqg_ts / config.plant_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw ConfigError("sim.plant_dt: lqg.ts must be an integer multiple of plant_dt");
    }
    validate(config.ga);
    validate(config.fitness);
    validate(config.safe, config.plant);
    if (std::isnan(config.sw.t_sw) || config.sw.t_sw < 0.0) {
        throw ConfigError("switch.t_sw: must be nonnegative (infinity allowed)");
    }
    if (!std::isfinite(config.sw.lhc_margin) || !(config.sw.lhc_margin >= 1.0)) {
        throw ConfigError("switch.lhc_margin: must be finite and >= 1");
    }
    if (!(config.sw.coverage > 0.0) || !(config.sw.coverage <= 1.0)) {
        throw ConfigError("switch.coverage: must be in (0, 1]");
    }
    if (!(config.sw.calibration_duration > 0.0)) {
        throw ConfigError("switch.calibration_duration: must be positive");
    }
    if (!(config.scenario.duration > 0.0)) {
        throw ConfigError("scenario.duration: must be positive");
    }
    if (!(config.scenario.square_amplitude >= 0.0)) {
        throw ConfigError("scenario.square_amplitude: must be nonnegative");
    }
    if (!(config.scenario.freq_low > 0.0) || !(config.scenario.freq_high > 0.0)) {
        throw ConfigError("scenario.freq_low/freq_high: must be positive");
    }
    if (config.scenario.repeats < 1) {
        throw ConfigError("scenario.repeats: must be at least 1");
    }
    if (!(config.scenario.zero_ic_mag > 0.0)) {
        throw ConfigError("scenario.zero_ic_mag: must be positive");
    }
    if (!std::isfinite(config.scenario.offset_p) ||
        std::abs(config.scenario.offset_p) >= config.plant.rail_half_length) {
        throw ConfigError("scenario.offset_p: must lie strictly inside the rail");
    }
}

SimSetup make_sim_setup(const Config& config) {
    validate(config);
    SimSetup sim;
    sim.plant = config.plant;
    sim.sensors = config.sensors;
    sim.lqg = synthesize_lqg(config.plant, config.sensors, config.lqg, config.lqg_ts);
    sim.plant_dt = config.plant_dt;
    return sim;
}

Scenario make_scenario(const Config& config, ScenarioKind kind, std::uint64_t seed) {
    Scenario sc;
    sc.kind = kind;
    sc.duration = config.scenario.duration;
    sc.seed = seed;
    sc.zero_ic_mag = config.scenario.zero_ic_mag;
    sc.offset_p = config.scenario.offset_p;
    if (kind == ScenarioKind::kSquareLow || kind == ScenarioKind::kSquareHigh) {
        sc.amplitude = config.scenario.square_amplitude;
        sc.frequency =
            kind == ScenarioKind::kSquareLow ? config.scenario.freq_low
                                             : config.scenario.freq_high;
    }
    return sc;
}

}  // namespace ipend
