#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomoscope/models.hpp"

namespace tomoscope::config {

/// Configuration problem with a path-qualified message ("model.lambda: ...").
/// Distinguished from computation errors so the CLI can map it to exit 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TcModelConfig {
    int n_total = 6;
    int n_qubits = 5;
    double nu_field = 7.78;
    double anharmonicity = 0.0;
    double coupling = 1.2e-3;
    double swap_coupling = 0.0;
    double gap_mean = 5.6;
    double gap_sd = 1.12;
    double drive = 4.62;
    std::optional<std::vector<double>> nu_qubit; ///< explicit override of the draw
};

struct ModelConfig {
    std::string kind; ///< "bec", "atom_field" or "tc"
    models::BecParams bec;
    models::AtomFieldParams atom_field;
    TcModelConfig tc;
};

struct NumericsConfig {
    int grid_points = 321;
    double x_max = 8.0;
    std::string plan = "default"; ///< "default" or "reduced" angle plan
    bool closed_form = false;     ///< analytic eigensystem, bec only
};

struct SweepConfig {
    std::string parameter;
    std::vector<double> values;
};

struct TomogramConfig {
    int state_k = 0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    double theta_f = 0.0;
    std::string axis = "x";
};

struct IndicatorsConfig {
    int state_k = 0;
};

struct CorrelateConfig {
    std::string input; ///< directory holding xi.csv (and optionally eps.csv)
};

struct DisorderConfig {
    int n_sd = 20;
};

struct RunConfig {
    std::string command;
    ModelConfig model;
    NumericsConfig numerics;
    std::optional<SweepConfig> sweep;
    TomogramConfig tomogram;
    IndicatorsConfig indicators;
    CorrelateConfig correlate;
    DisorderConfig disorder;
    std::string out = "out";
    std::optional<std::uint64_t> seed; ///< resolved later against env and default
    int threads = 1;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(path + "." + key + ": unknown key");
    }
}

inline double get_number(const json& obj, const std::string& path, const char* key,
                         double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

inline std::string get_string(const json& obj, const std::string& path, const char* key,
                              const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

inline ModelConfig parse_model(const json& j) {
    if (!j.is_object()) throw ConfigError("model: expected an object");
    ModelConfig m;
    m.kind = get_string(j, "model", "kind", "");
    if (m.kind == "bec") {
        check_keys(j, "model", {"kind", "n_total", "omega0", "omega1", "interaction", "lambda"});
        m.bec.n_total = get_int(j, "model", "n_total", m.bec.n_total);
        m.bec.omega0 = get_number(j, "model", "omega0", m.bec.omega0);
        m.bec.omega1 = get_number(j, "model", "omega1", m.bec.omega1);
        m.bec.interaction = get_number(j, "model", "interaction", m.bec.interaction);
        m.bec.lambda = get_number(j, "model", "lambda", m.bec.lambda);
        if (m.bec.n_total < 1) throw ConfigError("model.n_total: must be at least 1");
        if (m.bec.interaction <= 0.0)
            throw ConfigError("model.interaction: must be positive");
    } else if (m.kind == "atom_field") {
        check_keys(j, "model", {"kind", "n_total", "omega_f", "omega_a", "gamma", "g"});
        m.atom_field.n_total = get_int(j, "model", "n_total", m.atom_field.n_total);
        m.atom_field.omega_f = get_number(j, "model", "omega_f", m.atom_field.omega_f);
        m.atom_field.omega_a = get_number(j, "model", "omega_a", m.atom_field.omega_a);
        m.atom_field.gamma = get_number(j, "model", "gamma", m.atom_field.gamma);
        m.atom_field.g = get_number(j, "model", "g", m.atom_field.g);
        if (m.atom_field.n_total < 1) throw ConfigError("model.n_total: must be at least 1");
    } else if (m.kind == "tc") {
        check_keys(j, "model",
                   {"kind", "n_total", "n_qubits", "nu_field", "anharmonicity", "coupling",
                    "swap_coupling", "gap_mean", "gap_sd", "drive", "nu_qubit"});
        m.tc.n_total = get_int(j, "model", "n_total", m.tc.n_total);
        m.tc.n_qubits = get_int(j, "model", "n_qubits", m.tc.n_qubits);
        m.tc.nu_field = get_number(j, "model", "nu_field", m.tc.nu_field);
        m.tc.anharmonicity = get_number(j, "model", "anharmonicity", m.tc.anharmonicity);
        m.tc.coupling = get_number(j, "model", "coupling", m.tc.coupling);
        m.tc.swap_coupling = get_number(j, "model", "swap_coupling", m.tc.swap_coupling);
        m.tc.gap_mean = get_number(j, "model", "gap_mean", m.tc.gap_mean);
        m.tc.gap_sd = get_number(j, "model", "gap_sd", m.tc.gap_sd);
        m.tc.drive = get_number(j, "model", "drive", m.tc.drive);
        if (m.tc.n_total < 1) throw ConfigError("model.n_total: must be at least 1");
        if (m.tc.n_qubits < 1 || m.tc.n_qubits > 12)
            throw ConfigError("model.n_qubits: must be between 1 and 12");
        if (m.tc.gap_sd < 0.0) throw ConfigError("model.gap_sd: must be nonnegative");
        if (j.contains("nu_qubit")) {
            const auto& arr = j.at("nu_qubit");
            if (!arr.is_array()) throw ConfigError("model.nu_qubit: expected an array");
            std::vector<double> nu;
            for (const auto& v : arr) {
                if (!v.is_number()) throw ConfigError("model.nu_qubit: expected numbers");
                nu.push_back(v.get<double>());
            }
            if (static_cast<int>(nu.size()) != m.tc.n_qubits)
                throw ConfigError("model.nu_qubit: need one entry per qubit");
            m.tc.nu_qubit = std::move(nu);
        }
    } else {
        throw ConfigError("model.kind: must be one of bec, atom_field, tc");
    }
    return m;
}

inline std::vector<std::string> sweepable(const std::string& kind) {
    if (kind == "bec") return {"omega1", "lambda"};
    if (kind == "atom_field") return {"omega_f", "omega_a", "gamma", "g"};
    return {"coupling", "swap_coupling", "anharmonicity", "nu_field"};
}

inline SweepConfig parse_sweep(const json& j, const std::string& model_kind) {
    if (!j.is_object() || j.size() != 1)
        throw ConfigError("sweep: expected exactly one swept parameter");
    SweepConfig s;
    for (const auto& [key, spec] : j.items()) {
        s.parameter = key;
        const auto allowed = sweepable(model_kind);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("sweep." + key + ": not a sweepable parameter of model '" +
                              model_kind + "'");
        const std::string path = "sweep." + key;
        if (!spec.is_object()) throw ConfigError(path + ": expected an object");
        if (spec.contains("values")) {
            check_keys(spec, path, {"values"});
            const auto& arr = spec.at("values");
            if (!arr.is_array() || arr.empty())
                throw ConfigError(path + ".values: expected a nonempty array");
            for (const auto& v : arr) {
                if (!v.is_number()) throw ConfigError(path + ".values: expected numbers");
                s.values.push_back(v.get<double>());
            }
        } else {
            check_keys(spec, path, {"start", "step", "count"});
            if (!spec.contains("start") || !spec.contains("step") || !spec.contains("count"))
                throw ConfigError(path + ": need start, step and count (or values)");
            const double start = get_number(spec, path, "start", 0.0);
            const double step = get_number(spec, path, "step", 0.0);
            const int count = get_int(spec, path, "count", 0);
            if (count < 1) throw ConfigError(path + ".count: must be at least 1");
            for (int i = 0; i < count; ++i) s.values.push_back(start + step * i);
        }
    }
    return s;
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::check_keys;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    check_keys(j, "config",
               {"command", "model", "numerics", "sweep", "tomogram", "indicators", "correlate",
                "disorder", "out", "seed", "threads"});

    RunConfig cfg;
    cfg.command = detail::get_string(j, "config", "command", "");
    static const std::vector<std::string> commands = {
        "spectrum", "svne", "tomogram", "indicators", "sweep", "correlate", "disorder"};
    if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
        throw ConfigError("command: must be one of spectrum, svne, tomogram, indicators, "
                          "sweep, correlate, disorder");

    if (cfg.command != "correlate") {
        if (!j.contains("model")) throw ConfigError("model: required for this command");
        cfg.model = detail::parse_model(j.at("model"));
    } else if (j.contains("model")) {
        throw ConfigError("model: not used by the correlate command");
    }

    if (j.contains("numerics")) {
        const auto& n = j.at("numerics");
        if (!n.is_object()) throw ConfigError("numerics: expected an object");
        check_keys(n, "numerics", {"grid_points", "x_max", "plan", "closed_form"});
        cfg.numerics.grid_points = detail::get_int(n, "numerics", "grid_points", 321);
        cfg.numerics.x_max = detail::get_number(n, "numerics", "x_max", 8.0);
        cfg.numerics.plan = detail::get_string(n, "numerics", "plan", "default");
        cfg.numerics.closed_form = detail::get_bool(n, "numerics", "closed_form", false);
        if (cfg.numerics.grid_points < 3 || cfg.numerics.grid_points % 2 == 0)
            throw ConfigError("numerics.grid_points: must be odd and at least 3");
        if (!(cfg.numerics.x_max > 0.0))
            throw ConfigError("numerics.x_max: must be positive");
        if (cfg.numerics.plan != "default" && cfg.numerics.plan != "reduced")
            throw ConfigError("numerics.plan: must be 'default' or 'reduced'");
        if (cfg.numerics.closed_form && cfg.model.kind != "bec")
            throw ConfigError("numerics.closed_form: only available for the bec model");
    }

    if (j.contains("sweep")) {
        if (cfg.command != "sweep" && cfg.command != "spectrum" && cfg.command != "svne")
            throw ConfigError("sweep: only used by the sweep, spectrum and svne commands");
        cfg.sweep = detail::parse_sweep(j.at("sweep"), cfg.model.kind);
    } else if (cfg.command == "sweep") {
        throw ConfigError("sweep: required for the sweep command");
    }

    if (j.contains("tomogram")) {
        if (cfg.command != "tomogram")
            throw ConfigError("tomogram: only used by the tomogram command");
        const auto& t = j.at("tomogram");
        if (!t.is_object()) throw ConfigError("tomogram: expected an object");
        if (cfg.model.kind == "tc") {
            check_keys(t, "tomogram", {"state_k", "theta_f", "axis"});
            cfg.tomogram.theta_f = detail::get_number(t, "tomogram", "theta_f", 0.0);
            cfg.tomogram.axis = detail::get_string(t, "tomogram", "axis", "x");
            if (cfg.tomogram.axis != "x" && cfg.tomogram.axis != "y" && cfg.tomogram.axis != "z")
                throw ConfigError("tomogram.axis: must be x, y or z");
        } else {
            check_keys(t, "tomogram", {"state_k", "theta_a", "theta_b"});
            cfg.tomogram.theta_a = detail::get_number(t, "tomogram", "theta_a", 0.0);
            cfg.tomogram.theta_b = detail::get_number(t, "tomogram", "theta_b", 0.0);
        }
        cfg.tomogram.state_k = detail::get_int(t, "tomogram", "state_k", 0);
        if (cfg.tomogram.state_k < 0) throw ConfigError("tomogram.state_k: must be nonnegative");
    }

    if (j.contains("indicators")) {
        if (cfg.command != "indicators")
            throw ConfigError("indicators: only used by the indicators command");
        const auto& t = j.at("indicators");
        if (!t.is_object()) throw ConfigError("indicators: expected an object");
        check_keys(t, "indicators", {"state_k"});
        cfg.indicators.state_k = detail::get_int(t, "indicators", "state_k", 0);
        if (cfg.indicators.state_k < 0)
            throw ConfigError("indicators.state_k: must be nonnegative");
    }

    if (cfg.command == "correlate") {
        if (!j.contains("correlate"))
            throw ConfigError("correlate: required block naming the input directory");
        const auto& c = j.at("correlate");
        if (!c.is_object()) throw ConfigError("correlate: expected an object");
        check_keys(c, "correlate", {"input"});
        cfg.correlate.input = detail::get_string(c, "correlate", "input", "");
        if (cfg.correlate.input.empty())
            throw ConfigError("correlate.input: must name a sweep output directory");
    } else if (j.contains("correlate")) {
        throw ConfigError("correlate: only used by the correlate command");
    }

    if (j.contains("disorder")) {
        if (cfg.command != "disorder")
            throw ConfigError("disorder: only used by the disorder command");
        const auto& d = j.at("disorder");
        if (!d.is_object()) throw ConfigError("disorder: expected an object");
        check_keys(d, "disorder", {"n_sd"});
        cfg.disorder.n_sd = detail::get_int(d, "disorder", "n_sd", 20);
        if (cfg.disorder.n_sd < 2) throw ConfigError("disorder.n_sd: must be at least 2");
    }
    if (cfg.command == "disorder" && cfg.model.kind != "tc")
        throw ConfigError("command: disorder requires the tc model");

    cfg.out = detail::get_string(j, "config", "out", "out");
    if (cfg.out.empty()) throw ConfigError("out: must be a nonempty path");
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw ConfigError("seed: expected a nonnegative integer");
        if (s.is_number_integer() && s.get<long long>() < 0)
            throw ConfigError("seed: expected a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.threads = detail::get_int(j, "config", "threads", 1);
    if (cfg.threads < 1 || cfg.threads > 256)
        throw ConfigError("threads: must be between 1 and 256");
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

/// CLI entry point: the subcommand names the command, the file may repeat it
/// (the echoed config.json does) but must then agree.
inline RunConfig parse_config(const std::string& text, const std::string& subcommand) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    if (j.contains("command")) {
        if (!j.at("command").is_string() || j.at("command").get<std::string>() != subcommand)
            throw ConfigError("command: config names a different command than the one invoked");
    } else {
        j["command"] = subcommand;
    }
    return parse_config(j);
}

/// Resolved config serialized back to JSON. Feeding this echo to parse_config
/// reproduces the run; it is written next to the outputs for that purpose.
inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = cfg.command;
    if (cfg.command != "correlate") {
        nlohmann::json m;
        m["kind"] = cfg.model.kind;
        if (cfg.model.kind == "bec") {
            m["n_total"] = cfg.model.bec.n_total;
            m["omega0"] = cfg.model.bec.omega0;
            m["omega1"] = cfg.model.bec.omega1;
            m["interaction"] = cfg.model.bec.interaction;
            m["lambda"] = cfg.model.bec.lambda;
        } else if (cfg.model.kind == "atom_field") {
            m["n_total"] = cfg.model.atom_field.n_total;
            m["omega_f"] = cfg.model.atom_field.omega_f;
            m["omega_a"] = cfg.model.atom_field.omega_a;
            m["gamma"] = cfg.model.atom_field.gamma;
            m["g"] = cfg.model.atom_field.g;
        } else {
            m["n_total"] = cfg.model.tc.n_total;
            m["n_qubits"] = cfg.model.tc.n_qubits;
            m["nu_field"] = cfg.model.tc.nu_field;
            m["anharmonicity"] = cfg.model.tc.anharmonicity;
            m["coupling"] = cfg.model.tc.coupling;
            m["swap_coupling"] = cfg.model.tc.swap_coupling;
            m["gap_mean"] = cfg.model.tc.gap_mean;
            m["gap_sd"] = cfg.model.tc.gap_sd;
            m["drive"] = cfg.model.tc.drive;
            if (cfg.model.tc.nu_qubit) m["nu_qubit"] = *cfg.model.tc.nu_qubit;
        }
        j["model"] = m;
    }
    j["numerics"] = {{"grid_points", cfg.numerics.grid_points},
                     {"x_max", cfg.numerics.x_max},
                     {"plan", cfg.numerics.plan},
                     {"closed_form", cfg.numerics.closed_form}};
    if (cfg.sweep) {
        nlohmann::json v = nlohmann::json::array();
        for (double x : cfg.sweep->values) v.push_back(x);
        j["sweep"] = {{cfg.sweep->parameter, {{"values", v}}}};
    }
    if (cfg.command == "tomogram") {
        if (cfg.model.kind == "tc")
            j["tomogram"] = {{"state_k", cfg.tomogram.state_k},
                             {"theta_f", cfg.tomogram.theta_f},
                             {"axis", cfg.tomogram.axis}};
        else
            j["tomogram"] = {{"state_k", cfg.tomogram.state_k},
                             {"theta_a", cfg.tomogram.theta_a},
                             {"theta_b", cfg.tomogram.theta_b}};
    }
    if (cfg.command == "indicators") j["indicators"] = {{"state_k", cfg.indicators.state_k}};
    if (cfg.command == "correlate") j["correlate"] = {{"input", cfg.correlate.input}};
    if (cfg.command == "disorder") j["disorder"] = {{"n_sd", cfg.disorder.n_sd}};
    j["out"] = cfg.out;
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

/// FNV-1a hash of the canonical config dump. The output path and thread
/// count are excluded so reruns that only relocate output or change
/// parallelism keep the same hash, which the determinism guarantee needs:
/// the hash appears inside every emitted CSV header.
inline std::uint64_t config_hash(const RunConfig& cfg) {
    nlohmann::json j = to_json(cfg);
    j.erase("out");
    j.erase("threads");
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace tomoscope::config
