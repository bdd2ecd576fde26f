#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tomoscope/analysis.hpp"
#include "tomoscope/config.hpp"
#include "tomoscope/parallel.hpp"
#include "tomoscope/version.hpp"

namespace tomoscope::runner {

using config::ConfigError;
using config::RunConfig;

struct OutputBundle {
    std::filesystem::path dir;
    std::vector<std::string> files; ///< basenames, in the order written
    std::string config_hash;        ///< 16 hex digits
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// All CSVs carry the config hash and seed so any file can be traced back to
/// the exact run that produced it.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& hash, std::uint64_t seed,
              const std::string& header) {
        out_.open(path, std::ios::binary); // binary: byte-identical across platforms
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        out_ << "# config_hash=" << hash << ", seed=" << seed << "\n";
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::runtime_error("missing column '" + name + "'");
    }
};

inline ParsedCsv read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    ParsedCsv csv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (csv.header.empty()) {
            csv.header = cells;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
        csv.rows.push_back(std::move(row));
    }
    if (csv.header.empty()) throw std::runtime_error(path.string() + ": empty file");
    return csv;
}

/// In-run eigensystem memoizer. Sweeps solve each grid value once anyway;
/// this catches the remaining cases where two outputs of one command need
/// the same system (and makes reuse observable: see solves()).
class EigenCache {
public:
    explicit EigenCache(std::function<models::EigenSystem(double)> solver)
        : solver_(std::move(solver)) {}

    models::EigenSystem operator()(double value) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(value);
            if (it != cache_.end()) return it->second;
        }
        models::EigenSystem sys = solver_(value);
        std::lock_guard<std::mutex> lock(mutex_);
        ++solves_;
        cache_.emplace(value, sys);
        return sys;
    }

    int solves() const { return solves_; }

private:
    std::function<models::EigenSystem(double)> solver_;
    std::map<double, models::EigenSystem> cache_;
    std::mutex mutex_;
    int solves_ = 0;
};

inline models::TcParams make_tc_params(const config::TcModelConfig& c, std::uint64_t seed) {
    models::TcParams p;
    p.n_total = c.n_total;
    p.nu_field = c.nu_field;
    p.anharmonicity = c.anharmonicity;
    p.coupling = c.coupling;
    p.swap_coupling = c.swap_coupling;
    if (c.nu_qubit) {
        p.nu_qubit = *c.nu_qubit;
    } else {
        const auto gaps = models::sample_gaps(c.gap_mean, c.gap_sd, c.n_qubits, seed);
        p.nu_qubit = models::qubit_frequencies(gaps, c.drive);
    }
    return p;
}

/// The parameter a single-point run reports in the `param` column, and the
/// default subject of sweeps: the coupling knob of each model.
inline double natural_value(const RunConfig& cfg) {
    if (cfg.sweep) return cfg.sweep->values.front();
    if (cfg.model.kind == "bec") return cfg.model.bec.omega1;
    if (cfg.model.kind == "atom_field") return cfg.model.atom_field.g;
    return cfg.model.tc.coupling;
}

inline std::string swept_name(const RunConfig& cfg) {
    if (cfg.sweep) return cfg.sweep->parameter;
    if (cfg.model.kind == "bec") return "omega1";
    if (cfg.model.kind == "atom_field") return "g";
    return "coupling";
}

inline std::function<models::EigenSystem(double)> make_solver(const RunConfig& cfg,
                                                              std::uint64_t seed) {
    const std::string param = swept_name(cfg);
    if (cfg.model.kind == "bec") {
        models::BecParams base = cfg.model.bec;
        const bool closed = cfg.numerics.closed_form;
        return [base, param, closed](double v) {
            models::BecParams p = base;
            if (param == "omega1") p.omega1 = v;
            else p.lambda = v;
            return closed ? models::bec_closed_form_system(p)
                          : models::hermitian_eigensystem(models::build_bec(p));
        };
    }
    if (cfg.model.kind == "atom_field") {
        models::AtomFieldParams base = cfg.model.atom_field;
        return [base, param](double v) {
            models::AtomFieldParams p = base;
            if (param == "g") p.g = v;
            else if (param == "gamma") p.gamma = v;
            else if (param == "omega_f") p.omega_f = v;
            else p.omega_a = v;
            return models::hermitian_eigensystem(models::build_atom_field(p));
        };
    }
    models::TcParams base = make_tc_params(cfg.model.tc, seed);
    return [base, param](double v) {
        models::TcParams p = base;
        if (param == "coupling") p.coupling = v;
        else if (param == "swap_coupling") p.swap_coupling = v;
        else if (param == "anharmonicity") p.anharmonicity = v;
        else p.nu_field = v;
        return models::hermitian_eigensystem(models::build_tc(p));
    };
}

inline tomography::QuadratureGrid make_grid(const RunConfig& cfg) {
    return tomography::QuadratureGrid(cfg.numerics.grid_points, cfg.numerics.x_max);
}

inline int model_dim(const RunConfig& cfg) {
    if (cfg.model.kind == "tc")
        return fock::SubspaceBasis::hybrid(cfg.model.tc.n_total, cfg.model.tc.n_qubits).dim();
    return (cfg.model.kind == "bec" ? cfg.model.bec.n_total : cfg.model.atom_field.n_total) + 1;
}

inline int axis_code(char ax) { return ax == 'x' ? 0 : (ax == 'y' ? 1 : 2); }

inline void write_plot_script(const std::filesystem::path& dir, const RunConfig& cfg,
                              std::vector<std::string>& files) {
    std::ofstream gp(dir / "plot.gp", std::ios::binary);
    if (!gp) return;
    gp << "# companion plot script for the CSVs in this directory\n";
    gp << "set datafile separator ','\n";
    gp << "set key autotitle columnhead\n";
    if (cfg.command == "spectrum" || cfg.command == "sweep") {
        gp << "set xlabel 'parameter'\nset ylabel 'energy'\n";
        gp << "plot 'energies.csv' using 1:3:2 with points palette title 'levels'\n";
    }
    if (cfg.command == "sweep" || cfg.command == "svne" || cfg.command == "disorder") {
        const char* src = cfg.command == "svne" ? "svne.csv" : "xi.csv";
        gp << "# entropy landscape over the sweep\n";
        gp << "set xlabel 'parameter'\nset ylabel 'xi'\n";
        gp << "replot_file = '" << src << "'\n";
        gp << "plot replot_file using 1:3:2 with points palette title 'xi_svne'\n";
    }
    if (cfg.command == "tomogram") {
        gp << "set xlabel 'x_a'\nset ylabel 'x_b'\nset view map\n";
        gp << "splot 'tomogram.csv' using 1:2:3 with points pt 5 palette\n";
    }
    if (cfg.command == "indicators" || cfg.command == "correlate") {
        const char* src = cfg.command == "indicators" ? "eps.csv" : "pcc.csv";
        gp << "plot '" << src << "' using 0:($0*0+column(3)) with points title '" << src << "'\n";
    }
    files.push_back("plot.gp");
}

} // namespace detail

/// Seed resolution order: explicit CLI flag, config file, TOMOSCOPE_SEED
/// environment variable, then the pinned default 42.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                                  const std::optional<std::uint64_t>& config_seed) {
    if (flag_seed) return *flag_seed;
    if (config_seed) return *config_seed;
    if (const char* env = std::getenv("TOMOSCOPE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && end != env) return v;
        throw ConfigError("TOMOSCOPE_SEED: expected a nonnegative integer");
    }
    return 42;
}

inline OutputBundle execute(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    if (!cfg.seed) throw std::logic_error("execute: seed must be resolved first");
    const std::uint64_t seed = *cfg.seed;

    OutputBundle bundle;
    bundle.dir = fs::path(cfg.out);
    bundle.seed = seed;
    bundle.config_hash = detail::hash_hex(config::config_hash(cfg));
    fs::create_directories(bundle.dir);
    const std::string& hash = bundle.config_hash;

    const auto grid = detail::make_grid(cfg);
    const bool hybrid = cfg.model.kind == "tc";
    const bool reduced = cfg.numerics.plan == "reduced";
    const auto cv_plan = reduced ? indicators::CvAnglePlan::reduced_plan()
                                 : indicators::CvAnglePlan::default_plan();
    const auto hy_plan = reduced ? indicators::HybridAnglePlan::reduced_plan()
                                 : indicators::HybridAnglePlan::default_plan();

    auto values_for_run = [&]() {
        return cfg.sweep ? cfg.sweep->values : std::vector<double>{detail::natural_value(cfg)};
    };
    auto check_state = [&](int k, const char* what) {
        if (k >= detail::model_dim(cfg))
            throw ConfigError(std::string(what) + ".state_k: exceeds the subspace dimension");
    };

    if (cfg.command == "spectrum") {
        const auto values = values_for_run();
        detail::EigenCache cache(detail::make_solver(cfg, seed));
        std::vector<models::EigenSystem> systems(values.size());
        parallel::parallel_for(values.size(), cfg.threads,
                               [&](std::size_t i) { systems[i] = cache(values[i]); });
        detail::CsvWriter csv(bundle.dir / "energies.csv", hash, seed,
                              "param,level_index,energy");
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t k = 0; k < systems[i].energies.size(); ++k)
                csv.row({detail::fmt(values[i]), std::to_string(k),
                         detail::fmt(systems[i].energies[k])});
        bundle.files.push_back("energies.csv");
    } else if (cfg.command == "svne" || cfg.command == "sweep") {
        analysis::SweepSpec spec;
        spec.values = values_for_run();
        spec.solver = detail::make_solver(cfg, seed);
        spec.grid = grid;
        spec.cv_plan = cv_plan;
        spec.hybrid_plan = hy_plan;
        spec.svne_only = cfg.command == "svne";
        spec.threads = cfg.threads;
        if (hybrid && cfg.command == "sweep")
            spec.hybrid_probe = std::make_pair(std::numbers::pi / 2.0, 'x');
        const auto result = analysis::run_sweep(spec);
        const std::size_t ns = result.xi[0].size();

        if (cfg.command == "svne") {
            detail::CsvWriter csv(bundle.dir / "svne.csv", hash, seed, "param,state_k,xi_svne");
            for (std::size_t i = 0; i < result.values.size(); ++i)
                for (std::size_t k = 0; k < ns; ++k)
                    csv.row({detail::fmt(result.values[i]), std::to_string(k),
                             detail::fmt(result.xi[i][k].svne)});
            bundle.files.push_back("svne.csv");
        } else {
            {
                detail::CsvWriter csv(bundle.dir / "energies.csv", hash, seed,
                                      "param,level_index,energy");
                for (std::size_t i = 0; i < result.values.size(); ++i)
                    for (std::size_t k = 0; k < ns; ++k)
                        csv.row({detail::fmt(result.values[i]), std::to_string(k),
                                 detail::fmt(result.systems[i].energies[k])});
                bundle.files.push_back("energies.csv");
            }
            {
                detail::CsvWriter csv(bundle.dir / "xi.csv", hash, seed,
                                      "param,state_k,xi_svne,xi_tei,xi_ipr,xi_pcc,xi_bd");
                for (std::size_t i = 0; i < result.values.size(); ++i)
                    for (std::size_t k = 0; k < ns; ++k) {
                        const auto& x = result.xi[i][k];
                        csv.row({detail::fmt(result.values[i]), std::to_string(k),
                                 detail::fmt(x.svne), detail::fmt(x.tei), detail::fmt(x.ipr),
                                 detail::fmt(x.pcc), detail::fmt(x.bd)});
                    }
                bundle.files.push_back("xi.csv");
            }
            if (!result.probe.empty()) {
                detail::CsvWriter csv(
                    bundle.dir / "eps.csv", hash, seed,
                    "param,state_k,theta_a,theta_b,eps_tei,eps_ipr,eps_pcc,eps_bd");
                for (std::size_t i = 0; i < result.values.size(); ++i)
                    for (std::size_t k = 0; k < ns; ++k) {
                        const auto& e = result.probe[i][k];
                        csv.row({detail::fmt(result.values[i]), std::to_string(k),
                                 detail::fmt(std::numbers::pi / 2.0), detail::fmt(0.0),
                                 detail::fmt(e.tei), detail::fmt(e.ipr),
                                 detail::fmt(result.probe_spin[i][k]), detail::fmt(e.bd)});
                    }
                bundle.files.push_back("eps.csv");
            }
        }
    } else if (cfg.command == "tomogram") {
        check_state(cfg.tomogram.state_k, "tomogram");
        detail::EigenCache cache(detail::make_solver(cfg, seed));
        const auto sys = cache(detail::natural_value(cfg));
        fock::PureState state{sys.basis, sys.states[static_cast<std::size_t>(cfg.tomogram.state_k)]};
        detail::CsvWriter csv(bundle.dir / "tomogram.csv", hash, seed, "x_a,x_b,w");
        if (hybrid) {
            const auto sec = tomography::hybrid_section(
                state, cfg.tomogram.theta_f,
                tomography::uniform_axes(sys.basis->qubits(), cfg.tomogram.axis[0]), grid);
            for (int ix = 0; ix < grid.n_points; ++ix)
                for (int m = 0; m < sec.n_outcomes; ++m)
                    csv.row({detail::fmt(grid.point(ix)), std::to_string(m),
                             detail::fmt(sec.at(ix, m))});
        } else {
            const auto sec =
                tomography::cv_section(state, cfg.tomogram.theta_a, cfg.tomogram.theta_b, grid);
            for (int ia = 0; ia < grid.n_points; ++ia)
                for (int ib = 0; ib < grid.n_points; ++ib)
                    csv.row({detail::fmt(grid.point(ia)), detail::fmt(grid.point(ib)),
                             detail::fmt(sec.at(ia, ib))});
        }
        bundle.files.push_back("tomogram.csv");
    } else if (cfg.command == "indicators") {
        check_state(cfg.indicators.state_k, "indicators");
        detail::EigenCache cache(detail::make_solver(cfg, seed));
        const double value = detail::natural_value(cfg);
        const auto sys = cache(value);
        fock::PureState state{sys.basis,
                              sys.states[static_cast<std::size_t>(cfg.indicators.state_k)]};
        {
            detail::CsvWriter csv(bundle.dir / "eps.csv", hash, seed,
                                  "param,state_k,theta_a,theta_b,eps_tei,eps_ipr,eps_pcc,eps_bd");
            if (hybrid) {
                for (const auto& [tf, ax] : hy_plan.sections) {
                    const auto sec = tomography::hybrid_section(
                        state, tf, tomography::uniform_axes(sys.basis->qubits(), ax), grid);
                    const auto ind = indicators::hybrid_indicators(sec);
                    csv.row({detail::fmt(value), std::to_string(cfg.indicators.state_k),
                             detail::fmt(tf), std::to_string(detail::axis_code(ax)),
                             detail::fmt(ind.tei), detail::fmt(ind.ipr),
                             detail::fmt(indicators::hybrid_spin_correlator(sec)),
                             detail::fmt(ind.bd)});
                }
            } else {
                for (const auto& [ta, tb] : cv_plan.sections) {
                    const auto ind =
                        indicators::section_indicators(tomography::cv_section(state, ta, tb, grid));
                    csv.row({detail::fmt(value), std::to_string(cfg.indicators.state_k),
                             detail::fmt(ta), detail::fmt(tb), detail::fmt(ind.tei),
                             detail::fmt(ind.ipr), detail::fmt(*ind.pcc), detail::fmt(ind.bd)});
                }
            }
            bundle.files.push_back("eps.csv");
        }
        {
            const auto xi = hybrid ? indicators::xi_set(state, hy_plan, grid)
                                   : indicators::xi_set(state, cv_plan, grid);
            detail::CsvWriter csv(bundle.dir / "xi.csv", hash, seed,
                                  "param,state_k,xi_svne,xi_tei,xi_ipr,xi_pcc,xi_bd");
            csv.row({detail::fmt(value), std::to_string(cfg.indicators.state_k),
                     detail::fmt(xi.svne), detail::fmt(xi.tei), detail::fmt(xi.ipr),
                     detail::fmt(xi.pcc), detail::fmt(xi.bd)});
            bundle.files.push_back("xi.csv");
        }
    } else if (cfg.command == "correlate") {
        const fs::path in(cfg.correlate.input);
        const auto xi = detail::read_csv(in / "xi.csv");
        const int c_param = xi.column("param");
        const int c_state = xi.column("state_k");
        const int c_svne = xi.column("xi_svne");
        (void)c_param;
        // series per state in file order, which sweeps write param-ascending
        std::map<int, std::vector<std::size_t>> by_state;
        for (std::size_t r = 0; r < xi.rows.size(); ++r)
            by_state[static_cast<int>(xi.rows[r][static_cast<std::size_t>(c_state)])].push_back(r);

        detail::CsvWriter csv(bundle.dir / "pcc.csv", hash, seed, "state_k,indicator,pcc");
        auto correlate_column = [&](const detail::ParsedCsv& data, int col,
                                    const std::string& name) {
            std::vector<double> pooled_a, pooled_s;
            for (const auto& [k, rows] : by_state) {
                std::vector<double> a, s;
                for (std::size_t idx = 0; idx < rows.size(); ++idx) {
                    a.push_back(data.rows[rows[idx]][static_cast<std::size_t>(col)]);
                    s.push_back(xi.rows[rows[idx]][static_cast<std::size_t>(c_svne)]);
                }
                const auto p = analysis::detail::try_pearson(a, s);
                csv.row({std::to_string(k), name,
                         p ? detail::fmt(*p) : std::string("nan")});
                pooled_a.insert(pooled_a.end(), a.begin(), a.end());
                pooled_s.insert(pooled_s.end(), s.begin(), s.end());
            }
            const auto p = analysis::detail::try_pearson(pooled_a, pooled_s);
            csv.row({"-1", name, p ? detail::fmt(*p) : std::string("nan")});
        };
        for (const char* name : {"xi_tei", "xi_ipr", "xi_pcc", "xi_bd"})
            correlate_column(xi, xi.column(name), name);
        if (fs::exists(in / "eps.csv")) {
            const auto eps = detail::read_csv(in / "eps.csv");
            if (eps.rows.size() != xi.rows.size())
                throw std::runtime_error(
                    "correlate: eps.csv must hold exactly one section per xi.csv row");
            for (const char* name : {"eps_tei", "eps_ipr", "eps_bd"})
                correlate_column(eps, eps.column(name), name);
        }
        bundle.files.push_back("pcc.csv");
    } else if (cfg.command == "disorder") {
        analysis::DisorderSpec spec;
        spec.base = detail::make_tc_params(cfg.model.tc, seed);
        spec.n_qubits = cfg.model.tc.n_qubits;
        spec.gap_mean = cfg.model.tc.gap_mean;
        spec.drive = cfg.model.tc.drive;
        spec.sd_max = cfg.model.tc.gap_sd;
        spec.n_sd = cfg.disorder.n_sd;
        spec.seed = seed;
        spec.grid = grid;
        spec.plan = hy_plan;
        spec.threads = cfg.threads;
        const auto result = analysis::disorder_study(spec);
        {
            detail::CsvWriter csv(bundle.dir / "xi.csv", hash, seed,
                                  "param,state_k,xi_svne,xi_tei,xi_ipr,xi_pcc,xi_bd");
            for (std::size_t j = 0; j < result.sd.size(); ++j)
                for (std::size_t k = 0; k < result.xi[j].size(); ++k) {
                    const auto& x = result.xi[j][k];
                    csv.row({detail::fmt(result.sd[j]), std::to_string(k), detail::fmt(x.svne),
                             detail::fmt(x.tei), detail::fmt(x.ipr), detail::fmt(x.pcc),
                             detail::fmt(x.bd)});
                }
            bundle.files.push_back("xi.csv");
        }
        {
            const auto report = analysis::disorder_report(result);
            detail::CsvWriter csv(bundle.dir / "disorder_pcc.csv", hash, seed,
                                  "sd,indicator,pcc");
            for (const auto& c : report) {
                for (std::size_t j = 0; j < c.per_sd.size(); ++j)
                    csv.row({detail::fmt(result.sd[j]), c.indicator,
                             c.per_sd[j] ? detail::fmt(*c.per_sd[j]) : std::string("nan")});
                csv.row({"-1", c.indicator,
                         c.mean_per_sd ? detail::fmt(*c.mean_per_sd) : std::string("nan")});
            }
            bundle.files.push_back("disorder_pcc.csv");
        }
    } else {
        throw std::logic_error("execute: unhandled command");
    }

    detail::write_plot_script(bundle.dir, cfg, bundle.files);

    {
        std::ofstream echo(bundle.dir / "config.json", std::ios::binary);
        RunConfig resolved = cfg;
        resolved.seed = seed;
        echo << config::to_json(resolved).dump(2) << "\n";
        bundle.files.push_back("config.json");
    }
    bundle.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        nlohmann::json m;
        m["command"] = cfg.command;
        m["config_hash"] = bundle.config_hash;
        m["seed"] = seed;
        m["version"] = version_string;
        m["wall_seconds"] = bundle.wall_seconds;
        m["files"] = bundle.files;
        std::ofstream mf(bundle.dir / "manifest.json", std::ios::binary);
        mf << m.dump(2) << "\n";
        bundle.files.push_back("manifest.json");
    }
    return bundle;
}

} // namespace tomoscope::runner
