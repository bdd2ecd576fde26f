#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tomoscope/config.hpp"
#include "tomoscope/runner.hpp"

using namespace tomoscope;
using config::ConfigError;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "tomoscope_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kBecSweep = R"({
  "model": {"kind": "bec", "n_total": 2, "lambda": 0.3},
  "numerics": {"grid_points": 81, "x_max": 6.0},
  "sweep": {"omega1": {"start": -0.3, "step": 0.15, "count": 5}},
  "out": "PLACEHOLDER",
  "seed": 42
})";

config::RunConfig bec_sweep_config(const fs::path& out) {
    auto text = std::string(kBecSweep);
    text.replace(text.find("PLACEHOLDER"), 11, out.string());
    return config::parse_config(text, "sweep");
}

} // namespace

TEST_CASE("config validation speaks in path-qualified errors") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            config::parse_config(text);
            FAIL("expected rejection for: " << text);
        } catch (const ConfigError& e) {
            INFO(e.what());
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_error(R"({"command": "nope"})", "command:");
    expect_error(R"({"command": "spectrum"})", "model:");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2}, "bogus": 1})",
                 "bogus: unknown key");
    expect_error(
        R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2, "typo_key": 1}})",
        "model.typo_key: unknown key");
    expect_error(
        R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2, "interaction": -1}})",
        "model.interaction: must be positive");
    expect_error(R"({"command": "sweep", "model": {"kind": "bec", "n_total": 2}})",
                 "sweep: required");
    expect_error(R"({"command": "sweep", "model": {"kind": "bec", "n_total": 2},
                     "sweep": {"omega1": {"values": [0]}, "lambda": {"values": [0]}}})",
                 "exactly one");
    expect_error(R"({"command": "sweep", "model": {"kind": "bec", "n_total": 2},
                     "sweep": {"gamma": {"values": [0]}}})",
                 "sweep.gamma");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2},
                     "numerics": {"grid_points": 80}})",
                 "numerics.grid_points");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2},
                     "numerics": {"x_max": -1}})",
                 "numerics.x_max");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2},
                     "numerics": {"plan": "huge"}})",
                 "numerics.plan");
    expect_error(R"({"command": "spectrum", "model": {"kind": "atom_field", "n_total": 2},
                     "numerics": {"closed_form": true}})",
                 "closed_form");
    expect_error(R"({"command": "correlate", "model": {"kind": "bec", "n_total": 2},
                     "correlate": {"input": "x"}})",
                 "model: not used");
    expect_error(R"({"command": "correlate"})", "correlate:");
    expect_error(R"({"command": "disorder", "model": {"kind": "bec", "n_total": 2},
                     "disorder": {"n_sd": 3}})",
                 "disorder requires the tc model");
    expect_error(R"({"command": "spectrum", "model": {"kind": "tc", "n_total": 2,
                     "n_qubits": 0}})",
                 "model.n_qubits");
    expect_error(R"({"command": "spectrum", "model": {"kind": "tc", "n_total": 2,
                     "n_qubits": 2, "nu_qubit": [1.0]}})",
                 "model.nu_qubit");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2},
                     "threads": 0})",
                 "threads:");
    expect_error(R"({"command": "spectrum", "model": {"kind": "bec", "n_total": 2},
                     "seed": -4})",
                 "seed:");
    expect_error("{ not json", "invalid JSON");
    expect_error(R"({"command": "tomogram", "model": {"kind": "bec", "n_total": 2},
                     "tomogram": {"state_k": 0, "theta_f": 1.0, "axis": "x"}})",
                 "tomogram.");
}

TEST_CASE("subcommand and config command key must agree") {
    const std::string text = R"({"command": "svne", "model": {"kind": "bec", "n_total": 2},
                                 "sweep": {"omega1": {"values": [0.0, 0.1]}}})";
    REQUIRE(config::parse_config(text, "svne").command == "svne");
    REQUIRE_THROWS_AS(config::parse_config(text, "sweep"), ConfigError);
    // command may be omitted when the subcommand supplies it
    const std::string bare = R"({"model": {"kind": "bec", "n_total": 2},
                                 "sweep": {"omega1": {"values": [0.0, 0.1]}}})";
    REQUIRE(config::parse_config(bare, "svne").command == "svne");
}

TEST_CASE("config echo round-trips through the parser") {
    const auto out = fresh_dir("echo");
    auto cfg = bec_sweep_config(out);
    const auto echo = config::to_json(cfg).dump();
    const auto back = config::parse_config(echo);
    REQUIRE(back.command == cfg.command);
    REQUIRE(back.model.bec.lambda == cfg.model.bec.lambda);
    REQUIRE(back.sweep->values == cfg.sweep->values);
    REQUIRE(config::config_hash(back) == config::config_hash(cfg));
}

TEST_CASE("config hash ignores the output path and thread count") {
    const auto cfg1 = bec_sweep_config("/tmp/a");
    auto cfg2 = bec_sweep_config("/tmp/b");
    cfg2.threads = 8;
    REQUIRE(config::config_hash(cfg1) == config::config_hash(cfg2));
    auto cfg3 = bec_sweep_config("/tmp/a");
    cfg3.seed = 43;
    REQUIRE(config::config_hash(cfg1) != config::config_hash(cfg3));
    auto cfg4 = bec_sweep_config("/tmp/a");
    cfg4.model.bec.lambda = 0.31;
    REQUIRE(config::config_hash(cfg1) != config::config_hash(cfg4));
}

TEST_CASE("seed resolution prefers flag, then config, then environment") {
    unsetenv("TOMOSCOPE_SEED");
    REQUIRE(runner::resolve_seed(std::nullopt, std::nullopt) == 42);
    REQUIRE(runner::resolve_seed(std::nullopt, 7) == 7);
    REQUIRE(runner::resolve_seed(99, 7) == 99);
    setenv("TOMOSCOPE_SEED", "123", 1);
    REQUIRE(runner::resolve_seed(std::nullopt, std::nullopt) == 123);
    REQUIRE(runner::resolve_seed(std::nullopt, 7) == 7);
    setenv("TOMOSCOPE_SEED", "12x", 1);
    REQUIRE_THROWS_AS(runner::resolve_seed(std::nullopt, std::nullopt), ConfigError);
    unsetenv("TOMOSCOPE_SEED");
}

TEST_CASE("csv cells carry twelve significant digits") {
    REQUIRE(runner::detail::fmt(1.0 / 3.0) == "0.333333333333");
    REQUIRE(runner::detail::fmt(2.0) == "2");
    REQUIRE(runner::detail::fmt(-1.5e-7) == "-1.5e-07");
    REQUIRE(runner::detail::fmt(25.623389923209665) == "25.6233899232");
}

TEST_CASE("sweep outputs start with the provenance header") {
    const auto out = fresh_dir("sweep_out");
    const auto cfg = bec_sweep_config(out);
    const auto bundle = runner::execute(cfg);
    REQUIRE(bundle.seed == 42);
    REQUIRE(bundle.config_hash.size() == 16);

    for (const char* name : {"energies.csv", "xi.csv"}) {
        const auto text = slurp(out / name);
        REQUIRE(text.rfind("# config_hash=" + bundle.config_hash + ", seed=42", 0) == 0);
    }
    const auto xi = runner::detail::read_csv(out / "xi.csv");
    REQUIRE(xi.header ==
            std::vector<std::string>{"param", "state_k", "xi_svne", "xi_tei", "xi_ipr", "xi_pcc",
                                     "xi_bd"});
    REQUIRE(xi.rows.size() == 5 * 3); // five sweep points, three states
    REQUIRE(fs::exists(out / "manifest.json"));
    REQUIRE(fs::exists(out / "config.json"));
    REQUIRE(fs::exists(out / "plot.gp"));

    // the echoed config reproduces the run byte for byte
    const auto echo_cfg = config::parse_config(slurp(out / "config.json"));
    const auto out2 = fresh_dir("sweep_echo");
    auto cfg2 = echo_cfg;
    cfg2.out = out2.string();
    runner::execute(cfg2);
    REQUIRE(slurp(out / "xi.csv") == slurp(out2 / "xi.csv"));
}

TEST_CASE("correlate agrees with the in-memory report to twelve digits") {
    const auto out = fresh_dir("corr_src");
    const auto cfg = bec_sweep_config(out);
    runner::execute(cfg);

    // in-memory reference on the same sweep
    analysis::SweepSpec spec;
    spec.values = cfg.sweep->values;
    models::BecParams base = cfg.model.bec;
    spec.solver = [base](double w1) {
        models::BecParams p = base;
        p.omega1 = w1;
        return models::hermitian_eigensystem(models::build_bec(p));
    };
    spec.grid = tomography::QuadratureGrid(cfg.numerics.grid_points, cfg.numerics.x_max);
    const auto rep = analysis::correlation_report(analysis::run_sweep(spec));

    config::RunConfig corr;
    corr.command = "correlate";
    corr.correlate.input = out.string();
    corr.out = fresh_dir("corr_out").string();
    corr.seed = 42;
    const auto bundle = runner::execute(corr);

    const auto pcc = runner::detail::read_csv(fs::path(corr.out) / "pcc.csv");
    REQUIRE(pcc.header == std::vector<std::string>{"state_k", "indicator", "pcc"});

    // rows: four xi indicators, (three states + pooled) each; parse and match
    std::size_t row = 0;
    const auto csv_text = slurp(fs::path(corr.out) / "pcc.csv");
    for (std::size_t ind = 0; ind < rep.xi.size(); ++ind) {
        for (std::size_t k = 0; k < rep.xi[ind].per_state.size(); ++k, ++row) {
            REQUIRE(pcc.rows[row][0] == static_cast<double>(k));
            if (rep.xi[ind].per_state[k])
                REQUIRE(pcc.rows[row][2] ==
                        Catch::Approx(*rep.xi[ind].per_state[k]).margin(1e-11));
        }
        REQUIRE(pcc.rows[row][0] == -1.0);
        if (rep.xi[ind].pooled)
            REQUIRE(pcc.rows[row][2] == Catch::Approx(*rep.xi[ind].pooled).margin(1e-11));
        ++row;
    }
    REQUIRE(row == pcc.rows.size());
    REQUIRE(csv_text.find("xi_tei") != std::string::npos);
    REQUIRE(csv_text.find("xi_bd") != std::string::npos);
}

TEST_CASE("tomogram and indicators commands emit the documented schemas") {
    const auto out = fresh_dir("tomo");
    config::RunConfig cfg;
    cfg.command = "tomogram";
    cfg.model.kind = "bec";
    cfg.model.bec.n_total = 2;
    cfg.model.bec.lambda = 0.3;
    cfg.numerics.grid_points = 41;
    cfg.numerics.x_max = 5.0;
    cfg.tomogram.state_k = 0;
    cfg.tomogram.theta_a = 0.0;
    cfg.tomogram.theta_b = 0.0;
    cfg.out = out.string();
    cfg.seed = 42;
    runner::execute(cfg);
    const auto tomo = runner::detail::read_csv(out / "tomogram.csv");
    REQUIRE(tomo.header == std::vector<std::string>{"x_a", "x_b", "w"});
    REQUIRE(tomo.rows.size() == 41 * 41);

    config::RunConfig ind = cfg;
    ind.command = "indicators";
    ind.indicators.state_k = 1;
    ind.out = fresh_dir("ind").string();
    runner::execute(ind);
    const auto eps = runner::detail::read_csv(fs::path(ind.out) / "eps.csv");
    REQUIRE(eps.header ==
            std::vector<std::string>{"param", "state_k", "theta_a", "theta_b", "eps_tei",
                                     "eps_ipr", "eps_pcc", "eps_bd"});
    REQUIRE(eps.rows.size() == 25);
    const auto xi = runner::detail::read_csv(fs::path(ind.out) / "xi.csv");
    REQUIRE(xi.rows.size() == 1);

    // out-of-range state index is a validation error, not a crash
    config::RunConfig bad = ind;
    bad.indicators.state_k = 99;
    REQUIRE_THROWS_AS(runner::execute(bad), ConfigError);
}

TEST_CASE("spectrum without a sweep block reports the natural parameter point") {
    config::RunConfig cfg;
    cfg.command = "spectrum";
    cfg.model.kind = "bec";
    cfg.model.bec.n_total = 3;
    cfg.model.bec.omega1 = 0.2;
    cfg.model.bec.lambda = 0.7;
    cfg.out = fresh_dir("spec").string();
    cfg.seed = 1;
    runner::execute(cfg);
    const auto csv = runner::detail::read_csv(fs::path(cfg.out) / "energies.csv");
    REQUIRE(csv.rows.size() == 4);
    REQUIRE(csv.rows[0][0] == 0.2); // the resting detuning
    for (std::size_t k = 0; k + 1 < csv.rows.size(); ++k)
        REQUIRE(csv.rows[k][2] <= csv.rows[k + 1][2]);
}

TEST_CASE("execute refuses to run without a resolved seed") {
    config::RunConfig cfg;
    cfg.command = "spectrum";
    cfg.model.kind = "bec";
    cfg.model.bec.n_total = 2;
    cfg.out = fresh_dir("noseed").string();
    cfg.seed.reset();
    REQUIRE_THROWS_AS(runner::execute(cfg), std::logic_error);
}
