#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tomoscope/indicators.hpp"
#include "tomoscope/models.hpp"
#include "tomoscope/parallel.hpp"
#include "tomoscope/rng.hpp"
#include "tomoscope/tomography.hpp"

namespace tomoscope::analysis {

/// Signed Pearson correlation coefficient of two equal-length series.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("pearson: need equal nonempty series");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    if (va <= 0.0 || vb <= 0.0)
        throw std::invalid_argument("pearson: zero variance series");
    return cov / std::sqrt(va * vb);
}

namespace detail {

/// nullopt when the correlation is undefined (constant series or NaN data),
/// mirroring how undefined entries are skipped in the aggregates.
inline std::optional<double> try_pearson(const std::vector<double>& a,
                                         const std::vector<double>& b) {
    for (double v : a)
        if (!std::isfinite(v)) return std::nullopt;
    for (double v : b)
        if (!std::isfinite(v)) return std::nullopt;
    try {
        return pearson(a, b);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
    double s = 0.0;
    int n = 0;
    for (const auto& x : v)
        if (x) {
            s += *x;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / n;
}

} // namespace detail

/// One parameter sweep: diagonalize at every grid value, thread eigenstates
/// through parameter space, then evaluate indicators per tracked state.
struct SweepSpec {
    std::vector<double> values;
    std::function<models::EigenSystem(double)> solver; ///< value -> eigensystem
    tomography::QuadratureGrid grid{};
    indicators::CvAnglePlan cv_plan = indicators::CvAnglePlan::default_plan();
    indicators::HybridAnglePlan hybrid_plan = indicators::HybridAnglePlan::default_plan();
    bool svne_only = false; ///< skip tomograms, fill only the entropy column
    bool track = true;      ///< thread state identity through the sweep
    /// extra fixed section recorded per state on hybrid sweeps: (theta_f, axis)
    std::optional<std::pair<double, char>> hybrid_probe;
    int threads = 1;
};

struct SweepResult {
    std::vector<double> values;
    std::vector<models::EigenSystem> systems;       ///< slot k follows one state
    std::vector<std::vector<indicators::XiSet>> xi; ///< [value][slot]
    /// probe-section indicators, empty unless requested: [value][slot]
    std::vector<std::vector<indicators::SectionIndicators>> probe;
    std::vector<std::vector<double>> probe_spin;
};

inline SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("run_sweep: empty grid");
    const std::size_t np = spec.values.size();
    SweepResult out;
    out.values = spec.values;

    std::vector<models::EigenSystem> raw(np);
    parallel::parallel_for(np, spec.threads,
                           [&](std::size_t i) { raw[i] = spec.solver(spec.values[i]); });

    out.systems.resize(np);
    out.systems[0] = std::move(raw[0]);
    for (std::size_t i = 1; i < np; ++i)
        out.systems[i] = spec.track ? models::track_states(out.systems[i - 1], raw[i])
                                    : std::move(raw[i]);

    const auto& basis = out.systems[0].basis;
    const std::size_t ns = out.systems[0].states.size();
    const bool hybrid = basis->kind() == fock::BasisKind::Hybrid;
    out.xi.assign(np, std::vector<indicators::XiSet>(ns));
    const bool want_probe = hybrid && spec.hybrid_probe.has_value();
    if (want_probe) {
        out.probe.assign(np, std::vector<indicators::SectionIndicators>(ns));
        out.probe_spin.assign(np, std::vector<double>(ns, 0.0));
    }

    parallel::parallel_for(np * ns, spec.threads, [&](std::size_t flat) {
        const std::size_t i = flat / ns;
        const std::size_t k = flat % ns;
        const models::EigenSystem& sys = out.systems[i];
        fock::PureState state{sys.basis, sys.states[k]};
        auto& cell = out.xi[i][k];
        if (spec.svne_only) {
            cell.svne = fock::svne(state, hybrid ? fock::Part::Field : fock::Part::ModeA);
            cell.tei = cell.ipr = cell.pcc = cell.bd = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        cell = hybrid ? indicators::xi_set(state, spec.hybrid_plan, spec.grid)
                      : indicators::xi_set(state, spec.cv_plan, spec.grid);
        if (want_probe) {
            const auto [tf, ax] = *spec.hybrid_probe;
            const auto sec = tomography::hybrid_section(
                state, tf, tomography::uniform_axes(basis->qubits(), ax), spec.grid);
            out.probe[i][k] = indicators::hybrid_indicators(sec);
            out.probe_spin[i][k] = indicators::hybrid_spin_correlator(sec);
        }
    });
    return out;
}

/// How well one indicator's series follows the entropy series over a sweep.
struct IndicatorCorrelation {
    std::string indicator;
    std::vector<std::optional<double>> per_state; ///< across the sweep, per slot
    std::optional<double> mean_per_state;
    std::optional<double> pooled; ///< all (value, slot) samples at once
};

struct CorrelationReport {
    std::vector<IndicatorCorrelation> xi;    ///< tei, ipr, pcc, bd
    std::vector<IndicatorCorrelation> probe; ///< tei, ipr, bd of the probe section
};

inline CorrelationReport correlation_report(const SweepResult& r) {
    const std::size_t np = r.values.size();
    const std::size_t ns = r.xi.empty() ? 0 : r.xi[0].size();
    auto svne_series = [&](std::size_t k) {
        std::vector<double> s(np);
        for (std::size_t i = 0; i < np; ++i) s[i] = r.xi[i][k].svne;
        return s;
    };
    auto build = [&](const std::string& name,
                     const std::function<double(std::size_t, std::size_t)>& get) {
        IndicatorCorrelation c;
        c.indicator = name;
        std::vector<double> pooled_x, pooled_s;
        for (std::size_t k = 0; k < ns; ++k) {
            std::vector<double> series(np);
            for (std::size_t i = 0; i < np; ++i) series[i] = get(i, k);
            c.per_state.push_back(detail::try_pearson(series, svne_series(k)));
            for (std::size_t i = 0; i < np; ++i) {
                pooled_x.push_back(series[i]);
                pooled_s.push_back(r.xi[i][k].svne);
            }
        }
        c.mean_per_state = detail::mean_defined(c.per_state);
        c.pooled = detail::try_pearson(pooled_x, pooled_s);
        return c;
    };

    CorrelationReport rep;
    rep.xi.push_back(build("tei", [&](std::size_t i, std::size_t k) { return r.xi[i][k].tei; }));
    rep.xi.push_back(build("ipr", [&](std::size_t i, std::size_t k) { return r.xi[i][k].ipr; }));
    rep.xi.push_back(build("pcc", [&](std::size_t i, std::size_t k) { return r.xi[i][k].pcc; }));
    rep.xi.push_back(build("bd", [&](std::size_t i, std::size_t k) { return r.xi[i][k].bd; }));
    if (!r.probe.empty()) {
        rep.probe.push_back(
            build("tei", [&](std::size_t i, std::size_t k) { return r.probe[i][k].tei; }));
        rep.probe.push_back(
            build("ipr", [&](std::size_t i, std::size_t k) { return r.probe[i][k].ipr; }));
        rep.probe.push_back(
            build("bd", [&](std::size_t i, std::size_t k) { return r.probe[i][k].bd; }));
    }
    return rep;
}

/// Location and size of the smallest gap between two adjacent energy levels
/// over a sweep. The discrete minimum is refined with a parabola through the
/// neighbouring grid points, which recovers the crossing position to second
/// order without re-diagonalizing.
struct MinGap {
    int index = 0;       ///< grid index of the discrete minimum
    double param = 0.0;  ///< refined parameter location
    double gap = 0.0;    ///< refined gap estimate
    bool at_boundary = false;
};

inline MinGap min_gap(const SweepResult& r, int level) {
    const std::size_t np = r.values.size();
    std::vector<double> gaps(np);
    for (std::size_t i = 0; i < np; ++i) {
        auto e = r.systems[i].energies; // slot order; sort for the spectrum view
        std::sort(e.begin(), e.end());
        if (level < 0 || level + 1 >= static_cast<int>(e.size()))
            throw std::invalid_argument("min_gap: level out of range");
        gaps[i] = e[static_cast<std::size_t>(level) + 1] - e[static_cast<std::size_t>(level)];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < np; ++i)
        if (gaps[i] < gaps[best]) best = i;

    MinGap out;
    out.index = static_cast<int>(best);
    out.param = r.values[best];
    out.gap = gaps[best];
    out.at_boundary = (best == 0 || best + 1 == np);
    if (!out.at_boundary) {
        const double x0 = r.values[best - 1], x1 = r.values[best], x2 = r.values[best + 1];
        const double y0 = gaps[best - 1], y1 = gaps[best], y2 = gaps[best + 1];
        const double d1 = (y1 - y0) / (x1 - x0);
        const double d2 = (y2 - y1) / (x2 - x1);
        const double curv = (d2 - d1) / (x2 - x0);
        if (curv > 0.0) {
            double xs = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
            xs = std::clamp(xs, x0, x2);
            out.param = xs;
            out.gap = y0 + d1 * (xs - x0) + curv * (xs - x0) * (xs - x1);
        }
    }
    return out;
}

/// Disorder study: sweep the spread of the qubit gap distribution at fixed
/// coupling, one fresh frequency draw per spread value. Each spread gets its
/// own derived seed so the draws stay independent and reproducible no matter
/// how the loop is scheduled.
struct DisorderSpec {
    models::TcParams base; ///< nu_qubit is replaced by each draw
    int n_qubits = 5;
    double gap_mean = 5.6;
    double drive = 4.62;  ///< common drive scale entering the dressed gap
    double sd_max = 1.12; ///< largest spread, sampled inclusively from zero
    int n_sd = 20;
    std::uint64_t seed = 42;
    tomography::QuadratureGrid grid{};
    indicators::HybridAnglePlan plan = indicators::HybridAnglePlan::default_plan();
    int threads = 1;
};

struct DisorderResult {
    std::vector<double> sd;
    std::vector<std::vector<indicators::XiSet>> xi; ///< [sd][state], solver order
};

inline DisorderResult disorder_study(const DisorderSpec& spec) {
    if (spec.n_sd < 2) throw std::invalid_argument("disorder_study: need at least two spreads");
    DisorderResult out;
    out.sd.resize(static_cast<std::size_t>(spec.n_sd));
    for (int j = 0; j < spec.n_sd; ++j)
        out.sd[static_cast<std::size_t>(j)] = spec.sd_max * j / (spec.n_sd - 1);

    std::vector<models::EigenSystem> systems(out.sd.size());
    parallel::parallel_for(out.sd.size(), spec.threads, [&](std::size_t j) {
        const auto gaps = models::sample_gaps(spec.gap_mean, out.sd[j], spec.n_qubits,
                                              rng::sub_seed(spec.seed, j));
        models::TcParams p = spec.base;
        p.nu_qubit = models::qubit_frequencies(gaps, spec.drive);
        systems[j] = models::hermitian_eigensystem(models::build_tc(p));
    });

    const std::size_t ns = systems[0].states.size();
    out.xi.assign(out.sd.size(), std::vector<indicators::XiSet>(ns));
    parallel::parallel_for(out.sd.size() * ns, spec.threads, [&](std::size_t flat) {
        const std::size_t j = flat / ns;
        const std::size_t k = flat % ns;
        fock::PureState state{systems[j].basis, systems[j].states[k]};
        out.xi[j][k] = indicators::xi_set(state, spec.plan, spec.grid);
    });
    return out;
}

/// Correlation summary of a disorder study under both pooling protocols:
/// across eigenstates at each spread (how well the indicator ranks states of
/// one disorder realization) and across spreads for each state slot.
struct DisorderCorrelation {
    std::string indicator;
    std::vector<std::optional<double>> per_sd;
    std::optional<double> mean_per_sd;
    std::vector<std::optional<double>> per_state;
    std::optional<double> mean_per_state;
};

inline std::vector<DisorderCorrelation> disorder_report(const DisorderResult& r) {
    const std::size_t nsd = r.sd.size();
    const std::size_t ns = r.xi.empty() ? 0 : r.xi[0].size();
    std::vector<DisorderCorrelation> out;
    auto get = [&](const indicators::XiSet& s, int which) {
        switch (which) {
        case 0: return s.tei;
        case 1: return s.ipr;
        case 2: return s.pcc;
        default: return s.bd;
        }
    };
    const char* names[4] = {"tei", "ipr", "pcc", "bd"};
    for (int which = 0; which < 4; ++which) {
        DisorderCorrelation c;
        c.indicator = names[which];
        for (std::size_t j = 0; j < nsd; ++j) {
            std::vector<double> a(ns), s(ns);
            for (std::size_t k = 0; k < ns; ++k) {
                a[k] = get(r.xi[j][k], which);
                s[k] = r.xi[j][k].svne;
            }
            c.per_sd.push_back(detail::try_pearson(a, s));
        }
        for (std::size_t k = 0; k < ns; ++k) {
            std::vector<double> a(nsd), s(nsd);
            for (std::size_t j = 0; j < nsd; ++j) {
                a[j] = get(r.xi[j][k], which);
                s[j] = r.xi[j][k].svne;
            }
            c.per_state.push_back(detail::try_pearson(a, s));
        }
        c.mean_per_sd = detail::mean_defined(c.per_sd);
        c.mean_per_state = detail::mean_defined(c.per_state);
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace tomoscope::analysis
