#include "contractionkit/commands.hpp"

#include "contractionkit/netsim.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace contractionkit {

namespace {

using nlohmann::json;

constexpr double kBoundSlack = 1e-5;

std::string format_g17(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::filesystem::path resolve_out_dir(const RunConfig& config, const CliOverrides& overrides) {
    const std::filesystem::path dir =
        overrides.out_dir.has_value() ? *overrides.out_dir : config.outputs.dir;
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

struct NetworkSetup {
    NetworkSystem net;
    double grid_spacing = 0.0;  // > 0 only for 1D grids
};

NetworkSetup build_network(const RunConfig& config, const ReactionSystem& sys) {
    const DiffusionSpec diffusion(config.diffusion.size() > 0
                                      ? config.diffusion
                                      : Vector::Ones(sys.dim));
    if (diffusion.dim() != sys.dim) {
        throw ConfigError("config error at diffusion.d: length does not match system dim");
    }
    switch (config.topology.kind) {
        case TopologyConfig::Kind::none: {
            SymMatrix zero{Matrix::Zero(1, 1)};
            return NetworkSetup{
                NetworkSystem{sys, diffusion, Laplacian(zero), config.sim.lipschitz_hint},
                0.0};
        }
        case TopologyConfig::Kind::neumann1d: {
            auto [lap, h] = neumann_laplacian_1d(config.topology.nodes,
                                                 config.topology.length);
            return NetworkSetup{
                NetworkSystem{sys, diffusion, std::move(lap), config.sim.lipschitz_hint}, h};
        }
        case TopologyConfig::Kind::graph: {
            std::ifstream in(config.topology.adjacency_file);
            if (!in.is_open()) {
                throw ConfigError("config error at topology.adjacency_file: cannot open " +
                                  config.topology.adjacency_file.string());
            }
            json parsed;
            try {
                parsed = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config error at topology.adjacency_file: " +
                                  std::string(e.what()));
            }
            if (!parsed.is_array()) {
                throw ConfigError(
                    "config error at topology.adjacency_file: expected a nested array");
            }
            const std::size_t n = parsed.size();
            Matrix adjacency(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!parsed[i].is_array() || parsed[i].size() != n) {
                    throw ConfigError(
                        "config error at topology.adjacency_file: ragged adjacency rows");
                }
                for (std::size_t k = 0; k < n; ++k) {
                    adjacency(static_cast<int>(i), static_cast<int>(k)) =
                        parsed[i][k].get<double>();
                }
            }
            return NetworkSetup{NetworkSystem{sys, diffusion, graph_laplacian(adjacency),
                                              config.sim.lipschitz_hint},
                                0.0};
        }
    }
    throw std::logic_error("unreachable topology kind");
}

std::pair<Vector, Vector> build_initial_pair(const RunConfig& config,
                                             const NetworkSystem& net,
                                             std::uint64_t seed) {
    const InitialConfig& initial = config.sim.initial;
    const int dim = net.node.dim;
    const int nodes = net.laplacian.nodes();
    if (initial.kind == InitialConfig::Kind::explicit_states) {
        if (initial.u0.size() != net.state_size()) {
            throw ConfigError("config error at sim.initial.u0: expected length " +
                              std::to_string(net.state_size()));
        }
        return {initial.u0, initial.v0};
    }
    if (static_cast<int>(initial.window.size()) != dim) {
        throw ConfigError("config error at sim.initial.window: expected one [lo, hi] per "
                          "node coordinate");
    }
    for (int k = 0; k < dim; ++k) {
        const Interval& w = initial.window[k];
        const Interval& v = net.node.domain.bounds[k];
        if (w.lo < v.lo || w.hi > v.hi || !(w.hi > w.lo)) {
            throw ConfigError("config error at sim.initial.window[" + std::to_string(k) +
                              "]: not a proper subinterval of the domain");
        }
    }
    Rng rng(seed);
    Vector u0(net.state_size());
    Vector v0(net.state_size());
    for (int i = 0; i < nodes; ++i) {
        for (int k = 0; k < dim; ++k) {
            u0(i * dim + k) = rng.uniform(initial.window[k].lo, initial.window[k].hi);
        }
    }
    for (int i = 0; i < nodes; ++i) {
        for (int k = 0; k < dim; ++k) {
            v0(i * dim + k) = rng.uniform(initial.window[k].lo, initial.window[k].hi);
        }
    }
    return {u0, v0};
}

struct SimulationOutcome {
    TrajectoryLog log;
    double mu = 0.0;
    bool bound_ok = false;
    bool phi_ok = true;
    double worst_bound_margin = 0.0;
    double worst_bound_time = 0.0;
    long clamps = 0;
};

SimulationOutcome run_simulation(const RunConfig& config, const CliOverrides& overrides) {
    const ReactionSystem sys = build_system(config.system);
    NetworkSetup setup = build_network(config, sys);
    const std::uint64_t sim_seed =
        overrides.seed.has_value() ? *overrides.seed : config.sim.seed;

    AnyWeight weight = config.sim.p == NormOrder::two
                           ? AnyWeight(build_weight(config.weight))
                           : AnyWeight(build_diag_weight(config.weight));

    double mu;
    if (config.sim.mu_override.has_value()) {
        mu = *config.sim.mu_override;
    } else {
        SweepSpec sweep = config.sweep;
        if (overrides.seed.has_value()) {
            sweep.seed = *overrides.seed;
        }
        if (const Weight* w = std::get_if<Weight>(&weight)) {
            mu = sup_mu_over_domain(sys, *w, sweep, overrides.jobs).mu_sup;
        } else {
            mu = sup_mu_over_domain(sys, std::get<DiagWeight>(weight), config.sim.p, sweep,
                                    overrides.jobs)
                     .mu_sup;
        }
    }

    PairDivergenceOptions options;
    options.p = config.sim.p;
    options.output_stride = config.sim.output_stride;
    options.store_states = config.outputs.snapshots;
    const bool scale = config.sim.pde_scaling.has_value()
                           ? *config.sim.pde_scaling
                           : config.topology.kind == TopologyConfig::Kind::neumann1d;
    if (scale) {
        if (setup.grid_spacing <= 0.0) {
            throw ConfigError(
                "config error at sim.pde_scaling: only 1D grid topologies carry a spacing");
        }
        options.grid_spacing = setup.grid_spacing;
    }

    auto [u0, v0] = build_initial_pair(config, setup.net, sim_seed);
    SimulationOutcome outcome;
    outcome.mu = mu;
    outcome.log = pair_divergence(setup.net, u0, v0, config.sim.t_end, config.sim.dt,
                                  weight, options);
    outcome.clamps = outcome.log.clamps.empty() ? 0 : outcome.log.clamps.back();

    const double norm0 = outcome.log.norms.front();
    outcome.bound_ok = true;
    outcome.worst_bound_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < outcome.log.times.size(); ++k) {
        const double budget =
            norm0 * std::exp(mu * outcome.log.times[k]) * (1.0 + kBoundSlack);
        const double margin =
            budget > 0.0 ? outcome.log.norms[k] / budget - 1.0
                         : (outcome.log.norms[k] > 0.0 ? 1.0 : -1.0);
        if (margin > outcome.worst_bound_margin) {
            outcome.worst_bound_margin = margin;
            outcome.worst_bound_time = outcome.log.times[k];
        }
        if (margin > 0.0) {
            outcome.bound_ok = false;
        }
    }
    if (config.sim.p == NormOrder::two && std::holds_alternative<Weight>(weight)) {
        outcome.phi_ok = phi_monitor(outcome.log, mu, config.sim.dt).pass;
    }
    return outcome;
}

std::vector<std::vector<double>> cartesian_rows(const SweepGridConfig& grid) {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> cursor(grid.axes.size(), 0);
    while (true) {
        std::vector<double> row;
        row.reserve(grid.axes.size());
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            row.push_back(grid.axes[a].values[cursor[a]]);
        }
        rows.push_back(std::move(row));
        std::size_t axis = grid.axes.size();
        while (axis > 0) {
            --axis;
            if (++cursor[axis] < grid.axes[axis].values.size()) {
                break;
            }
            cursor[axis] = 0;
            if (axis == 0) {
                return rows;
            }
        }
    }
}

void apply_sweep_param(RunConfig& config, const std::string& param, double value) {
    if (param == "weight.q") {
        config.weight.kind = WeightConfig::Kind::example1_q;
        config.weight.q = value;
        return;
    }
    if (param == "weight.margin") {
        config.weight.kind = WeightConfig::Kind::example1_margin;
        config.weight.margin = value;
        return;
    }
    if (param == "diffusion.uniform") {
        config.diffusion = Vector::Constant(
            config.diffusion.size() > 0 ? config.diffusion.size() : 2, value);
        return;
    }
    if (param == "topology.nodes") {
        config.topology.nodes = static_cast<int>(value);
        return;
    }
    if (param.rfind("system.", 0) == 0) {
        config.system.params[param.substr(7)] = value;
        return;
    }
    throw ConfigError("config error at sweep_grid.axes: unknown sweep parameter '" + param +
                      "'");
}

int run_guarded(const char* command, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << command << ": error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("CONTRACTIONKIT_LOG");
        if (env == nullptr) {
            return LogLevel::info;
        }
        const std::string value(env);
        if (value == "quiet") {
            return LogLevel::quiet;
        }
        if (value == "debug") {
            return LogLevel::debug;
        }
        return LogLevel::info;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::info) {
        std::cerr << "[contractionkit] " << message << "\n";
    }
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::debug) {
        std::cerr << "[contractionkit:debug] " << message << "\n";
    }
}

int cmd_certify(const RunConfig& config, const CliOverrides& overrides) {
    return run_guarded("certify", [&] {
        const ReactionSystem sys = build_system(config.system);
        const Weight weight = build_weight(config.weight);
        const DiffusionSpec diffusion(
            config.diffusion.size() > 0 ? config.diffusion : Vector::Ones(sys.dim));
        SweepSpec sweep = config.sweep;
        if (overrides.seed.has_value()) {
            sweep.seed = *overrides.seed;
        }
        const ContractionCertificate cert =
            certify_contraction(sys, weight, diffusion, sweep, overrides.jobs);
        const std::filesystem::path out =
            resolve_out_dir(config, overrides) / config.outputs.certificate;
        write_json(out, certificate_to_json(cert));
        std::ostringstream line;
        line << "certify " << sys.label << ": mu_sup = " << cert.mu_sup
             << ", diffusion_ok = " << (cert.diffusion_ok ? "yes" : "no") << " -> "
             << (cert.pass ? "pass" : "fail") << " (" << out.string() << ")";
        log_info(line.str());
        return cert.pass ? kExitPass : kExitFail;
    });
}

int cmd_counterexample(const RunConfig& config, const CliOverrides& overrides) {
    return run_guarded("counterexample", [&] {
        const ReactionSystem sys = build_system(config.system);
        const CounterexampleConfig& cx = config.counterexample;

        SymMatrix p = [&] {
            if (cx.p_matrix.has_value()) {
                return SymMatrix(*cx.p_matrix);
            }
            const std::uint64_t seed =
                overrides.seed.has_value() ? *overrides.seed : cx.p_seed;
            Rng rng(seed);
            Matrix g(sys.dim, sys.dim);
            for (int i = 0; i < sys.dim; ++i) {
                for (int j = 0; j < sys.dim; ++j) {
                    g(i, j) = rng.uniform(-1.0, 1.0);
                }
            }
            Matrix pd = g.transpose() * g + 0.1 * Matrix::Identity(sys.dim, sys.dim);
            return SymMatrix(std::move(pd));
        }();

        json witness{{"kind", "counterexample_witness"},
                     {"system", sys.label},
                     {"lambda", cx.lambda},
                     {"mu", cx.mu},
                     {"p_matrix", json::array()}};
        for (int i = 0; i < p.dim(); ++i) {
            json row = json::array();
            for (int j = 0; j < p.dim(); ++j) {
                row.push_back(p(i, j));
            }
            witness["p_matrix"].push_back(row);
        }

        bool conditions_ok = false;
        if (sys.feedback.has_value()) {
            const LemmaConditionReport report = check_lemma_conditions(
                sys, cx.lambda, cx.mu, config.sweep, cx.divergence_threshold);
            conditions_ok = report.all();
            json conditions{
                {"condition1",
                 {{"pass", report.condition1},
                  {"worst_margin", report.worst1.margin},
                  {"witness_x", report.worst1.point.size() > 0 ? report.worst1.point(0) : 0.0}}},
                {"condition2",
                 {{"pass", report.condition2},
                  {"worst_margin", report.worst2.margin},
                  {"witness_y", report.worst2.point.size() > 0 ? report.worst2.point(0) : 0.0}}},
                {"condition3", {{"pass", report.condition3}}},
            };
            if (report.violation3.has_value()) {
                conditions["condition3"]["violating_p0"] = report.violation3->p0;
                conditions["condition3"]["ratio_at_top"] = report.violation3->margin;
            }
            witness["conditions"] = conditions;
        } else {
            witness["conditions"] = nullptr;
        }

        const std::optional<IndefinitePoint> point =
            find_indefinite_point(sys, p, config.sweep);
        if (point.has_value()) {
            witness["indefinite_point"] = {{"x", point->point(0)},
                                           {"y", point->point(1)},
                                           {"mu_value", point->mu_value}};
        } else {
            witness["indefinite_point"] = nullptr;
        }

        const bool reproduced = conditions_ok && point.has_value();
        witness["verdict"] = reproduced ? "reproduced" : "not_reproduced";

        const std::filesystem::path out =
            resolve_out_dir(config, overrides) / config.outputs.witness;
        write_json(out, witness);
        std::ostringstream line;
        line << "counterexample " << sys.label << ": conditions "
             << (conditions_ok ? "hold" : "do not hold") << ", indefinite point "
             << (point.has_value() ? "found" : "not found") << " -> "
             << (reproduced ? "reproduced" : "not reproduced") << " (" << out.string() << ")";
        log_info(line.str());
        return reproduced ? kExitPass : kExitFail;
    });
}

int cmd_simulate(const RunConfig& config, const CliOverrides& overrides) {
    return run_guarded("simulate", [&] {
        const SimulationOutcome outcome = run_simulation(config, overrides);
        const std::filesystem::path dir = resolve_out_dir(config, overrides);
        const std::filesystem::path csv_path = dir / config.outputs.trajectory;
        std::ostringstream csv;
        write_trajectory_csv(outcome.log, csv);
        write_text(csv_path, csv.str());
        if (!config.outputs.trajectory_json.empty()) {
            write_json(dir / config.outputs.trajectory_json,
                       trajectory_to_json(outcome.log, config.outputs.snapshots));
        }

        const bool pass = outcome.bound_ok && outcome.phi_ok && outcome.clamps == 0;
        std::ostringstream line;
        line << "simulate: mu = " << outcome.mu << ", fitted_rate = "
             << outcome.log.fitted_rate << ", bound "
             << (outcome.bound_ok ? "held" : "violated");
        if (!outcome.bound_ok) {
            line << " (worst margin " << outcome.worst_bound_margin << " at t = "
                 << outcome.worst_bound_time << ")";
        }
        line << ", phi " << (outcome.phi_ok ? "ok" : "violated") << ", clamps = "
             << outcome.clamps << " (" << csv_path.string() << ")";
        log_info(line.str());
        return pass ? kExitPass : kExitFail;
    });
}

int cmd_sweep(const RunConfig& config, const CliOverrides& overrides) {
    return run_guarded("sweep", [&] {
        if (config.sweep_grid.axes.empty()) {
            throw ConfigError("config error at sweep_grid.axes: empty sweep grid");
        }
        for (const auto& axis : config.sweep_grid.axes) {
            if (axis.values.empty()) {
                throw ConfigError("config error at sweep_grid.axes: axis '" + axis.param +
                                  "' has no values");
            }
        }
        const std::vector<std::vector<double>> rows = cartesian_rows(config.sweep_grid);

        struct RowResult {
            double mu_sup = 0.0;
            bool diffusion_ok = false;
            double lambda_min = 0.0;
            bool pass = false;
            double fitted_rate = std::numeric_limits<double>::quiet_NaN();
            bool bound_ok = false;
            long clamps = 0;
        };
        std::vector<RowResult> results(rows.size());

        auto run_row = [&](std::size_t r) {
            RunConfig row_config = config;
            for (std::size_t a = 0; a < config.sweep_grid.axes.size(); ++a) {
                apply_sweep_param(row_config, config.sweep_grid.axes[a].param, rows[r][a]);
            }
            const ReactionSystem sys = build_system(row_config.system);
            const Weight weight = build_weight(row_config.weight);
            const DiffusionSpec diffusion(row_config.diffusion.size() > 0
                                              ? row_config.diffusion
                                              : Vector::Ones(sys.dim));
            SweepSpec sweep = row_config.sweep;
            if (overrides.seed.has_value()) {
                sweep.seed = *overrides.seed;
            }
            const ContractionCertificate cert =
                certify_contraction(sys, weight, diffusion, sweep, 1);
            RowResult result;
            result.mu_sup = cert.mu_sup;
            result.diffusion_ok = cert.diffusion_ok;
            result.lambda_min = cert.diffusion_lambda_min;
            result.pass = cert.pass;
            if (config.sweep_grid.simulate) {
                CliOverrides row_overrides = overrides;
                row_overrides.jobs = 1;
                const SimulationOutcome outcome = run_simulation(row_config, row_overrides);
                result.fitted_rate = outcome.log.fitted_rate;
                result.bound_ok = outcome.bound_ok && outcome.phi_ok;
                result.clamps = outcome.clamps;
            }
            results[r] = result;
        };

        const int jobs = std::max(1, overrides.jobs);
        if (jobs == 1 || rows.size() < 2) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                run_row(r);
            }
        } else {
            std::vector<std::thread> workers;
            std::atomic<std::size_t> next{0};
            std::mutex error_mutex;
            std::exception_ptr first_error;
            for (int w = 0; w < jobs; ++w) {
                workers.emplace_back([&] {
                    while (true) {
                        const std::size_t r = next.fetch_add(1);
                        if (r >= rows.size()) {
                            return;
                        }
                        try {
                            run_row(r);
                        } catch (...) {
                            std::lock_guard<std::mutex> lock(error_mutex);
                            if (!first_error) {
                                first_error = std::current_exception();
                            }
                            return;
                        }
                    }
                });
            }
            for (auto& t : workers) {
                t.join();
            }
            if (first_error) {
                std::rethrow_exception(first_error);
            }
        }

        std::ostringstream csv;
        csv << "index";
        for (const auto& axis : config.sweep_grid.axes) {
            csv << ',' << axis.param;
        }
        csv << ",mu_sup,diffusion_ok,diffusion_lambda_min,verdict";
        if (config.sweep_grid.simulate) {
            csv << ",fitted_rate,bound_ok,clamps";
        }
        csv << '\n';
        for (std::size_t r = 0; r < rows.size(); ++r) {
            csv << r;
            for (double v : rows[r]) {
                csv << ',' << format_g17(v);
            }
            const RowResult& result = results[r];
            csv << ',' << format_g17(result.mu_sup) << ','
                << (result.diffusion_ok ? "true" : "false") << ','
                << format_g17(result.lambda_min) << ','
                << (result.pass ? "pass" : "fail");
            if (config.sweep_grid.simulate) {
                csv << ',' << format_g17(result.fitted_rate) << ','
                    << (result.bound_ok ? "true" : "false") << ',' << result.clamps;
            }
            csv << '\n';
        }

        const std::filesystem::path out =
            resolve_out_dir(config, overrides) / config.outputs.table;
        write_text(out, csv.str());
        std::ostringstream line;
        line << "sweep: " << rows.size() << " rows written to " << out.string();
        log_info(line.str());
        return kExitPass;
    });
}

}  // namespace contractionkit
