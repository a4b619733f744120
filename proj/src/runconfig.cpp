#include "contractionkit/runconfig.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace contractionkit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

const json& field(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        fail(path + "." + key, "missing required field");
    }
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    return j.get<double>();
}

double number_at(const json& j, const std::string& path, const char* key) {
    return as_number(field(j, path, key), path + "." + key);
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : as_number(*it, path + "." + key);
}

std::int64_t integer_at(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_number_integer()) {
        fail(path + "." + key, "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::string string_at(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_string()) {
        fail(path + "." + key, "expected a string");
    }
    return v.get<std::string>();
}

std::string string_or(const json& j, const std::string& path, const char* key,
                      const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        return fallback;
    }
    if (!it->is_string()) {
        fail(path + "." + key, "expected a string");
    }
    return it->get<std::string>();
}

bool bool_or(const json& j, const std::string& path, const char* key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        return fallback;
    }
    if (!it->is_boolean()) {
        fail(path + "." + key, "expected a boolean");
    }
    return it->get<bool>();
}

Vector vector_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        fail(path, "expected a non-empty array of numbers");
    }
    Vector out(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out(static_cast<int>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

Matrix matrix_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        fail(path, "expected a matrix as nested row-major arrays");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            fail(path + "[" + std::to_string(i) + "]", "ragged matrix rows");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            out(static_cast<int>(i), static_cast<int>(k)) =
                as_number(j[i][k], path + "[" + std::to_string(i) + "]");
        }
    }
    return out;
}

SystemConfig parse_system(const json& j) {
    SystemConfig out;
    out.label = string_at(j, "system", "label");
    if (out.label == "linear") {
        out.linear_matrix = matrix_at(field(j, "system", "matrix"), "system.matrix");
        if (auto it = j.find("offset"); it != j.end()) {
            out.linear_offset = vector_at(*it, "system.offset");
        } else {
            out.linear_offset = Vector::Zero(out.linear_matrix.rows());
        }
        return out;
    }
    if (out.label != "example1" && out.label != "example2") {
        fail("system.label", "unknown system '" + out.label +
                                 "' (expected example1, example2, or linear)");
    }
    if (auto it = j.find("params"); it != j.end()) {
        if (!it->is_object()) {
            fail("system.params", "expected an object of named numbers");
        }
        for (const auto& [key, value] : it->items()) {
            out.params[key] = as_number(value, "system.params." + key);
        }
    }
    return out;
}

WeightConfig parse_weight(const json& j) {
    WeightConfig out;
    const std::string kind = string_at(j, "weight", "kind");
    if (kind == "explicit") {
        out.kind = WeightConfig::Kind::explicit_q;
        out.q_matrix = matrix_at(field(j, "weight", "q_matrix"), "weight.q_matrix");
    } else if (kind == "example1_margin") {
        out.kind = WeightConfig::Kind::example1_margin;
        out.delta = number_or(j, "weight", "delta", 1.0);
        out.k1 = number_or(j, "weight", "k1", 1.0);
        out.margin = number_at(j, "weight", "margin");
    } else if (kind == "example1_claim") {
        out.kind = WeightConfig::Kind::example1_q;
        out.q = number_at(j, "weight", "q");
    } else if (kind == "diagonal") {
        out.kind = WeightConfig::Kind::diagonal;
        out.diag = vector_at(field(j, "weight", "diag"), "weight.diag");
    } else {
        fail("weight.kind", "unknown weight kind '" + kind + "'");
    }
    return out;
}

TopologyConfig parse_topology(const json& j, const std::filesystem::path& base_dir) {
    TopologyConfig out;
    const std::string kind = string_at(j, "topology", "kind");
    if (kind == "none") {
        out.kind = TopologyConfig::Kind::none;
    } else if (kind == "neumann1d") {
        out.kind = TopologyConfig::Kind::neumann1d;
        out.nodes = static_cast<int>(integer_at(j, "topology", "nodes"));
        out.length = number_or(j, "topology", "length", 1.0);
    } else if (kind == "graph") {
        out.kind = TopologyConfig::Kind::graph;
        std::filesystem::path file = string_at(j, "topology", "adjacency_file");
        out.adjacency_file = file.is_absolute() ? file : base_dir / file;
        if (!std::filesystem::exists(out.adjacency_file)) {
            fail("topology.adjacency_file",
                 "file does not exist: " + out.adjacency_file.string());
        }
    } else {
        fail("topology.kind", "unknown topology kind '" + kind + "'");
    }
    return out;
}

SweepSpec parse_sweep(const json& j) {
    SweepSpec out;
    const json& counts = field(j, "sweep", "counts");
    if (!counts.is_array() || counts.empty()) {
        fail("sweep.counts", "expected a non-empty array of integers");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!counts[i].is_number_integer()) {
            fail("sweep.counts[" + std::to_string(i) + "]", "expected an integer");
        }
        out.counts.push_back(counts[i].get<int>());
    }
    if (auto it = j.find("windows"); it != j.end()) {
        if (!it->is_array() || it->size() != counts.size()) {
            fail("sweep.windows", "expected one window (or null) per coordinate");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& w = (*it)[i];
            const std::string path = "sweep.windows[" + std::to_string(i) + "]";
            if (w.is_null()) {
                out.windows.emplace_back(std::nullopt);
            } else if (w.is_array() && w.size() == 2) {
                out.windows.emplace_back(
                    Interval{as_number(w[0], path), as_number(w[1], path)});
            } else {
                fail(path, "expected [lo, hi] or null");
            }
        }
    }
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_integer()) {
            fail("sweep.seed", "expected an integer");
        }
        out.seed = it->get<std::uint64_t>();
    }
    const std::string mode = string_or(j, "sweep", "mode", "lattice");
    if (mode == "lattice") {
        out.mode = SweepSpec::Mode::lattice;
    } else if (mode == "random") {
        out.mode = SweepSpec::Mode::random;
    } else {
        fail("sweep.mode", "expected 'lattice' or 'random'");
    }
    return out;
}

InitialConfig parse_initial(const json& j) {
    InitialConfig out;
    const std::string kind = string_at(j, "sim.initial", "kind");
    if (kind == "random_window") {
        out.kind = InitialConfig::Kind::random_window;
        const json& window = field(j, "sim.initial", "window");
        if (!window.is_array() || window.empty()) {
            fail("sim.initial.window", "expected an array of [lo, hi] pairs");
        }
        for (std::size_t i = 0; i < window.size(); ++i) {
            const std::string path = "sim.initial.window[" + std::to_string(i) + "]";
            if (!window[i].is_array() || window[i].size() != 2) {
                fail(path, "expected [lo, hi]");
            }
            out.window.push_back(
                Interval{as_number(window[i][0], path), as_number(window[i][1], path)});
        }
    } else if (kind == "explicit") {
        out.kind = InitialConfig::Kind::explicit_states;
        out.u0 = vector_at(field(j, "sim.initial", "u0"), "sim.initial.u0");
        out.v0 = vector_at(field(j, "sim.initial", "v0"), "sim.initial.v0");
        if (out.u0.size() != out.v0.size()) {
            fail("sim.initial", "u0 and v0 must have the same length");
        }
    } else {
        fail("sim.initial.kind", "expected 'random_window' or 'explicit'");
    }
    return out;
}

NormOrder parse_norm_order(const json& j, const std::string& path) {
    if (j.is_number_integer()) {
        const int p = j.get<int>();
        if (p == 1) {
            return NormOrder::one;
        }
        if (p == 2) {
            return NormOrder::two;
        }
        fail(path, "expected 1, 2, or \"inf\"");
    }
    if (j.is_string() && j.get<std::string>() == "inf") {
        return NormOrder::inf;
    }
    fail(path, "expected 1, 2, or \"inf\"");
}

SimConfig parse_sim(const json& j) {
    SimConfig out;
    out.t_end = number_at(j, "sim", "t_end");
    out.dt = number_at(j, "sim", "dt");
    if (auto it = j.find("output_stride"); it != j.end()) {
        out.output_stride = static_cast<int>(integer_at(j, "sim", "output_stride"));
    }
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_integer()) {
            fail("sim.seed", "expected an integer");
        }
        out.seed = it->get<std::uint64_t>();
    }
    out.initial = parse_initial(field(j, "sim", "initial"));
    if (auto it = j.find("p"); it != j.end()) {
        out.p = parse_norm_order(*it, "sim.p");
    }
    if (auto it = j.find("mu_override"); it != j.end() && !it->is_null()) {
        out.mu_override = as_number(*it, "sim.mu_override");
    }
    if (auto it = j.find("pde_scaling"); it != j.end()) {
        if (!it->is_boolean()) {
            fail("sim.pde_scaling", "expected a boolean");
        }
        out.pde_scaling = it->get<bool>();
    }
    out.lipschitz_hint = number_or(j, "sim", "lipschitz_hint", 0.0);
    return out;
}

CounterexampleConfig parse_counterexample(const json& j) {
    CounterexampleConfig out;
    out.lambda = number_or(j, "counterexample", "lambda", 1.0);
    out.mu = number_or(j, "counterexample", "mu", 0.25);
    if (auto it = j.find("p_matrix"); it != j.end() && !it->is_null()) {
        out.p_matrix = matrix_at(*it, "counterexample.p_matrix");
    }
    if (auto it = j.find("p_seed"); it != j.end()) {
        if (!it->is_number_integer()) {
            fail("counterexample.p_seed", "expected an integer");
        }
        out.p_seed = it->get<std::uint64_t>();
    }
    out.divergence_threshold = number_or(j, "counterexample", "divergence_threshold", 5.0);
    return out;
}

SweepGridConfig parse_sweep_grid(const json& j) {
    SweepGridConfig out;
    const json& axes = field(j, "sweep_grid", "axes");
    if (!axes.is_array()) {
        fail("sweep_grid.axes", "expected an array of {param, values}");
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string path = "sweep_grid.axes[" + std::to_string(i) + "]";
        SweepGridConfig::Axis axis;
        axis.param = string_at(axes[i], path, "param");
        const json& values = field(axes[i], path, "values");
        if (!values.is_array() || values.empty()) {
            fail(path + ".values", "expected a non-empty array of numbers");
        }
        for (std::size_t k = 0; k < values.size(); ++k) {
            axis.values.push_back(
                as_number(values[k], path + ".values[" + std::to_string(k) + "]"));
        }
        out.axes.push_back(std::move(axis));
    }
    out.simulate = bool_or(j, "sweep_grid", "simulate", false);
    return out;
}

OutputsConfig parse_outputs(const json& j, const std::filesystem::path& base_dir) {
    OutputsConfig out;
    std::filesystem::path dir = string_or(j, "outputs", "dir", "out");
    out.dir = dir.is_absolute() ? dir : base_dir / dir;
    out.certificate = string_or(j, "outputs", "certificate", out.certificate);
    out.trajectory = string_or(j, "outputs", "trajectory", out.trajectory);
    out.trajectory_json = string_or(j, "outputs", "trajectory_json", "");
    out.witness = string_or(j, "outputs", "witness", out.witness);
    out.table = string_or(j, "outputs", "table", out.table);
    out.snapshots = bool_or(j, "outputs", "snapshots", false);
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
            }
        }
        throw ConfigError("config error at line " + std::to_string(line) + ": " + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config error: top level must be a JSON object");
    }

    RunConfig config;
    config.system = parse_system(field(root, "config", "system"));
    if (auto it = root.find("weight"); it != root.end()) {
        config.weight = parse_weight(*it);
    }
    if (auto it = root.find("diffusion"); it != root.end()) {
        config.diffusion = vector_at(field(*it, "diffusion", "d"), "diffusion.d");
    }
    if (auto it = root.find("topology"); it != root.end()) {
        config.topology = parse_topology(*it, base_dir);
    }
    if (auto it = root.find("sweep"); it != root.end()) {
        config.sweep = parse_sweep(*it);
    }
    if (auto it = root.find("sim"); it != root.end()) {
        config.sim = parse_sim(*it);
    }
    if (auto it = root.find("counterexample"); it != root.end()) {
        config.counterexample = parse_counterexample(*it);
    }
    if (auto it = root.find("sweep_grid"); it != root.end()) {
        config.sweep_grid = parse_sweep_grid(*it);
    }
    if (auto it = root.find("outputs"); it != root.end()) {
        config.outputs = parse_outputs(*it, base_dir);
    } else {
        config.outputs.dir = base_dir / "out";
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw ConfigError("config error: cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path.parent_path());
}

ReactionSystem build_system(const SystemConfig& config) {
    auto param = [&](const char* name, double fallback) {
        auto it = config.params.find(name);
        return it == config.params.end() ? fallback : it->second;
    };
    if (config.label == "example1") {
        return example1(param("S_Y", 1.0), param("k1", 1.0), param("k2", 1.0),
                        param("delta", 1.0), param("z", 1.0));
    }
    if (config.label == "example2") {
        return example2(param("delta", 0.5), param("eps", 0.1), param("d", 1.0));
    }
    if (config.label == "linear") {
        return linear_system(config.linear_matrix, config.linear_offset);
    }
    throw ConfigError("config error at system.label: unknown system '" + config.label + "'");
}

Weight build_weight(const WeightConfig& config) {
    switch (config.kind) {
        case WeightConfig::Kind::explicit_q:
            return Weight::from_q(SymMatrix(config.q_matrix));
        case WeightConfig::Kind::example1_margin:
            return example1_weight(config.delta, config.k1, config.margin);
        case WeightConfig::Kind::example1_q: {
            Matrix q(2, 2);
            q << 1.0, 1.0, 1.0, config.q;
            return Weight::from_q(SymMatrix(q));
        }
        case WeightConfig::Kind::diagonal:
            return Weight::from_q(SymMatrix::from_diag(config.diag));
    }
    throw std::logic_error("unreachable weight kind");
}

DiagWeight build_diag_weight(const WeightConfig& config) {
    if (config.kind != WeightConfig::Kind::diagonal) {
        throw ConfigError(
            "config error at weight.kind: p in {1, inf} requires a diagonal weight");
    }
    return DiagWeight(config.diag);
}

}  // namespace contractionkit
