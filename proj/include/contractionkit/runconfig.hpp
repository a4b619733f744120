#pragma once

#include "contractionkit/certificates.hpp"
#include "contractionkit/lognorm.hpp"
#include "contractionkit/models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace contractionkit {

/// Raised for malformed configs; the message names the offending field (or the line for
/// JSON syntax errors) so the CLI can exit 1 with a usable diagnostic.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    std::string label;                       // example1 | example2 | linear
    std::map<std::string, double> params;    // label-specific overrides
    Matrix linear_matrix;                    // label == linear only
    Vector linear_offset;
};

struct WeightConfig {
    enum class Kind { explicit_q, example1_margin, example1_q, diagonal };
    Kind kind = Kind::explicit_q;
    Matrix q_matrix;       // explicit_q
    double delta = 1.0;    // example1_margin
    double k1 = 1.0;
    double margin = 0.25;
    double q = 1.5;        // example1_q
    Vector diag;           // diagonal
};

struct TopologyConfig {
    enum class Kind { none, neumann1d, graph };
    Kind kind = Kind::none;
    int nodes = 2;
    double length = 1.0;
    std::filesystem::path adjacency_file;
};

struct InitialConfig {
    enum class Kind { random_window, explicit_states };
    Kind kind = Kind::random_window;
    std::vector<Interval> window;  // per node coordinate
    Vector u0;
    Vector v0;
};

struct SimConfig {
    double t_end = 1.0;
    double dt = 1e-3;
    int output_stride = 1;
    std::uint64_t seed = 0;
    InitialConfig initial;
    NormOrder p = NormOrder::two;
    std::optional<double> mu_override;
    std::optional<bool> pde_scaling;  // default: on for neumann1d topologies
    double lipschitz_hint = 0.0;
};

struct CounterexampleConfig {
    double lambda = 1.0;
    double mu = 0.25;
    std::optional<Matrix> p_matrix;  // absent => seeded random PD matrix
    std::uint64_t p_seed = 0;
    double divergence_threshold = 5.0;
};

struct SweepGridConfig {
    struct Axis {
        std::string param;
        std::vector<double> values;
    };
    std::vector<Axis> axes;
    bool simulate = false;
};

struct OutputsConfig {
    std::filesystem::path dir = "out";
    std::string certificate = "certificate.json";
    std::string trajectory = "trajectory.csv";
    std::string trajectory_json;  // empty => skip
    std::string witness = "witness.json";
    std::string table = "sweep.csv";
    bool snapshots = false;
};

struct RunConfig {
    SystemConfig system;
    WeightConfig weight;
    Vector diffusion;
    TopologyConfig topology;
    SweepSpec sweep;
    SimConfig sim;
    CounterexampleConfig counterexample;
    SweepGridConfig sweep_grid;
    OutputsConfig outputs;
};

[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);
[[nodiscard]] RunConfig parse_run_config(const std::string& text,
                                         const std::filesystem::path& base_dir);

/// Instantiate the configured reaction system (positivity and range checks re-run by
/// the model constructors).
[[nodiscard]] ReactionSystem build_system(const SystemConfig& config);

/// Full symmetric weight for the p = 2 certificate path.
[[nodiscard]] Weight build_weight(const WeightConfig& config);

/// Diagonal weight for the p in {1, inf} paths; rejects non-diagonal weight kinds.
[[nodiscard]] DiagWeight build_diag_weight(const WeightConfig& config);

}  // namespace contractionkit
