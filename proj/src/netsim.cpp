#include "contractionkit/netsim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace contractionkit {

namespace {

constexpr double kRk4RealAxisExtent = 2.5;
constexpr double kRowSumTol = 1e-10;
constexpr double kPsdTol = -1e-9;
constexpr std::uint64_t kLipschitzSeed = 0x11b5c7;
constexpr int kLipschitzSamples = 64;

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::string format_g17(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// du = F~(u) - (L kron D) u, evaluated without materializing the Kronecker product:
// viewing the stacked node-major state as an N x n matrix U, the coupling block for
// node i is D * (L U)(i, :), i.e. (L U) with columns scaled by d.
class RhsEvaluator {
public:
    explicit RhsEvaluator(const NetworkSystem& net)
        : net_(net), nodes_(net.laplacian.nodes()), dim_(net.node.dim) {}

    void operator()(const Vector& u, double t, Vector& du) const {
        for (int i = 0; i < nodes_; ++i) {
            du.segment(i * dim_, dim_) = net_.node.rhs(u.segment(i * dim_, dim_), t);
        }
        ConstRowMajorMap state(u.data(), nodes_, dim_);
        RowMajorMap deriv(du.data(), nodes_, dim_);
        deriv.noalias() -= net_.laplacian.matrix().data() * state *
                           net_.diffusion.d().asDiagonal();
    }

private:
    const NetworkSystem& net_;
    int nodes_;
    int dim_;
};

struct Rk4Workspace {
    Vector k1, k2, k3, k4, stage;

    explicit Rk4Workspace(int size)
        : k1(size), k2(size), k3(size), k4(size), stage(size) {}
};

void rk4_step(const RhsEvaluator& rhs, Vector& u, double t, double dt, Rk4Workspace& ws) {
    rhs(u, t, ws.k1);
    ws.stage = u + 0.5 * dt * ws.k1;
    rhs(ws.stage, t + 0.5 * dt, ws.k2);
    ws.stage = u + 0.5 * dt * ws.k2;
    rhs(ws.stage, t + 0.5 * dt, ws.k3);
    ws.stage = u + dt * ws.k3;
    rhs(ws.stage, t + dt, ws.k4);
    u += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

long clamp_to_domain(const Box& box, int nodes, Vector& u) {
    long clamped = 0;
    const int dim = box.dim();
    for (int i = 0; i < nodes; ++i) {
        for (int k = 0; k < dim; ++k) {
            double& value = u(i * dim + k);
            const Interval& iv = box.bounds[k];
            if (value < iv.lo) {
                value = iv.lo;
                ++clamped;
            } else if (value > iv.hi) {
                value = iv.hi;
                ++clamped;
            }
        }
    }
    return clamped;
}

void require_in_domain(const NetworkSystem& net, const Vector& u0, const char* name) {
    if (u0.size() != net.state_size()) {
        std::ostringstream msg;
        msg << name << " has length " << u0.size() << ", expected " << net.state_size();
        throw std::invalid_argument(msg.str());
    }
    for (int i = 0; i < net.laplacian.nodes(); ++i) {
        if (!net.node.domain.contains(u0.segment(i * net.node.dim, net.node.dim))) {
            std::ostringstream msg;
            msg << name << " leaves the domain at node " << i;
            throw std::invalid_argument(msg.str());
        }
    }
}

void require_finite(const Vector& u, double t) {
    if (!u.allFinite()) {
        std::ostringstream msg;
        msg << "integration aborted: non-finite state at t = " << t;
        throw std::runtime_error(msg.str());
    }
}

double sampled_lipschitz(const ReactionSystem& sys) {
    Rng rng(kLipschitzSeed);
    double worst = 0.0;
    for (int s = 0; s < kLipschitzSamples; ++s) {
        const Matrix j = sys.jacobian(sys.domain.sample_interior(rng), 0.0);
        const EigResult eig = sym_eig(SymMatrix{Matrix(j.transpose() * j)});
        worst = std::max(worst, std::sqrt(std::max(0.0, eig.eigenvalues(eig.eigenvalues.size() - 1))));
    }
    return worst;
}

long steps_for(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) {
        throw std::invalid_argument("integration requires t_end > 0 and dt > 0");
    }
    return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

double scale_factor(NormOrder p, double grid_spacing) {
    if (grid_spacing <= 0.0) {
        return 1.0;
    }
    switch (p) {
        case NormOrder::one:
            return grid_spacing;
        case NormOrder::two:
            return std::sqrt(grid_spacing);
        case NormOrder::inf:
            return 1.0;
    }
    throw std::logic_error("unreachable norm order");
}

}  // namespace

Laplacian::Laplacian(SymMatrix entries) : matrix_(std::move(entries)) {
    const Matrix& m = matrix_.data();
    const double scale = std::max(1.0, max_abs(m));
    for (int i = 0; i < m.rows(); ++i) {
        const double row_sum = m.row(i).sum();
        if (std::abs(row_sum) > kRowSumTol * scale) {
            std::ostringstream msg;
            msg << "Laplacian row " << i << " sums to " << row_sum << ", expected 0";
            throw std::invalid_argument(msg.str());
        }
    }
    const EigResult eig = sym_eig(matrix_);
    if (eig.eigenvalues(0) < kPsdTol * scale) {
        std::ostringstream msg;
        msg << "Laplacian must be positive semidefinite, lambda_min = " << eig.eigenvalues(0);
        throw std::invalid_argument(msg.str());
    }
    lambda_max_ = eig.eigenvalues(eig.eigenvalues.size() - 1);
}

std::pair<Laplacian, double> neumann_laplacian_1d(int nodes, double length) {
    if (nodes < 2) {
        std::ostringstream msg;
        msg << "1D grid needs at least 2 nodes, got " << nodes;
        throw std::invalid_argument(msg.str());
    }
    if (!(length > 0.0)) {
        throw std::invalid_argument("1D grid length must be positive");
    }
    const double h = length / static_cast<double>(nodes - 1);
    const double w = 1.0 / (h * h);
    Matrix m = Matrix::Zero(nodes, nodes);
    for (int i = 0; i < nodes; ++i) {
        if (i > 0) {
            m(i, i - 1) = -w;
            m(i, i) += w;
        }
        if (i + 1 < nodes) {
            m(i, i + 1) = -w;
            m(i, i) += w;
        }
    }
    return {Laplacian(SymMatrix(std::move(m))), h};
}

Laplacian graph_laplacian(const Matrix& adjacency) {
    if (adjacency.rows() != adjacency.cols()) {
        throw std::invalid_argument("adjacency matrix must be square");
    }
    const double scale = std::max(1.0, max_abs(adjacency));
    for (int i = 0; i < adjacency.rows(); ++i) {
        if (adjacency(i, i) != 0.0) {
            std::ostringstream msg;
            msg << "adjacency diagonal must be zero, entry (" << i << "," << i << ") = "
                << adjacency(i, i);
            throw std::invalid_argument(msg.str());
        }
        for (int j = 0; j < adjacency.cols(); ++j) {
            if (adjacency(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "adjacency weights must be nonnegative, entry (" << i << "," << j
                    << ") = " << adjacency(i, j);
                throw std::invalid_argument(msg.str());
            }
            if (std::abs(adjacency(i, j) - adjacency(j, i)) > 1e-12 * scale) {
                std::ostringstream msg;
                msg << "adjacency matrix must be symmetric, mismatch at (" << i << "," << j
                    << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }
    Matrix m = -adjacency;
    for (int i = 0; i < adjacency.rows(); ++i) {
        m(i, i) = adjacency.row(i).sum();
    }
    return Laplacian(SymMatrix(std::move(m)));
}

StabilityReport stability_bound(const NetworkSystem& net, double dt) {
    StabilityReport report;
    report.coupling_rate = net.diffusion.d().maxCoeff() * net.laplacian.lambda_max();
    report.lipschitz =
        net.lipschitz_hint > 0.0 ? net.lipschitz_hint : sampled_lipschitz(net.node);
    report.dt_max = kRk4RealAxisExtent / (report.coupling_rate + report.lipschitz);
    report.ok = dt <= report.dt_max;
    return report;
}

IntegrationResult integrate(const NetworkSystem& net, const Vector& u0, double t_end,
                            double dt, int output_stride) {
    require_in_domain(net, u0, "initial state");
    const StabilityReport stability = stability_bound(net, dt);
    if (!stability.ok) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds the stability bound dt_max = " << stability.dt_max;
        throw std::invalid_argument(msg.str());
    }
    if (output_stride < 1) {
        throw std::invalid_argument("output stride must be >= 1");
    }

    const long steps = steps_for(t_end, dt);
    const RhsEvaluator rhs(net);
    Rk4Workspace ws(net.state_size());
    IntegrationResult result;
    Vector u = u0;
    result.times.push_back(0.0);
    result.states.push_back(u);
    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double step_dt = std::min(dt, t_end - t);
        rk4_step(rhs, u, t, step_dt, ws);
        require_finite(u, t + step_dt);
        result.clamps += clamp_to_domain(net.node.domain, net.laplacian.nodes(), u);
        if ((step + 1) % output_stride == 0 || step + 1 == steps) {
            result.times.push_back(std::min(t_end, static_cast<double>(step + 1) * dt));
            result.states.push_back(u);
        }
    }
    return result;
}

TrajectoryLog pair_divergence(const NetworkSystem& net, const Vector& u0, const Vector& v0,
                              double t_end, double dt, const AnyWeight& weight,
                              const PairDivergenceOptions& options) {
    require_in_domain(net, u0, "initial state u0");
    require_in_domain(net, v0, "initial state v0");
    const StabilityReport stability = stability_bound(net, dt);
    if (!stability.ok) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds the stability bound dt_max = " << stability.dt_max;
        throw std::invalid_argument(msg.str());
    }
    if (options.output_stride < 1) {
        throw std::invalid_argument("output stride must be >= 1");
    }

    const Weight* full_weight = std::get_if<Weight>(&weight);
    const bool log_phi = options.p == NormOrder::two && full_weight != nullptr;
    const double scale = scale_factor(options.p, options.grid_spacing);
    const int dim = net.node.dim;
    const int nodes = net.laplacian.nodes();

    TrajectoryLog log;
    log.p = options.p;
    log.grid_spacing = options.grid_spacing;

    auto record = [&](double t, const Vector& u, const Vector& v, long clamps) {
        const Vector w = u - v;
        log.times.push_back(t);
        log.norms.push_back(scale * network_norm(w, dim, options.p, weight));
        if (log_phi) {
            double quad = 0.0;
            for (int i = 0; i < nodes; ++i) {
                const auto block = w.segment(i * dim, dim);
                quad += block.dot(full_weight->q().data() * block);
            }
            log.phi.push_back(0.5 * scale * scale * quad);
        }
        log.clamps.push_back(clamps);
        if (options.store_states) {
            log.u_states.push_back(u);
            log.v_states.push_back(v);
        }
    };

    const long steps = steps_for(t_end, dt);
    const RhsEvaluator rhs(net);
    Rk4Workspace ws(net.state_size());
    Vector u = u0;
    Vector v = v0;
    long clamps = 0;
    record(0.0, u, v, clamps);
    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double step_dt = std::min(dt, t_end - t);
        rk4_step(rhs, u, t, step_dt, ws);
        rk4_step(rhs, v, t, step_dt, ws);
        require_finite(u, t + step_dt);
        require_finite(v, t + step_dt);
        clamps += clamp_to_domain(net.node.domain, nodes, u);
        clamps += clamp_to_domain(net.node.domain, nodes, v);
        if ((step + 1) % options.output_stride == 0 || step + 1 == steps) {
            record(std::min(t_end, static_cast<double>(step + 1) * dt), u, v, clamps);
        }
    }
    if (!options.store_states) {
        log.u_states = {u0, u};
        log.v_states = {v0, v};
    }

    bool all_positive = true;
    for (double n : log.norms) {
        if (!(n > 0.0)) {
            all_positive = false;
            break;
        }
    }
    if (all_positive && log.times.size() >= 2) {
        log.fitted_rate = fit_decay_rate(log, log.times.front(), log.times.back());
    }
    return log;
}

double fit_decay_rate(const TrajectoryLog& log, double t_begin, double t_end) {
    double sum_t = 0.0;
    double sum_y = 0.0;
    double sum_tt = 0.0;
    double sum_ty = 0.0;
    long n = 0;
    for (std::size_t k = 0; k < log.times.size(); ++k) {
        const double t = log.times[k];
        if (t < t_begin || t > t_end) {
            continue;
        }
        if (!(log.norms[k] > 0.0)) {
            std::ostringstream msg;
            msg << "cannot fit a decay rate: norm is not positive at t = " << t
                << " (shrink the window)";
            throw std::invalid_argument(msg.str());
        }
        const double y = std::log(log.norms[k]);
        sum_t += t;
        sum_y += y;
        sum_tt += t * t;
        sum_ty += t * y;
        ++n;
    }
    if (n < 2) {
        throw std::invalid_argument("decay-rate window contains fewer than two samples");
    }
    const double denom = static_cast<double>(n) * sum_tt - sum_t * sum_t;
    if (denom == 0.0) {
        throw std::invalid_argument("decay-rate window has no time spread");
    }
    return (static_cast<double>(n) * sum_ty - sum_t * sum_y) / denom;
}

PhiReport phi_monitor(const TrajectoryLog& log, double mu, double dt) {
    if (log.phi.size() != log.times.size()) {
        throw std::invalid_argument(
            "phi monitor requires a trajectory logged at p = 2 with a full weight");
    }
    const double tol_step = 1e-6 + 100.0 * dt * dt * dt * dt;
    PhiReport report;
    report.pass = true;
    report.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < log.times.size(); ++k) {
        const double gap = log.times[k + 1] - log.times[k];
        const double budget = log.phi[k] * std::exp(2.0 * mu * gap) * (1.0 + tol_step);
        const double margin = budget > 0.0 ? log.phi[k + 1] / budget - 1.0
                                           : (log.phi[k + 1] > 0.0 ? 1.0 : -1.0);
        if (margin > report.worst_margin) {
            report.worst_margin = margin;
            report.worst_time = log.times[k + 1];
        }
        if (log.phi[k + 1] > budget) {
            report.pass = false;
        }
    }
    return report;
}

void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out) {
    out << "t,norm,phi,clamps\n";
    for (std::size_t k = 0; k < log.times.size(); ++k) {
        out << format_g17(log.times[k]) << ',' << format_g17(log.norms[k]) << ',';
        if (k < log.phi.size()) {
            out << format_g17(log.phi[k]);
        } else {
            out << "nan";
        }
        out << ',' << log.clamps[k] << '\n';
    }
}

nlohmann::json trajectory_to_json(const TrajectoryLog& log, bool include_states) {
    nlohmann::json j{
        {"kind", "trajectory_log"},
        {"times", log.times},
        {"norms", log.norms},
        {"phi", log.phi},
        {"clamps", log.clamps},
        {"fitted_rate", log.fitted_rate},
        {"norm_order",
         log.p == NormOrder::one ? "1" : (log.p == NormOrder::two ? "2" : "inf")},
        {"grid_spacing", log.grid_spacing},
    };
    if (include_states) {
        auto states_json = [](const std::vector<Vector>& states) {
            nlohmann::json out = nlohmann::json::array();
            for (const Vector& s : states) {
                out.push_back(std::vector<double>(s.data(), s.data() + s.size()));
            }
            return out;
        };
        j["u_states"] = states_json(log.u_states);
        j["v_states"] = states_json(log.v_states);
    }
    return j;
}

}  // namespace contractionkit
