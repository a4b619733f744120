#pragma once

#include "contractionkit/certificates.hpp"
#include "contractionkit/lognorm.hpp"
#include "contractionkit/models.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <utility>
#include <vector>

namespace contractionkit {

/// Symmetric coupling matrix with zero row sums and nonnegative spectrum; the diffusive
/// interconnection of the network model u' = F~(u) - (L kron D) u.
class Laplacian {
public:
    explicit Laplacian(SymMatrix entries);

    [[nodiscard]] int nodes() const { return matrix_.dim(); }
    [[nodiscard]] const SymMatrix& matrix() const { return matrix_; }
    [[nodiscard]] double lambda_max() const { return lambda_max_; }

private:
    SymMatrix matrix_;
    double lambda_max_ = 0.0;
};

/// Uniform 1D grid with no-flux boundaries, realized by ghost-cell reflection:
/// h = length / (nodes - 1) and L = (1/h^2) * path-graph Laplacian. Returns (L, h).
[[nodiscard]] std::pair<Laplacian, double> neumann_laplacian_1d(int nodes, double length);

/// L = degree - adjacency for a symmetric, nonnegative, zero-diagonal adjacency matrix.
[[nodiscard]] Laplacian graph_laplacian(const Matrix& adjacency);

struct NetworkSystem {
    ReactionSystem node;
    DiffusionSpec diffusion;
    Laplacian laplacian;
    /// Lipschitz estimate of F used by the step-size gate; 0 means "sample it".
    double lipschitz_hint = 0.0;

    [[nodiscard]] int state_size() const { return node.dim * laplacian.nodes(); }
};

struct StabilityReport {
    bool ok = false;
    double dt_max = 0.0;
    double coupling_rate = 0.0;  // max_i d_i * lambda_max(L)
    double lipschitz = 0.0;
};

/// dt_max = 2.5 / (max_i d_i * lambda_max(L) + L_F); 2.5 is the real-axis stability
/// extent of the classical order-4 one-step method. L_F comes from lipschitz_hint or a
/// seeded sample of ||J_F||_2 over the domain.
[[nodiscard]] StabilityReport stability_bound(const NetworkSystem& net, double dt);

struct IntegrationResult {
    std::vector<double> times;
    std::vector<Vector> states;
    long clamps = 0;
};

/// Classical 4th-order fixed-step integration of the stacked system. The coupling is
/// applied blockwise (d_i-scaled L acting on coordinate slices); L kron D is never
/// materialized. States leaving V are projected to the boundary and counted. Rejects
/// dt above the stability gate; aborts (with the failure time) on non-finite states.
[[nodiscard]] IntegrationResult integrate(const NetworkSystem& net, const Vector& u0,
                                          double t_end, double dt, int output_stride = 1);

struct TrajectoryLog {
    std::vector<double> times;
    std::vector<Vector> u_states;  // only first/last snapshot unless store_states
    std::vector<Vector> v_states;
    std::vector<double> norms;
    std::vector<double> phi;       // empty unless p = 2 with a full weight
    std::vector<long> clamps;      // cumulative over both trajectories
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    NormOrder p = NormOrder::two;
    double grid_spacing = 0.0;     // 0 => network mode (unscaled norms)
};

struct PairDivergenceOptions {
    NormOrder p = NormOrder::two;
    int output_stride = 1;
    /// Positive for PDE mode: norms are scaled by h^(1/p) so refinement converges to
    /// the integral norm; 0 keeps the plain network norm.
    double grid_spacing = 0.0;
    bool store_states = false;
};

/// Integrate two trajectories with identical steps and log the weighted norm of their
/// difference, the quadratic functional Phi = 0.5 w^T (I kron Q) w (p = 2 with a full
/// weight only), cumulative clamp counts, and the fitted decay rate.
[[nodiscard]] TrajectoryLog pair_divergence(const NetworkSystem& net, const Vector& u0,
                                            const Vector& v0, double t_end, double dt,
                                            const AnyWeight& weight,
                                            const PairDivergenceOptions& options = {});

/// Least-squares slope of ln(norms) vs t over [t_begin, t_end]. Rejects windows that
/// contain a non-positive norm (shrink the window).
[[nodiscard]] double fit_decay_rate(const TrajectoryLog& log, double t_begin, double t_end);

struct PhiReport {
    bool pass = false;
    double worst_margin = 0.0;
    double worst_time = 0.0;
};

/// Check the discrete form of dPhi/dt <= 2 mu Phi between consecutive samples:
/// Phi(t_{k+1}) <= Phi(t_k) * exp(2 mu (t_{k+1} - t_k)) * (1 + tol), where tol absorbs
/// integrator truncation (1e-6 plus an O(dt^4) allowance).
[[nodiscard]] PhiReport phi_monitor(const TrajectoryLog& log, double mu, double dt);

/// CSV with columns t, norm, phi, clamps; reals printed with 17 significant digits so
/// identical runs are byte-identical.
void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out);

[[nodiscard]] nlohmann::json trajectory_to_json(const TrajectoryLog& log,
                                                bool include_states = false);

}  // namespace contractionkit
