#pragma once

#include "contractionkit/matrix_core.hpp"
#include "contractionkit/rng.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace contractionkit {

/// Closed interval; hi may be +inf (and lo -inf for all-of-R coordinates).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
    [[nodiscard]] bool bounded() const;
};

/// Box domain V: per-coordinate closed intervals.
struct Box {
    std::vector<Interval> bounds;

    [[nodiscard]] int dim() const { return static_cast<int>(bounds.size()); }
    [[nodiscard]] bool contains(const Vector& x) const;

    /// Draw an interior point. Coordinates with an infinite upper bound are sampled
    /// log-uniformly on [lo + 0.01, lo + unbounded_window]; two-sided unbounded
    /// coordinates uniformly on [-unbounded_window/10, unbounded_window/10]; bounded
    /// coordinates uniformly with a 1% relative margin off each face.
    [[nodiscard]] Vector sample_interior(Rng& rng, double unbounded_window = 100.0) const;
};

/// The f/g decomposition of the two-variable feedback systems
///     x' = -f1(x) + g1(y),  y' = f2(x) - g2(y),
/// together with the derivatives the measure conditions are stated in.
struct FeedbackParts {
    std::function<double(double)> f1, g1, f2, g2;
    std::function<double(double)> df1, dg1, df2, dg2;
};

/// A reaction vector field on a box domain with its analytic Jacobian.
struct ReactionSystem {
    std::string label;
    int dim = 0;
    Box domain;
    std::map<std::string, double> params;
    std::function<Vector(const Vector&, double)> rhs;
    std::function<Matrix(const Vector&, double)> jacobian;
    bool time_varying = false;
    std::optional<FeedbackParts> feedback;
};

/// Positive diagonal diffusion matrix D = diag(d_1, ..., d_n).
class DiffusionSpec {
public:
    explicit DiffusionSpec(Vector d);

    [[nodiscard]] const Vector& d() const { return d_; }
    [[nodiscard]] int dim() const { return static_cast<int>(d_.size()); }
    [[nodiscard]] Matrix as_matrix() const { return Matrix(d_.asDiagonal()); }

private:
    Vector d_;
};

/// Two-species binding model on V = [0, inf) x [0, S_Y]:
///     x' = z - delta*x + k1*y - k2*(S_Y - y)*x
///     y' =           - k1*y + k2*(S_Y - y)*x
/// Jacobian [[-delta - a, b], [a, -b]] with a = k2*(S_Y - y), b = k1 + k2*x.
/// All five parameters must be positive. z is an additive constant; it does not enter
/// the Jacobian, so certificates are insensitive to it (asserted in tests).
[[nodiscard]] ReactionSystem example1(double s_y, double k1, double k2, double delta, double z);

/// Feedback system on V = [0, inf)^2:
///     x' = -x + y^(2+eps)
///     y' = delta*x - (y^3 + y^(2+eps) + d*y)
/// with 0 < delta < 1, 0 < eps <= 0.5, d > 0. Exposes the (f1, g1, f2, g2)
/// decomposition used by the measure-comparison conditions. The nonlinearity is
/// extended continuously below y = 0 (clamped powers) so integrators may poke
/// marginally outside V without producing NaNs.
[[nodiscard]] ReactionSystem example2(double delta, double eps, double d);

/// F(x) = A x + c on V = R^n; calibration system with closed-form flows.
[[nodiscard]] ReactionSystem linear_system(const Matrix& a, const Vector& c);

struct JacobianValidation {
    double max_rel_dev = 0.0;
    Vector worst_point;
    int worst_row = 0;
    int worst_col = 0;
    int samples = 0;
    bool pass = false;
};

/// Compare the analytic Jacobian against central differences (h = 1e-6) at seeded
/// interior points; passes iff the worst relative deviation is <= 5e-5.
[[nodiscard]] JacobianValidation validate_jacobian(const ReactionSystem& sys, int samples,
                                                   std::uint64_t seed,
                                                   double unbounded_window = 100.0);

}  // namespace contractionkit
