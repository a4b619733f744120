#include "contractionkit/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace contractionkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-6;
constexpr double kFdTol = 5e-5;

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        std::ostringstream msg;
        msg << name << " must be positive, got " << value;
        throw std::invalid_argument(msg.str());
    }
}

// Power that is zero below the domain floor; keeps y^(2+eps) finite when a trajectory
// overshoots y = 0 by a rounding margin.
double pos_pow(double y, double e) {
    return y > 0.0 ? std::pow(y, e) : 0.0;
}

}  // namespace

bool Interval::bounded() const {
    return std::isfinite(lo) && std::isfinite(hi);
}

bool Box::contains(const Vector& x) const {
    if (x.size() != dim()) {
        return false;
    }
    for (int i = 0; i < dim(); ++i) {
        if (!bounds[i].contains(x(i))) {
            return false;
        }
    }
    return true;
}

Vector Box::sample_interior(Rng& rng, double unbounded_window) const {
    Vector x(dim());
    for (int i = 0; i < dim(); ++i) {
        const Interval& iv = bounds[i];
        if (iv.bounded()) {
            const double margin = 0.01 * (iv.hi - iv.lo);
            x(i) = rng.uniform(iv.lo + margin, iv.hi - margin);
        } else if (std::isfinite(iv.lo)) {
            x(i) = rng.log_uniform(iv.lo + 0.01, iv.lo + unbounded_window);
        } else if (std::isfinite(iv.hi)) {
            x(i) = iv.hi - rng.log_uniform(0.01, unbounded_window);
        } else {
            const double half = unbounded_window / 10.0;
            x(i) = rng.uniform(-half, half);
        }
    }
    return x;
}

DiffusionSpec::DiffusionSpec(Vector d) : d_(std::move(d)) {
    if (d_.size() < 1) {
        throw std::invalid_argument("diffusion spec must have length >= 1");
    }
    for (int i = 0; i < d_.size(); ++i) {
        if (!(d_(i) > 0.0)) {
            std::ostringstream msg;
            msg << "diffusion coefficients must be positive, d[" << i << "] = " << d_(i);
            throw std::invalid_argument(msg.str());
        }
    }
}

ReactionSystem example1(double s_y, double k1, double k2, double delta, double z) {
    require_positive(s_y, "S_Y");
    require_positive(k1, "k1");
    require_positive(k2, "k2");
    require_positive(delta, "delta");
    require_positive(z, "z");

    ReactionSystem sys;
    sys.label = "example1";
    sys.dim = 2;
    sys.domain.bounds = {Interval{0.0, kInf}, Interval{0.0, s_y}};
    sys.params = {{"S_Y", s_y}, {"k1", k1}, {"k2", k2}, {"delta", delta}, {"z", z}};
    sys.rhs = [=](const Vector& u, double) {
        const double x = u(0);
        const double y = u(1);
        const double bind = k2 * (s_y - y) * x;
        Vector f(2);
        f(0) = z - delta * x + k1 * y - bind;
        f(1) = -k1 * y + bind;
        return f;
    };
    sys.jacobian = [=](const Vector& u, double) {
        const double a = k2 * (s_y - u(1));
        const double b = k1 + k2 * u(0);
        Matrix j(2, 2);
        j << -delta - a, b, a, -b;
        return j;
    };
    return sys;
}

ReactionSystem example2(double delta, double eps, double d) {
    if (!(delta > 0.0 && delta < 1.0)) {
        std::ostringstream msg;
        msg << "example2 requires 0 < delta < 1, got " << delta;
        throw std::invalid_argument(msg.str());
    }
    if (!(eps > 0.0 && eps <= 0.5)) {
        std::ostringstream msg;
        msg << "example2 requires 0 < eps <= 0.5, got " << eps;
        throw std::invalid_argument(msg.str());
    }
    require_positive(d, "d");

    ReactionSystem sys;
    sys.label = "example2";
    sys.dim = 2;
    sys.domain.bounds = {Interval{0.0, kInf}, Interval{0.0, kInf}};
    sys.params = {{"delta", delta}, {"eps", eps}, {"d", d}};
    sys.rhs = [=](const Vector& u, double) {
        const double x = u(0);
        const double y = u(1);
        const double gain = pos_pow(y, 2.0 + eps);
        Vector f(2);
        f(0) = -x + gain;
        f(1) = delta * x - (y * y * y + gain + d * y);
        return f;
    };
    sys.jacobian = [=](const Vector& u, double) {
        const double y = u(1);
        const double dgain = (2.0 + eps) * pos_pow(y, 1.0 + eps);
        Matrix j(2, 2);
        j << -1.0, dgain, delta, -(3.0 * y * y + dgain + d);
        return j;
    };
    sys.feedback = FeedbackParts{
        [](double x) { return x; },
        [=](double y) { return pos_pow(y, 2.0 + eps); },
        [=](double x) { return delta * x; },
        [=](double y) { return y * y * y + pos_pow(y, 2.0 + eps) + d * y; },
        [](double) { return 1.0; },
        [=](double y) { return (2.0 + eps) * pos_pow(y, 1.0 + eps); },
        [=](double) { return delta; },
        [=](double y) { return 3.0 * y * y + (2.0 + eps) * pos_pow(y, 1.0 + eps) + d; },
    };
    return sys;
}

ReactionSystem linear_system(const Matrix& a, const Vector& c) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("linear system matrix must be square");
    }
    if (c.size() != a.rows()) {
        std::ostringstream msg;
        msg << "linear system offset length " << c.size() << " does not match matrix dim "
            << a.rows();
        throw std::invalid_argument(msg.str());
    }

    ReactionSystem sys;
    sys.label = "linear";
    sys.dim = static_cast<int>(a.rows());
    sys.domain.bounds.assign(sys.dim, Interval{-kInf, kInf});
    sys.rhs = [a, c](const Vector& x, double) -> Vector { return a * x + c; };
    sys.jacobian = [a](const Vector&, double) { return a; };
    return sys;
}

JacobianValidation validate_jacobian(const ReactionSystem& sys, int samples,
                                     std::uint64_t seed, double unbounded_window) {
    if (samples < 1) {
        throw std::invalid_argument("validate_jacobian requires at least one sample");
    }
    JacobianValidation report;
    report.samples = samples;
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        const Vector x = sys.domain.sample_interior(rng, unbounded_window);
        const Matrix analytic = sys.jacobian(x, 0.0);
        Matrix fd(sys.dim, sys.dim);
        for (int j = 0; j < sys.dim; ++j) {
            Vector hi = x;
            Vector lo = x;
            hi(j) += kFdStep;
            lo(j) -= kFdStep;
            fd.col(j) = (sys.rhs(hi, 0.0) - sys.rhs(lo, 0.0)) / (2.0 * kFdStep);
        }
        const double scale = std::max(1.0, max_abs(analytic));
        for (int i = 0; i < sys.dim; ++i) {
            for (int j = 0; j < sys.dim; ++j) {
                const double dev = std::abs(fd(i, j) - analytic(i, j)) / scale;
                if (dev > report.max_rel_dev) {
                    report.max_rel_dev = dev;
                    report.worst_point = x;
                    report.worst_row = i;
                    report.worst_col = j;
                }
            }
        }
    }
    report.pass = report.max_rel_dev <= kFdTol;
    return report;
}

}  // namespace contractionkit
