#include "contractionkit/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace contractionkit {

namespace {

constexpr double kDefaultUnboundedWindow = 100.0;

Matrix pd_inverse_sqrt(const SymMatrix& q) {
    const EigResult eig = sym_eig(q);
    if (eig.eigenvalues(0) <= 0.0) {
        std::ostringstream msg;
        msg << "matrix must be positive definite, lambda_min = " << eig.eigenvalues(0);
        throw std::invalid_argument(msg.str());
    }
    const Vector inv_roots = eig.eigenvalues.cwiseSqrt().cwiseInverse();
    return eig.eigenvectors * inv_roots.asDiagonal() * eig.eigenvectors.transpose();
}

std::int64_t total_samples(const SweepSpec& spec) {
    std::int64_t total = 1;
    for (int c : spec.counts) {
        total *= c;
    }
    return total;
}

Vector lattice_point(const std::vector<Interval>& axes, const SweepSpec& spec,
                     std::int64_t index) {
    const int dim = static_cast<int>(axes.size());
    Vector x(dim);
    std::int64_t rest = index;
    for (int axis = dim - 1; axis >= 0; --axis) {
        const std::int64_t count = spec.counts[axis];
        const std::int64_t i = rest % count;
        rest /= count;
        const Interval& iv = axes[axis];
        x(axis) = iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) /
                              static_cast<double>(count - 1);
    }
    return x;
}

Vector random_point(const std::vector<Interval>& axes, const SweepSpec& spec,
                    std::int64_t index) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(index));
    Vector x(axes.size());
    for (std::size_t axis = 0; axis < axes.size(); ++axis) {
        x(static_cast<int>(axis)) = rng.uniform(axes[axis].lo, axes[axis].hi);
    }
    return x;
}

struct BestSample {
    double value = -std::numeric_limits<double>::infinity();
    std::int64_t index = -1;
};

// Order-independent merge: larger value wins, ties go to the smaller index, so the
// result does not depend on how samples were partitioned across workers.
void merge_best(BestSample& into, const BestSample& other) {
    if (other.value > into.value ||
        (other.value == into.value && other.index >= 0 &&
         (into.index < 0 || other.index < into.index))) {
        into = other;
    }
}

template <class Evaluate>
BestSample sweep_max(std::int64_t total, int jobs, Evaluate&& evaluate) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || total < 2 * jobs) {
        BestSample best;
        for (std::int64_t k = 0; k < total; ++k) {
            merge_best(best, BestSample{evaluate(k), k});
        }
        return best;
    }
    std::vector<BestSample> partial(static_cast<std::size_t>(jobs));
    std::vector<std::thread> workers;
    const std::int64_t chunk = (total + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            const std::int64_t begin = w * chunk;
            const std::int64_t end = std::min(total, begin + chunk);
            BestSample best;
            for (std::int64_t k = begin; k < end; ++k) {
                merge_best(best, BestSample{evaluate(k), k});
            }
            partial[static_cast<std::size_t>(w)] = best;
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    BestSample best;
    for (const BestSample& b : partial) {
        merge_best(best, b);
    }
    return best;
}

template <class Measure>
SupMuResult sup_over_domain(const ReactionSystem& sys, const SweepSpec& spec, int jobs,
                            Measure&& measure) {
    const std::vector<Interval> axes = resolve_sweep_axes(sys.domain, spec);
    const std::int64_t total = total_samples(spec);
    auto point_at = [&](std::int64_t k) {
        return spec.mode == SweepSpec::Mode::lattice ? lattice_point(axes, spec, k)
                                                     : random_point(axes, spec, k);
    };
    const BestSample best = sweep_max(total, jobs, [&](std::int64_t k) {
        return measure(sys.jacobian(point_at(k), 0.0));
    });
    return SupMuResult{best.value, point_at(best.index)};
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

}  // namespace

SweepSpec SweepSpec::lattice(std::vector<int> counts, std::vector<Interval> windows) {
    SweepSpec spec;
    spec.counts = std::move(counts);
    spec.windows.reserve(windows.size());
    for (const Interval& w : windows) {
        spec.windows.emplace_back(w);
    }
    return spec;
}

std::vector<Interval> resolve_sweep_axes(const Box& domain, const SweepSpec& spec) {
    if (static_cast<int>(spec.counts.size()) != domain.dim()) {
        std::ostringstream msg;
        msg << "sweep spec has " << spec.counts.size() << " axes, domain has "
            << domain.dim();
        throw std::invalid_argument(msg.str());
    }
    if (!spec.windows.empty() &&
        static_cast<int>(spec.windows.size()) != domain.dim()) {
        throw std::invalid_argument("sweep windows must be absent or one per coordinate");
    }
    std::vector<Interval> axes;
    axes.reserve(spec.counts.size());
    for (int i = 0; i < domain.dim(); ++i) {
        if (spec.counts[i] < 2) {
            std::ostringstream msg;
            msg << "sweep needs at least 2 samples per coordinate, axis " << i << " has "
                << spec.counts[i];
            throw std::invalid_argument(msg.str());
        }
        const Interval& v = domain.bounds[i];
        Interval axis;
        if (!spec.windows.empty() && spec.windows[i].has_value()) {
            axis = *spec.windows[i];
            if (axis.lo < v.lo || axis.hi > v.hi || !(axis.hi > axis.lo)) {
                std::ostringstream msg;
                msg << "sweep window [" << axis.lo << ", " << axis.hi
                    << "] is not a proper subinterval of the domain on axis " << i;
                throw std::invalid_argument(msg.str());
            }
        } else if (v.bounded()) {
            axis = v;
        } else if (std::isfinite(v.lo)) {
            axis = Interval{v.lo, v.lo + kDefaultUnboundedWindow};
        } else {
            const double half = kDefaultUnboundedWindow / 10.0;
            axis = Interval{std::isfinite(v.hi) ? v.hi - kDefaultUnboundedWindow : -half,
                            std::isfinite(v.hi) ? v.hi : half};
        }
        axes.push_back(axis);
    }
    return axes;
}

double lyapunov_residual(const Matrix& a, const SymMatrix& q, double mu) {
    if (a.rows() != a.cols() || a.rows() != q.dim()) {
        throw std::invalid_argument("lyapunov_residual shape mismatch");
    }
    const Matrix p_inv_sqrt = pd_inverse_sqrt(q);
    const Matrix m = q.data() * a + a.transpose() * q.data() - 2.0 * mu * q.data();
    const EigResult eig = sym_eig(symmetric_part(p_inv_sqrt * m * p_inv_sqrt));
    return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

double mu_from_lyapunov(const Matrix& a, const SymMatrix& q) {
    return mu2_weighted(a, Weight::from_p(sqrt_pd(q)));
}

RemarkConstants remark_convert(const SymMatrix& q, double mu) {
    const EigResult eig = sym_eig(q);
    const double lambda_min = eig.eigenvalues(0);
    const double lambda_max = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (lambda_min <= 0.0) {
        std::ostringstream msg;
        msg << "remark_convert requires Q > 0, lambda_min = " << lambda_min;
        throw std::invalid_argument(msg.str());
    }
    RemarkConstants out;
    out.beta = mu <= 0.0 ? mu * lambda_min : mu * lambda_max;
    out.gamma = out.beta <= 0.0 ? out.beta / lambda_max : out.beta / lambda_min;
    return out;
}

PdResult check_diffusion_compat(const Weight& w, const DiffusionSpec& d) {
    if (w.dim() != d.dim()) {
        std::ostringstream msg;
        msg << "diffusion dimension " << d.dim() << " does not match weight dimension "
            << w.dim();
        throw std::invalid_argument(msg.str());
    }
    const Matrix qd = w.q().data() * d.as_matrix();
    const SymMatrix coupling{Matrix(qd + qd.transpose())};
    return is_positive_definite(coupling, default_pd_tol(coupling));
}

SupMuResult sup_mu_over_domain(const ReactionSystem& sys, const Weight& w,
                               const SweepSpec& spec, int jobs) {
    return sup_over_domain(sys, spec, jobs,
                           [&](const Matrix& j) { return mu2_weighted(j, w); });
}

SupMuResult sup_mu_over_domain(const ReactionSystem& sys, const DiagWeight& q, NormOrder p,
                               const SweepSpec& spec, int jobs) {
    switch (p) {
        case NormOrder::one:
            return sup_over_domain(sys, spec, jobs,
                                   [&](const Matrix& j) { return mu1_weighted(j, q); });
        case NormOrder::inf:
            return sup_over_domain(sys, spec, jobs,
                                   [&](const Matrix& j) { return muinf_weighted(j, q); });
        case NormOrder::two:
            return sup_over_domain(sys, spec, jobs, [&](const Matrix& j) {
                return mu2_weighted(j, Weight::from_q(SymMatrix::from_diag(q.diag())));
            });
    }
    throw std::logic_error("unreachable norm order");
}

ContractionCertificate certify_contraction(const ReactionSystem& sys, const Weight& w,
                                           const DiffusionSpec& d, const SweepSpec& spec,
                                           int jobs) {
    const SupMuResult sup = sup_mu_over_domain(sys, w, spec, jobs);
    const PdResult compat = check_diffusion_compat(w, d);
    ContractionCertificate cert{sys.label, w,   d,     sup.mu_sup, sup.argmax_point,
                                compat.positive_definite, compat.lambda_min, spec,
                                sup.mu_sup < 0.0 && compat.positive_definite};
    return cert;
}

nlohmann::json certificate_to_json(const ContractionCertificate& cert) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : cert.sweep.windows) {
        if (w.has_value()) {
            windows.push_back({w->lo, w->hi});
        } else {
            windows.push_back(nullptr);
        }
    }
    return nlohmann::json{
        {"kind", "contraction_certificate"},
        {"system", cert.system_label},
        {"weight",
         {{"P", matrix_to_json(cert.weight.p().data())},
          {"Q", matrix_to_json(cert.weight.q().data())}}},
        {"diffusion", vector_to_json(cert.diffusion.d())},
        {"mu_sup", cert.mu_sup},
        {"argmax_point", vector_to_json(cert.argmax_point)},
        {"diffusion_ok", cert.diffusion_ok},
        {"diffusion_lambda_min", cert.diffusion_lambda_min},
        {"sweep",
         {{"mode", cert.sweep.mode == SweepSpec::Mode::lattice ? "lattice" : "random"},
          {"counts", cert.sweep.counts},
          {"windows", windows},
          {"seed", cert.sweep.seed}}},
        {"verdict", cert.pass ? "pass" : "fail"},
        {"caveat", "sampled sup is a lower bound on the true sup over the domain"},
    };
}

Weight example1_weight(double delta, double k1, double margin) {
    if (!(delta > 0.0) || !(k1 > 0.0)) {
        throw std::invalid_argument("example1 weight requires delta > 0 and k1 > 0");
    }
    if (!(margin > 0.0)) {
        std::ostringstream msg;
        msg << "example1 weight margin must be positive, got " << margin;
        throw std::invalid_argument(msg.str());
    }
    const double q = 1.0 + delta / (4.0 * k1) + margin;
    Matrix m(2, 2);
    m << 1.0, 1.0, 1.0, q;
    return Weight::from_q(SymMatrix(m));
}

double example1_det(double q, double delta, double a, double b) {
    const double cross = -delta + (q - 1.0) * a;
    return 4.0 * delta * b * (q - 1.0) - cross * cross;
}

LemmaConditionReport check_lemma_conditions(const ReactionSystem& sys, double lambda,
                                            double mu, const SweepSpec& spec,
                                            double divergence_threshold) {
    if (!sys.feedback.has_value()) {
        throw std::invalid_argument(
            "check_lemma_conditions requires a system exposing the feedback decomposition");
    }
    if (!(lambda > 0.0) || !(mu > 0.0)) {
        throw std::invalid_argument("check_lemma_conditions requires lambda > 0 and mu > 0");
    }
    const FeedbackParts& f = *sys.feedback;
    const std::vector<Interval> axes = resolve_sweep_axes(sys.domain, spec);

    LemmaConditionReport report;

    auto scan_axis = [&](int axis, auto&& margin_fn, ConditionWitness& worst) {
        const int count = spec.counts[axis];
        worst.margin = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            const double v = axes[axis].lo + (axes[axis].hi - axes[axis].lo) *
                                                 static_cast<double>(i) /
                                                 static_cast<double>(count - 1);
            const double margin = margin_fn(v);
            if (margin > worst.margin) {
                worst.margin = margin;
                worst.point = Vector::Constant(1, v);
            }
        }
        return worst.margin < -mu;
    };

    report.condition1 = scan_axis(
        0, [&](double x) { return -f.df1(x) + lambda * std::abs(f.df2(x)); }, report.worst1);
    report.condition2 = scan_axis(
        1, [&](double y) { return -f.dg2(y) + std::abs(f.dg1(y)) / lambda; }, report.worst2);

    report.condition3 = true;
    const double decades[] = {1e2, 1e3, 1e4};
    for (int p0 = -10; p0 <= 10 && report.condition3; ++p0) {
        double ratios[3];
        for (int k = 0; k < 3; ++k) {
            const double y = decades[k];
            const double g2p = f.dg2(y);
            const double num = f.dg1(y) - static_cast<double>(p0) * g2p;
            ratios[k] = num * num / g2p;
        }
        const bool increasing = ratios[0] < ratios[1] && ratios[1] < ratios[2];
        if (!increasing || ratios[2] <= divergence_threshold) {
            report.condition3 = false;
            ConditionWitness witness;
            witness.p0 = static_cast<double>(p0);
            witness.margin = ratios[2];
            witness.point = Vector::Constant(1, decades[2]);
            report.violation3 = witness;
        }
    }
    return report;
}

std::optional<IndefinitePoint> find_indefinite_point(const ReactionSystem& sys,
                                                     const SymMatrix& p,
                                                     const SweepSpec& search) {
    if (sys.dim != 2) {
        throw std::invalid_argument("find_indefinite_point requires a 2-state system");
    }
    if (search.counts.size() != 2) {
        throw std::invalid_argument("find_indefinite_point needs a 2-axis sweep spec");
    }
    const Weight w = Weight::from_p(sqrt_pd(p));

    const Interval& x_bound = sys.domain.bounds[0];
    const double x0 = x_bound.bounded() ? x_bound.lo + 0.1 * (x_bound.hi - x_bound.lo)
                                        : (std::isfinite(x_bound.lo) ? x_bound.lo + 0.1 : 0.1);

    const Interval& y_bound = sys.domain.bounds[1];
    double y_hi = 1e4;
    if (!search.windows.empty() && search.windows[1].has_value()) {
        y_hi = search.windows[1]->hi;
    }
    const double y_lo = std::max(y_bound.lo + 0.01, 0.01);
    if (!(y_hi > y_lo)) {
        throw std::invalid_argument("indefinite-point scan window is empty");
    }
    const int count = std::max(2, search.counts[1]);

    Vector state(2);
    state(0) = x0;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        state(1) = y_lo * std::pow(y_hi / y_lo, t);
        const double mu = mu2_weighted(sys.jacobian(state, 0.0), w);
        if (mu >= 0.0) {
            return IndefinitePoint{state, mu};
        }
    }
    return std::nullopt;
}

}  // namespace contractionkit
