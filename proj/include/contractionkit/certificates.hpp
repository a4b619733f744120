#pragma once

#include "contractionkit/lognorm.hpp"
#include "contractionkit/models.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace contractionkit {

/// How a domain is sampled when taking a sup over V. Coordinates with no window
/// override use the full interval when bounded and [lo, lo + 100] when unbounded
/// above. Windows must lie inside V and every axis needs at least two samples.
struct SweepSpec {
    enum class Mode { lattice, random };

    std::vector<int> counts;
    std::vector<std::optional<Interval>> windows;
    std::uint64_t seed = 0;
    Mode mode = Mode::lattice;

    [[nodiscard]] static SweepSpec lattice(std::vector<int> counts,
                                           std::vector<Interval> windows);
};

/// Per-axis sampling ranges after applying defaults; validates the spec against V.
[[nodiscard]] std::vector<Interval> resolve_sweep_axes(const Box& domain,
                                                       const SweepSpec& spec);

/// lambda_max(P^-1 (QA + A^T Q - 2 mu Q) P^-1) with P = sqrt_pd(Q): the generalized
/// inequality QA + A^T Q <= 2 mu Q reduced by congruence to an ordinary symmetric
/// eigenproblem. Non-positive iff the Lyapunov inequality holds at rate mu.
[[nodiscard]] double lyapunov_residual(const Matrix& a, const SymMatrix& q, double mu);

/// The smallest mu for which lyapunov_residual(a, q, mu) <= 0, computed as
/// mu2_weighted(a, sqrt_pd(q)).
[[nodiscard]] double mu_from_lyapunov(const Matrix& a, const SymMatrix& q);

/// Constants transferring QA + A^T Q <= mu*Q to the identity-weighted and back:
///   beta  such that QA + A^T Q <= beta*I  (beta = mu * lambda_min(Q) when mu <= 0,
///         mu * lambda_max(Q) otherwise — the sign-correct multiplier),
///   gamma such that  <= beta*I implies <= gamma*Q (gamma = beta / lambda_max(Q) when
///         beta <= 0, beta / lambda_min(Q) otherwise).
struct RemarkConstants {
    double beta = 0.0;
    double gamma = 0.0;
};

[[nodiscard]] RemarkConstants remark_convert(const SymMatrix& q, double mu);

/// Positive definiteness of QD + DQ, the side condition coupling a non-diagonal weight
/// to the diffusion matrix.
[[nodiscard]] PdResult check_diffusion_compat(const Weight& w, const DiffusionSpec& d);

struct SupMuResult {
    double mu_sup = 0.0;
    Vector argmax_point;
};

/// Maximum of mu2_weighted(J_F(x), w) over the sampled domain with the maximizing
/// point. Deterministic for a fixed seed regardless of worker count (order-independent
/// max-reduction, ties broken by sample index).
[[nodiscard]] SupMuResult sup_mu_over_domain(const ReactionSystem& sys, const Weight& w,
                                             const SweepSpec& spec, int jobs = 1);

/// Same sweep for the diagonal measures, p in {1, inf}.
[[nodiscard]] SupMuResult sup_mu_over_domain(const ReactionSystem& sys, const DiagWeight& q,
                                             NormOrder p, const SweepSpec& spec,
                                             int jobs = 1);

struct ContractionCertificate {
    std::string system_label;
    Weight weight;
    DiffusionSpec diffusion;
    double mu_sup = 0.0;
    Vector argmax_point;
    bool diffusion_ok = false;
    double diffusion_lambda_min = 0.0;
    SweepSpec sweep;
    bool pass = false;
};

/// Bundle of the sup-mu sweep and the diffusion compatibility check; pass iff
/// mu_sup < 0 and QD + DQ > 0. The sampled sup is a lower bound on the true sup
/// (recorded as a caveat in the serialized document).
[[nodiscard]] ContractionCertificate certify_contraction(const ReactionSystem& sys,
                                                         const Weight& w,
                                                         const DiffusionSpec& d,
                                                         const SweepSpec& spec,
                                                         int jobs = 1);

[[nodiscard]] nlohmann::json certificate_to_json(const ContractionCertificate& cert);

/// The claim weight for example1: Q = [[1, 1], [1, q]] with q = 1 + delta/(4 k1) + margin,
/// strictly above the threshold. margin must be positive.
[[nodiscard]] Weight example1_weight(double delta, double k1, double margin);

/// The displayed determinant of QJ_F + J_F^T Q for example1's claim weight:
/// 4*delta*b*(q-1) - (-delta + (q-1)*a)^2.
[[nodiscard]] double example1_det(double q, double delta, double a, double b);

struct ConditionWitness {
    Vector point;      // for conditions 1-2: the worst sampled state
    double margin = 0.0;
    double p0 = 0.0;   // condition 3 only: the violating shift
};

struct LemmaConditionReport {
    bool condition1 = false;
    bool condition2 = false;
    bool condition3 = false;
    ConditionWitness worst1;
    ConditionWitness worst2;
    std::optional<ConditionWitness> violation3;

    [[nodiscard]] bool all() const { return condition1 && condition2 && condition3; }
};

/// Check the three conditions of the measure-comparison result on a system exposing the
/// feedback decomposition, for multipliers lambda > 0 and rate mu > 0:
///   1.  -f1'(x) + lambda*|f2'(x)| < -mu on the sweep (worst margin reported),
///   2.  -g2'(y) + (1/lambda)*|g1'(y)| < -mu on the sweep,
///   3.  the ratio (g1' - p0*g2')^2 / g2' is strictly increasing over y in
///       {1e2, 1e3, 1e4} and exceeds `divergence_threshold` at the top decade for every
///       integer p0 in [-10, 10]. The limit condition is operationalized as this
///       monotone-divergence trend; the threshold is configurable.
[[nodiscard]] LemmaConditionReport check_lemma_conditions(const ReactionSystem& sys,
                                                          double lambda, double mu,
                                                          const SweepSpec& spec,
                                                          double divergence_threshold = 5.0);

struct IndefinitePoint {
    Vector point;
    double mu_value = 0.0;
};

/// Scan for a state where mu2_weighted(J(x, y), sqrt_pd(P)) >= 0, i.e. where
/// P J + (P J)^T fails to be negative definite. Default scan: x fixed at a small
/// interior value, y log-spaced up to the y-axis window top (1e4 unless overridden);
/// the spec's y-axis count bounds the number of scan points. Absence is a valid result.
[[nodiscard]] std::optional<IndefinitePoint> find_indefinite_point(const ReactionSystem& sys,
                                                                   const SymMatrix& p,
                                                                   const SweepSpec& search);

}  // namespace contractionkit
