#pragma once

#include "contractionkit/matrix_core.hpp"

#include <variant>

namespace contractionkit {

enum class NormOrder { one, two, inf };

/// Weight pair for the P-weighted 2-norm ||x||_{2,P} = ||Px||_2 and its square Q = P^2.
/// P^{-1} is cached at construction; the weighted measure is evaluated in inner loops of
/// domain sweeps.
class Weight {
public:
    [[nodiscard]] static Weight from_p(SymMatrix p);
    [[nodiscard]] static Weight from_q(const SymMatrix& q);

    [[nodiscard]] const SymMatrix& p() const { return p_; }
    [[nodiscard]] const SymMatrix& q() const { return q_; }
    [[nodiscard]] const Matrix& p_inv() const { return p_inv_; }
    [[nodiscard]] int dim() const { return p_.dim(); }

private:
    Weight(SymMatrix p, SymMatrix q, Matrix p_inv);

    SymMatrix p_;
    SymMatrix q_;
    Matrix p_inv_;
};

/// Positive diagonal weight, the Q of the diagonal-measure results (p in {1, inf}).
class DiagWeight {
public:
    explicit DiagWeight(Vector diag);

    [[nodiscard]] const Vector& diag() const { return diag_; }
    [[nodiscard]] int dim() const { return static_cast<int>(diag_.size()); }

private:
    Vector diag_;
};

using AnyWeight = std::variant<Weight, DiagWeight>;

/// mu_2(A) = lambda_max((A + A^T)/2).
[[nodiscard]] double mu2(const Matrix& a);

/// mu_{2,P}(A) = mu_2(P A P^{-1}).
[[nodiscard]] double mu2_weighted(const Matrix& a, const Weight& w);

/// mu_{1,Q}(A) = max_j (a_jj + sum_{i != j} (q_i/q_j) |a_ij|), the column-sum closed
/// form of mu_1(Q A Q^{-1}) for diagonal Q.
[[nodiscard]] double mu1_weighted(const Matrix& a, const DiagWeight& q);

/// mu_{inf,Q}(A) = max_i (a_ii + sum_{j != i} (q_i/q_j) |a_ij|), the row-sum form.
[[nodiscard]] double muinf_weighted(const Matrix& a, const DiagWeight& q);

/// Which factor of a Weight applies in norms: P gives ||Px||, Q gives ||Qx||.
/// The main contraction estimate lives in ||.||_{2,P}.
enum class WeightFactor { p, q };

[[nodiscard]] double weighted_vec_norm(const Vector& x, NormOrder p, const Weight& w,
                                       WeightFactor factor = WeightFactor::p);
[[nodiscard]] double weighted_vec_norm(const Vector& x, NormOrder p, const DiagWeight& q);

/// Network norm on a stacked state of N blocks of length n: outer p-norm over the
/// per-block weighted norms. For p = 2 with a Weight this equals
/// sqrt(u^T (I_N kron Q) u). Rejects lengths not divisible by the block size.
[[nodiscard]] double network_norm(const Vector& u, int block_dim, NormOrder p, const Weight& w,
                                  WeightFactor factor = WeightFactor::p);
[[nodiscard]] double network_norm(const Vector& u, int block_dim, NormOrder p,
                                  const DiagWeight& q);

/// Dispatch over the weight kinds used by simulation logging. Weight is only valid at
/// p = 2 (the diagonal-measure results cover p in {1, inf}).
[[nodiscard]] double network_norm(const Vector& u, int block_dim, NormOrder p,
                                  const AnyWeight& w);

}  // namespace contractionkit
