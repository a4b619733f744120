#include "contractionkit/lognorm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace contractionkit {

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        std::ostringstream msg;
        msg << what << " requires a square matrix, got " << a.rows() << "x" << a.cols();
        throw std::invalid_argument(msg.str());
    }
}

double vec_norm(const Vector& x, NormOrder p) {
    switch (p) {
        case NormOrder::one:
            return x.lpNorm<1>();
        case NormOrder::two:
            return x.norm();
        case NormOrder::inf:
            return x.lpNorm<Eigen::Infinity>();
    }
    throw std::logic_error("unreachable norm order");
}

}  // namespace

Weight::Weight(SymMatrix p, SymMatrix q, Matrix p_inv)
    : p_(std::move(p)), q_(std::move(q)), p_inv_(std::move(p_inv)) {
    const double q_scale = max_abs(q_.data());
    const double sq_err = max_abs(p_.data() * p_.data() - q_.data());
    if (sq_err > 1e-9 * q_scale) {
        throw std::invalid_argument("weight invariant violated: ||P*P - Q||_max too large");
    }
    const double inv_err =
        max_abs(p_.data() * p_inv_ - Matrix::Identity(p_.dim(), p_.dim()));
    if (inv_err > 1e-9) {
        throw std::invalid_argument("weight invariant violated: ||P*P^-1 - I||_max too large");
    }
}

Weight Weight::from_p(SymMatrix p) {
    const EigResult eig = sym_eig(p);
    if (eig.eigenvalues(0) <= 0.0) {
        std::ostringstream msg;
        msg << "weight P must be positive definite, lambda_min = " << eig.eigenvalues(0);
        throw std::invalid_argument(msg.str());
    }
    Matrix q = p.data() * p.data();
    Matrix p_inv = eig.eigenvectors * eig.eigenvalues.cwiseInverse().asDiagonal() *
                   eig.eigenvectors.transpose();
    return Weight(std::move(p), SymMatrix(std::move(q)), std::move(p_inv));
}

Weight Weight::from_q(const SymMatrix& q) {
    return from_p(sqrt_pd(q));
}

DiagWeight::DiagWeight(Vector diag) : diag_(std::move(diag)) {
    if (diag_.size() < 1) {
        throw std::invalid_argument("diagonal weight must have length >= 1");
    }
    for (int i = 0; i < diag_.size(); ++i) {
        if (!(diag_(i) > 0.0)) {
            std::ostringstream msg;
            msg << "diagonal weight entries must be strictly positive, entry " << i << " = "
                << diag_(i);
            throw std::invalid_argument(msg.str());
        }
    }
}

double mu2(const Matrix& a) {
    require_square(a, "mu2");
    const EigResult eig = sym_eig(symmetric_part(a));
    return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

double mu2_weighted(const Matrix& a, const Weight& w) {
    if (a.rows() != w.dim() || a.cols() != w.dim()) {
        std::ostringstream msg;
        msg << "mu2_weighted shape mismatch: matrix " << a.rows() << "x" << a.cols()
            << " vs weight dim " << w.dim();
        throw std::invalid_argument(msg.str());
    }
    return mu2(w.p().data() * a * w.p_inv());
}

double mu1_weighted(const Matrix& a, const DiagWeight& q) {
    require_square(a, "mu1_weighted");
    if (a.rows() != q.dim()) {
        throw std::invalid_argument("mu1_weighted weight length does not match matrix");
    }
    const Vector& d = q.diag();
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < a.cols(); ++j) {
        double col = a(j, j);
        for (int i = 0; i < a.rows(); ++i) {
            if (i != j) {
                col += (d(i) / d(j)) * std::abs(a(i, j));
            }
        }
        worst = std::max(worst, col);
    }
    return worst;
}

double muinf_weighted(const Matrix& a, const DiagWeight& q) {
    require_square(a, "muinf_weighted");
    if (a.rows() != q.dim()) {
        throw std::invalid_argument("muinf_weighted weight length does not match matrix");
    }
    const Vector& d = q.diag();
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.rows(); ++i) {
        double row = a(i, i);
        for (int j = 0; j < a.cols(); ++j) {
            if (j != i) {
                row += (d(i) / d(j)) * std::abs(a(i, j));
            }
        }
        worst = std::max(worst, row);
    }
    return worst;
}

double weighted_vec_norm(const Vector& x, NormOrder p, const Weight& w, WeightFactor factor) {
    if (x.size() != w.dim()) {
        throw std::invalid_argument("weighted norm length mismatch");
    }
    const Matrix& m = factor == WeightFactor::p ? w.p().data() : w.q().data();
    return vec_norm(m * x, p);
}

double weighted_vec_norm(const Vector& x, NormOrder p, const DiagWeight& q) {
    if (x.size() != q.dim()) {
        throw std::invalid_argument("weighted norm length mismatch");
    }
    return vec_norm(q.diag().cwiseProduct(x), p);
}

namespace {

template <class BlockNorm>
double stacked_norm(const Vector& u, int block_dim, NormOrder p, BlockNorm&& block_norm) {
    if (block_dim < 1 || u.size() % block_dim != 0) {
        std::ostringstream msg;
        msg << "stacked state length " << u.size() << " is not divisible by block size "
            << block_dim;
        throw std::invalid_argument(msg.str());
    }
    const int blocks = static_cast<int>(u.size()) / block_dim;
    Vector per_block(blocks);
    for (int i = 0; i < blocks; ++i) {
        per_block(i) = block_norm(u.segment(i * block_dim, block_dim));
    }
    return vec_norm(per_block, p);
}

}  // namespace

double network_norm(const Vector& u, int block_dim, NormOrder p, const Weight& w,
                    WeightFactor factor) {
    return stacked_norm(u, block_dim, p, [&](const auto& block) {
        return weighted_vec_norm(block, p, w, factor);
    });
}

double network_norm(const Vector& u, int block_dim, NormOrder p, const DiagWeight& q) {
    return stacked_norm(u, block_dim, p, [&](const auto& block) {
        return weighted_vec_norm(block, p, q);
    });
}

double network_norm(const Vector& u, int block_dim, NormOrder p, const AnyWeight& w) {
    return std::visit(
        [&](const auto& weight) -> double {
            using T = std::decay_t<decltype(weight)>;
            if constexpr (std::is_same_v<T, Weight>) {
                if (p != NormOrder::two) {
                    throw std::invalid_argument(
                        "full symmetric weights are only supported at p = 2; use a diagonal "
                        "weight for p in {1, inf}");
                }
            }
            return network_norm(u, block_dim, p, weight);
        },
        w);
}

}  // namespace contractionkit
