#pragma once

#include <Eigen/Dense>

#include <utility>

namespace contractionkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest absolute entry; the scale used by relative tolerances throughout.
[[nodiscard]] double max_abs(const Matrix& m);

/// Dense real symmetric matrix. Construction symmetrizes inputs inside the tolerance
/// band |m(i,j) - m(j,i)| <= 1e-12 * max(1, max_abs(m)) and rejects anything worse,
/// naming the worst entry pair; silently accepting an asymmetric matrix would corrupt
/// every certificate built on top of it.
class SymMatrix {
public:
    explicit SymMatrix(Matrix entries);

    [[nodiscard]] static SymMatrix identity(int dim);
    [[nodiscard]] static SymMatrix from_diag(const Vector& diag);

    [[nodiscard]] int dim() const { return static_cast<int>(mat_.rows()); }
    [[nodiscard]] const Matrix& data() const { return mat_; }
    [[nodiscard]] double operator()(int i, int j) const { return mat_(i, j); }

private:
    Matrix mat_;
};

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending, eigenvector columns
/// orthonormal, S * v_i = lambda_i * v_i within 1e-9 * max_abs(S).
struct EigResult {
    Vector eigenvalues;
    Matrix eigenvectors;
};

[[nodiscard]] EigResult sym_eig(const SymMatrix& s);

struct PdResult {
    bool positive_definite = false;
    double lambda_min = 0.0;
};

/// Default strict-positivity threshold: 1e-10 * max_abs(S).
[[nodiscard]] double default_pd_tol(const SymMatrix& s);

/// flag = (lambda_min(S) > tol).
[[nodiscard]] PdResult is_positive_definite(const SymMatrix& s, double tol);

/// Symmetric PD square root via eigendecomposition: Q = V L V^T -> P = V sqrt(L) V^T.
/// Rejects inputs with lambda_min <= 0, reporting the offending eigenvalue.
[[nodiscard]] SymMatrix sqrt_pd(const SymMatrix& q);

/// Kronecker product: block (i,j) of the result is a(i,j) * B.
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

/// (A + A^T) / 2; rejects non-square input.
[[nodiscard]] SymMatrix symmetric_part(const Matrix& a);

}  // namespace contractionkit
