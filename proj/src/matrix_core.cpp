#include "contractionkit/matrix_core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace contractionkit {

namespace {
constexpr double kSymmetryBand = 1e-12;
}

double max_abs(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return m.cwiseAbs().maxCoeff();
}

SymMatrix::SymMatrix(Matrix entries) {
    if (entries.rows() != entries.cols() || entries.rows() < 1) {
        std::ostringstream msg;
        msg << "SymMatrix requires a square matrix with dim >= 1, got " << entries.rows()
            << "x" << entries.cols();
        throw std::invalid_argument(msg.str());
    }
    const double scale = std::max(1.0, max_abs(entries));
    double worst = 0.0;
    int worst_i = 0;
    int worst_j = 0;
    for (int i = 0; i < entries.rows(); ++i) {
        for (int j = i + 1; j < entries.cols(); ++j) {
            const double gap = std::abs(entries(i, j) - entries(j, i));
            if (gap > worst) {
                worst = gap;
                worst_i = i;
                worst_j = j;
            }
        }
    }
    if (worst > kSymmetryBand * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric: |m(" << worst_i << "," << worst_j << ") - m("
            << worst_j << "," << worst_i << ")| = " << worst << " exceeds "
            << kSymmetryBand * scale;
        throw std::invalid_argument(msg.str());
    }
    mat_ = 0.5 * (entries + entries.transpose());
}

SymMatrix SymMatrix::identity(int dim) {
    return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::from_diag(const Vector& diag) {
    return SymMatrix(Matrix(diag.asDiagonal()));
}

EigResult sym_eig(const SymMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s.data());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigendecomposition failed to converge");
    }
    return EigResult{solver.eigenvalues(), solver.eigenvectors()};
}

double default_pd_tol(const SymMatrix& s) {
    return 1e-10 * max_abs(s.data());
}

PdResult is_positive_definite(const SymMatrix& s, double tol) {
    if (tol < 0.0) {
        throw std::invalid_argument("positive-definiteness tolerance must be >= 0");
    }
    const EigResult eig = sym_eig(s);
    const double lambda_min = eig.eigenvalues(0);
    return PdResult{lambda_min > tol, lambda_min};
}

SymMatrix sqrt_pd(const SymMatrix& q) {
    const EigResult eig = sym_eig(q);
    const double lambda_min = eig.eigenvalues(0);
    if (lambda_min <= 0.0) {
        std::ostringstream msg;
        msg << "matrix square root requires a positive definite input, lambda_min = "
            << lambda_min;
        throw std::invalid_argument(msg.str());
    }
    const Vector roots = eig.eigenvalues.cwiseSqrt();
    Matrix p = eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose();
    return SymMatrix(std::move(p));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

SymMatrix symmetric_part(const Matrix& a) {
    if (a.rows() != a.cols()) {
        std::ostringstream msg;
        msg << "symmetric part requires a square matrix, got " << a.rows() << "x" << a.cols();
        throw std::invalid_argument(msg.str());
    }
    return SymMatrix(0.5 * (a + a.transpose()));
}

}  // namespace contractionkit
