#pragma once

#include "contractionkit/matrix_core.hpp"
#include "contractionkit/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>

namespace testsupport {

using contractionkit::Matrix;
using contractionkit::Rng;
using contractionkit::SymMatrix;
using contractionkit::Vector;

inline Matrix random_matrix(Rng& rng, int n, double scale = 2.0) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = rng.uniform(-scale, scale);
        }
    }
    return m;
}

inline SymMatrix random_sym(Rng& rng, int n, double scale = 2.0) {
    const Matrix m = random_matrix(rng, n, scale);
    return SymMatrix(0.5 * (m + m.transpose()));
}

/// PD test matrices built as G^T G + eps*I.
inline SymMatrix random_pd(Rng& rng, int n, double eps = 0.1) {
    const Matrix g = random_matrix(rng, n, 1.0);
    return SymMatrix(Matrix(g.transpose() * g + eps * Matrix::Identity(n, n)));
}

/// Eigenvalues of [[a, b], [b, d]] from the characteristic polynomial, ascending;
/// the independent oracle for all 2x2 spectral expectations.
inline std::pair<double, double> eig2x2_sym(double a, double b, double d) {
    const double mean = 0.5 * (a + d);
    const double disc = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    return {mean - disc, mean + disc};
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("contractionkit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

#ifdef CONTRACTIONKIT_CLI_PATH
/// Run the CLI binary and return its exit status (-1 if it did not exit normally).
inline int run_cli(const std::string& args) {
    const std::string command = std::string(CONTRACTIONKIT_CLI_PATH) + " " + args +
                                " 2>/dev/null";
    const int status = std::system(command.c_str());
    if (status == -1) {
        return -1;
    }
    if (WIFEXITED(status)) {
        return WEXITSTATUS(status);
    }
    return -1;
}
#endif

}  // namespace testsupport
