#pragma once

#include "cvaod/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace cvaod::testing {

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

inline Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

/// Uniform entries in [-1, 1] from a fixed stream.
inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

/// Random matrix rescaled to the given spectral radius.
inline Matrix random_stable(std::mt19937_64& rng, Index n, double radius) {
    Matrix a = random_matrix(rng, n, n);
    const double rho = spectral_radius(a);
    return rho > 0.0 ? Matrix(a * (radius / rho)) : a;
}

/// A model with rho(A) = rho_a and rho(A - BC) < rho_bar, Omega = I.
inline StateSpaceModel random_minimum_phase(std::mt19937_64& rng, Index n, Index s, double rho_a, double rho_bar) {
    const Matrix a = random_stable(rng, n, rho_a);
    const Matrix c = random_matrix(rng, s, n);
    // Rejection sampling on B.
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Matrix b = random_matrix(rng, n, s);
        const double rho = spectral_radius(a - b * c);
        if (rho < rho_bar) return StateSpaceModel(a, b, c, Matrix::Identity(s, s));
    }
    FAIL("could not draw a minimum-phase model");
    return StateSpaceModel(a, Matrix::Zero(n, s), c, Matrix::Identity(s, s));
}

}  // namespace cvaod::testing
