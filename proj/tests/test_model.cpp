#include "cvaod/errors.hpp"
#include "cvaod/model.hpp"
#include "cvaod/monte_carlo.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace cvaod;
using namespace cvaod::testing;

TEST_CASE("spectral_radius") {
    CHECK(spectral_radius(Matrix::Zero(3, 3)) == 0.0);
    CHECK(spectral_radius(diag2(0.7, 0.2)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(spectral_radius(Matrix(0, 0)) == 0.0);

    for (double theta : {0.3, 1.0, 2.5}) {
        Matrix rot(2, 2);
        rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        CHECK(spectral_radius(0.5 * rot) == doctest::Approx(0.5).epsilon(1e-14));
        Matrix big = Matrix::Zero(3, 3);
        big.topLeftCorner(2, 2) = 0.5 * rot;
        big(2, 2) = 0.1;
        CHECK(spectral_radius(big) == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), DomainError);
}

TEST_CASE("is_minimum_phase") {
    CHECK(is_minimum_phase(simulation_base_model(), true));
    const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(2, 2));
    CHECK_FALSE(is_minimum_phase(ex1, true));
    CHECK(is_minimum_phase(ex1, false));
    const StateSpaceModel half(Matrix::Zero(2, 2), 0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                               Matrix::Identity(2, 2));
    CHECK(is_minimum_phase(half, true));
    const System outside(Matrix::Zero(1, 1), Matrix::Constant(1, 1, -1.5), Matrix::Identity(1, 1));
    CHECK_FALSE(is_minimum_phase(outside, false));
}

TEST_CASE("StateSpaceModel validation") {
    const Matrix i2 = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(StateSpaceModel(1.2 * i2, i2, i2, i2), DomainError);
    CHECK_THROWS_AS(StateSpaceModel(i2, i2, i2, i2), DomainError);  // unit root
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 3), i2, i2, i2), DomainError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), Matrix::Zero(2, 1), i2, i2), DomainError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), i2, Matrix::Zero(2, 3), i2), DomainError);
    Matrix asym = i2;
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), i2, i2, asym), DomainError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), i2, i2, diag2(1.0, -1.0)), DomainError);
    CHECK_THROWS_AS(StateSpaceModel(Matrix::Zero(2, 2), i2, i2, diag2(1.0, 0.0)), DomainError);

    const StateSpaceModel static_gain(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), i2);
    CHECK(static_gain.n() == 0);
    CHECK(static_gain.s() == 2);
}

TEST_CASE("solve_discrete_lyapunov") {
    SUBCASE("nilpotent") {
        Matrix q(2, 2);
        q << 2.0, 0.5, 0.5, 1.0;
        CHECK(max_abs_diff(solve_discrete_lyapunov(Matrix::Zero(2, 2), q), q) < 1e-15);
    }
    SUBCASE("diagonal fixed points") {
        const Matrix p = solve_discrete_lyapunov(diag2(0.7, 0.2), Matrix::Identity(2, 2));
        CHECK(max_abs_diff(p, diag2(1.0 / 0.51, 1.0 / 0.96)) < 1e-12);
    }
    SUBCASE("random stable residuals") {
        std::mt19937_64 rng(41);
        for (int k = 0; k < 10; ++k) {
            const Matrix a = random_stable(rng, 4, 0.95);
            const Matrix g = random_matrix(rng, 4, 4);
            const Matrix q = g * g.transpose();
            const Matrix p = solve_discrete_lyapunov(a, q);
            CHECK(max_abs_diff(p, p.transpose()) < 1e-10);
            CHECK((p - a * p * a.transpose() - q).norm() <= 1e-10 * (1.0 + q.norm()));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix::Identity(2, 2), Matrix::Identity(2, 2)), DomainError);
        CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix::Zero(51, 51), Matrix::Identity(51, 51)), DomainError);
        CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix::Zero(2, 2), Matrix::Identity(3, 3)), DomainError);
    }
}

TEST_CASE("covariance_sequence closed forms") {
    SUBCASE("differenced white noise") {
        const CovarianceSequence cov = covariance_sequence(differenced_white_noise_model(Matrix::Identity(1, 1)), 5);
        CHECK(cov.max_lag() == 5);
        CHECK(cov[0](0, 0) == doctest::Approx(2.0));
        CHECK(cov[1](0, 0) == doctest::Approx(-1.0));
        for (Index j = 2; j <= 5; ++j) CHECK(cov[j](0, 0) == 0.0);
    }
    SUBCASE("white noise") {
        const Matrix omega = diag2(1.0, 3.0);
        std::mt19937_64 rng(3);
        const StateSpaceModel wn(Matrix::Zero(2, 2), Matrix::Zero(2, 2), random_matrix(rng, 2, 2), omega);
        const CovarianceSequence cov = covariance_sequence(wn, 3);
        CHECK(max_abs_diff(cov[0], omega) < 1e-15);
        for (Index j = 1; j <= 3; ++j) CHECK(cov[j].norm() == 0.0);
    }
    SUBCASE("negative lags transpose") {
        const CovarianceSequence cov = covariance_sequence(simulation_differenced_model(), 3);
        CHECK(max_abs_diff(cov.at(-2), cov[2].transpose()) == 0.0);
        CHECK_THROWS_AS(cov.at(4), DomainError);
    }
    CHECK_THROWS_AS(covariance_sequence(simulation_base_model(), -1), DomainError);
}

namespace {

/// Largest |sample - population| / batch-means SE over gamma_0..gamma_2.
double gamma_z_score(const StateSpaceModel& model, Index t, std::uint64_t seed) {
    const Matrix y = simulate_dgp(model, t, 1000, seed);
    const CovarianceSequence cov = covariance_sequence(model, 2);
    const Index batches = 50;
    const Index width = t / batches;
    double worst = 0.0;
    for (Index lag = 0; lag <= 2; ++lag) {
        const Matrix full = y.bottomRows(t - lag).transpose() * y.topRows(t - lag) / static_cast<double>(t - lag);
        std::vector<Matrix> parts;
        for (Index b = 0; b < batches; ++b) {
            const Matrix blk = y.middleRows(b * width, width);
            parts.push_back(blk.bottomRows(width - lag).transpose() * blk.topRows(width - lag) /
                            static_cast<double>(width - lag));
        }
        for (Index i = 0; i < model.s(); ++i) {
            for (Index j = 0; j < model.s(); ++j) {
                double mean = 0.0, ss = 0.0;
                for (const auto& m : parts) mean += m(i, j);
                mean /= batches;
                for (const auto& m : parts) ss += (m(i, j) - mean) * (m(i, j) - mean);
                const double se = std::sqrt(ss / (batches - 1.0) / batches);
                worst = std::max(worst, std::abs(full(i, j) - cov[lag](i, j)) / se);
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("covariance_sequence matches long simulations") {
    std::mt19937_64 rng(2718);
    for (int k = 0; k < 5; ++k) {
        const Index n = 1 + k % 3;
        const Index s = 1 + k % 2;
        const StateSpaceModel model(random_stable(rng, n, 0.8), random_matrix(rng, n, s), random_matrix(rng, s, n),
                                    Matrix::Identity(s, s));
        CHECK(gamma_z_score(model, 1'000'000, 100 + k) < 5.0);
    }

    const StateSpaceModel diff = simulation_differenced_model();
    const Matrix y = simulate_dgp(diff, 1'000'000, 1000, 7);
    const Matrix g0 = y.transpose() * y / 1e6;
    const Matrix exact = covariance_sequence(diff, 0)[0];
    // Three significant digits on the diagonal.
    CHECK(std::abs(g0(0, 0) / exact(0, 0) - 1.0) < 5e-3);
    CHECK(std::abs(g0(1, 1) / exact(1, 1) - 1.0) < 5e-3);
}

TEST_CASE("impulse_response") {
    const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(3, 3));
    CHECK(max_abs_diff(impulse_response(ex1, 1), -Matrix::Identity(3, 3)) == 0.0);
    for (Index j = 2; j <= 5; ++j) CHECK(impulse_response(ex1, j).norm() == 0.0);

    const StateSpaceModel diff = simulation_differenced_model();
    CHECK(max_abs_diff(impulse_response(diff, 1), diag2(-0.3, -0.8)) < 1e-15);
    CHECK(max_abs_diff(impulse_response(diff, 2), diag2(-0.21, -0.16)) < 1e-15);

    const auto seq = impulse_responses(diff.system(), 6);
    REQUIRE(seq.size() == 6);
    for (Index j = 1; j <= 6; ++j) CHECK(max_abs_diff(seq[j - 1], impulse_response(diff, j)) < 1e-15);
    CHECK_THROWS_AS(impulse_response(diff, 0), DomainError);
}

TEST_CASE("overdifference_model") {
    SUBCASE("zero-order base gives the differenced white noise") {
        const StateSpaceModel base(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), Matrix::Identity(2, 2));
        const StateSpaceModel m = overdifference_model(OverdiffSpec(base, Matrix::Identity(2, 2)));
        CHECK(m.n() == 2);
        CHECK(m.a().norm() == 0.0);
        CHECK(max_abs_diff(m.b(), Matrix::Identity(2, 2)) == 0.0);
        CHECK(max_abs_diff(m.c(), -Matrix::Identity(2, 2)) == 0.0);
        const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(2, 2));
        for (Index j = 1; j <= 5; ++j) CHECK(max_abs_diff(impulse_response(m, j), impulse_response(ex1, j)) == 0.0);
    }
    SUBCASE("simulation design") {
        const StateSpaceModel m = overdifference_model(OverdiffSpec(simulation_base_model(), Matrix::Identity(2, 2)));
        CHECK(m.n() == 4);
        const StateSpaceModel minimal = simulation_differenced_model();
        for (Index j = 1; j <= 20; ++j)
            CHECK(max_abs_diff(impulse_response(m, j), impulse_response(minimal, j)) < 1e-14);
        CHECK(spectral_radius(m.a()) < 1.0);
        CHECK(std::abs(spectral_radius(m.closed_loop()) - 1.0) < 1e-8);
        CHECK_FALSE(is_minimum_phase(m, true));
    }
    SUBCASE("impulse responses follow the difference filter") {
        std::mt19937_64 rng(99);
        for (int k = 0; k < 5; ++k) {
            const Index s = 3;
            const Index c = 1 + k % 3;
            const StateSpaceModel base = random_minimum_phase(rng, 2, s, 0.8, 0.9);
            const Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, s, s));
            const Matrix q = qr.householderQ();
            const Matrix mc = q.leftCols(c);
            const StateSpaceModel m = overdifference_model(OverdiffSpec(base, mc));
            CHECK(spectral_radius(m.a()) < 1.0);
            CHECK(std::abs(spectral_radius(m.closed_loop()) - 1.0) < 1e-8);
            Matrix prev = Matrix::Identity(s, s);
            for (Index j = 1; j <= 20; ++j) {
                const Matrix kj = impulse_response(base, j);
                CHECK(max_abs_diff(impulse_response(m, j), kj - mc * mc.transpose() * prev) < 1e-12);
                prev = kj;
            }
            // Rank of the spectral density at frequency zero is s - c.
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(spectral_density(m, 0.0));
            const Vector ev = eig.eigenvalues();
            Index rank = 0;
            for (Index i = 0; i < s; ++i) rank += ev(i) > 1e-10 ? 1 : 0;
            CHECK(rank == s - c);
        }
    }
    SUBCASE("invalid specs") {
        CHECK_THROWS_AS(OverdiffSpec(simulation_base_model(), Matrix::Zero(2, 0)), DomainError);
        CHECK_THROWS_AS(OverdiffSpec(simulation_base_model(), 2.0 * Matrix::Identity(2, 2)), DomainError);
        CHECK_THROWS_AS(OverdiffSpec(simulation_base_model(), Matrix::Identity(3, 3)), DomainError);
        CHECK_THROWS_AS(OverdiffSpec(simulation_differenced_model(), Matrix::Identity(2, 2)), DomainError);
    }
}

TEST_CASE("spectral_density") {
    const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(1, 1));
    CHECK(std::abs(spectral_density(ex1, 0.0)(0, 0)) < 1e-15);
    CHECK(spectral_density(ex1, std::numbers::pi)(0, 0).real() == doctest::Approx(4.0 / (2.0 * std::numbers::pi)));

    const auto f0 = spectral_density(simulation_differenced_model(), 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(f0);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() < 1e-12);

    // Rotated differencing directions still null the whole spectrum at zero.
    Matrix rot(2, 2);
    rot << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
    const StateSpaceModel rotated = overdifference_model(OverdiffSpec(simulation_base_model(), rot));
    CHECK(spectral_density(rotated, 0.0).cwiseAbs().maxCoeff() < 1e-12);

    SUBCASE("integrates to gamma_0") {
        std::mt19937_64 rng(5);
        std::vector<StateSpaceModel> models{simulation_differenced_model(), simulation_base_model(),
                                            random_minimum_phase(rng, 3, 2, 0.7, 0.9)};
        for (const auto& m : models) {
            const Index points = 4096;
            const double h = 2.0 * std::numbers::pi / static_cast<double>(points - 1);
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m.s(), m.s());
            for (Index k = 0; k < points; ++k) {
                const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
                acc += w * h * spectral_density(m, -std::numbers::pi + h * static_cast<double>(k));
            }
            const Matrix g0 = covariance_sequence(m, 0)[0];
            CHECK(acc.imag().cwiseAbs().maxCoeff() < 1e-10);
            CHECK((acc.real() - g0).norm() <= 1e-6 * g0.norm());
            const auto f = spectral_density(m, 0.7);
            CHECK((f - f.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
}
