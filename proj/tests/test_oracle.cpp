#include "cvaod/errors.hpp"
#include "cvaod/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace cvaod;
using namespace cvaod::testing;

namespace {

StateSpaceModel white_noise(const Matrix& omega) {
    const Index s = omega.rows();
    return StateSpaceModel(Matrix::Zero(1, 1), Matrix::Zero(1, s), Matrix::Zero(s, 1), omega);
}

double min_eig(const Matrix& m) { return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("build_gamma_p") {
    const CovarianceSequence ex1 = covariance_sequence(differenced_white_noise_model(Matrix::Identity(1, 1)), 2);
    const BlockToeplitz g3 = build_gamma_p(ex1, 3);
    Matrix expected(3, 3);
    expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    CHECK(g3.dim() == 3);
    CHECK(max_abs_diff(g3.matrix, expected) == 0.0);

    const Matrix omega = diag2(1.0, 2.0);
    const BlockToeplitz gw = build_gamma_p(covariance_sequence(white_noise(omega), 3), 4);
    Matrix bd = Matrix::Zero(8, 8);
    for (Index i = 0; i < 4; ++i) bd.block(2 * i, 2 * i, 2, 2) = omega;
    CHECK(max_abs_diff(gw.matrix, bd) == 0.0);

    const CovarianceSequence diff = covariance_sequence(simulation_differenced_model(), 10);
    CHECK(max_abs_diff(build_gamma_p(diff, 1).matrix, diff[0]) == 0.0);
    const BlockToeplitz g = build_gamma_p(diff, 6);
    CHECK(max_abs_diff(g.matrix, g.matrix.transpose()) == 0.0);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) CHECK(max_abs_diff(g.block(i, j), diff.at(j - i)) == 0.0);

    CHECK_THROWS_AS(build_gamma_p(diff, 12), DomainError);
    CHECK_THROWS_AS(build_gamma_p(diff, 0), DomainError);
}

TEST_CASE("Gamma_p nesting and monotone lambda_min") {
    const CovarianceSequence cov = covariance_sequence(simulation_differenced_model(), 40);
    double prev = INFINITY;
    for (Index p = 2; p <= 40; ++p) {
        const Matrix big = build_gamma_p(cov, p).matrix;
        const Matrix small = build_gamma_p(cov, p - 1).matrix;
        CHECK(max_abs_diff(big.topLeftCorner(small.rows(), small.cols()), small) == 0.0);
        const double lam = lambda_min_gamma(cov, p);
        CHECK(lam <= prev + 1e-14);
        CHECK(lam > 0.0);
        prev = lam;
    }
}

TEST_CASE("lambda_min_gamma") {
    const CovarianceSequence ex1 = covariance_sequence(differenced_white_noise_model(Matrix::Identity(1, 1)), 100);
    CHECK(lambda_min_gamma(ex1, 3) == doctest::Approx(2.0 * (1.0 - std::cos(std::numbers::pi / 4.0))).epsilon(1e-12));
    const Matrix tri = build_gamma_p(ex1, 3).matrix;
    CHECK(lambda_min_gamma(ex1, 3) == doctest::Approx(min_eig(tri)).epsilon(1e-12));
    const double scaled = 100.0 * 100.0 * lambda_min_gamma(ex1, 100);
    CHECK(scaled >= 8.5);
    CHECK(scaled <= 11.0);

    const CovarianceSequence wn = covariance_sequence(white_noise(2.5 * Matrix::Identity(2, 2)), 8);
    for (Index p = 1; p <= 8; ++p) CHECK(lambda_min_gamma(wn, p) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("p^2 lambda_min stays bounded under over-differencing") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 3; ++k) {
        const StateSpaceModel base = random_minimum_phase(rng, 2, 2, 0.6, 0.6);
        const Matrix mc = k == 2 ? Matrix(Matrix::Identity(2, 2).leftCols(1)) : Matrix(Matrix::Identity(2, 2));
        const StateSpaceModel m = overdifference_model(OverdiffSpec(base, mc));
        const auto rows = lambda_min_study(m, 200);
        double lo = INFINITY, hi = 0.0;
        for (const auto& r : rows) {
            if (r.p < 10) continue;
            lo = std::min(lo, r.scaled());
            hi = std::max(hi, r.scaled());
        }
        CHECK(lo > 0.0);
        CHECK(hi / lo < 10.0);
    }
    // No differencing: bounded below by 2 pi min f = 1 / 1.7^2.
    for (const auto& r : lambda_min_study(simulation_base_model(), 100)) CHECK(r.lambda_min >= 1.0 / (1.7 * 1.7) - 1e-10);
}

TEST_CASE("population_kp") {
    const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(2, 2));
    Matrix expected(2, 4);
    expected << -2.0 / 3.0, 0, -1.0 / 3.0, 0, 0, -2.0 / 3.0, 0, -1.0 / 3.0;
    CHECK(max_abs_diff(population_kp(ex1, 2), expected) < 1e-14);

    SUBCASE("minimum-phase limit") {
        std::mt19937_64 rng(12);
        const StateSpaceModel m = random_minimum_phase(rng, 3, 2, 0.8, 0.5);
        const double rho = spectral_radius(m.closed_loop());
        const Index p = static_cast<Index>(std::ceil(std::log(1e-9) / std::log(rho)));
        const Matrix k = population_kp(m, p);
        Matrix power = m.b();
        for (Index j = 0; j < p; ++j) {
            CHECK(max_abs_diff(k.middleCols(j * 2, 2), power) < 1e-8);
            power = m.closed_loop() * power;
        }
    }
    CHECK(population_kp(white_noise(Matrix::Identity(2, 2)), 3).norm() == 0.0);
    CHECK_THROWS_AS(population_kp(ex1, 0), DomainError);
}

TEST_CASE("population_limits for the differenced white noise") {
    for (const Matrix& omega : {Matrix(Matrix::Identity(1, 1)), Matrix(Matrix::Identity(2, 2)), diag2(1.0, 4.0)}) {
        const Index s = omega.rows();
        const StateSpaceModel ex1 = differenced_white_noise_model(omega);
        const Matrix id = Matrix::Identity(s, s);
        for (Index p : {1, 2, 7, 30}) {
            const PopulationLimit lim = population_limits(ex1, p);
            const double q = static_cast<double>(p + 1);
            CHECK(max_abs_diff(lim.a_p, -id / (static_cast<double>(p) * q)) < 1e-12);
            CHECK(max_abs_diff(lim.b_p, -id + id / q) < 1e-12);
            CHECK(max_abs_diff(lim.c_p, id) < 1e-12);
            CHECK(max_abs_diff(lim.sigma_eps, (q + 1.0) / q * omega) < 1e-12);
            CHECK(max_abs_diff(lim.sigma_x, static_cast<double>(p) / q * omega) < 1e-12);
            CHECK(max_abs_diff(lim.delta_var, omega / q) < 1e-12);
            CHECK(lim.eps_x.cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("population_limits recover a minimum-phase system") {
    std::mt19937_64 rng(31);
    const StateSpaceModel m = random_minimum_phase(rng, 2, 2, 0.7, 0.5);
    const double rho = spectral_radius(m.closed_loop());
    const Index p = static_cast<Index>(std::ceil(std::log(1e-9) / std::log(rho)));
    const PopulationLimit lim = population_limits(m, p);
    for (Index j = 1; j <= 10; ++j) CHECK(max_abs_diff(impulse_response(lim.system(), j), impulse_response(m, j)) < 1e-6);
    CHECK(max_abs_diff(lim.sigma_eps, m.omega()) < 1e-6);

    const PopulationLimit wn = population_limits(white_noise(diag2(1.0, 2.0)), 3);
    CHECK(wn.c_p.norm() == 0.0);
    CHECK(wn.a_p.norm() == 0.0);
    CHECK(max_abs_diff(wn.sigma_eps, diag2(1.0, 2.0)) == 0.0);
}

TEST_CASE("population_limits invariants under over-differencing") {
    const StateSpaceModel m = simulation_differenced_model();
    Matrix prev_delta;
    for (Index p = 2; p <= 60; p += 2) {
        const PopulationLimit lim = population_limits(m, p);
        CHECK(max_abs_diff(lim.sigma_x, lim.sigma_x.transpose()) < 1e-12);
        CHECK(min_eig(lim.sigma_x) > 0.0);
        CHECK(min_eig(lim.sigma_eps) > 0.0);
        CHECK(min_eig(lim.delta_var) > -1e-12);
        CHECK(lim.eps_x.cwiseAbs().maxCoeff() < 1e-12);
        if (prev_delta.size() > 0) CHECK(min_eig(prev_delta - lim.delta_var) > -1e-12);
        prev_delta = lim.delta_var;
    }
    // ||delta_var|| = O(1/p): the scaled norm levels off.
    const double at_100 = 100.0 * population_limits(m, 100).delta_var.norm();
    const double at_200 = 200.0 * population_limits(m, 200).delta_var.norm();
    CHECK(at_200 / at_100 < 1.05);
    CHECK_THROWS_AS(population_limits(m, 0), DomainError);
}

TEST_CASE("bias_curve") {
    const StateSpaceModel ex1 = differenced_white_noise_model(Matrix::Identity(1, 1));
    const auto rows = bias_curve(ex1, {20, 5, 10});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].p == 5);
    CHECK(rows[2].p == 20);
    for (const auto& r : rows) {
        const double p = static_cast<double>(r.p);
        CHECK(r.p2_bias_a() == doctest::Approx(p / (p + 1.0)).epsilon(1e-10));
        CHECK(r.p_bias_b() == doctest::Approx(p / (p + 1.0)).epsilon(1e-10));
        CHECK(r.bias_c < 1e-12);
    }

    const auto diff = bias_curve(simulation_differenced_model(), {40, 80});
    const double ra = diff[1].p2_bias_a() / diff[0].p2_bias_a();
    const double rb = diff[1].p_bias_b() / diff[0].p_bias_b();
    CHECK(ra > 0.5);
    CHECK(ra < 2.0);
    CHECK(rb > 0.5);
    CHECK(rb < 2.0);

    const auto base = bias_curve(simulation_base_model(), {60, 80});
    for (const auto& r : base) {
        CHECK(r.bias_a < 1e-8);
        CHECK(r.bias_b < 1e-8);
        CHECK(r.bias_c < 1e-8);
    }
    CHECK_THROWS_AS(bias_curve(simulation_differenced_model(), {1, 5}), DomainError);
}

TEST_CASE("oracle CSV output") {
    const auto dir = std::filesystem::temp_directory_path() / "cvaod_oracle_csv";
    std::filesystem::create_directories(dir);
    write_bias_csv(dir / "bias.csv", bias_curve(differenced_white_noise_model(Matrix::Identity(1, 1)), {1, 2}));
    std::ifstream in(dir / "bias.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "p,biasA,biasB,biasC,p2_biasA,p_biasB,p_biasC");
    CHECK(row.rfind("1,0.5,0.5,", 0) == 0);

    write_lambda_min_csv(dir / "lambda.csv", lambda_min_study(differenced_white_noise_model(Matrix::Identity(1, 1)), 2));
    std::ifstream lin(dir / "lambda.csv");
    std::getline(lin, header);
    std::getline(lin, row);
    CHECK(header == "p,lambda_min,p2_lambda_min");
    CHECK(row == "1,2,2");
    std::filesystem::remove_all(dir);
}
