#include "cvaod/cva.hpp"

#include "cvaod/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cvaod {

namespace {

constexpr Index kChunk = 4096;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// rhs * m^{-1} for a symmetric positive definite sample moment.
Matrix solve_right_moment(const Matrix& m, const Matrix& rhs, const char* what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError(std::string("Cholesky factorization failed for ") + what);
    return llt.solve(rhs.transpose()).transpose();
}

}  // namespace

HankelMoments hankel_moments(const Matrix& data, Index f, Index p) {
    if (f < 1 || p < 1) throw DomainError("f and p must be at least 1");
    const Index t_len = data.rows();
    const Index s = data.cols();
    if (t_len < f + p)
        throw DomainError("hankel_moments needs T >= f + p = " + std::to_string(f + p) + ", got T = " +
                          std::to_string(t_len));

    HankelMoments hm;
    hm.f = f;
    hm.p = p;
    hm.t_first = p + 1;
    hm.t_last = t_len - f + 1;
    hm.n_terms = t_len - f - p + 1;

    // Column t of the stacked matrix holds (Y_t^+; Y_t^-) for 0-based t.
    const Matrix series = data.transpose();
    const Index rows = (f + p) * s;
    Matrix acc = Matrix::Zero(rows, rows);
    Matrix z(rows, std::min(kChunk, hm.n_terms));
    for (Index start = 0; start < hm.n_terms; start += kChunk) {
        const Index width = std::min(kChunk, hm.n_terms - start);
        if (z.cols() != width) z.resize(rows, width);
        for (Index k = 0; k < width; ++k) {
            const Index t = p + start + k;
            for (Index i = 0; i < f; ++i) z.col(k).segment(i * s, s) = series.col(t + i);
            for (Index j = 1; j <= p; ++j) z.col(k).segment((f + j - 1) * s, s) = series.col(t - j);
        }
        acc.selfadjointView<Eigen::Lower>().rankUpdate(z);
    }
    acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();
    acc /= static_cast<double>(hm.n_terms);

    const Index fs = f * s;
    const Index ps = p * s;
    hm.syy_plus = acc.topLeftCorner(fs, fs);
    hm.syy_minus = acc.bottomRightCorner(ps, ps);
    hm.s_plus_minus = acc.topRightCorner(fs, ps);
    return hm;
}

std::vector<double> aic_criteria(const Matrix& data, Index p_max) {
    if (p_max < 0) throw DomainError("p_max must be nonnegative");
    const Index t_len = data.rows();
    const Index s = data.cols();
    if (p_max > 0 && !(t_len > 2 * s * p_max))
        throw DomainError("aic_order needs T > 2 s p_max = " + std::to_string(2 * s * p_max));
    if (t_len <= p_max) throw DomainError("aic_order needs T > p_max");

    // Moments of (y_t, y_{t-1}, ..., y_{t-p_max}) over the common range.
    const Index t_eff = t_len - p_max;
    const Index dim = (p_max + 1) * s;
    const Matrix series = data.transpose();
    Matrix m = Matrix::Zero(dim, dim);
    Matrix z(dim, std::min(kChunk, t_eff));
    for (Index start = 0; start < t_eff; start += kChunk) {
        const Index width = std::min(kChunk, t_eff - start);
        if (z.cols() != width) z.resize(dim, width);
        for (Index k = 0; k < width; ++k) {
            const Index t = p_max + start + k;
            for (Index j = 0; j <= p_max; ++j) z.col(k).segment(j * s, s) = series.col(t - j);
        }
        m.selfadjointView<Eigen::Lower>().rankUpdate(z);
    }
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    m /= static_cast<double>(t_eff);

    std::vector<double> aic;
    aic.reserve(static_cast<std::size_t>(p_max + 1));
    const Matrix m00 = m.topLeftCorner(s, s);
    for (Index k = 0; k <= p_max; ++k) {
        Matrix sigma = m00;
        if (k > 0) {
            const Matrix mkk = m.block(s, s, k * s, k * s);
            const Matrix m0k = m.block(0, s, s, k * s);
            Eigen::LLT<Matrix> llt(mkk);
            if (llt.info() != Eigen::Success)
                throw NumericalError("singular regressor moment in AR(" + std::to_string(k) + ") fit");
            sigma -= m0k * llt.solve(m0k.transpose());
        }
        Eigen::LLT<Matrix> sig(symmetrized(sigma));
        if (sig.info() != Eigen::Success)
            throw NumericalError("singular residual covariance in AR(" + std::to_string(k) + ") fit");
        const double logdet = 2.0 * sig.matrixL().toDenseMatrix().diagonal().array().log().sum();
        aic.push_back(logdet + 2.0 * static_cast<double>(k * s * s) / static_cast<double>(t_eff));
    }
    return aic;
}

Index aic_order(const Matrix& data, Index p_max) {
    const auto aic = aic_criteria(data, p_max);
    Index best = 0;
    for (Index k = 1; k < static_cast<Index>(aic.size()); ++k)
        if (aic[static_cast<std::size_t>(k)] < aic[static_cast<std::size_t>(best)]) best = k;
    return best;
}

Index default_aic_max_order(Index t) {
    if (t < 1) return 0;
    return static_cast<Index>(std::floor(10.0 * std::log10(static_cast<double>(t))));
}

OrderSelection select_order(const Matrix& data, Index n) {
    const Index t_len = data.rows();
    const Index s = data.cols();
    Index p_max = default_aic_max_order(t_len);
    p_max = std::min(p_max, (t_len - 1) / (2 * s));
    OrderSelection sel;
    sel.k_aic = aic_order(data, std::max<Index>(p_max, 0));
    sel.f = sel.p = std::max(2 * sel.k_aic, n);
    return sel;
}

Matrix Selector::matrix() const {
    Matrix m = Matrix::Zero(static_cast<Index>(rows.size()), total_rows);
    for (std::size_t i = 0; i < rows.size(); ++i) m(static_cast<Index>(i), rows[i]) = 1.0;
    return m;
}

Matrix Selector::apply(const Matrix& m) const {
    if (m.rows() != total_rows) throw DomainError("selector expects " + std::to_string(total_rows) + " rows");
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

Selector default_selector(Index f, Index n, Index s) {
    if (n < 0 || f * s < n) throw DomainError("selector needs f s >= n");
    Selector sel;
    sel.total_rows = f * s;
    for (Index i = 0; i < n; ++i) sel.rows.push_back(i);
    return sel;
}

CvaEstimate cva_fit(const Matrix& data, Index f, Index p, Index n) {
    return cva_fit(data, f, p, n, default_selector(f, n, data.cols()));
}

CvaEstimate cva_fit(const Matrix& data, Index f, Index p, Index n, const Selector& s_f) {
    const Index t_len = data.rows();
    const Index s = data.cols();
    if (f < 1 || p < 1) throw DomainError("f and p must be at least 1");
    if (n < 1 || n > std::min(f * s, p * s))
        throw DomainError("system order n must lie in [1, min(fs, ps)] = [1, " + std::to_string(std::min(f * s, p * s)) + "]");
    if (t_len < f + p + 10)
        throw DomainError("cva_fit needs T >= f + p + 10 = " + std::to_string(f + p + 10) + ", got T = " +
                          std::to_string(t_len));
    if (s_f.total_rows != f * s || static_cast<Index>(s_f.rows.size()) != n)
        throw DomainError("selector must be n x fs");

    const HankelMoments hm = hankel_moments(data, f, p);

    Eigen::LLT<Matrix> chol_plus(hm.syy_plus);
    if (chol_plus.info() != Eigen::Success) throw NumericalError("Cholesky factorization of <Y+,Y+> failed");
    Eigen::LLT<Matrix> chol_minus(hm.syy_minus);
    if (chol_minus.info() != Eigen::Success) throw NumericalError("Cholesky factorization of <Y-,Y-> failed");
    const Matrix l_plus = chol_plus.matrixL();
    const Matrix l_minus = chol_minus.matrixL();

    CvaEstimate est;
    est.f = f;
    est.p = p;
    est.n = n;
    est.beta_hat = chol_minus.solve(hm.s_plus_minus.transpose()).transpose();

    // W_f beta L_- = L_+^{-1} <Y+,Y-> L_-^{-T}
    const Matrix weighted =
        l_plus.triangularView<Eigen::Lower>().solve(est.beta_hat * l_minus);
    Eigen::BDCSVD<Matrix> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
    est.singular_values = svd.singularValues();
    if (est.singular_values.size() > n) {
        const double gap = est.singular_values(n - 1) - est.singular_values(n);
        est.singular_value_tie = gap <= 1e-12 * std::max(est.singular_values(0), std::numeric_limits<double>::min());
    }

    const Vector root_sv = est.singular_values.head(n).cwiseSqrt();
    Matrix o_f = l_plus * svd.matrixU().leftCols(n) * root_sv.asDiagonal();
    const Matrix so = s_f.apply(o_f);
    Eigen::JacobiSVD<Matrix> so_svd(so);
    const double so_lo = so_svd.singularValues().minCoeff();
    const double so_hi = so_svd.singularValues().maxCoeff();
    if (!(so_lo > 0.0) || so_hi / so_lo > kSelectorMaxCondition)
        throw EstimationError("selector incompatible with estimated observability matrix");
    o_f = so.transpose().partialPivLu().solve(o_f.transpose()).transpose();
    est.o_f_hat = o_f;
    est.k_p_hat = (o_f.transpose() * o_f).llt().solve(o_f.transpose() * est.beta_hat);

    // x_t = sum_j K_j y_{t-j} over t = p+1..T-f+1 (1-based).
    const Index n_terms = hm.n_terms;
    const Matrix series = data.transpose();
    Matrix x = Matrix::Zero(n, n_terms);
    for (Index j = 1; j <= p; ++j)
        x.noalias() += est.k_p_hat.middleCols((j - 1) * s, s) * series.middleCols(p - j, n_terms);
    const auto y = series.middleCols(p, n_terms);

    const double inv_n = 1.0 / static_cast<double>(n_terms);
    const Matrix sxx = symmetrized(x * x.transpose()) * inv_n;
    est.c_hat = solve_right_moment(sxx, (y * x.transpose()) * inv_n, "<x, x>");
    const Matrix eps = y - est.c_hat * x;
    est.omega_hat = symmetrized(eps * eps.transpose()) * inv_n;

    // Step three drops the last index so that x_{t+1} stays in range.
    const Index m = n_terms - 1;
    const auto x0 = x.leftCols(m);
    const auto x1 = x.rightCols(m);
    const auto e0 = eps.leftCols(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    est.a_hat = solve_right_moment(symmetrized(x0 * x0.transpose()) * inv_m, (x1 * x0.transpose()) * inv_m, "<x, x>");
    est.b_hat = solve_right_moment(symmetrized(e0 * e0.transpose()) * inv_m, (x1 * e0.transpose()) * inv_m, "<e, e>");
    return est;
}

}  // namespace cvaod
