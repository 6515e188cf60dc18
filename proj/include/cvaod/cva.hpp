#pragma once

#include "cvaod/model.hpp"

#include <vector>

namespace cvaod {

/// Condition number above which S_f O_f is treated as singular.
inline constexpr double kSelectorMaxCondition = 1e12;

/**
 * Sample second moments of the stacked future Y_t^+ = (y_t', ..., y_{t+f-1}')'
 * and past Y_t^- = (y_{t-1}', ..., y_{t-p}')'. With 1-based time, every moment
 * runs over t = p+1..T-f+1 and is divided by n_terms = T - f - p + 1.
 */
struct HankelMoments {
    Matrix syy_plus;      // <Y+, Y+>, fs x fs
    Matrix syy_minus;     // <Y-, Y->, ps x ps
    Matrix s_plus_minus;  // <Y+, Y->, fs x ps
    Index f = 0;
    Index p = 0;
    Index t_first = 0;  // 1-based
    Index t_last = 0;   // 1-based, inclusive
    Index n_terms = 0;
};

/// data is T x s, one observation per row. Needs at least one summand.
HankelMoments hankel_moments(const Matrix& data, Index f, Index p);

/// AIC(k) = log det Sigma_k + 2 k s^2 / T_eff for k = 0..p_max, all fitted by
/// least squares over the common sample t = p_max+1..T.
std::vector<double> aic_criteria(const Matrix& data, Index p_max);

/// argmin of aic_criteria; ties go to the smaller order.
Index aic_order(const Matrix& data, Index p_max);

/// Default AR search bound floor(10 log10 T).
Index default_aic_max_order(Index t);

struct OrderSelection {
    Index k_aic = 0;
    Index f = 0;
    Index p = 0;
};

/// f = p = max(2 k_AIC, n) with k_AIC searched up to default_aic_max_order(T),
/// reduced where needed so that T > 2 s p_max.
OrderSelection select_order(const Matrix& data, Index n);

/// Row selector S_f: picks `rows` out of a matrix with total_rows rows.
struct Selector {
    Index total_rows = 0;
    std::vector<Index> rows;

    Matrix matrix() const;
    Matrix apply(const Matrix& m) const;
};

/// The first n rows of an fs-row matrix.
Selector default_selector(Index f, Index n, Index s);

struct CvaEstimate {
    Matrix a_hat, b_hat, c_hat, omega_hat;
    Matrix k_p_hat;  // n x ps
    Matrix o_f_hat;  // fs x n, normalized so that S_f O_f = I_n
    Matrix beta_hat; // fs x ps unrestricted regression of Y+ on Y-
    Vector singular_values;
    Index f = 0;
    Index p = 0;
    Index n = 0;
    /// sigma_n and sigma_{n+1} coincide; the truncation kept the first n.
    bool singular_value_tie = false;

    System system() const { return System(a_hat, b_hat, c_hat); }
};

/**
 * Canonical variate analysis.
 *
 * beta = <Y+,Y-><Y-,Y->^{-1} is reduced to rank n through the SVD of
 * W_f beta L_-, where W_f is the inverse lower Cholesky factor of <Y+,Y+> and
 * L_- the lower Cholesky factor of <Y-,Y->. The state estimate
 * x_t = K_p Y_t^- then feeds the regressions for C, A and B.
 */
CvaEstimate cva_fit(const Matrix& data, Index f, Index p, Index n, const Selector& s_f);
CvaEstimate cva_fit(const Matrix& data, Index f, Index p, Index n);

}  // namespace cvaod
