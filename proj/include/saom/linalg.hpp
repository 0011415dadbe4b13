#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saom/common.hpp"
#include "saom/matrix.hpp"

namespace saom {

inline Eigen::MatrixXd to_eigen(const real_matrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

inline real_matrix from_eigen(const Eigen::MatrixXd& m) {
    real_matrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

/// Columns of A that a rank-deficient LU implicates (nonzero kernel weight),
/// reported by label so callers can name the collinear model terms.
inline std::string collinear_column_names(const Eigen::FullPivLU<Eigen::MatrixXd>& lu,
                                          const std::vector<std::string>& labels) {
    std::string names;
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() > 0) {
        for (int c = 0; c < kernel.rows(); ++c) {
            if (std::abs(kernel(c, 0)) > 1e-8) {
                if (!names.empty()) names += ", ";
                names += c < static_cast<int>(labels.size()) ? labels[c] : ("column " + std::to_string(c));
            }
        }
    }
    return names.empty() ? "(undetermined)" : names;
}

/// Solve A y = b; on singularity throws naming the implicated columns.
inline std::vector<double> solve_linear(const real_matrix& A, const std::vector<double>& b,
                                        const std::vector<std::string>& labels) {
    const Eigen::MatrixXd M = to_eigen(A);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
        throw config_error("singular derivative matrix; collinear effects: " + collinear_column_names(lu, labels));
    Eigen::VectorXd rhs(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) rhs(static_cast<int>(i)) = b[i];
    const Eigen::VectorXd y = lu.solve(rhs);
    return std::vector<double>(y.data(), y.data() + y.size());
}

/// D^{-1} Sigma D^{-T}: the sandwich behind method-of-moments standard errors.
inline real_matrix sandwich_inverse(const real_matrix& D, const real_matrix& Sigma,
                                    const std::vector<std::string>& labels) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(D));
    if (!lu.isInvertible())
        throw config_error("singular derivative matrix; collinear effects: " + collinear_column_names(lu, labels));
    const Eigen::MatrixXd Dinv = lu.inverse();
    return from_eigen(Dinv * to_eigen(Sigma) * Dinv.transpose());
}

/// Sample covariance across row vectors, denominator n-1.
inline real_matrix sample_covariance(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    const int K = n ? static_cast<int>(rows[0].size()) : 0;
    std::vector<double> mean(K, 0.0);
    for (const auto& r : rows)
        for (int k = 0; k < K; ++k) mean[k] += r[k];
    for (double& m : mean) m /= n;
    real_matrix cov(K, K);
    if (n < 2) return cov;
    for (const auto& r : rows)
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) cov(a, b) += (r[a] - mean[a]) * (r[b] - mean[b]);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) cov(a, b) /= (n - 1);
    return cov;
}

struct ols_fit {
    std::vector<double> coefficients;
    double r2 = 0.0;
    double adjusted_r2 = 0.0;
    int n = 0;
    std::vector<double> fitted;
    std::vector<double> residuals;
};

/// Ordinary least squares; `design` rows must already include the intercept
/// column if one is wanted. Rank-deficient design throws.
inline ols_fit fit_ols(const std::vector<std::vector<double>>& design, const std::vector<double>& y) {
    const int n = static_cast<int>(design.size());
    if (n == 0 || design[0].empty()) throw data_error("ols: empty design");
    const int p = static_cast<int>(design[0].size());
    if (static_cast<int>(y.size()) != n) throw data_error("ols: response length mismatch");
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(design[i].size()) != p) throw data_error("ols: ragged design");
        for (int j = 0; j < p; ++j) X(i, j) = design[i][j];
        Y(i) = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) throw data_error("ols: singular design (collinear or constant regressors)");
    const Eigen::VectorXd beta = qr.solve(Y);

    ols_fit fit;
    fit.n = n;
    fit.coefficients.assign(beta.data(), beta.data() + p);
    const Eigen::VectorXd fitted = X * beta;
    fit.fitted.assign(fitted.data(), fitted.data() + n);
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = Y.mean();
    fit.residuals.resize(n);
    for (int i = 0; i < n; ++i) {
        fit.residuals[i] = Y(i) - fitted(i);
        ss_res += fit.residuals[i] * fit.residuals[i];
        ss_tot += (Y(i) - ybar) * (Y(i) - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.adjusted_r2 = n > p ? 1.0 - (1.0 - fit.r2) * double(n - 1) / double(n - p) : fit.r2;
    return fit;
}

}  // namespace saom
