#include "perpsim/ols.hpp"

#include "perpsim/errors.hpp"
#include "perpsim/stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

namespace perpsim {

int RegressionResult::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

double RegressionResult::coef_of(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw NumericError("no coefficient named '" + name + "'");
    return coef[static_cast<std::size_t>(i)];
}

RegressionResult ols(const std::vector<std::vector<double>>& columns,
                     std::span<const double> y,
                     const std::vector<std::string>& names,
                     bool robust_se) {
    const std::size_t k = columns.size();
    const std::size_t n = y.size();
    if (k == 0) throw NumericError("ols: empty design");
    if (names.size() != k) throw NumericError("ols: names/columns length mismatch");
    for (const auto& col : columns)
        if (col.size() != n) throw NumericError("ols: column length mismatch");
    if (n < k + 1)
        throw NumericError("ols: insufficient observations (" + std::to_string(n) + " rows, " +
                           std::to_string(k) + " columns)");

    // Detect constant columns; the first one acts as the intercept that
    // absorbs centering of the others.
    std::vector<double> mean_j(k, 0.0), scale_j(k, 1.0);
    std::vector<bool> is_const(k, false);
    int intercept = -1;
    for (std::size_t j = 0; j < k; ++j) {
        double mu = 0;
        for (double v : columns[j]) mu += v;
        mu /= static_cast<double>(n);
        double ss = 0;
        for (double v : columns[j]) ss += (v - mu) * (v - mu);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd <= 1e-14 * std::max(1.0, std::fabs(mu))) {
            is_const[j] = true;
            if (intercept < 0) intercept = static_cast<int>(j);
            mean_j[j] = 0.0;
            scale_j[j] = 1.0;
        } else {
            mean_j[j] = mu;
            scale_j[j] = sd;
        }
    }
    // Centering is only valid when an intercept column can absorb the means.
    const bool center = intercept >= 0;
    if (!center)
        for (std::size_t j = 0; j < k; ++j) mean_j[j] = 0.0;

    Eigen::MatrixXd Z(n, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i)
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                is_const[j] ? columns[j][i] : (columns[j][i] - mean_j[j]) / scale_j[j];
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = y[i];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        // name the columns rejected by the pivoting
        const auto perm = qr.colsPermutation().indices();
        std::ostringstream ss;
        ss << "ols: rank-deficient design (rank " << qr.rank() << " of " << k
           << "); dependent columns:";
        for (Eigen::Index pos = qr.rank(); pos < static_cast<Eigen::Index>(k); ++pos)
            ss << ' ' << names[static_cast<std::size_t>(perm(pos))];
        throw NumericError(ss.str());
    }

    const Eigen::VectorXd gamma = qr.solve(yv);
    const Eigen::VectorXd resid = yv - Z * gamma;

    // covariance of the standardized coefficients
    const Eigen::MatrixXd ztz_inv =
        (Z.transpose() * Z).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    const double dof = static_cast<double>(n - k);
    const double rss = resid.squaredNorm();
    const double sigma2 = rss / dof;

    Eigen::MatrixXd cov_gamma;
    if (!robust_se) {
        cov_gamma = sigma2 * ztz_inv;
    } else {
        // HC1 sandwich
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::VectorXd zi = Z.row(static_cast<Eigen::Index>(i)).transpose();
            const double e = resid(static_cast<Eigen::Index>(i));
            meat.noalias() += (e * e) * (zi * zi.transpose());
        }
        cov_gamma = ztz_inv * meat * ztz_inv * (static_cast<double>(n) / dof);
    }

    // Map back to the original column scale: beta = T * gamma where
    //   T[j][j]  = 1/s_j,  T[int][j] = -m_j/s_j  (j != intercept).
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        T(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0 / scale_j[j];
        if (center && static_cast<int>(j) != intercept && !is_const[j])
            T(intercept, static_cast<Eigen::Index>(j)) = -mean_j[j] / scale_j[j];
    }
    const Eigen::VectorXd beta = T * gamma;
    const Eigen::MatrixXd cov_beta = T * cov_gamma * T.transpose();

    RegressionResult out;
    out.names = names;
    out.n_obs = n;
    out.n_params = k;
    out.rss = rss;
    out.sigma2 = sigma2;
    out.coef.resize(k);
    out.se.resize(k);
    out.tstat.resize(k);
    out.pvalue.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.coef[j] = beta(static_cast<Eigen::Index>(j));
        const double var = cov_beta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        out.se[j] = var > 0 ? std::sqrt(var) : 0.0;
        if (out.se[j] > 0) {
            out.tstat[j] = out.coef[j] / out.se[j];
            out.pvalue[j] = student_t_two_sided_p(out.tstat[j], dof);
        } else {
            out.tstat[j] = out.coef[j] == 0 ? 0 : std::numeric_limits<double>::infinity() *
                                                      (out.coef[j] > 0 ? 1.0 : -1.0);
            out.pvalue[j] = out.coef[j] == 0 ? 1.0 : 0.0;
        }
    }
    out.residuals.assign(resid.data(), resid.data() + n);

    double tss = 0;
    const double ybar = mean(y);
    for (double v : y) tss += (v - ybar) * (v - ybar);
    out.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
    out.adj_r2 = 1.0 - (1.0 - out.r2) * (static_cast<double>(n) - 1.0) / dof;
    out.aic = static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
              2.0 * static_cast<double>(k);
    return out;
}

} // namespace perpsim
