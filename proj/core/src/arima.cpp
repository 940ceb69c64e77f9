#include "perpsim/arima.hpp"

#include "perpsim/errors.hpp"
#include "perpsim/stats.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace perpsim {
namespace {

constexpr double kStationarityEdge = 0.998; // NM barrier just inside the unit circle

std::vector<double> difference(std::span<const double> y, int d) {
    std::vector<double> w(y.begin(), y.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t t = 0; t + 1 < w.size(); ++t) w[t] = w[t + 1] - w[t];
        w.pop_back();
    }
    return w;
}

// CSS residual recursion on the (standardized) differenced series.
// e[t] = z(t) - sum ar_i z(t-i) - sum ma_j e(t-j), zero pre-sample e.
double css_objective(std::span<const double> w, double mu, std::span<const double> ar,
                     std::span<const double> ma, std::vector<double>* resid_out) {
    const int p = static_cast<int>(ar.size());
    const int q = static_cast<int>(ma.size());
    const std::size_t n = w.size();
    std::vector<double> e(n, 0.0);
    double rss = 0;
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        double pred = 0;
        for (int i = 0; i < p; ++i) pred += ar[i] * (w[t - 1 - i] - mu);
        for (int j = 0; j < q; ++j)
            if (t >= static_cast<std::size_t>(j + 1)) pred += ma[j] * e[t - 1 - j];
        e[t] = (w[t] - mu) - pred;
        rss += e[t] * e[t];
    }
    if (resid_out) *resid_out = std::move(e);
    return rss;
}

// Deterministic Nelder-Mead over dim parameters.
struct NelderMead {
    std::function<double(std::span<const double>)> f;
    int max_iter = 0;
    bool converged = false;

    std::vector<double> minimize(std::vector<double> x0, double step) {
        const std::size_t dim = x0.size();
        if (dim == 0) return x0;
        std::vector<std::vector<double>> simplex(dim + 1, x0);
        for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step;
        std::vector<double> fv(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(simplex[i]);

        std::vector<std::size_t> idx(dim + 1);
        const int iters = max_iter > 0 ? max_iter : static_cast<int>(250 * dim + 500);
        for (int it = 0; it < iters; ++it) {
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t best = idx[0], worst = idx[dim], second = idx[dim - 1];

            double spread = 0;
            for (std::size_t i = 0; i < dim; ++i)
                spread = std::max(spread, std::fabs(simplex[worst][i] - simplex[best][i]));
            if (std::fabs(fv[worst] - fv[best]) <= 1e-10 * (1.0 + std::fabs(fv[best])) &&
                spread <= 1e-8) {
                converged = true;
                return simplex[best];
            }

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t i = 0; i <= dim; ++i) {
                if (i == worst) continue;
                for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
            }
            for (double& c : centroid) c /= static_cast<double>(dim);

            auto blend = [&](double coef) {
                std::vector<double> x(dim);
                for (std::size_t j = 0; j < dim; ++j)
                    x[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
                return x;
            };

            const auto reflected = blend(-1.0);
            const double fr = f(reflected);
            if (fr < fv[best]) {
                const auto expanded = blend(-2.0);
                const double fe = f(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    fv[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    fv[worst] = fr;
                }
            } else if (fr < fv[second]) {
                simplex[worst] = reflected;
                fv[worst] = fr;
            } else {
                const auto contracted = blend(fr < fv[worst] ? -0.5 : 0.5);
                const double fc = f(contracted);
                if (fc < std::min(fr, fv[worst])) {
                    simplex[worst] = contracted;
                    fv[worst] = fc;
                } else {
                    for (std::size_t i = 0; i <= dim; ++i) {
                        if (i == best) continue;
                        for (std::size_t j = 0; j < dim; ++j)
                            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                        fv[i] = f(simplex[i]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i <= dim; ++i)
            if (fv[i] < fv[best]) best = i;
        return simplex[best];
    }
};

// AR starting values: conditional least squares of z_t on its p lags.
std::vector<double> ar_least_squares_init(std::span<const double> z, int p) {
    const std::size_t n = z.size();
    if (p == 0 || n <= static_cast<std::size_t>(2 * p + 2)) return std::vector<double>(p, 0.0);
    Eigen::MatrixXd X(n - p, p);
    Eigen::VectorXd b(n - p);
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        for (int i = 0; i < p; ++i)
            X(static_cast<Eigen::Index>(t - p), i) = z[t - 1 - static_cast<std::size_t>(i)];
        b(static_cast<Eigen::Index>(t - p)) = z[t];
    }
    Eigen::VectorXd phi = (X.transpose() * X)
                              .ldlt()
                              .solve(X.transpose() * b);
    std::vector<double> out(phi.data(), phi.data() + p);
    const double radius = companion_spectral_radius(out);
    if (radius >= kStationarityEdge)
        for (double& v : out) v *= 0.95 * kStationarityEdge / radius;
    return out;
}

} // namespace

std::string ArimaOrder::to_string() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

double companion_spectral_radius(std::span<const double> coeffs) {
    const int n = static_cast<int>(coeffs.size());
    if (n == 0) return 0.0;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) comp(0, j) = coeffs[static_cast<std::size_t>(j)];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    return comp.eigenvalues().cwiseAbs().maxCoeff();
}

ArimaFit fit_arima(std::span<const double> series, ArimaOrder order) {
    if (order.p < 0 || order.d < 0 || order.q < 0)
        throw DataError("fit_arima: negative order");
    for (double v : series)
        if (!std::isfinite(v)) throw DataError("fit_arima: non-finite value in series");
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(order.d))
        throw DataError("fit_arima: series shorter than differencing order");

    const std::vector<double> w = difference(series, order.d);
    const std::size_t nw = w.size();
    const std::size_t min_len = 10 * static_cast<std::size_t>(order.p + order.q + 1);
    if (nw < min_len || nw <= static_cast<std::size_t>(order.p + order.q + 1))
        throw DataError("fit_arima: series too short for order " + order.to_string() +
                        " (need >= " + std::to_string(min_len) + " after differencing, have " +
                        std::to_string(nw) + ")");

    // Standardize the differenced series; AR/MA coefficients are invariant
    // under the affine map and the optimizer sees O(1) parameters.
    const double w_mean = mean(w);
    double w_sd = std::sqrt(variance(w));
    const bool degenerate_scale = !(w_sd > 0);
    if (degenerate_scale) w_sd = 1.0;
    std::vector<double> ws(nw);
    for (std::size_t t = 0; t < nw; ++t) ws[t] = (w[t] - w_mean) / w_sd;

    ArimaFit fit;
    fit.order = order;
    fit.n_effective = nw - static_cast<std::size_t>(order.p);

    const int p = order.p, q = order.q;
    std::vector<double> mu_ar_ma(1 + p + q, 0.0);

    if (degenerate_scale && (p > 0 || q > 0)) {
        // constant differenced series: AR/MA parameters are unidentifiable
        fit.converged = false;
        fit.stationary = false;
        fit.invertible = false;
        fit.aic = std::numeric_limits<double>::infinity();
    } else if (p == 0 && q == 0) {
        // drift-only model solves in closed form: mu = sample mean
        mu_ar_ma[0] = mean(ws);
        fit.converged = true;
    } else {
        std::vector<double> zs(ws);
        const double mu0 = mean(ws);
        for (double& v : zs) v -= mu0;
        const auto ar0 = ar_least_squares_init(zs, p);

        std::vector<double> x0(1 + p + q, 0.0);
        x0[0] = mu0;
        for (int i = 0; i < p; ++i) x0[1 + i] = ar0[static_cast<std::size_t>(i)];

        auto objective = [&](std::span<const double> params) {
            const std::span<const double> ar(params.data() + 1, static_cast<std::size_t>(p));
            const std::span<const double> ma(params.data() + 1 + p, static_cast<std::size_t>(q));
            const double r_ar = companion_spectral_radius(ar);
            std::vector<double> neg_ma(ma.begin(), ma.end());
            for (double& v : neg_ma) v = -v;
            const double r_ma = companion_spectral_radius(neg_ma);
            if (r_ar >= kStationarityEdge || r_ma >= kStationarityEdge)
                return 1e12 * (1.0 + std::max(r_ar, r_ma));
            return css_objective(ws, params[0], ar, ma, nullptr);
        };

        NelderMead nm;
        nm.f = objective;
        auto best = nm.minimize(x0, 0.1);
        const bool first_converged = nm.converged;
        NelderMead polish;
        polish.f = objective;
        mu_ar_ma = polish.minimize(best, 0.02);
        fit.converged = first_converged || polish.converged;
    }

    fit.mean = mu_ar_ma[0] * w_sd + w_mean;
    fit.ar.assign(mu_ar_ma.begin() + 1, mu_ar_ma.begin() + 1 + p);
    fit.ma.assign(mu_ar_ma.begin() + 1 + p, mu_ar_ma.end());
    fit.stationary = companion_spectral_radius(fit.ar) < 1.0;
    std::vector<double> neg_ma(fit.ma);
    for (double& v : neg_ma) v = -v;
    fit.invertible = companion_spectral_radius(neg_ma) < 1.0;

    // residuals on the real differenced scale
    std::vector<double> e;
    fit.rss = css_objective(w, fit.mean, fit.ar, fit.ma, &e);
    fit.sigma2 = fit.rss / static_cast<double>(fit.n_effective);
    if (!std::isinf(fit.aic))
        fit.aic = static_cast<double>(fit.n_effective) *
                      std::log(fit.rss / static_cast<double>(fit.n_effective)) +
                  2.0 * static_cast<double>(p + q + 1);

    // Map one-step fitted values back to the original scale. The first
    // d + p observations are warm-up: predicted as observed, residual 0.
    fit.fitted.assign(n, 0.0);
    fit.residuals.assign(n, 0.0);
    fit.warmup.assign(n, false);
    const std::size_t warm = static_cast<std::size_t>(order.d + order.p);
    for (std::size_t t = 0; t < n; ++t) {
        if (t < warm) {
            fit.fitted[t] = series[t];
            fit.warmup[t] = true;
            continue;
        }
        // observation t corresponds to differenced index t - d
        const double resid = e[t - static_cast<std::size_t>(order.d)];
        fit.residuals[t] = resid;
        fit.fitted[t] = series[t] - resid;
    }
    return fit;
}

ArimaOrder select_order(std::span<const double> series, ArimaGrid grid) {
    bool any = false;
    ArimaOrder best;
    double best_aic = std::numeric_limits<double>::infinity();
    auto better = [](const ArimaOrder& a, const ArimaOrder& b) {
        const auto key = [](const ArimaOrder& o) { return std::array<int, 3>{o.d, o.p + o.q, o.p}; };
        return key(a) < key(b);
    };
    for (int d = 0; d <= grid.max_d; ++d)
        for (int p = 0; p <= grid.max_p; ++p)
            for (int q = 0; q <= grid.max_q; ++q) {
                const ArimaOrder order{p, d, q};
                ArimaFit fit;
                try {
                    fit = fit_arima(series, order);
                } catch (const DataError&) {
                    continue; // too short for this order
                }
                if (!fit.converged || !fit.stationary) continue;
                if (!std::isfinite(fit.aic) && fit.aic > 0) continue;
                if (fit.aic < best_aic ||
                    (fit.aic == best_aic && better(order, best))) {
                    best = order;
                    best_aic = fit.aic;
                    any = true;
                }
            }
    if (!any) throw NumericError("select_order: no ARIMA candidate converged");
    return best;
}

DecomposedSeries decompose(std::span<const double> series, const std::string& name,
                           ArimaGrid grid) {
    const ArimaOrder order = select_order(series, grid);
    const ArimaFit fit = fit_arima(series, order);
    DecomposedSeries out;
    out.name = name;
    out.order = order;
    out.expected = fit.fitted;
    out.unexpected = fit.residuals;
    out.warmup = fit.warmup;
    return out;
}

} // namespace perpsim
