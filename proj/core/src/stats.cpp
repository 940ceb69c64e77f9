#include "perpsim/stats.hpp"

#include "perpsim/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace perpsim {

double student_t_two_sided_p(double t, double df) {
    if (df <= 0) throw NumericError("t distribution needs df > 0");
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double f_upper_tail(double f, double df1, double df2) {
    if (df1 <= 0 || df2 <= 0) throw NumericError("F distribution needs positive df");
    if (f <= 0) return 1.0;
    const boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

double chi_squared_upper_tail(double x, double df) {
    const boost::math::chi_squared dist(df);
    if (x <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(dist, x));
}

double chi_squared_quantile(double p, double df) {
    const boost::math::chi_squared dist(df);
    return boost::math::quantile(dist, p);
}

double ljung_box_stat(std::span<const double> series, int lags) {
    const std::size_t n = series.size();
    if (lags <= 0 || static_cast<std::size_t>(lags) >= n)
        throw NumericError("ljung_box: need 0 < lags < n");
    const double mu = mean(series);
    double c0 = 0;
    for (double v : series) c0 += (v - mu) * (v - mu);
    if (c0 == 0) return 0.0;
    double q = 0;
    for (int k = 1; k <= lags; ++k) {
        double ck = 0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
            ck += (series[t] - mu) * (series[t - k] - mu);
        const double rk = ck / c0;
        q += rk * rk / static_cast<double>(n - k);
    }
    return static_cast<double>(n) * (static_cast<double>(n) + 2.0) * q;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double s = 0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size() - 1);
}

const char* significance_stars(double p_value) {
    if (p_value < 0.01) return "***";
    if (p_value < 0.05) return "**";
    if (p_value < 0.1) return "*";
    return "";
}

} // namespace perpsim
