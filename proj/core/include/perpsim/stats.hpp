#pragma once

#include <cstddef>
#include <span>

namespace perpsim {

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Upper-tail probability P(F > f) of the F(df1, df2) distribution,
/// evaluated through the regularized incomplete beta function.
double f_upper_tail(double f, double df1, double df2);

/// Upper-tail probability of the chi-squared(df) distribution.
double chi_squared_upper_tail(double x, double df);

double chi_squared_quantile(double p, double df);

/// Ljung-Box portmanteau statistic at the given lag count.
double ljung_box_stat(std::span<const double> series, int lags);

double mean(std::span<const double> v);
double variance(std::span<const double> v); // denominator n-1

/// Significance stars matching the 0.1 / 0.05 / 0.01 convention.
const char* significance_stars(double p_value);

} // namespace perpsim
