#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace perpsim {

/// Output of a least-squares fit: one entry per design column, in column
/// order, plus fit summary fields shaped for the regression tables
/// (t-statistics, adjusted R^2, AIC, observation count).
struct RegressionResult {
    std::vector<std::string> names;
    std::vector<double> coef;
    std::vector<double> se;
    std::vector<double> tstat;
    std::vector<double> pvalue;
    std::vector<double> residuals;
    double rss = 0;
    double sigma2 = 0; // rss / (n - k)
    double r2 = 0;
    double adj_r2 = 0;
    double aic = 0; // n*ln(rss/n) + 2k
    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    int lag_count = 0; // chosen m when produced by fit_volatility_model

    /// Index of a named coefficient, -1 when absent.
    int index_of(const std::string& name) const;
    double coef_of(const std::string& name) const; // throws if absent
};

/// QR-based least squares of y on the given columns (column-major design).
/// Columns are standardized internally for conditioning and coefficients are
/// mapped back to the original scale. Classical homoskedastic standard
/// errors by default; `robust_se` switches to HC1.
///
/// Throws NumericError on rank deficiency (message names the dependent
/// columns) or when rows < columns + 1.
RegressionResult ols(const std::vector<std::vector<double>>& columns,
                     std::span<const double> y,
                     const std::vector<std::string>& names,
                     bool robust_se = false);

} // namespace perpsim
