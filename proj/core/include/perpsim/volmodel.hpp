#pragma once

#include "perpsim/arima.hpp"
#include "perpsim/dates.hpp"
#include "perpsim/ols.hpp"
#include "perpsim/volatility.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace perpsim {

enum class ExchangeKind { Cex, Vamm, Oracle };
enum class ModelForm {
    ActivityOnly,  // volume/OI/liquidation regressors ("eq2" on the CLI)
    WithLeverage,  // adds the four average-leverage regressors ("eq3")
};

ExchangeKind exchange_kind_from_string(const std::string& s);
std::string to_string(ExchangeKind kind);
ModelForm model_form_from_string(const std::string& s);
std::string to_string(ModelForm form);

/// Decomposed activity series sharing one date axis.
struct DecomposedSet {
    std::vector<Date> dates;
    std::map<std::string, DecomposedSeries> series; // keyed by activity name

    const DecomposedSeries& at(const std::string& name) const;
};

/// Decomposes every column of an activity series (leverage columns included
/// when present). Columns are independent fits and run on up to `jobs`
/// workers; results are deterministic regardless of the worker count.
DecomposedSet decompose_activity(const ActivitySeries& activity, ArimaGrid grid,
                                 unsigned jobs = 1);

/// Which regressors enter the volatility regression and with how many lags.
/// The CEX roster drops the long-OI terms: on a limit-order-book venue long
/// and short open interest are the same number, so only the short side enters.
struct ModelSpec {
    int lag_count = 1; // m >= 1
    ModelForm form = ModelForm::ActivityOnly;
    ExchangeKind exchange = ExchangeKind::Cex;
    std::vector<std::string> roster; // design order; filled by make_model_spec

    void validate() const;
};

ModelSpec make_model_spec(ExchangeKind exchange, ModelForm form, int lag_count);

struct DesignMatrix {
    std::vector<std::string> names; // intercept, sigma_lag1.., then roster
    std::vector<std::vector<double>> columns;
    std::vector<double> response;
    std::vector<Date> row_dates;
};

/// Assembles response sigma_t and the regressor columns. Rows whose lags are
/// unavailable or that touch an ARIMA warm-up point in any roster series are
/// dropped. Dates of the volatility series and the decomposed set must match
/// exactly.
DesignMatrix build_design(std::span<const VolatilityPoint> volatility, const DecomposedSet& set,
                          const ModelSpec& spec);

/// Fits the model for every m in the grid and returns the minimum-AIC fit
/// (ties break to the smaller m). `lag_count` on the result records the
/// chosen m.
RegressionResult fit_volatility_model(std::span<const VolatilityPoint> volatility,
                                      const DecomposedSet& set, ExchangeKind exchange,
                                      ModelForm form, std::span<const int> m_grid,
                                      bool robust_se = false);

/// Human-readable table: coefficient with t-statistic in parentheses and
/// significance stars (0.1 / 0.05 / 0.01), adjusted R^2, AIC, No. of obs.
std::string render_regression_table_text(const RegressionResult& fit, const std::string& title);

/// Machine-readable long form: variable,coef,se,tstat,pvalue,stars.
std::string render_regression_table_csv(const RegressionResult& fit);

} // namespace perpsim
