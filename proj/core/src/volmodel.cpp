#include "perpsim/volmodel.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"
#include "perpsim/parallel.hpp"
#include "perpsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace perpsim {
namespace {

// Regressor order mirrors the regression tables: expected activity terms,
// unexpected activity terms, then liquidation, then leverage.
const std::vector<std::string> kActivityOrder = {"oi_long", "oi_short", "volume"};
const std::vector<std::string> kLiquidationOrder = {"liq_long", "liq_short"};
const std::vector<std::string> kLeverageOrder = {"lev_long", "lev_short"};

} // namespace

ExchangeKind exchange_kind_from_string(const std::string& s) {
    if (s == "cex") return ExchangeKind::Cex;
    if (s == "vamm") return ExchangeKind::Vamm;
    if (s == "oracle") return ExchangeKind::Oracle;
    throw DataError("unknown exchange kind '" + s + "' (expected cex|vamm|oracle)");
}

std::string to_string(ExchangeKind kind) {
    switch (kind) {
        case ExchangeKind::Cex: return "cex";
        case ExchangeKind::Vamm: return "vamm";
        case ExchangeKind::Oracle: return "oracle";
    }
    return "?";
}

ModelForm model_form_from_string(const std::string& s) {
    if (s == "eq2") return ModelForm::ActivityOnly;
    if (s == "eq3") return ModelForm::WithLeverage;
    throw DataError("unknown model '" + s + "' (expected eq2|eq3)");
}

std::string to_string(ModelForm form) {
    return form == ModelForm::ActivityOnly ? "eq2" : "eq3";
}

const DecomposedSeries& DecomposedSet::at(const std::string& name) const {
    const auto it = series.find(name);
    if (it == series.end()) throw DataError("decomposed set is missing series '" + name + "'");
    return it->second;
}

DecomposedSet decompose_activity(const ActivitySeries& activity, ArimaGrid grid, unsigned jobs) {
    const auto names = activity_column_names(activity);
    DecomposedSet set;
    set.dates = activity.dates();
    std::vector<DecomposedSeries> results(names.size());
    parallel_for(names.size(), jobs, [&](std::size_t i) {
        results[i] = decompose(activity.column(names[i]), names[i], grid);
    });
    for (std::size_t i = 0; i < names.size(); ++i) set.series[names[i]] = std::move(results[i]);
    return set;
}

void ModelSpec::validate() const {
    if (lag_count < 1) throw DataError("model spec: lag count m must be >= 1");
    if (exchange == ExchangeKind::Cex) {
        for (const auto& name : roster)
            if (name.find("oi_long") != std::string::npos)
                throw DataError("model spec: CEX roster must not contain long open interest "
                                "(long OI equals short OI on a LOB venue)");
    }
}

ModelSpec make_model_spec(ExchangeKind exchange, ModelForm form, int lag_count) {
    ModelSpec spec;
    spec.lag_count = lag_count;
    spec.form = form;
    spec.exchange = exchange;

    auto add = [&](const std::string& prefix, const std::vector<std::string>& names) {
        for (const auto& n : names) {
            if (exchange == ExchangeKind::Cex && n == "oi_long") continue;
            spec.roster.push_back(prefix + n);
        }
    };
    add("exp_", kActivityOrder);
    add("unexp_", kActivityOrder);
    add("exp_", kLiquidationOrder);
    add("unexp_", kLiquidationOrder);
    if (form == ModelForm::WithLeverage) {
        add("exp_", kLeverageOrder);
        add("unexp_", kLeverageOrder);
    }
    spec.validate();
    return spec;
}

DesignMatrix build_design(std::span<const VolatilityPoint> volatility, const DecomposedSet& set,
                          const ModelSpec& spec) {
    spec.validate();
    const std::size_t n = volatility.size();
    if (n != set.dates.size())
        throw DataError("build_design: volatility and activity series have different lengths");
    for (std::size_t t = 0; t < n; ++t)
        if (volatility[t].date != set.dates[t])
            throw DataError("build_design: date mismatch at " + volatility[t].date.to_string() +
                            " vs " + set.dates[t].to_string());

    struct RosterEntry {
        std::string column;  // design column name
        const std::vector<double>* values;
        const std::vector<bool>* warmup;
    };
    std::vector<RosterEntry> entries;
    for (const auto& column : spec.roster) {
        std::string base;
        bool expected = false;
        if (column.rfind("exp_", 0) == 0) {
            expected = true;
            base = column.substr(4);
        } else if (column.rfind("unexp_", 0) == 0) {
            base = column.substr(6);
        } else {
            throw DataError("build_design: roster entry '" + column +
                            "' must start with exp_ or unexp_");
        }
        const DecomposedSeries& s = set.at(base);
        if (s.expected.size() != n)
            throw DataError("build_design: series '" + base + "' length mismatch");
        entries.push_back({column, expected ? &s.expected : &s.unexpected, &s.warmup});
    }

    const std::size_t m = static_cast<std::size_t>(spec.lag_count);
    DesignMatrix out;
    out.names.push_back("intercept");
    for (std::size_t l = 1; l <= m; ++l) out.names.push_back("sigma_lag" + std::to_string(l));
    for (const auto& e : entries) out.names.push_back(e.column);
    out.columns.assign(out.names.size(), {});

    for (std::size_t t = m; t < n; ++t) {
        bool usable = true;
        for (const auto& e : entries)
            if ((*e.warmup)[t]) { usable = false; break; }
        if (!usable) continue;
        out.response.push_back(volatility[t].sigma);
        out.row_dates.push_back(volatility[t].date);
        std::size_t col = 0;
        out.columns[col++].push_back(1.0);
        for (std::size_t l = 1; l <= m; ++l) out.columns[col++].push_back(volatility[t - l].sigma);
        for (const auto& e : entries) out.columns[col++].push_back((*e.values)[t]);
    }
    if (out.response.empty()) throw DataError("build_design: no usable rows after lag/warm-up drops");
    return out;
}

RegressionResult fit_volatility_model(std::span<const VolatilityPoint> volatility,
                                      const DecomposedSet& set, ExchangeKind exchange,
                                      ModelForm form, std::span<const int> m_grid,
                                      bool robust_se) {
    if (m_grid.empty()) throw DataError("fit_volatility_model: empty m grid");
    bool any = false;
    RegressionResult best;
    std::string last_error;
    for (const int m : m_grid) {
        try {
            const ModelSpec spec = make_model_spec(exchange, form, m);
            const DesignMatrix design = build_design(volatility, set, spec);
            RegressionResult fit = ols(design.columns, design.response, design.names, robust_se);
            fit.lag_count = m;
            if (!any || fit.aic < best.aic || (fit.aic == best.aic && m < best.lag_count)) {
                best = std::move(fit);
                any = true;
            }
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (!any)
        throw NumericError("fit_volatility_model: every lag candidate failed (" + last_error + ")");
    return best;
}

std::string render_regression_table_text(const RegressionResult& fit, const std::string& title) {
    std::ostringstream ss;
    ss << title << '\n';
    ss << std::string(title.size(), '=') << '\n';
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-18s  %14s  %12s\n", "Variable", "Coefficient", "(t-stat)");
    ss << buf;
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%-18s  %14.6g  (%.2f)%s\n", fit.names[j].c_str(),
                      fit.coef[j], fit.tstat[j], significance_stars(fit.pvalue[j]));
        ss << buf;
    }
    std::snprintf(buf, sizeof(buf), "Adjusted R2: %.3f\nAIC: %.1f\nNo. of obs.: %zu\n",
                  fit.adj_r2, fit.aic, fit.n_obs);
    ss << buf;
    ss << "Chosen lag m: " << fit.lag_count << '\n';
    ss << "Stars: * 0.1, ** 0.05, *** 0.01\n";
    return ss.str();
}

std::string render_regression_table_csv(const RegressionResult& fit) {
    std::ostringstream ss;
    ss << "variable,coef,se,tstat,pvalue,stars\n";
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        ss << fit.names[j] << ',' << format_double(fit.coef[j]) << ',' << format_double(fit.se[j])
           << ',' << format_double(fit.tstat[j]) << ',' << format_double(fit.pvalue[j]) << ','
           << significance_stars(fit.pvalue[j]) << '\n';
    }
    ss << "adj_r2," << format_double(fit.adj_r2) << ",,,,\n";
    ss << "aic," << format_double(fit.aic) << ",,,,\n";
    ss << "n_obs," << fit.n_obs << ",,,,\n";
    ss << "lag_m," << fit.lag_count << ",,,,\n";
    return ss.str();
}

} // namespace perpsim
