#include "perpsim/errors.hpp"
#include "perpsim/rng.hpp"
#include "perpsim/volmodel.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

using namespace perpsim;

namespace {

std::vector<Date> consecutive_dates(std::size_t n) {
    std::vector<Date> out;
    Date d(2022, 1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(d);
        d = d.next_day();
    }
    return out;
}

std::vector<double> positive_ar1(std::size_t n, double level, double phi, Rng& rng) {
    std::vector<double> out(n);
    double state = 0;
    for (std::size_t t = 0; t < n; ++t) {
        state = phi * state + rng.normal();
        out[t] = level * std::exp(0.1 * state);
    }
    return out;
}

DecomposedSeries make_series(const std::string& name, std::vector<double> expected,
                             std::vector<double> unexpected) {
    DecomposedSeries s;
    s.name = name;
    s.warmup.assign(expected.size(), false);
    s.expected = std::move(expected);
    s.unexpected = std::move(unexpected);
    return s;
}

/// Synthetic decomposed set: every activity gets an independent seeded
/// expected and unexpected component at USD scale.
DecomposedSet synthetic_set(std::size_t n, std::uint64_t seed, bool with_leverage = false) {
    Rng rng(seed);
    DecomposedSet set;
    set.dates = consecutive_dates(n);
    const std::vector<std::string> names = {"oi_long", "oi_short", "volume",
                                            "liq_long", "liq_short"};
    for (const auto& name : names) {
        auto exp_part = positive_ar1(n, name == "volume" ? 2e9 : 5e8, 0.9, rng);
        auto unexp_part = positive_ar1(n, name == "volume" ? 4e8 : 1e8, 0.2, rng);
        set.series[name] = make_series(name, std::move(exp_part), std::move(unexp_part));
    }
    if (with_leverage) {
        for (const auto& name : {"lev_long", "lev_short"}) {
            auto exp_part = positive_ar1(n, 4.0, 0.8, rng);
            auto unexp_part = positive_ar1(n, 0.5, 0.1, rng);
            set.series[name] = make_series(name, std::move(exp_part), std::move(unexp_part));
        }
    }
    return set;
}

std::vector<VolatilityPoint> to_vol(const std::vector<Date>& dates,
                                    const std::vector<double>& sigma) {
    std::vector<VolatilityPoint> out;
    for (std::size_t t = 0; t < dates.size(); ++t) out.push_back({dates[t], sigma[t]});
    return out;
}

} // namespace

TEST_CASE("design shape: m=2 with the full DEX roster gives 98 rows x 13 columns") {
    const std::size_t n = 100;
    auto set = synthetic_set(n, 1);
    std::vector<double> sigma(n, 0.02);
    const ModelSpec spec = make_model_spec(ExchangeKind::Vamm, ModelForm::ActivityOnly, 2);
    CHECK(spec.roster.size() == 10);
    const DesignMatrix design = build_design(to_vol(set.dates, sigma), set, spec);
    CHECK(design.response.size() == 98);
    CHECK(design.columns.size() == 13);
    CHECK(design.names[0] == "intercept");
    CHECK(design.names[1] == "sigma_lag1");
    CHECK(design.names[2] == "sigma_lag2");
    CHECK(design.names[3] == "exp_oi_long");
    CHECK(design.names[12] == "unexp_liq_short");
}

TEST_CASE("CEX roster excludes long open interest and rejects it when forced") {
    const ModelSpec cex = make_model_spec(ExchangeKind::Cex, ModelForm::ActivityOnly, 1);
    for (const auto& name : cex.roster) CHECK(name.find("oi_long") == std::string::npos);
    CHECK(cex.roster.size() == 8);

    ModelSpec forced = cex;
    forced.roster.push_back("exp_oi_long");
    CHECK_THROWS_AS(forced.validate(), DataError);
}

TEST_CASE("one design row matches hand-assembled values") {
    const std::size_t n = 30;
    auto set = synthetic_set(n, 17);
    Rng rng(18);
    std::vector<double> sigma(n);
    for (auto& v : sigma) v = 0.02 + 0.001 * rng.normal();
    const ModelSpec spec = make_model_spec(ExchangeKind::Vamm, ModelForm::ActivityOnly, 2);
    const DesignMatrix design = build_design(to_vol(set.dates, sigma), set, spec);

    // row for t = 7 sits at index 7 - m = 5
    const std::size_t row = 5, t = 7;
    CHECK(design.response[row] == sigma[t]);
    CHECK(design.columns[0][row] == 1.0);
    CHECK(design.columns[1][row] == sigma[t - 1]);
    CHECK(design.columns[2][row] == sigma[t - 2]);
    CHECK(design.columns[3][row] == set.series.at("oi_long").expected[t]);
    CHECK(design.columns[6][row] == set.series.at("oi_long").unexpected[t]);
    CHECK(design.columns[8][row] == set.series.at("volume").unexpected[t]);
    CHECK(design.columns[12][row] == set.series.at("liq_short").unexpected[t]);
}

TEST_CASE("warm-up rows are dropped from the design") {
    const std::size_t n = 50;
    auto set = synthetic_set(n, 3);
    // mark days 4..6 of one roster series as warm-up
    for (std::size_t t = 4; t <= 6; ++t) set.series["volume"].warmup[t] = true;
    std::vector<double> sigma(n, 0.02);
    const ModelSpec spec = make_model_spec(ExchangeKind::Vamm, ModelForm::ActivityOnly, 2);
    const DesignMatrix design = build_design(to_vol(set.dates, sigma), set, spec);
    CHECK(design.response.size() == n - 2 - 3);
    for (const Date& d : design.row_dates) {
        CHECK(d != set.dates[4]);
        CHECK(d != set.dates[5]);
        CHECK(d != set.dates[6]);
    }
}

TEST_CASE("misaligned dates and missing roster series are rejected") {
    const std::size_t n = 40;
    auto set = synthetic_set(n, 9);
    std::vector<double> sigma(n, 0.02);
    auto vol = to_vol(set.dates, sigma);
    vol[10].date = vol[10].date.next_day();
    const ModelSpec spec = make_model_spec(ExchangeKind::Vamm, ModelForm::ActivityOnly, 1);
    CHECK_THROWS_AS(build_design(vol, set, spec), DataError);

    auto incomplete = synthetic_set(n, 9);
    incomplete.series.erase("liq_short");
    CHECK_THROWS_AS(build_design(to_vol(incomplete.dates, sigma), incomplete, spec), DataError);
}

TEST_CASE("eq3 adds exactly the four leverage coefficients") {
    const ModelSpec eq2 = make_model_spec(ExchangeKind::Oracle, ModelForm::ActivityOnly, 1);
    const ModelSpec eq3 = make_model_spec(ExchangeKind::Oracle, ModelForm::WithLeverage, 1);
    CHECK(eq3.roster.size() == eq2.roster.size() + 4);
    int leverage_terms = 0;
    for (const auto& name : eq3.roster)
        if (name.find("lev_") != std::string::npos) ++leverage_terms;
    CHECK(leverage_terms == 4);
}

TEST_CASE("generate-and-recover: known coefficients come back within 3 SEs") {
    const std::size_t n = 700;
    auto set = synthetic_set(n, 77);
    std::map<std::string, double> truth = {
        {"intercept", 0.01},      {"sigma_lag1", 0.25},
        {"exp_oi_long", 1.5e-12}, {"exp_oi_short", -2.0e-12}, {"exp_volume", 1.0e-12},
        {"unexp_oi_long", 4.0e-12}, {"unexp_oi_short", -6.0e-12}, {"unexp_volume", 3.0e-9},
        {"exp_liq_long", 5.0e-12},  {"exp_liq_short", -4.0e-12},
        {"unexp_liq_long", 8.0e-12}, {"unexp_liq_short", 6.0e-12}};

    Rng noise(78);
    std::vector<double> sigma(n, 0.0);
    sigma[0] = 0.02;
    for (std::size_t t = 1; t < n; ++t) {
        double v = truth["intercept"] + truth["sigma_lag1"] * sigma[t - 1];
        for (const auto& name : {"oi_long", "oi_short", "volume", "liq_long", "liq_short"}) {
            v += truth[std::string("exp_") + name] * set.series.at(name).expected[t];
            v += truth[std::string("unexp_") + name] * set.series.at(name).unexpected[t];
        }
        sigma[t] = v + 0.002 * noise.normal();
    }

    const std::vector<int> m_grid = {1};
    const RegressionResult fit = fit_volatility_model(to_vol(set.dates, sigma), set,
                                                      ExchangeKind::Vamm,
                                                      ModelForm::ActivityOnly, m_grid);
    CHECK(fit.lag_count == 1);
    for (const auto& [name, value] : truth) {
        const int j = fit.index_of(name);
        REQUIRE(j >= 0);
        CHECK(std::fabs(fit.coef[static_cast<std::size_t>(j)] - value) <=
              3.0 * fit.se[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("CEX fit drops long-OI terms; AIC picks the lag grid minimum deterministically") {
    const std::size_t n = 400;
    auto set = synthetic_set(n, 5);
    Rng rng(6);
    std::vector<double> sigma(n);
    double prev = 0.02;
    for (auto& v : sigma) {
        prev = 0.01 + 0.4 * prev + 0.002 * rng.normal();
        v = prev;
    }
    const std::vector<int> m_grid = {1, 2, 3};
    const auto fit = fit_volatility_model(to_vol(set.dates, sigma), set, ExchangeKind::Cex,
                                          ModelForm::ActivityOnly, m_grid);
    CHECK(fit.index_of("exp_oi_long") < 0);
    CHECK(fit.index_of("unexp_oi_long") < 0);
    CHECK(fit.index_of("exp_oi_short") >= 0);
    CHECK(fit.lag_count >= 1);

    const auto again = fit_volatility_model(to_vol(set.dates, sigma), set, ExchangeKind::Cex,
                                            ModelForm::ActivityOnly, m_grid);
    CHECK(again.lag_count == fit.lag_count);
    for (std::size_t j = 0; j < fit.coef.size(); ++j) CHECK(again.coef[j] == fit.coef[j]);

    // chosen m is the AIC argmin over the grid
    for (const int m : m_grid) {
        const std::vector<int> single = {m};
        const auto one = fit_volatility_model(to_vol(set.dates, sigma), set, ExchangeKind::Cex,
                                              ModelForm::ActivityOnly, single);
        CHECK(fit.aic <= one.aic + 1e-9 * std::fabs(one.aic));
    }
}

TEST_CASE("regression tables carry the layout of the reported results") {
    const std::size_t n = 200;
    auto set = synthetic_set(n, 50, true);
    Rng rng(51);
    std::vector<double> sigma(n);
    for (auto& v : sigma) v = 0.02 + 0.002 * rng.normal();
    const std::vector<int> m_grid = {1};
    const auto fit = fit_volatility_model(to_vol(set.dates, sigma), set, ExchangeKind::Oracle,
                                          ModelForm::WithLeverage, m_grid);

    const std::string text = render_regression_table_text(fit, "delta");
    CHECK(text.find("Adjusted R2") != std::string::npos);
    CHECK(text.find("AIC") != std::string::npos);
    CHECK(text.find("No. of obs.") != std::string::npos);
    CHECK(text.find("(") != std::string::npos); // t-stats in parentheses
    CHECK(text.find("Stars: * 0.1, ** 0.05, *** 0.01") != std::string::npos);
    CHECK(text.find("exp_lev_long") != std::string::npos);

    const std::string csv = render_regression_table_csv(fit);
    CHECK(csv.rfind("variable,coef,se,tstat,pvalue,stars\n", 0) == 0);
    CHECK(csv.find("n_obs") != std::string::npos);
}
