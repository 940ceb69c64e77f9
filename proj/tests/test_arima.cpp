#include "perpsim/arima.hpp"
#include "perpsim/errors.hpp"
#include "perpsim/rng.hpp"
#include "perpsim/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace perpsim;

namespace {

std::vector<double> simulate_ar1(double phi, std::size_t n, std::uint64_t seed,
                                 double mean_level = 0.0) {
    Rng rng(seed);
    std::vector<double> y(n);
    double prev = 0;
    for (std::size_t t = 0; t < n; ++t) {
        prev = phi * prev + rng.normal();
        y[t] = mean_level + prev;
    }
    return y;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double mu = 0.0) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (auto& v : y) v = mu + rng.normal();
    return y;
}

} // namespace

TEST_CASE("companion spectral radius") {
    CHECK(companion_spectral_radius(std::vector<double>{}) == 0.0);
    CHECK(companion_spectral_radius(std::vector<double>{0.5}) == doctest::Approx(0.5));
    CHECK(companion_spectral_radius(std::vector<double>{1.1}) == doctest::Approx(1.1));
    // AR(2) with roots just inside: phi1=1.2, phi2=-0.35 -> factors (1-0.7L)(1-0.5L)
    CHECK(companion_spectral_radius(std::vector<double>{1.2, -0.35}) == doctest::Approx(0.7));
}

TEST_CASE("constant series with drift-only order reproduces the constant") {
    const std::vector<double> y(64, 41.5);
    const auto fit = fit_arima(y, {0, 0, 0});
    CHECK(fit.converged);
    CHECK(fit.mean == doctest::Approx(41.5).epsilon(1e-12));
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(fit.fitted[t] == doctest::Approx(41.5).epsilon(1e-12));
        CHECK(fit.residuals[t] == doctest::Approx(0.0).scale(41.5).epsilon(1e-12));
    }
}

TEST_CASE("white noise with drift-only order fits the sample mean exactly") {
    const auto y = white_noise(500, 11, 3.0);
    const auto fit = fit_arima(y, {0, 0, 0});
    CHECK(fit.converged);
    CHECK(fit.mean == doctest::Approx(mean(y)).epsilon(1e-14));
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(fit.fitted[t] == doctest::Approx(mean(y)).epsilon(1e-12));
        CHECK(fit.residuals[t] == doctest::Approx(y[t] - mean(y)).scale(1.0).epsilon(1e-10));
    }
}

TEST_CASE("seeded AR(1) recovery within three standard errors") {
    // 3 * sqrt((1 - 0.8^2) / 2000) = 0.0402
    const auto y = simulate_ar1(0.8, 2000, 424242);
    const auto fit = fit_arima(y, {1, 0, 0});
    CHECK(fit.converged);
    CHECK(fit.stationary);
    REQUIRE(fit.ar.size() == 1);
    CHECK(std::fabs(fit.ar[0] - 0.8) < 0.040249223594996206);
    CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("reconstruction identity holds at every point") {
    const auto y = simulate_ar1(0.6, 300, 7, 1e9); // USD-scale level
    for (const ArimaOrder order : {ArimaOrder{1, 0, 0}, ArimaOrder{0, 1, 1}, ArimaOrder{2, 1, 1}}) {
        const auto fit = fit_arima(y, order);
        for (std::size_t t = 0; t < y.size(); ++t) {
            const double recon = fit.fitted[t] + fit.residuals[t];
            CHECK(std::fabs(recon - y[t]) <= 1e-9 * std::max(1.0, std::fabs(y[t])));
        }
        const std::size_t warm = static_cast<std::size_t>(order.d + order.p);
        for (std::size_t t = 0; t < warm; ++t) {
            CHECK(fit.warmup[t]);
            CHECK(fit.residuals[t] == 0.0);
        }
        CHECK(!fit.warmup[warm]);
    }
}

TEST_CASE("MA component is estimated and invertible on an MA(1) simulation") {
    Rng rng(99);
    const std::size_t n = 2000;
    std::vector<double> y(n);
    double prev_eps = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double eps = rng.normal();
        y[t] = eps + 0.5 * prev_eps;
        prev_eps = eps;
    }
    const auto fit = fit_arima(y, {0, 0, 1});
    CHECK(fit.converged);
    CHECK(fit.invertible);
    REQUIRE(fit.ma.size() == 1);
    CHECK(fit.ma[0] == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("select_order: white noise prefers the drift-only model") {
    const auto y = white_noise(2000, 1234);
    const ArimaGrid grid{2, 0, 2};
    const ArimaOrder chosen = select_order(y, grid);
    const double aic_000 = fit_arima(y, {0, 0, 0}).aic;
    // exhaustive evaluation: the drift-only AIC is within 4 of every candidate
    for (int p = 0; p <= grid.max_p; ++p)
        for (int q = 0; q <= grid.max_q; ++q) {
            const auto fit = fit_arima(y, {p, 0, q});
            if (!fit.converged || !fit.stationary) continue;
            CHECK(aic_000 <= fit.aic + 4.0);
        }
    CHECK(chosen.d == 0);
    CHECK(chosen.p + chosen.q <= 2);
}

TEST_CASE("select_order: AR(1) input selects an autoregressive model") {
    const auto y = simulate_ar1(0.8, 2000, 777);
    const ArimaOrder chosen = select_order(y, ArimaGrid{2, 1, 2});
    CHECK(chosen.p >= 1);
    CHECK(chosen.d == 0);
}

TEST_CASE("series too short for the whole grid raises the no-candidate error") {
    const std::vector<double> y(8, 1.0);
    CHECK_THROWS_AS(select_order(y, ArimaGrid{2, 1, 2}), NumericError);
    CHECK_THROWS_AS(fit_arima(y, {1, 0, 1}), DataError);
}

TEST_CASE("decompose: constant series splits into constant expected and zero unexpected") {
    const std::vector<double> y(40, 7.25);
    const auto dec = decompose(y, "volume", ArimaGrid{1, 1, 1});
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(dec.expected[t] == doctest::Approx(7.25).epsilon(1e-9));
        CHECK(dec.unexpected[t] == doctest::Approx(0.0).scale(7.25).epsilon(1e-9));
    }
}

TEST_CASE("decompose reconstruction and AR(1) innovation variance share") {
    const double phi = 0.8;
    const auto y = simulate_ar1(phi, 2000, 31337);
    const auto dec = decompose(y, "oi_long", ArimaGrid{2, 0, 1});
    for (std::size_t t = 0; t < y.size(); ++t)
        CHECK(std::fabs(dec.expected[t] + dec.unexpected[t] - y[t]) <=
              1e-9 * std::max(1.0, std::fabs(y[t])));
    // theoretical share: var(eps)/var(y) = 1 - phi^2
    CHECK(variance(dec.unexpected) / variance(y) ==
          doctest::Approx(1.0 - phi * phi).epsilon(0.2));
}

TEST_CASE("shift equivariance at d = 0") {
    const auto y = simulate_ar1(0.5, 400, 2022);
    std::vector<double> shifted(y);
    const double c = 1000.0;
    for (auto& v : shifted) v += c;
    const auto base = fit_arima(y, {1, 0, 0});
    const auto moved = fit_arima(shifted, {1, 0, 0});
    CHECK(moved.mean == doctest::Approx(base.mean + c).epsilon(1e-6));
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(std::fabs(moved.fitted[t] - (base.fitted[t] + c)) <= 1e-6 * c);
        CHECK(std::fabs(moved.residuals[t] - base.residuals[t]) <= 1e-6 * c);
    }
}

TEST_CASE("residual whiteness: Ljung-Box below the 99% critical value in 90% of runs") {
    // chi-squared(10) 99% critical value
    const double critical = 23.209251158954356;
    int pass = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto y = simulate_ar1(0.8, 600, 9000 + static_cast<std::uint64_t>(rep));
        const auto fit = fit_arima(y, {1, 0, 0});
        std::vector<double> clean(fit.residuals.begin() + 1, fit.residuals.end());
        if (ljung_box_stat(clean, 10) < critical) ++pass;
    }
    CHECK(pass >= 45);
}

TEST_CASE("determinism: identical input gives bit-identical decomposition") {
    const auto y = simulate_ar1(0.7, 500, 5150);
    const auto a = decompose(y, "volume", ArimaGrid{2, 1, 2});
    const auto b = decompose(y, "volume", ArimaGrid{2, 1, 2});
    CHECK(a.order == b.order);
    REQUIRE(a.expected.size() == b.expected.size());
    for (std::size_t t = 0; t < a.expected.size(); ++t) {
        CHECK(a.expected[t] == b.expected[t]);
        CHECK(a.unexpected[t] == b.unexpected[t]);
    }
}

TEST_CASE("non-finite input is rejected") {
    std::vector<double> y(50, 1.0);
    y[10] = std::nan("");
    CHECK_THROWS_AS(fit_arima(y, {1, 0, 0}), DataError);
}
