#include "perpsim/agents.hpp"
#include "perpsim/arima.hpp"
#include "perpsim/lob_exchange.hpp"
#include "perpsim/ols.hpp"
#include "perpsim/rng.hpp"
#include "perpsim/vamm.hpp"
#include "perpsim/volatility.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace perpsim;

void bm_garman_klass(benchmark::State& state) {
    const Candle c{Date(2023, 1, 1), 105, 110, 100, 106};
    for (auto _ : state) benchmark::DoNotOptimize(garman_klass(c).sigma);
}
BENCHMARK(bm_garman_klass);

void bm_uniform_swap(benchmark::State& state) {
    VammPool pool = VammPool::uniform(1e6, 100.0);
    Rng rng(7);
    for (auto _ : state) {
        const double in = 100.0 + 900.0 * rng.uniform();
        const auto r = pool.swap_quote_in(in);
        pool.swap_base_in(r.amount_out); // return trip keeps reserves bounded
        benchmark::DoNotOptimize(pool.price());
    }
}
BENCHMARK(bm_uniform_swap);

void bm_concentrated_swap(benchmark::State& state) {
    VammPool pool = VammPool::concentrated(10000.0, 60);
    pool.add_liquidity("lp", 8000, 12500, 10.0, 10.0 * 10000.0 * 0.969, 1.0);
    Rng rng(7);
    for (auto _ : state) {
        const double in = 100.0 + 900.0 * rng.uniform();
        const auto r = pool.swap_quote_in(in);
        pool.swap_base_in(r.amount_out);
        benchmark::DoNotOptimize(pool.price());
    }
}
BENCHMARK(bm_concentrated_swap);

void bm_lob_submit(benchmark::State& state) {
    LobExchange lob(10000.0, MarginParams{});
    lob.fund("maker", 1e12);
    lob.fund("taker", 1e12);
    lob.begin_day(Date(2023, 1, 1));
    Rng rng(7);
    std::uint64_t i = 0;
    for (auto _ : state) {
        AgentOrder limit;
        limit.owner = "maker";
        limit.kind = OrderKind::Limit;
        limit.side = (i % 2) ? Side::Buy : Side::Sell;
        limit.limit_price = 10000.0 + ((i % 2) ? -1.0 : 1.0) * (1.0 + rng.uniform() * 5.0);
        limit.quantity = 0.1;
        lob.submit(limit);
        AgentOrder market;
        market.owner = "taker";
        market.kind = OrderKind::Market;
        market.side = (i % 2) ? Side::Sell : Side::Buy;
        market.quantity = 0.1;
        benchmark::DoNotOptimize(lob.submit(market));
        ++i;
    }
}
BENCHMARK(bm_lob_submit);

std::vector<double> noisy_series(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    double prev = 0;
    for (auto& v : out) {
        prev = 0.7 * prev + rng.normal();
        v = prev;
    }
    return out;
}

void bm_ols_200x8(benchmark::State& state) {
    Rng rng(11);
    const std::size_t n = 200, k = 8;
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<std::string> names;
    std::vector<double> y(n);
    for (std::size_t j = 0; j < k; ++j) {
        names.push_back("x" + std::to_string(j));
        for (std::size_t i = 0; i < n; ++i) cols[j][i] = j == 0 ? 1.0 : rng.normal();
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = cols[1][i] * 2.0 + rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(ols(cols, y, names).rss);
}
BENCHMARK(bm_ols_200x8);

void bm_arima_fit_111(benchmark::State& state) {
    const auto series = noisy_series(1000, 3);
    for (auto _ : state) benchmark::DoNotOptimize(fit_arima(series, {1, 0, 1}).rss);
}
BENCHMARK(bm_arima_fit_111);

} // namespace

BENCHMARK_MAIN();
