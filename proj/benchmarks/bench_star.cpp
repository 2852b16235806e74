#include <benchmark/benchmark.h>

#include "magwell/bnf.hpp"

using namespace magwell;

namespace {

template <class S>
Series<S> dense_symbol(int nmax, int tmax) {
    auto L = e1_layout(1, 1, false);
    Series<S> x = Series<S>::variable(L, nmax, tmax, L->osc_a(0)), xi = Series<S>::variable(L, nmax, tmax, L->osc_b(0));
    Series<S> t = Series<S>::variable(L, nmax, tmax, L->t(0)), tau = Series<S>::variable(L, nmax, tmax, L->tau(0));
    Series<S> one = Series<S>::constant(L, nmax, tmax, Field<S>::one());
    Series<S> a = one + x + xi + t + tau, p = one;
    for (int i = 0; i < nmax; ++i) p = mul_pointwise(p, a);
    return p;
}

void BM_StarExact(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto a = dense_symbol<Quad>(n, 2);
    for (auto _ : st) benchmark::DoNotOptimize(star(a, a));
    st.counters["terms"] = static_cast<double>(a.size());
}
BENCHMARK(BM_StarExact)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_StarFloat(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto a = dense_symbol<cplx>(n, 2);
    for (auto _ : st) benchmark::DoNotOptimize(star(a, a));
    st.counters["terms"] = static_cast<double>(a.size());
}
BENCHMARK(BM_StarFloat)->Arg(3)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Birkhoff(benchmark::State& st) {
    const int r = static_cast<int>(st.range(0));
    auto L = e1_layout(1, 0, false);
    auto sym = change_basis(parse_symbol("z2 + 0.01*x1^4 + 0.1*x1^3", L, r - 1, 0));
    for (auto _ : st) benchmark::DoNotOptimize(birkhoff(sym, r));
}
BENCHMARK(BM_Birkhoff)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
