#include <benchmark/benchmark.h>

#include "magwell/numverify.hpp"

using namespace magwell;

namespace {

FieldSpec well(int d) {
    if (d == 2) return make_field(2, {"-(1 + q1^2 + q2^2)*q2/2", "(1 + q1^2 + q2^2)*q1/2"});
    return make_field(3, {"-(1 + q1^2 + q2^2 + q3^2)*q2/2", "(1 + q1^2 + q2^2 + q3^2)*q1/2", "0"});
}

GridSetup setup(int d, int n) {
    return {std::vector<int>(d, n), std::vector<double>(d, 0.0), std::vector<double>(d, 2.0), 0.1};
}

void BM_Assemble2D(benchmark::State& st) {
    auto f = well(2);
    auto g = setup(2, static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(build_grid_operator(f, g));
}
BENCHMARK(BM_Assemble2D)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Matvec(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0)), n = static_cast<int>(st.range(1));
    auto op = build_grid_operator(well(d), setup(d, n));
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(op.size()), y(op.size());
    for (auto _ : st) {
        op.apply(x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * op.size());
}
BENCHMARK(BM_Matvec)->Args({2, 256})->Args({3, 48})->Args({3, 64})->Unit(benchmark::kMicrosecond);

void BM_LowestEigs(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0)), n = static_cast<int>(st.range(1));
    auto op = build_grid_operator(well(d), setup(d, n));
    for (auto _ : st) benchmark::DoNotOptimize(lowest_eigs(op, 2));
}
BENCHMARK(BM_LowestEigs)->Args({2, 128})->Args({2, 256})->Args({3, 32})->Unit(benchmark::kMillisecond);

}  // namespace
