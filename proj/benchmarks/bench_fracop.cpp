#include <benchmark/benchmark.h>

#include "fracpm/fem.hpp"
#include "fracpm/fracop.hpp"
#include "fracpm/mesh.hpp"

namespace {

void BM_FracInverseApply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto mesh = fracpm::Mesh::buildRect(-2, 2, -2, 2, n, n);
    const auto coeff = fracpm::CoefficientSet::diagonal(10.0, 0.1, nullptr, true);
    auto op = fracpm::buildFracOperator(mesh, coeff, 0.75);
    auto [lo, hi] = fracpm::estimateSpectralInterval(op);
    op.lambda_lo = lo;
    op.lambda_hi = hi;
    fracpm::attachRationalApprox(op, 1e-9);

    fracpm::NodalField f(mesh.vertexCount());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& v = mesh.vertex(i);
        f[i] = v[0] * v[0] - v[1];
    }
    for (auto _ : state) {
        auto c = fracpm::fracInverseApply(op, f);
        benchmark::DoNotOptimize(c);
    }
    state.counters["poles"] = static_cast<double>(op.rational->degree);
}
BENCHMARK(BM_FracInverseApply)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
