#include <benchmark/benchmark.h>

#include "fracpm/fem.hpp"
#include "fracpm/mesh.hpp"

namespace {

fracpm::Mesh makeMesh(int n) { return fracpm::Mesh::buildRect(-2, 2, -2, 2, n, n); }

void BM_StiffnessAssembly(benchmark::State& state) {
    const auto mesh = makeMesh(static_cast<int>(state.range(0)));
    const auto coeff = fracpm::CoefficientSet::diagonal(10.0, 0.1, nullptr, true);
    for (auto _ : state) {
        auto k = fracpm::assembleStiffnessA(mesh, coeff);
        benchmark::DoNotOptimize(k);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(mesh.elementCount()));
}
BENCHMARK(BM_StiffnessAssembly)->Arg(32)->Arg(64)->Arg(128);

void BM_MassAssembly(benchmark::State& state) {
    const auto mesh = makeMesh(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto m = fracpm::assembleMassConsistent(mesh);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_MassAssembly)->Arg(32)->Arg(64)->Arg(128);

void BM_ConvectionRhs(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto mesh = makeMesh(n);
    const auto coeff = fracpm::CoefficientSet::diagonal(10.0, 0.1, nullptr, true);
    const fracpm::CutoffParams p(1e-3, 4.0);
    fracpm::NodalField rho(mesh.vertexCount()), c(mesh.vertexCount());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const auto& v = mesh.vertex(i);
        rho[i] = 1.0 + 0.5 * v[0] * v[1];
        c[i] = v[0] - v[1] * v[1];
    }
    for (auto _ : state) {
        auto b = fracpm::assembleConvectionRhs(mesh, rho, c, p, coeff);
        benchmark::DoNotOptimize(b);
    }
}
BENCHMARK(BM_ConvectionRhs)->Arg(32)->Arg(64)->Arg(128);

}  // namespace
