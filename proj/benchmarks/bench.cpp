// Micro-benchmarks for the hot paths: kernel two-sample loss and its
// gradient (the per-step training cost), network forward passes (the
// generation cost), rank statistics, and the copula samplers.

#include <benchmark/benchmark.h>

#include <decouplenet/copula.hpp>
#include <decouplenet/empirical.hpp>
#include <decouplenet/net.hpp>
#include <decouplenet/rng.hpp>
#include <decouplenet/rosenblatt.hpp>

using namespace dcn;

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index n, Eigen::Index d, Rng& rng) {
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            m(i, j) = rng.uniform_open();
    return m;
}

net::NetConfig default_net(int d) {
    net::NetConfig c;
    c.d = d;
    c.d_out = 2;
    return c; // hidden layers and activations keep their defaults
}

} // namespace

// --- kernel two-sample loss --------------------------------------------------

static void BM_MmdLoss(benchmark::State& state) {
    const Eigen::Index m = state.range(0);
    Rng rng(1);
    const Eigen::MatrixXd a = uniform_matrix(m, 2, rng);
    const Eigen::MatrixXd b = uniform_matrix(m, 2, rng);
    const std::vector<double> bw = net::TrainConfig{}.bandwidths;
    for (auto _ : state)
        benchmark::DoNotOptimize(net::mmd_loss(a, b, bw));
    state.SetItemsProcessed(state.iterations() * m * m);
}
BENCHMARK(BM_MmdLoss)->Arg(250)->Arg(1000);

static void BM_LossAndGradient(benchmark::State& state) {
    const Eigen::Index m = state.range(0);
    const net::NetConfig c = default_net(3);
    Rng rng(2);
    const net::NetWeights w = net::glorot_init(c, rng);
    const Eigen::MatrixXd x = uniform_matrix(m, 3, rng);
    const Eigen::MatrixXd targets = uniform_matrix(m, 2, rng);
    const std::vector<double> bw = net::TrainConfig{}.bandwidths;
    for (auto _ : state)
        benchmark::DoNotOptimize(net::loss_and_gradient(c, w, x, targets, bw));
}
BENCHMARK(BM_LossAndGradient)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Forward(benchmark::State& state) {
    const net::NetConfig c = default_net(3);
    Rng rng(3);
    const net::NetWeights w = net::glorot_init(c, rng);
    const Eigen::MatrixXd x = uniform_matrix(10000, 3, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(net::forward(c, w, x));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

// --- rank statistics ----------------------------------------------------------

static void BM_CvmScore(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const int d = static_cast<int>(state.range(1));
    Rng rng(4);
    const Sample s{uniform_matrix(n, d, rng)};
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical::cvm_score(s));
}
BENCHMARK(BM_CvmScore)
    ->Args({1000, 2})
    ->Args({10000, 2})
    ->Args({1000, 3})
    ->Args({10000, 3})
    ->Unit(benchmark::kMillisecond);

static void BM_KendallsTau(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    Rng rng(5);
    const Eigen::MatrixXd m = uniform_matrix(n, 2, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical::kendalls_tau(m.col(0), m.col(1)));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KendallsTau)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_PseudoObservations(benchmark::State& state) {
    Rng rng(6);
    const Eigen::MatrixXd m = uniform_matrix(10000, 3, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical::pseudo_observations(m));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_PseudoObservations)->Unit(benchmark::kMillisecond);

// --- samplers and transforms ---------------------------------------------------

static void BM_SampleCopula(benchmark::State& state, const copula::CopulaSpec& spec) {
    Rng rng(7);
    for (auto _ : state)
        benchmark::DoNotOptimize(copula::sample_copula(spec, 10000, rng));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK_CAPTURE(BM_SampleCopula, clayton_d3, copula::CopulaSpec{copula::Clayton{3, 4.0 / 3.0}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SampleCopula, gumbel_d3, copula::CopulaSpec{copula::Gumbel{3, 2.0}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SampleCopula, t_d3,
                  copula::CopulaSpec{copula::StudentT{
                      4.0, num::CorrelationMatrix::exchangeable(3, 0.5)}})
    ->Unit(benchmark::kMillisecond);

static void BM_Rosenblatt(benchmark::State& state, const copula::CopulaSpec& spec,
                          Eigen::Index n) {
    Rng rng(8);
    const Sample u = copula::sample_copula(spec, n, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(rosenblatt::transform(spec, u));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK_CAPTURE(BM_Rosenblatt, clayton_d3,
                  copula::CopulaSpec{copula::Clayton{3, 4.0 / 3.0}}, 10000)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Rosenblatt, t_d3,
                  copula::CopulaSpec{copula::StudentT{
                      4.0, num::CorrelationMatrix::exchangeable(3, 0.5)}},
                  1000)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
