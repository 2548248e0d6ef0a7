// Microbenchmarks for the initialization pipeline's hot pieces.

#include "ibci/campaign.hpp"
#include "ibci/dataset.hpp"
#include "ibci/initializers.hpp"
#include "ibci/network.hpp"
#include "ibci/rng.hpp"
#include "ibci/scoring.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ibci;

Dataset make_blobs(Eigen::Index dim, Eigen::Index n_per_class) {
    Rng rng(1);
    std::vector<Eigen::VectorXd> means(10, Eigen::VectorXd::Zero(dim));
    for (auto& mu : means)
        for (Eigen::Index q = 0; q < dim; ++q) mu[q] = 0.3 * rng.normal();
    return synth_gaussians(means, 1.0, n_per_class, 2);
}

void BM_GenerateCandidates(benchmark::State& state) {
    const auto k = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const CandidateSet c = generate_candidates(BaseInit::kXavier, 784, 256, k, 7);
        benchmark::DoNotOptimize(c.weights.data());
    }
}
BENCHMARK(BM_GenerateCandidates)->Arg(1)->Arg(3)->Arg(5);

void BM_Scores(benchmark::State& state) {
    const Dataset ds = make_blobs(784, 200);
    const ClassPartition part = partition(ds);
    const CandidateSet cands = generate_candidates(BaseInit::kXavier, 784, 256, 3, 7);
    const Eigen::MatrixXd acts = (ds.features * cands.weights).cwiseMax(0.0);
    for (auto _ : state) {
        const Eigen::VectorXd s =
            combine_scores(iim_scores(acts), tie_scores(acts, part), 0.9);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(BM_Scores);

void BM_CampaignSelect(benchmark::State& state) {
    const CandidateSet cands = generate_candidates(BaseInit::kXavier, 784, 256, 3, 7);
    Rng rng(3);
    Eigen::VectorXd scores(cands.weights.cols());
    for (Eigen::Index i = 0; i < scores.size(); ++i) scores[i] = rng.uniform();
    for (auto _ : state) {
        const Eigen::MatrixXd w = campaign_select(cands, scores, 256);
        benchmark::DoNotOptimize(w.data());
    }
}
BENCHMARK(BM_CampaignSelect);

void BM_IbciInitMlp3(benchmark::State& state) {
    const Dataset ds = make_blobs(784, 300);
    NetworkSpec spec;
    spec.widths = {784, 256, 100, 10};
    InitStrategy st;
    st.kind = StrategyKind::kIbci;
    st.k = static_cast<int>(state.range(0));
    st.scoring_subset = ds.size();
    for (auto _ : state) {
        const Mlp mlp = ibci_init(spec, ds, st, 5);
        benchmark::DoNotOptimize(mlp.weights.data());
    }
}
BENCHMARK(BM_IbciInitMlp3)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ForwardMlp3(benchmark::State& state) {
    const Dataset ds = make_blobs(784, 300);
    NetworkSpec spec;
    spec.widths = {784, 256, 100, 10};
    const Mlp mlp = vanilla_init(spec, BaseInit::kXavier, 5);
    for (auto _ : state) {
        const auto acts = forward(mlp, ds.features);
        benchmark::DoNotOptimize(acts.back().data());
    }
}
BENCHMARK(BM_ForwardMlp3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
