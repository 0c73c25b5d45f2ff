// Serial vs OpenMP: per-node linearization and batch runs.

#include <benchmark/benchmark.h>

#include "morpho/batch.hpp"
#include "morpho/nmpc.hpp"
#include "morpho/scenario.hpp"

using namespace morpho;

namespace {

Nlp bench_nlp(const RobotParams& params) {
  StateVector x0 = StateVector::Zero();
  x0[idx::kZ] = 0.8;
  x0[idx::kVx] = 0.3;
  References refs;
  refs.x_ref[idx::kZ] = 1.0;
  refs.u_ref.setConstant(0.5);
  OcpConfig cfg;
  return transcribe(x0, refs, 0.6, 0.7, cfg, params);
}

template <auto Linearize>
void BM_Linearize(benchmark::State& state) {
  const RobotParams params = RobotParams::defaults();
  const Nlp nlp = bench_nlp(params);
  const NlpIterate it = nlp.initial_guess();
  for (auto _ : state) benchmark::DoNotOptimize(Linearize(nlp, it));
}
BENCHMARK(BM_Linearize<linearize_nodes_serial>)->Name("linearize_nodes/serial");
BENCHMARK(BM_Linearize<linearize_nodes_parallel>)->Name("linearize_nodes/parallel");

std::vector<BatchJob> hover_jobs(int n) {
  Scenario s = load_scenario(data_dir() / "scenarios" / "hover_step.yaml");
  s.duration = 1.0;
  s.noise.enabled = true;
  std::vector<BatchJob> jobs;
  for (int i = 0; i < n; ++i) {
    BatchJob job{s, RobotParams::defaults()};
    job.scenario.seed = static_cast<std::uint64_t>(i);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

template <auto RunBatch>
void BM_Batch(benchmark::State& state) {
  const auto jobs = hover_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(RunBatch(jobs, nullptr));
}
BENCHMARK(BM_Batch<run_batch_serial>)->Name("run_batch/serial")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch<run_batch_parallel>)->Name("run_batch/parallel")->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
