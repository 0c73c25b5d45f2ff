#include "morpho/batch.hpp"

#include "morpho/errors.hpp"

namespace morpho {

namespace {

BatchResult run_one(const BatchJob& job, const GroundEffectTable* table) {
  BatchResult r;
  try {
    r.log = run(job.scenario, job.params, table);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::vector<BatchResult> run_batch_serial(const std::vector<BatchJob>& jobs,
                                          const GroundEffectTable* table) {
  std::vector<BatchResult> out(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = run_one(jobs[i], table);
  return out;
}

std::vector<BatchResult> run_batch_parallel(const std::vector<BatchJob>& jobs,
                                            const GroundEffectTable* table) {
  std::vector<BatchResult> out(jobs.size());
  const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) out[i] = run_one(jobs[i], table);
  return out;
}

}  // namespace morpho
