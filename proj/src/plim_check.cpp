#include "rdcov/plim_check.hpp"

#include "rdcov/error.hpp"
#include "rdcov/numeric.hpp"

#include <cmath>

namespace rdcov {

PlimReport plim_check(const DgpSpec& dgp,
                      const std::vector<EstimatorKind>& kinds,
                      const std::vector<Eigen::Index>& n_grid,
                      int reps,
                      const PlimOptions& opts)
{
  if (reps < 2)
    throw ConfigError("plim_check: reps must be at least 2");
  PlimReport report;
  const std::size_t k = kinds.size();
  for (Eigen::Index n : n_grid) {
    const double h = opts.h_scale * std::pow(static_cast<double>(n), -0.2);
    LocalFitSpec spec;
    spec.kernel = opts.kernel;
    spec.p = opts.p;
    spec.h = h;

    // estimates[kind][rep]; NaN marks a failed replication.
    std::vector<std::vector<double>> estimates(k, std::vector<double>(static_cast<std::size_t>(reps)));
    parallel_for(reps, opts.workers, [&](int rep) {
      const Dataset data = draw(dgp, n, static_cast<std::uint64_t>(rep));
      for (std::size_t j = 0; j < k; ++j) {
        double v = std::nan("");
        try {
          v = estimate(data, kinds[j], spec).tau;
        } catch (const NumericError&) {
        }
        estimates[j][static_cast<std::size_t>(rep)] = v;
      }
    });

    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> ok;
      for (double v : estimates[j])
        if (std::isfinite(v))
          ok.push_back(v);
      PlimRow row;
      row.kind = kinds[j];
      row.n = n;
      row.h = h;
      row.reps = reps;
      row.failures = reps - static_cast<int>(ok.size());
      row.limit = dgp.probability_limit(kinds[j]);
      if (ok.size() >= 2) {
        const double m = static_cast<double>(ok.size());
        row.mean = pairwise_sum(ok) / m;
        std::vector<double> dev(ok.size());
        for (std::size_t i = 0; i < ok.size(); ++i)
          dev[i] = (ok[i] - row.mean) * (ok[i] - row.mean);
        row.mc_se = std::sqrt(pairwise_sum(dev) / (m - 1.0) / m);
        row.z = row.mc_se > 0.0 ? (row.mean - row.limit) / row.mc_se : 0.0;
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

} // namespace rdcov
