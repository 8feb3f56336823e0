#include "rdcov/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace rdcov {

double pairwise_sum(std::span<const double> v)
{
  constexpr std::size_t kBlock = 8;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double a : v)
      s += a;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p)
{
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

} // namespace rdcov
