#pragma once

#include <cstddef>
#include <span>

namespace rdcov {

//! Sum with a fixed pairwise reduction tree (blocks of 8 summed left to
//! right). The result depends only on the input order, never on threading.
double pairwise_sum(std::span<const double> v);

//! Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double p);

} // namespace rdcov
