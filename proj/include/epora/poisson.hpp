#pragma once

namespace epora {

// P[Poisson(mean) = k].  Evaluated in log space so large means and large k
// stay finite; mean == 0 degenerates to the point mass at zero.
double poisson_pmf(double mean, int k);

// E[min(Poisson(mean), cap)] for integer cap >= 0, computed as
// cap - sum_{k<cap} (cap - k) * pmf(mean, k), which needs only `cap` terms.
double truncated_poisson_mean(double mean, int cap);

// Expected fraction of a capacity-b agent consumed by a Poisson demand
// stream with mean b/s:  E[min(Poisson(b/s), b)] / b.   Defined for s > 0,
// b >= 1.  Decreasing in s, increasing in b, tends to 1 as s -> 0+.
double capacity_utilization(double s, int b);

// Closed form of capacity_utilization(1, b):  1 - e^-b b^b / b!.
double capacity_utilization_unit(int b);

}  // namespace epora
