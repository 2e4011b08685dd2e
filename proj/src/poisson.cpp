#include "epora/poisson.hpp"

#include <cmath>
#include <stdexcept>

namespace epora {

double poisson_pmf(double mean, int k) {
    if (k < 0) return 0.0;
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson_pmf: mean must be >= 0");
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mean) - mean - std::lgamma(double(k) + 1.0));
}

double truncated_poisson_mean(double mean, int cap) {
    if (cap < 0) throw std::invalid_argument("truncated_poisson_mean: cap must be >= 0");
    if (!(mean >= 0.0)) throw std::invalid_argument("truncated_poisson_mean: mean must be >= 0");
    if (cap == 0 || mean == 0.0) return 0.0;
    // Kahan summation keeps the shortfall term exact near g ~ 1e-12.
    double sum = 0.0, comp = 0.0;
    for (int k = 0; k < cap; ++k) {
        double term = (cap - k) * poisson_pmf(mean, k);
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return cap - sum;
}

double capacity_utilization(double s, int b) {
    if (!(s > 0.0)) throw std::invalid_argument("capacity_utilization: s must be > 0");
    if (b < 1) throw std::invalid_argument("capacity_utilization: b must be >= 1");
    return truncated_poisson_mean(double(b) / s, b) / double(b);
}

double capacity_utilization_unit(int b) {
    if (b < 1) throw std::invalid_argument("capacity_utilization_unit: b must be >= 1");
    double db = b;
    return 1.0 - std::exp(db * std::log(db) - db - std::lgamma(db + 1.0));
}

}  // namespace epora
