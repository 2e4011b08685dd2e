#include "epora/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace epora {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t master, std::uint64_t replication,
                std::uint64_t purpose) {
    // Hash the key components through splitmix so nearby (rep, purpose)
    // pairs land on unrelated states.
    std::uint64_t a = master;
    std::uint64_t h = splitmix64(a);
    a = h ^ (replication * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
    h = splitmix64(a);
    a = h ^ (purpose * 0xbf58476d1ce4e5b9ULL + 0x1ce4e5b9ULL);
    return Rng(splitmix64(a));
}

std::uint64_t Rng::next() {
    std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::u01() {
    return double(next() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log1p(-u01()) / rate;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below: n must be >= 1");
    return std::uint64_t((__uint128_t(next()) * n) >> 64);
}

double Rng::normal() {
    double u1 = u01(), u2 = u01();
    while (u1 <= 0.0) u1 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = int(below(std::uint64_t(i) + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

}  // namespace epora
