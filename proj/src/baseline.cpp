#include "nesy/baseline.hpp"

#include <random>
#include <utility>

namespace nesy {

const std::string& printable_ascii() {
    static const std::string s =
        "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
    return s;
}

std::string seeded_shuffle(std::string s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = s.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng() % i);
        std::swap(s[i - 1], s[j]);
    }
    return s;
}

std::vector<std::string> random_baselines(std::uint64_t seed, std::size_t count) {
    std::vector<std::string> out;
    if (count == 0) return out;
    out.push_back(printable_ascii());
    for (std::size_t k = 1; k < count; ++k) out.push_back(seeded_shuffle(printable_ascii(), seed * 1000003ULL + k));
    return out;
}

}  // namespace nesy
