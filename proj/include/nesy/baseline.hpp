#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nesy {

/// Digits, letters and ASCII punctuation: the 94 printable non-space characters.
const std::string& printable_ascii();

/// Fisher-Yates shuffle driven by mt19937_64; identical on every platform.
std::string seeded_shuffle(std::string s, std::uint64_t seed);

/// The printable string followed by count-1 seeded shuffles of it.
std::vector<std::string> random_baselines(std::uint64_t seed, std::size_t count = 8);

}  // namespace nesy
