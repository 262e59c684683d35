#include "ged/rng.hpp"

#include <cmath>

namespace ged {

double RngStream::normal() {
  // Box-Muller; u1 kept away from 0 so log() stays finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ splitmix64(a + 0x100000001ULL));
  s = splitmix64(s ^ splitmix64(b + 0x200000002ULL));
  s = splitmix64(s ^ splitmix64(c + 0x300000003ULL));
  return s;
}

}  // namespace ged
