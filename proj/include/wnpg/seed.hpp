// Reproducible seed plan.
//
// Every random stream in a run is keyed by (purpose, iteration k, index i)
// and derived from the run's master seed, so results never depend on the
// order in which workers execute. The mixer is the splitmix64 finalizer
// (two rounds of xorshift-multiply with the odd constants
// 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb), applied once per key field:
//
//   h = mix(master ^ 0x9e3779b97f4a7c15)
//   h = mix(h ^ purpose)
//   h = mix(h ^ k)
//   h = mix(h ^ i)

#pragma once

#include <cstdint>

namespace wnpg {

enum class Purpose : std::uint64_t {
  pb_sample = 1,
  rollout = 2,
  eval = 3,
  init = 4,
  sweep = 5,
  probe = 6,
  check = 7,
};

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

struct SeedPlan {
  std::uint64_t master_seed = 0;

  constexpr std::uint64_t seed_for(Purpose purpose, std::uint64_t k, std::uint64_t i) const {
    std::uint64_t h = mix64(master_seed ^ 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(purpose));
    h = mix64(h ^ k);
    return mix64(h ^ i);
  }
};

constexpr std::uint64_t seed_for(const SeedPlan& plan, Purpose purpose, std::uint64_t k, std::uint64_t i) {
  return plan.seed_for(purpose, k, i);
}

}  // namespace wnpg
