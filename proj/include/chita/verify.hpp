#pragma once

// Oracle suites run by `chita verify`. Each property reports the measured
// quantity next to the bound it is held to.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chita::verify {

struct Property {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  /// "<", "<=" or ">=": how measured is compared with bound.
  std::string relation = "<";
  bool passed = false;
};

struct Report {
  std::string suite;
  std::vector<Property> properties;
  bool passed() const;
};

/// Names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// Q gradient vs central differences (10 instances × 20 points, n ≤ 10,
/// p ≤ 50) and toy-network backprop vs central differences.
Report gradients_suite(std::uint64_t seed);

/// Support of P_k(w − τ∇Q) is constant on 64 points of [0, 0.999·τ_c] over
/// 100 instances; the searched step never increases Q.
Report linesearch_suite(std::uint64_t seed);

/// Woodbury restricted solve vs a dense |S|×|S| solve on 50 instances
/// (n ≤ 30, |S| ≤ 40).
Report woodbury_suite(std::uint64_t seed);

/// chita_bso vs exhaustive enumeration of all C(12, 4) supports on
/// `instances` Gaussian instances (n = 6, λ = 0.1), plus diagonal instances
/// where it must be exact.
Report bruteforce_suite(std::uint64_t seed, int instances = 20);

/// Dispatches by name; nullopt for an unknown suite.
std::optional<Report> run_suite(const std::string& name, std::uint64_t seed);

}  // namespace chita::verify
