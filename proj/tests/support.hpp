#pragma once

// Small builders shared by the unit tests.

#include <Eigen/Dense>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "enose/session.hpp"
#include "enose/synth.hpp"

namespace enose::test {

inline StepReading reading(double t, double p, double h, double r) { return StepReading{t, p, h, r}; }

/// A cycle whose channel c at step s reads base[c] + slope[c] * s.
inline ScanCycle ramp_cycle(std::array<double, 4> base, std::array<double, 4> slope = {0, 0, 0, 0}) {
  std::array<StepReading, kHeaterSteps> steps{};
  for (std::size_t s = 0; s < kHeaterSteps; ++s) {
    const double k = static_cast<double>(s);
    steps[s] = reading(base[0] + slope[0] * k, base[1] + slope[1] * k, base[2] + slope[2] * k,
                       base[3] + slope[3] * k);
  }
  return ScanCycle(steps);
}

inline MeasurementSession session(const std::string& id, SpecificLabel label, FreshnessLevel f, std::size_t cycles,
                                  double offset = 0.0) {
  std::vector<ScanCycle> cs;
  for (std::size_t i = 0; i < cycles; ++i) {
    cs.push_back(ramp_cycle({20.0 + offset + static_cast<double>(i) * 0.01, 1000.0, 50.0, 1e5}, {0.1, 0, 0, -1e3}));
  }
  return MeasurementSession(id, Annotation{class_of(label), label, f}, std::move(cs));
}

/// Gaussian clusters around `centres` (one per class), `per_class` rows each.
struct Clusters {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<std::string> names;
};

inline Clusters clusters(const std::vector<Eigen::VectorXd>& centres, int per_class, double sigma,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sigma);
  const auto d = centres.front().size();
  Clusters c;
  c.x.resize(static_cast<Eigen::Index>(centres.size()) * per_class, d);
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < centres.size(); ++k) {
    c.names.push_back("c" + std::to_string(k));
    for (int i = 0; i < per_class; ++i, ++r) {
      for (Eigen::Index j = 0; j < d; ++j) c.x(r, j) = centres[k](j) + z(rng);
      c.y.push_back(static_cast<int>(k));
    }
  }
  return c;
}

/// `per_class` rows for each of `classes` classes in 40 dimensions, centres
/// drawn with spread `spread`, noise sigma 1.
inline Clusters clusters40(std::size_t classes, int per_class, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::normal_distribution<double> z(0.0, spread);
  std::vector<Eigen::VectorXd> centres;
  for (std::size_t k = 0; k < classes; ++k) {
    Eigen::VectorXd c(40);
    for (Eigen::Index j = 0; j < 40; ++j) c(j) = z(rng);
    centres.push_back(c);
  }
  return clusters(centres, per_class, 1.0, seed);
}

inline std::vector<std::string> names_of(const Clusters& c) {
  std::vector<std::string> out;
  for (int y : c.y) out.push_back(c.names[static_cast<std::size_t>(y)]);
  return out;
}

/// A small well-separated corpus over the given cells.
inline std::vector<MeasurementSession> small_corpus(std::vector<std::pair<SpecificLabel, FreshnessLevel>> cells,
                                                    int sessions_per_cell, int cycles, std::uint64_t seed) {
  SynthConfig c = synth_preset("easy", seed);
  c.cells = std::move(cells);
  c.sessions_per_cell = sessions_per_cell;
  c.cycles_per_session = cycles;
  return generate_corpus(c);
}

}  // namespace enose::test
