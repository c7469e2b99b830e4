// SPDX-License-Identifier: Apache-2.0
#pragma once

// PGSE encodings: two rectangular gradient lobes of duration delta separated
// by Delta, opposite polarity, readout at TE = Delta + delta. Amplitudes come
// from the Stejskal-Tanner relation b = gamma^2 g^2 delta^2 (Delta - delta/3).
// b is stored in ms/um^2 (1000 s/mm^2 = 1 ms/um^2).

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"

namespace btperm {

inline double amplitude_from_b(double b, double delta, double Delta,
                               double gamma = units::kGyromagneticRatio) {
  if (b < 0.0) throw ConfigError("b-value must be nonnegative");
  const double tdiff = Delta - delta / 3.0;
  if (!(tdiff > 0.0)) throw ConfigError("Delta - delta/3 must be positive");
  return std::sqrt(b / (gamma * gamma * delta * delta * tdiff));
}

inline double b_from_amplitude(double g, double delta, double Delta,
                               double gamma = units::kGyromagneticRatio) {
  return gamma * gamma * g * g * delta * delta * (Delta - delta / 3.0);
}

struct Acquisition {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX(); // unit vector
  double b = 0.0;     // ms/um^2
  double delta = 10.0;
  double Delta = 20.0;

  double te() const { return Delta + delta; }
  double amplitude() const { return amplitude_from_b(b, delta, Delta); }
  bool is_b0() const { return b == 0.0; }

  void validate() const {
    if (std::abs(direction.norm() - 1.0) > 1e-12)
      throw ConfigError("acquisition direction must be a unit vector");
    if (delta > Delta) throw ConfigError("delta must not exceed Delta");
    if (b < 0.0) throw ConfigError("b-value must be nonnegative");
  }
};

struct WaveformInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  Eigen::Vector3d amplitude = Eigen::Vector3d::Zero(); // mT/um
  double duration() const { return t_end - t_start; }
};

// [0, delta] at +g d, [delta, Delta] at 0, [Delta, Delta+delta] at -g d.
inline std::vector<WaveformInterval> waveform_intervals(const Acquisition& acq) {
  acq.validate();
  const Eigen::Vector3d lobe = acq.amplitude() * acq.direction;
  return {{0.0, acq.delta, lobe},
          {acq.delta, acq.Delta, Eigen::Vector3d::Zero()},
          {acq.Delta, acq.Delta + acq.delta, -lobe}};
}

struct Protocol {
  std::vector<Acquisition> acquisitions;

  int size() const { return static_cast<int>(acquisitions.size()); }

  // Delta groups: "long" is the largest Delta present, "short" the smallest.
  double long_Delta() const {
    double d = 0.0;
    for (const auto& a : acquisitions) d = std::max(d, a.Delta);
    return d;
  }
  double short_Delta() const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& a : acquisitions) d = std::min(d, a.Delta);
    return d;
  }

  std::vector<int> indices_with_Delta(double Delta) const {
    std::vector<int> idx;
    for (int i = 0; i < size(); ++i)
      if (acquisitions[i].Delta == Delta) idx.push_back(i);
    return idx;
  }
  std::vector<int> long_indices() const { return indices_with_Delta(long_Delta()); }
  std::vector<int> short_indices() const { return indices_with_Delta(short_Delta()); }
  std::vector<int> all_indices() const {
    std::vector<int> idx(acquisitions.size());
    for (int i = 0; i < size(); ++i) idx[i] = i;
    return idx;
  }

  // Index of the b=0 reference within the same Delta group.
  int b0_index_for(int acq_index) const {
    const double Delta = acquisitions[acq_index].Delta;
    for (int i = 0; i < size(); ++i)
      if (acquisitions[i].Delta == Delta && acquisitions[i].is_b0()) return i;
    throw ConfigError("Delta group lacks a b=0 reference");
  }

  void validate() const {
    if (acquisitions.empty()) throw ConfigError("protocol is empty");
    for (const auto& a : acquisitions) a.validate();
    for (int i = 0; i < size(); ++i) b0_index_for(i);
  }
};

inline std::vector<Eigen::Vector3d> default_directions() {
  return {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
}

// b values in s/mm^2.
inline Protocol make_protocol(const std::vector<Eigen::Vector3d>& directions,
                              const std::vector<double>& bvalues_s_mm2,
                              double delta, const std::vector<double>& Deltas) {
  if (directions.empty()) throw ConfigError("empty direction set");
  if (bvalues_s_mm2.empty()) throw ConfigError("empty b-value set");
  if (Deltas.empty()) throw ConfigError("empty Delta set");
  Protocol p;
  for (double Delta : Deltas)
    for (const auto& dir : directions)
      for (double b : bvalues_s_mm2) {
        Acquisition a;
        a.direction = dir.normalized();
        a.b = b * units::kBToMsPerUm2;
        a.delta = delta;
        a.Delta = Delta;
        p.acquisitions.push_back(a);
      }
  p.validate();
  return p;
}

// The acquisition set used throughout: b in {0..5000} s/mm^2, delta = 10 ms,
// Delta in {20, 60} ms, three orthogonal directions.
inline Protocol default_protocol(
    const std::vector<Eigen::Vector3d>& directions = default_directions()) {
  return make_protocol(directions, {0.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0},
                       10.0, {20.0, 60.0});
}

} // namespace btperm
