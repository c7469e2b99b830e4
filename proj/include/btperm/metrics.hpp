// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reconstruction metrics: normalized-signal MSE, centered symmetric
// Chamfer-L2 over interface point samples, and BadEdge% (share of active
// edges whose barrier-face incidence differs from 2).

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/encoding.hpp"
#include "btperm/mesh.hpp"
#include "btperm/permeability.hpp"
#include "btperm/reduced.hpp"

namespace btperm {

// Mean over non-b0 acquisitions of |S/S0 - S*/S0*|^2.
inline double signal_mse(const Protocol& protocol, const SignalSet& predicted,
                         const SignalSet& reference) {
  double sum = 0.0;
  long count = 0;
  for (int a = 0; a < protocol.size(); ++a) {
    if (protocol.acquisitions[a].is_b0()) continue;
    const int b0 = protocol.b0_index_for(a);
    const Complex s0_hat = predicted.signals[b0];
    const Complex s0_ref = reference.signals[b0];
    if (std::abs(s0_hat) == 0.0 || std::abs(s0_ref) == 0.0)
      throw NumericalError("zero b=0 reference signal");
    sum += std::norm(predicted.signals[a] / s0_hat - reference.signals[a] / s0_ref);
    ++count;
  }
  if (count == 0) throw ConfigError("protocol has no diffusion-weighted acquisitions");
  return sum / static_cast<double>(count);
}

// One sample point per interface face: its centroid, in face-index order.
inline std::vector<Eigen::Vector3d> sample_interface_points(const Mesh& mesh,
                                                            const InterfaceSet& interface) {
  if (interface.faces.empty())
    throw NumericalError("empty interface: Chamfer distance undefined");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(interface.faces.size());
  for (int f : interface.faces) pts.push_back(mesh.face_centroid(f));
  return pts;
}

// Symmetric Chamfer with squared Euclidean distances, each set centered on its
// own centroid first; the two directed means are summed.
inline double chamfer_l2(const std::vector<Eigen::Vector3d>& xs,
                         const std::vector<Eigen::Vector3d>& ys) {
  if (xs.empty() || ys.empty())
    throw NumericalError("empty point set: Chamfer distance undefined");
  auto centered = [](const std::vector<Eigen::Vector3d>& pts) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    std::vector<Eigen::Vector3d> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = pts[i] - c;
    return out;
  };
  const auto x = centered(xs);
  const auto y = centered(ys);
  auto directed_mean = [](const std::vector<Eigen::Vector3d>& from,
                          const std::vector<Eigen::Vector3d>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return directed_mean(x, y) + directed_mean(y, x);
}

struct BadEdgeResult {
  double percent = 0.0;
  long active_edges = 0; // edges with d(e) > 0
  bool no_active_edges = false;
};

// d(e) = number of given faces incident to edge e; restricted to d(e) > 0,
// report the percentage with d(e) != 2. Faces are vertex triples, so the
// statistic is reorder-invariant and works for any triangle soup.
inline BadEdgeResult bad_edge_pct(const std::vector<std::array<int, 3>>& face_verts) {
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& tri : face_verts) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++incidence[{a, b}];
    }
  }
  BadEdgeResult out;
  long bad = 0;
  for (const auto& [edge, count] : incidence) {
    ++out.active_edges;
    if (count != 2) ++bad;
  }
  if (out.active_edges == 0) {
    out.no_active_edges = true;
    out.percent = 0.0;
    return out;
  }
  out.percent = 100.0 * static_cast<double>(bad) / static_cast<double>(out.active_edges);
  return out;
}

inline BadEdgeResult bad_edge_pct(const Mesh& mesh, const InterfaceSet& interface) {
  std::vector<std::array<int, 3>> tris;
  tris.reserve(interface.faces.size());
  for (int f : interface.faces) tris.push_back(mesh.interior_faces()[f].verts);
  return bad_edge_pct(tris);
}

struct MetricsReport {
  std::string case_name;
  double signal_mse = 0.0;
  bool chamfer_defined = false;
  double chamfer = 0.0; // um^2
  double bad_edge_percent = 0.0;
  long n_faces = 0;
  long n_active_edges = 0;

  std::string to_key_value() const {
    const std::string cd = chamfer_defined ? format_double(chamfer) : "undefined";
    return "case=" + case_name + "\nsignal_mse=" + format_double(signal_mse) +
           "\ncd_l2=" + cd + "\nbad_edge_pct=" + format_double(bad_edge_percent) +
           "\nn_faces=" + std::to_string(n_faces) +
           "\nn_active_edges=" + std::to_string(n_active_edges) + "\n";
  }

  static std::string csv_header() {
    return "case,signal_mse,cd_l2,bad_edge_pct,n_faces,n_active_edges";
  }

  std::string to_csv_row() const {
    const std::string cd = chamfer_defined ? format_double(chamfer) : "undefined";
    return case_name + "," + format_double(signal_mse) + "," + cd + "," +
           format_double(bad_edge_percent) + "," + std::to_string(n_faces) + "," +
           std::to_string(n_active_edges);
  }
};

} // namespace btperm
