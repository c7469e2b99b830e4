// SPDX-License-Identifier: Apache-2.0
#pragma once

// Text formats shared between the CLI commands (all decimal ASCII):
//   protocol:  "dx dy dz b delta Delta" per acquisition, b in s/mm^2
//   signals:   "dx dy dz b delta Delta Re(S) Im(S)", aligned with the protocol
//   field:     "faceIndex kappa" per interior face
//   interface: "faceIndex v0 v1 v2" per barrier face
//   history:   CSV "iter,loss_total,loss_data,reg_cont,reg_man,lr,phase"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "btperm/common.hpp"
#include "btperm/encoding.hpp"
#include "btperm/inversion.hpp"
#include "btperm/mesh.hpp"
#include "btperm/permeability.hpp"
#include "btperm/reduced.hpp"

namespace btperm {

inline void save_protocol(const Protocol& protocol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& a : protocol.acquisitions) {
    out << format_double(a.direction.x()) << " " << format_double(a.direction.y()) << " "
        << format_double(a.direction.z()) << " " << format_double(a.b / units::kBToMsPerUm2)
        << " " << format_double(a.delta) << " " << format_double(a.Delta) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline Protocol load_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  Protocol p;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Acquisition a;
    double b_s_mm2;
    if (std::sscanf(line.c_str(), "%lg %lg %lg %lg %lg %lg", &a.direction.x(),
                    &a.direction.y(), &a.direction.z(), &b_s_mm2, &a.delta,
                    &a.Delta) != 6)
      throw IoError("line " + std::to_string(line_no) + ": malformed acquisition");
    a.b = b_s_mm2 * units::kBToMsPerUm2;
    p.acquisitions.push_back(a);
  }
  p.validate();
  return p;
}

inline void save_signals(const Protocol& protocol, const SignalSet& signals,
                         const std::string& path) {
  if (static_cast<int>(signals.signals.size()) != protocol.size())
    throw IoError("signal count does not match the protocol");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (int i = 0; i < protocol.size(); ++i) {
    const auto& a = protocol.acquisitions[i];
    out << format_double(a.direction.x()) << " " << format_double(a.direction.y()) << " "
        << format_double(a.direction.z()) << " " << format_double(a.b / units::kBToMsPerUm2)
        << " " << format_double(a.delta) << " " << format_double(a.Delta) << " "
        << format_double(signals.signals[i].real()) << " "
        << format_double(signals.signals[i].imag()) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// Loads signals and checks row-by-row agreement with the given protocol.
inline SignalSet load_signals(const Protocol& protocol, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  SignalSet set;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double dx, dy, dz, b, delta, Delta, re, im;
    if (std::sscanf(line.c_str(), "%lg %lg %lg %lg %lg %lg %lg %lg", &dx, &dy, &dz, &b,
                    &delta, &Delta, &re, &im) != 8)
      throw IoError("line " + std::to_string(line_no) + ": malformed signal row");
    const int idx = static_cast<int>(set.signals.size());
    if (idx >= protocol.size())
      throw IoError("line " + std::to_string(line_no) + ": more signals than acquisitions");
    const auto& a = protocol.acquisitions[idx];
    if (std::abs(a.b - b * units::kBToMsPerUm2) > 1e-12 || a.delta != delta ||
        a.Delta != Delta || (a.direction - Eigen::Vector3d(dx, dy, dz)).norm() > 1e-9)
      throw IoError("line " + std::to_string(line_no) +
                    ": signal row does not match the protocol");
    set.signals.emplace_back(re, im);
  }
  if (static_cast<int>(set.signals.size()) != protocol.size())
    throw IoError("signal file is missing acquisitions: " + path);
  return set;
}

inline void save_field(const PermeabilityField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (int f = 0; f < field.n_faces(); ++f)
    out << f << " " << format_double(field.kappa[f]) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline PermeabilityField load_field(int n_faces, const std::string& path,
                                    const SigmoidReparam& reparam = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  Eigen::VectorXd kappa = Eigen::VectorXd::Constant(n_faces, -1.0);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    int f;
    double k;
    if (std::sscanf(line.c_str(), "%d %lg", &f, &k) != 2)
      throw IoError("line " + std::to_string(line_no) + ": malformed field row");
    if (f < 0 || f >= n_faces)
      throw IoError("line " + std::to_string(line_no) + ": face index out of range");
    if (!(k > 0.0))
      throw IoError("line " + std::to_string(line_no) + ": kappa must be positive");
    kappa[f] = k;
  }
  for (int f = 0; f < n_faces; ++f)
    if (kappa[f] < 0.0)
      throw IoError("field file is missing face " + std::to_string(f) + ": " + path);
  return PermeabilityField::from_kappa(std::move(kappa), reparam);
}

inline void save_interface(const Mesh& mesh, const InterfaceSet& interface,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (int f : interface.faces) {
    const auto& v = mesh.interior_faces()[f].verts;
    out << f << " " << v[0] << " " << v[1] << " " << v[2] << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline InterfaceSet load_interface(const Mesh& mesh, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  InterfaceSet set;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    int f, v0, v1, v2;
    if (std::sscanf(line.c_str(), "%d %d %d %d", &f, &v0, &v1, &v2) != 4)
      throw IoError("line " + std::to_string(line_no) + ": malformed interface row");
    if (f < 0 || f >= mesh.n_interior_faces())
      throw IoError("line " + std::to_string(line_no) + ": face index out of range");
    const auto& v = mesh.interior_faces()[f].verts;
    if (v[0] != v0 || v[1] != v1 || v[2] != v2)
      throw IoError("line " + std::to_string(line_no) +
                    ": face vertices do not match the mesh");
    set.faces.push_back(f);
  }
  return set;
}

inline std::string history_csv_header() {
  return "iter,loss_total,loss_data,reg_cont,reg_man,lr,phase";
}

inline std::string history_csv_row(const HistoryRow& row) {
  return std::to_string(row.iter) + "," + format_double(row.loss_total) + "," +
         format_double(row.loss_data) + "," + format_double(row.reg_cont) + "," +
         format_double(row.reg_man) + "," + format_double(row.lr) + "," + row.phase;
}

// Streaming history writer: one flushed line per iteration so aborted runs
// stay inspectable.
class HistoryWriter {
 public:
  explicit HistoryWriter(const std::string& path) : out_(path) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    out_ << history_csv_header() << "\n";
    out_.flush();
  }
  void operator()(const HistoryRow& row) {
    out_ << history_csv_row(row) << "\n";
    out_.flush();
    if (!out_) throw IoError("history write failed");
  }

 private:
  std::ofstream out_;
};

} // namespace btperm
