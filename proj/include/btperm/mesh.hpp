// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ambient tetrahedral grid with per-face/edge incidence tables.
//
// The grid is a structured cube lattice where every cell is split into the six
// Kuhn tetrahedra around the main diagonal; neighbouring cells therefore share
// identical face triangulations and the complex is conforming by construction.
// Meshes are immutable once built: all later stages only read them.

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"

namespace btperm {

struct InteriorFace {
  int tet_a = -1;
  int local_a = -1; // local face index = opposite local vertex
  int tet_b = -1;
  int local_b = -1;
  std::array<int, 3> verts{}; // global vertex ids, ascending
};

struct BoundaryFace {
  int tet = -1;
  int local = -1;
  std::array<int, 3> verts{};
};

struct MeshEdge {
  int v0 = -1;
  int v1 = -1;                  // v0 < v1
  std::vector<int> faces;       // incident interior faces, ascending
};

// Vertices of local face l are the tet vertices other than l.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaceVertices = {{
    {{1, 2, 3}}, {{0, 2, 3}}, {{0, 1, 3}}, {{0, 1, 2}}}};

class Mesh {
 public:
  // Builds incidence tables from raw cells; throws MeshError on degenerate
  // tets, out-of-range indices, or faces shared by more than two tets.
  static Mesh from_cells(std::vector<Eigen::Vector3d> vertices,
                         std::vector<std::array<int, 4>> tets);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_tets() const { return static_cast<int>(tets_.size()); }
  int n_interior_faces() const { return static_cast<int>(interior_faces_.size()); }
  int n_boundary_faces() const { return static_cast<int>(boundary_faces_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 4>>& tets() const { return tets_; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_faces_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  // Unordered interior-face index pairs sharing an edge, each listed once.
  const std::vector<std::pair<int, int>>& face_adjacency() const { return face_adjacency_; }

  double tet_volume(int t) const { return tet_volumes_[t]; }
  const std::vector<double>& tet_volumes() const { return tet_volumes_; }
  double total_volume() const { return total_volume_; }

  Eigen::Vector3d tet_centroid(int t) const {
    const auto& tet = tets_[t];
    return 0.25 * (vertices_[tet[0]] + vertices_[tet[1]] +
                   vertices_[tet[2]] + vertices_[tet[3]]);
  }

  Eigen::Vector3d face_centroid(int f) const {
    const auto& v = interior_faces_[f].verts;
    return (vertices_[v[0]] + vertices_[v[1]] + vertices_[v[2]]) / 3.0;
  }

  double face_area(int f) const {
    const auto& v = interior_faces_[f].verts;
    const Eigen::Vector3d e1 = vertices_[v[1]] - vertices_[v[0]];
    const Eigen::Vector3d e2 = vertices_[v[2]] - vertices_[v[0]];
    return 0.5 * e1.cross(e2).norm();
  }

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<InteriorFace> interior_faces_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<MeshEdge> edges_;
  std::vector<std::pair<int, int>> face_adjacency_;
  std::vector<double> tet_volumes_;
  double total_volume_ = 0.0;
};

inline double signed_tet_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

inline Mesh Mesh::from_cells(std::vector<Eigen::Vector3d> vertices,
                             std::vector<std::array<int, 4>> tets) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.tets_ = std::move(tets);

  const int nv = m.n_vertices();
  m.tet_volumes_.resize(m.tets_.size());
  m.total_volume_ = 0.0;
  for (std::size_t t = 0; t < m.tets_.size(); ++t) {
    for (int idx : m.tets_[t]) {
      if (idx < 0 || idx >= nv)
        throw MeshError("tet " + std::to_string(t) + ": vertex index out of range");
    }
    const auto& tet = m.tets_[t];
    const double vol = signed_tet_volume(m.vertices_[tet[0]], m.vertices_[tet[1]],
                                         m.vertices_[tet[2]], m.vertices_[tet[3]]);
    if (vol <= 1e-12)
      throw MeshError("tet " + std::to_string(t) + ": non-positive volume");
    m.tet_volumes_[t] = vol;
    m.total_volume_ += vol;
  }

  // Key every tet face by its sorted vertex triple; one owner = boundary,
  // two owners = interior, more is non-manifold.
  struct FaceRef { std::array<int, 3> key; int tet; int local; };
  std::vector<FaceRef> refs;
  refs.reserve(m.tets_.size() * 4);
  for (int t = 0; t < m.n_tets(); ++t) {
    for (int l = 0; l < 4; ++l) {
      std::array<int, 3> key = {m.tets_[t][kTetFaceVertices[l][0]],
                                m.tets_[t][kTetFaceVertices[l][1]],
                                m.tets_[t][kTetFaceVertices[l][2]]};
      std::sort(key.begin(), key.end());
      refs.push_back({key, t, l});
    }
  }
  std::sort(refs.begin(), refs.end(), [](const FaceRef& a, const FaceRef& b) {
    return std::tie(a.key, a.tet, a.local) < std::tie(b.key, b.tet, b.local);
  });

  for (std::size_t i = 0; i < refs.size();) {
    std::size_t j = i;
    while (j < refs.size() && refs[j].key == refs[i].key) ++j;
    const std::size_t count = j - i;
    if (count == 1) {
      m.boundary_faces_.push_back({refs[i].tet, refs[i].local, refs[i].key});
    } else if (count == 2) {
      InteriorFace f;
      f.tet_a = refs[i].tet;
      f.local_a = refs[i].local;
      f.tet_b = refs[i + 1].tet;
      f.local_b = refs[i + 1].local;
      f.verts = refs[i].key;
      m.interior_faces_.push_back(f);
    } else {
      throw MeshError("face shared by " + std::to_string(count) + " tets");
    }
    i = j;
  }

  // Edge table over interior-face edges, canonically ordered by vertex pair.
  std::map<std::pair<int, int>, int> edge_index;
  for (const auto& f : m.interior_faces_) {
    for (int e = 0; e < 3; ++e) {
      int a = f.verts[e], b = f.verts[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_index.emplace(std::make_pair(a, b), 0);
    }
  }
  m.edges_.reserve(edge_index.size());
  for (auto& [key, idx] : edge_index) {
    idx = static_cast<int>(m.edges_.size());
    MeshEdge edge;
    edge.v0 = key.first;
    edge.v1 = key.second;
    m.edges_.push_back(edge);
  }
  for (int fi = 0; fi < m.n_interior_faces(); ++fi) {
    const auto& f = m.interior_faces_[fi];
    for (int e = 0; e < 3; ++e) {
      int a = f.verts[e], b = f.verts[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      m.edges_[edge_index.at({a, b})].faces.push_back(fi);
    }
  }
  for (const auto& edge : m.edges_) {
    for (std::size_t i = 0; i < edge.faces.size(); ++i)
      for (std::size_t j = i + 1; j < edge.faces.size(); ++j)
        m.face_adjacency_.emplace_back(edge.faces[i], edge.faces[j]);
  }
  return m;
}

// Structured cube grid on [-half_extent, half_extent]^3 with cells_per_axis
// cells per axis, each cell split into 6 tets sharing the (0,0,0)-(1,1,1)
// diagonal so that adjacent cells conform.
inline Mesh build_ambient_grid(int cells_per_axis, double half_extent) {
  if (cells_per_axis < 1)
    throw MeshError("cells_per_axis must be >= 1");
  if (!(half_extent > 0.0))
    throw MeshError("half_extent must be positive");

  const int n = cells_per_axis;
  const int nv1 = n + 1;
  auto vid = [nv1](int i, int j, int k) { return i + nv1 * (j + nv1 * k); };

  std::vector<Eigen::Vector3d> verts(static_cast<std::size_t>(nv1) * nv1 * nv1);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        verts[vid(i, j, k)] = half_extent * Eigen::Vector3d(2.0 * i / n - 1.0,
                                                            2.0 * j / n - 1.0,
                                                            2.0 * k / n - 1.0);

  static constexpr std::array<std::array<int, 3>, 6> kAxisPerms = {{
      {{0, 1, 2}}, {{0, 2, 1}}, {{1, 0, 2}}, {{1, 2, 0}}, {{2, 0, 1}}, {{2, 1, 0}}}};

  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::array<int, 3> base = {i, j, k};
        for (const auto& perm : kAxisPerms) {
          std::array<std::array<int, 3>, 4> corner;
          corner[0] = base;
          corner[1] = corner[0];
          corner[1][perm[0]] += 1;
          corner[2] = corner[1];
          corner[2][perm[1]] += 1;
          corner[3] = {i + 1, j + 1, k + 1};
          std::array<int, 4> tet;
          for (int c = 0; c < 4; ++c) tet[c] = vid(corner[c][0], corner[c][1], corner[c][2]);
          if (signed_tet_volume(verts[tet[0]], verts[tet[1]], verts[tet[2]], verts[tet[3]]) < 0.0)
            std::swap(tet[1], tet[2]);
          tets.push_back(tet);
        }
      }
    }
  }
  return Mesh::from_cells(std::move(verts), std::move(tets));
}

// ---------------------------------------------------------------------------
// Mesh file format (ASCII, 0-based indices):
//   VERTICES <count>
//   x y z           (one per line, full decimal precision)
//   TETS <count>
//   a b c d
// ---------------------------------------------------------------------------

inline void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "VERTICES " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices())
    out << format_double(v.x()) << " " << format_double(v.y()) << " "
        << format_double(v.z()) << "\n";
  out << "TETS " << mesh.n_tets() << "\n";
  for (const auto& t : mesh.tets())
    out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  if (!out) throw IoError("write failed: " + path);
}

namespace detail {

inline std::string next_data_line(std::istream& in, long& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  throw IoError("line " + std::to_string(line_no + 1) + ": unexpected end of input");
}

} // namespace detail

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  long line_no = 0;

  std::string header = detail::next_data_line(in, line_no);
  long nv = 0;
  if (std::sscanf(header.c_str(), "VERTICES %ld", &nv) != 1 || nv < 0)
    throw IoError("line " + std::to_string(line_no) + ": malformed VERTICES header");
  std::vector<Eigen::Vector3d> verts(nv);
  for (long i = 0; i < nv; ++i) {
    const std::string line = detail::next_data_line(in, line_no);
    double x, y, z;
    if (std::sscanf(line.c_str(), "%lg %lg %lg", &x, &y, &z) != 3)
      throw IoError("line " + std::to_string(line_no) + ": malformed vertex");
    verts[i] = Eigen::Vector3d(x, y, z);
  }

  header = detail::next_data_line(in, line_no);
  long nt = 0;
  if (std::sscanf(header.c_str(), "TETS %ld", &nt) != 1 || nt < 0)
    throw IoError("line " + std::to_string(line_no) + ": malformed TETS header");
  std::vector<std::array<int, 4>> tets(nt);
  const long tets_first_line = line_no + 1;
  for (long i = 0; i < nt; ++i) {
    const std::string line = detail::next_data_line(in, line_no);
    std::array<int, 4> t;
    if (std::sscanf(line.c_str(), "%d %d %d %d", &t[0], &t[1], &t[2], &t[3]) != 4)
      throw IoError("line " + std::to_string(line_no) + ": malformed tet");
    for (int idx : t)
      if (idx < 0 || idx >= nv)
        throw IoError("line " + std::to_string(line_no) + ": vertex index out of range");
    tets[i] = t;
  }

  for (long i = 0; i < nt; ++i) {
    const auto& t = tets[i];
    if (signed_tet_volume(verts[t[0]], verts[t[1]], verts[t[2]], verts[t[3]]) <= 1e-12)
      throw IoError("line " + std::to_string(tets_first_line + i) + ": non-positive volume tet");
  }
  return Mesh::from_cells(std::move(verts), std::move(tets));
}

} // namespace btperm
