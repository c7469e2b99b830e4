// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "btperm/mesh.hpp"
#include "btperm/permeability.hpp"
#include "btperm/shapes.hpp"

using namespace btperm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("single-cell grid matches the 6-tet cube") {
  const Mesh mesh = build_ambient_grid(1, 13.6);
  CHECK(mesh.n_vertices() == 8);
  CHECK(mesh.n_tets() == 6);
  CHECK(mesh.n_interior_faces() == 6);
  CHECK(mesh.n_boundary_faces() == 12);
}

TEST_CASE("grid counts and volume on n=2") {
  const Mesh mesh = build_ambient_grid(2, 13.6);
  CHECK(mesh.n_vertices() == 27);
  CHECK(mesh.n_tets() == 48);

  // Independent face-count oracle: hash sorted vertex triples of all tet
  // faces and count the ones owned by exactly two tets.
  std::map<std::array<int, 3>, int> owners;
  for (const auto& tet : mesh.tets()) {
    for (const auto& lf : kTetFaceVertices) {
      std::array<int, 3> key = {tet[lf[0]], tet[lf[1]], tet[lf[2]]};
      std::sort(key.begin(), key.end());
      ++owners[key];
    }
  }
  int interior = 0, boundary = 0;
  for (const auto& [key, count] : owners) {
    REQUIRE(count <= 2);
    if (count == 2) ++interior;
    else ++boundary;
  }
  CHECK(mesh.n_interior_faces() == interior);
  CHECK(mesh.n_boundary_faces() == boundary);
  CHECK(interior == (24 * 8 - 12 * 4) / 2); // 72

  const double expected = 27.2 * 27.2 * 27.2;
  CHECK(mesh.total_volume() == Catch::Approx(expected).epsilon(1e-9));
}

TEST_CASE("tet volume partitions the cube for several resolutions") {
  for (int n : {1, 3, 4}) {
    const Mesh mesh = build_ambient_grid(n, 13.6);
    CHECK(mesh.n_tets() == 6 * n * n * n);
    CHECK(mesh.total_volume() == Catch::Approx(20123.648).epsilon(1e-9));
    for (double v : mesh.tet_volumes()) CHECK(v > 0.0);
  }
}

TEST_CASE("interior faces are conforming and edges see 3 faces each") {
  const Mesh mesh = build_ambient_grid(2, 13.6);
  for (const auto& f : mesh.interior_faces()) {
    auto in_tet = [&](int tet, int v) {
      const auto& t = mesh.tets()[tet];
      return std::find(t.begin(), t.end(), v) != t.end();
    };
    for (int v : f.verts) {
      CHECK(in_tet(f.tet_a, v));
      CHECK(in_tet(f.tet_b, v));
    }
    CHECK(f.tet_a != f.tet_b);
  }

  std::vector<int> edge_hits(mesh.n_interior_faces(), 0);
  for (const auto& edge : mesh.edges())
    for (int f : edge.faces) ++edge_hits[f];
  for (int hits : edge_hits) CHECK(hits == 3);

  for (const auto& [a, b] : mesh.face_adjacency()) CHECK(a != b);
  std::set<std::pair<int, int>> seen;
  for (const auto& pr : mesh.face_adjacency()) {
    CHECK(!seen.count(pr));
    CHECK(!seen.count({pr.second, pr.first}));
    seen.insert(pr);
  }
}

TEST_CASE("grid construction rejects bad arguments") {
  CHECK_THROWS_AS(build_ambient_grid(0, 13.6), MeshError);
  CHECK_THROWS_AS(build_ambient_grid(4, 0.0), MeshError);
  CHECK_THROWS_AS(build_ambient_grid(4, -1.0), MeshError);
}

TEST_CASE("mesh save/load round-trips exactly") {
  const Mesh mesh = build_ambient_grid(2, 13.6);
  const std::string path = temp_path("btperm_mesh_roundtrip.txt");
  save_mesh(mesh, path);
  const Mesh loaded = load_mesh(path);
  REQUIRE(loaded.n_vertices() == mesh.n_vertices());
  REQUIRE(loaded.n_tets() == mesh.n_tets());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    CHECK(loaded.vertices()[v] == mesh.vertices()[v]);
  for (int t = 0; t < mesh.n_tets(); ++t)
    CHECK(loaded.tets()[t] == mesh.tets()[t]);
  CHECK(loaded.n_interior_faces() == mesh.n_interior_faces());
  std::filesystem::remove(path);
}

TEST_CASE("mesh loader reports malformed input with line numbers") {
  const std::string path = temp_path("btperm_mesh_bad.txt");

  SECTION("tet index out of range") {
    std::ofstream(path) << "VERTICES 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\nTETS 1\n0 1 2 9\n";
    CHECK_THROWS_WITH(load_mesh(path), Catch::Matchers::ContainsSubstring("vertex index out of range") &&
                                           Catch::Matchers::ContainsSubstring("line 7"));
  }
  SECTION("truncated file") {
    std::ofstream(path) << "VERTICES 4\n0 0 0\n1 0 0\n";
    CHECK_THROWS_WITH(load_mesh(path), Catch::Matchers::ContainsSubstring("unexpected end of input"));
  }
  SECTION("non-positive volume") {
    std::ofstream(path) << "VERTICES 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\nTETS 1\n0 2 1 3\n";
    CHECK_THROWS_WITH(load_mesh(path), Catch::Matchers::ContainsSubstring("non-positive volume"));
  }
  SECTION("malformed header") {
    std::ofstream(path) << "VERTS 4\n";
    CHECK_THROWS_AS(load_mesh(path), IoError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("ground truth classifies faces by centroid sign") {
  const Mesh mesh = build_ambient_grid(8, 13.6);
  ShapeSpec sphere;
  sphere.kind = ShapeKind::Sphere;
  sphere.radius = 8.0;
  const PermeabilityField field = generate_ground_truth(mesh, sphere);

  // Independent oracle: rescan every interior face with the SDF directly.
  int barrier_count = 0;
  for (int f = 0; f < mesh.n_interior_faces(); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const bool in_a = sphere.sdf(mesh.tet_centroid(face.tet_a)) < 0.0;
    const bool in_b = sphere.sdf(mesh.tet_centroid(face.tet_b)) < 0.0;
    const double expected = (in_a != in_b) ? 1e-5 : 1e-1;
    REQUIRE(field.kappa[f] == expected);
    if (in_a != in_b) ++barrier_count;
  }
  CHECK(barrier_count > 0);

  const InterfaceSet interface = extract_interface(field, 1e-3);
  CHECK(static_cast<int>(interface.faces.size()) == barrier_count);

  // Thresholding the ground truth recovers exactly the assigned barrier set.
  for (int f : interface.faces) CHECK(field.kappa[f] == 1e-5);
}

TEST_CASE("extract_interface uses a strict threshold") {
  SigmoidReparam reparam;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(5); // kappa = 1e-3 everywhere
  PermeabilityField field = PermeabilityField::from_theta(theta, reparam);
  CHECK(extract_interface(field, 1e-3).faces.empty());

  Eigen::VectorXd kappa = field.kappa;
  kappa[2] = 1e-5;
  field = PermeabilityField::from_kappa(kappa, reparam);
  const InterfaceSet set = extract_interface(field, 1e-3);
  REQUIRE(set.faces.size() == 1);
  CHECK(set.faces[0] == 2);

  CHECK_THROWS_AS(extract_interface(field, 1e-6), ConfigError);
  CHECK_THROWS_AS(extract_interface(field, 1.0), ConfigError);
}

TEST_CASE("degenerate shapes are rejected") {
  const Mesh mesh = build_ambient_grid(2, 13.6);
  ShapeSpec sphere;
  sphere.kind = ShapeKind::Sphere;
  sphere.radius = 0.0;
  CHECK_THROWS_AS(generate_ground_truth(mesh, sphere), ConfigError);
  sphere.radius = 30.0; // pokes out of the domain
  CHECK_THROWS_AS(generate_ground_truth(mesh, sphere), ConfigError);
}

TEST_CASE("reparam maps theta through the tempered sigmoid") {
  SigmoidReparam reparam;
  CHECK(reparam.kappa(0.0) == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(reparam.log10_kappa(1e9) == Catch::Approx(-1.0).margin(1e-9));
  CHECK(reparam.log10_kappa(-1e9) == Catch::Approx(-5.0).margin(1e-9));
  // theta = tau_sigma: k = -5 + 4*sigmoid(1)
  CHECK(reparam.log10_kappa(reparam.tau_sigma) ==
        Catch::Approx(-5.0 + 4.0 * sigmoid(1.0)).epsilon(1e-14));
  CHECK(reparam.log10_kappa(1.0) == Catch::Approx(-2.07576).margin(1e-5));

  // Round trip through the inverse map away from the saturated ends.
  for (double kappa : {1e-4, 1e-3, 1e-2, 5e-2}) {
    const double theta = reparam.theta_from_kappa(kappa);
    CHECK(reparam.kappa(theta) == Catch::Approx(kappa).epsilon(1e-10));
  }
}
