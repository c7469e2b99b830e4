// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "btperm/config.hpp"
#include "btperm/io.hpp"

using namespace btperm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

} // namespace

TEST_CASE("protocol file round trip") {
  const Protocol p = default_protocol();
  const std::string path = temp_path("btperm_protocol.txt");
  save_protocol(p, path);
  const Protocol loaded = load_protocol(path);
  REQUIRE(loaded.size() == p.size());
  for (int i = 0; i < p.size(); ++i) {
    CHECK(loaded.acquisitions[i].b == p.acquisitions[i].b);
    CHECK(loaded.acquisitions[i].delta == p.acquisitions[i].delta);
    CHECK(loaded.acquisitions[i].Delta == p.acquisitions[i].Delta);
    CHECK(loaded.acquisitions[i].direction == p.acquisitions[i].direction);
  }
  std::filesystem::remove(path);

  write_file(path, "1 0 0 1000\n");
  CHECK_THROWS_AS(load_protocol(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("signals file round trip and protocol consistency checks") {
  const Protocol p = default_protocol();
  SignalSet set;
  for (int i = 0; i < p.size(); ++i)
    set.signals.emplace_back(std::sqrt(2.0) * (i + 1), -0.25 * i);

  const std::string path = temp_path("btperm_signals.txt");
  save_signals(p, set, path);
  const SignalSet loaded = load_signals(p, path);
  REQUIRE(loaded.signals.size() == set.signals.size());
  for (std::size_t i = 0; i < set.signals.size(); ++i)
    CHECK(loaded.signals[i] == set.signals[i]); // bit-exact text round trip

  // A mismatching protocol row is rejected.
  Protocol other = p;
  other.acquisitions[3].b += 0.5;
  CHECK_THROWS_WITH(load_signals(other, path),
                    Catch::Matchers::ContainsSubstring("does not match"));
  std::filesystem::remove(path);
}

TEST_CASE("field file round trip and validation") {
  SigmoidReparam reparam;
  Eigen::VectorXd kappa(4);
  kappa << 1e-5, 1e-3, 2.5e-2, 1e-1;
  const PermeabilityField field = PermeabilityField::from_kappa(kappa, reparam);
  const std::string path = temp_path("btperm_field.txt");
  save_field(field, path);
  const PermeabilityField loaded = load_field(4, path, reparam);
  for (int f = 0; f < 4; ++f) CHECK(loaded.kappa[f] == field.kappa[f]);

  CHECK_THROWS_WITH(load_field(5, path, reparam),
                    Catch::Matchers::ContainsSubstring("missing face"));
  write_file(path, "0 1e-3\n9 1e-3\n");
  CHECK_THROWS_WITH(load_field(4, path, reparam),
                    Catch::Matchers::ContainsSubstring("out of range"));
  write_file(path, "0 -2e-3\n");
  CHECK_THROWS_AS(load_field(1, path, reparam), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("interface file round trip against the mesh") {
  const Mesh mesh = build_ambient_grid(2, 13.6);
  InterfaceSet set;
  set.faces = {0, 5, 17};
  const std::string path = temp_path("btperm_interface.txt");
  save_interface(mesh, set, path);
  const InterfaceSet loaded = load_interface(mesh, path);
  CHECK(loaded.faces == set.faces);

  write_file(path, "0 1 2 3\n");
  CHECK_THROWS_WITH(load_interface(mesh, path),
                    Catch::Matchers::ContainsSubstring("do not match"));
  std::filesystem::remove(path);
}

TEST_CASE("history rows render deterministically") {
  HistoryRow row{7, 1.5, 0.25, 0.125, 0.0625, 0.075, "long"};
  CHECK(history_csv_row(row) == "7,1.5,0.25,0.125,0.0625,0.075,long");
  CHECK(history_csv_header() == "iter,loss_total,loss_data,reg_cont,reg_man,lr,phase");
}

TEST_CASE("config parsing is strict and typed") {
  const std::string path = temp_path("btperm_config.cfg");
  write_file(path,
             "# comment\n"
             "grid_n = 4\n"
             "half_extent = 10\n"
             "neig = 24\n"
             "schedule = joint\n"
             "seed = 42\n"
             "shape_kind = sphere\n"
             "shape_radius = 6.5\n"
             "shape_center = 1 0 -2\n");
  const RunConfig cfg = RunConfig::from_file(path);
  CHECK(cfg.grid_n == 4);
  CHECK(cfg.half_extent == 10.0);
  CHECK(cfg.neig == 24);
  CHECK(cfg.schedule == ScheduleMode::Joint);
  CHECK(cfg.seed == 42);
  REQUIRE(cfg.has_shape);
  CHECK(cfg.shape.kind == ShapeKind::Sphere);
  CHECK(cfg.shape.radius == 6.5);
  CHECK(cfg.shape.center == Eigen::Vector3d(1, 0, -2));

  write_file(path, "grid_n = 4\nbogus_key = 1\n");
  CHECK_THROWS_WITH(RunConfig::from_file(path),
                    Catch::Matchers::ContainsSubstring("unknown config key: bogus_key"));

  write_file(path, "grid_n = 4\ngrid_n = 5\n");
  CHECK_THROWS_WITH(RunConfig::from_file(path),
                    Catch::Matchers::ContainsSubstring("duplicate key"));

  write_file(path, "schedule = sometimes\n");
  CHECK_THROWS_AS(RunConfig::from_file(path), ConfigError);

  write_file(path, "grid_n = 0\n");
  CHECK_THROWS_AS(RunConfig::from_file(path), ConfigError);

  write_file(path, "threshold = 1\n");
  CHECK_THROWS_AS(RunConfig::from_file(path), ConfigError);

  std::filesystem::remove(path);
}

TEST_CASE("config parses union shapes") {
  const std::string path = temp_path("btperm_union.cfg");
  write_file(path,
             "shape_kind = union\n"
             "shape_members = 2\n"
             "shape_0_kind = bent_cylinder\n"
             "shape_0_radius = 3\n"
             "shape_0_points = -13 0 0; 0 2 0; 13 0 0\n"
             "shape_1_kind = cylinder\n"
             "shape_1_radius = 2.5\n"
             "shape_1_p0 = 0 -13 0\n"
             "shape_1_p1 = 0 13 0\n");
  const RunConfig cfg = RunConfig::from_file(path);
  REQUIRE(cfg.has_shape);
  REQUIRE(cfg.shape.kind == ShapeKind::Union);
  REQUIRE(cfg.shape.members.size() == 2);
  CHECK(cfg.shape.members[0].kind == ShapeKind::BentCylinder);
  CHECK(cfg.shape.members[0].points.size() == 3);
  CHECK(cfg.shape.members[1].kind == ShapeKind::Cylinder);
  cfg.shape.validate(13.6);

  // Torus config as used for the scheduling comparison.
  write_file(path,
             "shape_kind = torus\n"
             "shape_radius = 2.5\n"
             "shape_major_radius = 7\n"
             "shape_axis = 0 0 1\n");
  const RunConfig torus_cfg = RunConfig::from_file(path);
  CHECK(torus_cfg.shape.kind == ShapeKind::Torus);
  torus_cfg.shape.validate(13.6);
  std::filesystem::remove(path);
}
