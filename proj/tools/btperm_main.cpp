// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: generate grids and phantoms, simulate reference
// signals, run permeability inversions, and evaluate reconstructions.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "btperm/adjoint.hpp"
#include "btperm/config.hpp"
#include "btperm/io.hpp"
#include "btperm/metrics.hpp"

namespace {

using namespace btperm;

struct CliOverrides {
  std::string config_path;
  std::string out;
  long seed = -1;
  int workers = -1;
  std::string mode;
};

RunConfig load_config(const CliOverrides& cli) {
  RunConfig cfg = RunConfig::from_file(cli.config_path);
  if (cli.seed >= 0) cfg.seed = static_cast<unsigned>(cli.seed);
  if (cli.workers >= 0) cfg.workers = cli.workers;
  if (!cli.mode.empty()) cfg.schedule = schedule_mode_from_string(cli.mode);
  return cfg;
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw ConfigError(what + " not found: " + path);
}

EigOptions eig_options(const RunConfig& cfg) {
  EigOptions opts;
  opts.tol = cfg.eig_tol;
  opts.seed = cfg.seed == 0 ? 12345 : cfg.seed;
  opts.workers = resolve_workers(cfg.workers);
  return opts;
}

Protocol load_or_create_protocol(const RunConfig& cfg) {
  if (std::filesystem::exists(cfg.protocol_path)) return load_protocol(cfg.protocol_path);
  Protocol protocol = cfg.build_protocol();
  save_protocol(protocol, cfg.protocol_path);
  return protocol;
}

int cmd_grid(const CliOverrides& cli) {
  RunConfig cfg = load_config(cli);
  const std::string out_path = cli.out.empty() ? cfg.mesh_path : cli.out;
  const Mesh mesh = build_ambient_grid(cfg.grid_n, cfg.half_extent);
  save_mesh(mesh, out_path);
  std::printf("mesh=%s\nvertices=%d\ntets=%d\ninterior_faces=%d\nboundary_faces=%d\n",
              out_path.c_str(), mesh.n_vertices(), mesh.n_tets(), mesh.n_interior_faces(),
              mesh.n_boundary_faces());
  return 0;
}

int cmd_phantom(const CliOverrides& cli) {
  RunConfig cfg = load_config(cli);
  if (!cfg.has_shape) throw ConfigError("phantom requires shape_* config keys");
  require_file(cfg.mesh_path, "mesh");
  const std::string field_out = cli.out.empty() ? cfg.field_path : cli.out;

  const Mesh mesh = load_mesh(cfg.mesh_path);
  const PermeabilityField field = generate_ground_truth(mesh, cfg.shape, 1e-5, 1e-1, cfg.reparam);
  const InterfaceSet interface = extract_interface(field, cfg.threshold);
  save_field(field, field_out);
  save_interface(mesh, interface, cfg.interface_path);
  std::printf("field=%s\ninterface=%s\nbarrier_faces=%zu\ninterior_faces=%d\n",
              field_out.c_str(), cfg.interface_path.c_str(), interface.faces.size(),
              mesh.n_interior_faces());
  return 0;
}

int cmd_forward(const CliOverrides& cli) {
  RunConfig cfg = load_config(cli);
  require_file(cfg.mesh_path, "mesh");
  require_file(cfg.field_path, "field");
  const std::string signals_out = cli.out.empty() ? cfg.signals_path : cli.out;

  const Mesh mesh = load_mesh(cfg.mesh_path);
  const Protocol protocol = load_or_create_protocol(cfg);
  const PermeabilityField field = load_field(mesh.n_interior_faces(), cfg.field_path, cfg.reparam);
  const OperatorSet ops = assemble_operators(mesh, cfg.diffusivity, cfg.t2);
  const CouplingStructure coupling = build_coupling_structure(mesh, ops.dofs);
  const SignalSet signals =
      simulate_protocol(ops, coupling, field, protocol, cfg.rho, cfg.neig, eig_options(cfg),
                        resolve_workers(cfg.workers));
  save_signals(protocol, signals, signals_out);
  std::printf("signals=%s\nacquisitions=%d\n", signals_out.c_str(), protocol.size());
  return 0;
}

int cmd_invert(const CliOverrides& cli) {
  RunConfig cfg = load_config(cli);
  require_file(cfg.mesh_path, "mesh");
  require_file(cfg.signals_path, "reference signals");
  const std::string out_dir = cli.out.empty() ? cfg.out_dir : cli.out;

  const Mesh mesh = load_mesh(cfg.mesh_path);
  const Protocol protocol = load_or_create_protocol(cfg);
  const SignalSet reference = load_signals(protocol, cfg.signals_path);
  const OperatorSet ops = assemble_operators(mesh, cfg.diffusivity, cfg.t2);
  const CouplingStructure coupling = build_coupling_structure(mesh, ops.dofs);

  std::filesystem::create_directories(out_dir);
  HistoryWriter history(out_dir + "/history.csv");
  const InversionResult result = run_inversion(mesh, ops, coupling, protocol, reference,
                                               cfg.inversion_settings(), std::ref(history));

  save_field(result.field, out_dir + "/field.txt");
  const InterfaceSet interface = extract_interface(result.field, cfg.threshold);
  save_interface(mesh, interface, out_dir + "/interface.txt");
  std::printf("out_dir=%s\niterations=%zu\nfinal_loss_data=%.17g\nbarrier_faces=%zu\n",
              out_dir.c_str(), result.history.size(),
              result.history.empty() ? 0.0 : result.history.back().loss_data,
              interface.faces.size());
  return 0;
}

int cmd_eval(const CliOverrides& cli) {
  RunConfig cfg = load_config(cli);
  require_file(cfg.mesh_path, "mesh");
  require_file(cfg.protocol_path, "protocol");
  require_file(cfg.field_path, "field");
  require_file(cfg.signals_path, "reference signals");
  if (cfg.ref_interface_path.empty())
    throw ConfigError("eval requires ref_interface_path");
  require_file(cfg.ref_interface_path, "reference interface");

  const Mesh mesh = load_mesh(cfg.mesh_path);
  const Protocol protocol = load_protocol(cfg.protocol_path);
  const PermeabilityField field = load_field(mesh.n_interior_faces(), cfg.field_path, cfg.reparam);
  const SignalSet reference = load_signals(protocol, cfg.signals_path);
  const InterfaceSet truth = load_interface(mesh, cfg.ref_interface_path);

  const OperatorSet ops = assemble_operators(mesh, cfg.diffusivity, cfg.t2);
  const CouplingStructure coupling = build_coupling_structure(mesh, ops.dofs);
  const SignalSet predicted =
      simulate_protocol(ops, coupling, field, protocol, cfg.rho, cfg.neig, eig_options(cfg),
                        resolve_workers(cfg.workers));

  MetricsReport report;
  report.case_name = cfg.case_name;
  report.signal_mse = signal_mse(protocol, predicted, reference);
  const InterfaceSet recon = extract_interface(field, cfg.threshold);
  report.n_faces = static_cast<long>(recon.faces.size());
  if (!recon.faces.empty() && !truth.faces.empty()) {
    report.chamfer_defined = true;
    report.chamfer = chamfer_l2(sample_interface_points(mesh, recon),
                                sample_interface_points(mesh, truth));
  }
  const BadEdgeResult be = bad_edge_pct(mesh, recon);
  report.bad_edge_percent = be.percent;
  report.n_active_edges = be.active_edges;

  std::printf("%s", report.to_key_value().c_str());
  std::printf("%s\n%s\n", MetricsReport::csv_header().c_str(), report.to_csv_row().c_str());
  if (!cli.out.empty()) {
    std::ofstream out(cli.out);
    if (!out) throw IoError("cannot open for writing: " + cli.out);
    out << MetricsReport::csv_header() << "\n" << report.to_csv_row() << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch-Torrey face-permeability simulator and inverter"};
  app.require_subcommand(1);

  CliOverrides cli;
  int rc = 0;
  for (const auto& [name, desc, fn] :
       {std::tuple<const char*, const char*, int (*)(const CliOverrides&)>
            {"grid", "build and save the ambient tetrahedral grid", cmd_grid},
        {"phantom", "generate a ground-truth permeability field from a shape", cmd_phantom},
        {"forward", "simulate signals for a permeability field", cmd_forward},
        {"invert", "reconstruct face permeabilities from reference signals", cmd_invert},
        {"eval", "evaluate a reconstruction against a reference", cmd_eval}}) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", cli.config_path, "run configuration file")->required();
    sub->add_option("--out", cli.out, "primary output path (overrides the config)");
    sub->add_option("--seed", cli.seed, "seed override");
    sub->add_option("--workers", cli.workers, "worker thread count (0 = all cores)");
    sub->add_option("--mode", cli.mode, "schedule override: staged|joint");
    sub->callback([fn, &cli, &rc]() { rc = fn(cli); });
  }

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const MeshError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }
}
