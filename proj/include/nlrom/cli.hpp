// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_CLI_HPP
#define NLROM_CLI_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlrom/csv.hpp"
#include "nlrom/dlrom.hpp"
#include "nlrom/errors.hpp"
#include "nlrom/fem.hpp"
#include "nlrom/hash.hpp"
#include "nlrom/kl.hpp"
#include "nlrom/mesh.hpp"
#include "nlrom/pod.hpp"
#include "nlrom/problems.hpp"
#include "nlrom/snapshots.hpp"

namespace nlrom::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitStageError = 3;
constexpr int kExitNumericalError = 4;

// Parsed run configuration. `raw` keeps the canonical document used for
// hashing, so artifacts produced by different configs never mix.
struct RunConfig {
  nlohmann::json raw;
  std::string problem;

  AdvDiffConfig advdiff;        // problem == "advdiff"
  int mesh_nx = 32;             // stoch_poisson, circle_pde
  int grid_n = 256;             // 1D problems
  double kl_target_fraction = 0.9;

  int n_train = 100;
  int n_test = 20;
  std::uint64_t seed_train = 1;
  std::uint64_t seed_test = 2;

  ReductionConfig reduction;
  MapConfig map;
  std::vector<int> pod_n_list{1, 2, 4, 8};
  int latent_grid = 101;

  static RunConfig parse(const nlohmann::json &j) {
    RunConfig cfg;
    cfg.raw = j;
    cfg.problem = j.at("problem").get<std::string>();
    if (cfg.problem == "advdiff") {
      cfg.advdiff = AdvDiffConfig::from_json(j.at("problem_config"));
    } else if (cfg.problem == "stoch_poisson" || cfg.problem == "circle_pde") {
      cfg.mesh_nx = j.at("problem_config").at("nx").get<int>();
      cfg.kl_target_fraction = j.at("problem_config").value("target_fraction", 0.9);
    } else if (cfg.problem == "curve_manifold" || cfg.problem == "circle_points") {
      cfg.grid_n = j.at("problem_config").value("grid_n", 256);
    } else {
      throw ConfigError("unknown problem: " + cfg.problem);
    }
    const auto &sampling = j.at("sampling");
    cfg.n_train = sampling.at("n_train").get<int>();
    cfg.n_test = sampling.at("n_test").get<int>();
    cfg.seed_train = sampling.at("seed_train").get<std::uint64_t>();
    cfg.seed_test = sampling.at("seed_test").get<std::uint64_t>();
    if (j.contains("reduction")) cfg.reduction = ReductionConfig::from_json(j.at("reduction"));
    if (j.contains("reduced_map")) cfg.map = MapConfig::from_json(j.at("reduced_map"));
    if (j.contains("pod")) cfg.pod_n_list = j.at("pod").value("n_list", cfg.pod_n_list);
    if (j.contains("latents")) cfg.latent_grid = j.at("latents").value("grid", 101);
    return cfg;
  }

  static RunConfig load_file(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed JSON in config file: " + path);
    return parse(j);
  }

  /// Deterministic seed override: replaces every seed in the run.
  void override_seed(std::uint64_t seed) {
    seed_train = seed;
    seed_test = seed + 1;
    reduction.seed = seed + 2;
    map.train.seed = seed + 3;
    raw["seed_override"] = seed;
  }

  Sha256Digest hash() const { return config_hash(raw); }
  std::string hash_hex() const { return hex(hash()); }
};

// Everything the pipeline needs to know about one problem: the FOM, the
// sampling law, the report norm, and the state geometry.
struct ProblemSetup {
  ProblemModel model;
  std::function<Eigen::MatrixXd(int count, std::uint64_t seed)> sample;
  VectorNorm norm;
  std::string norm_name = "euclidean";
  int grid_side = 0;  // > 0 when states live on a square nodal grid
  std::optional<SnapshotSet> kl_artifact;
};

inline ProblemSetup make_problem(const RunConfig &cfg) {
  ProblemSetup setup;
  setup.model.tag = cfg.problem;
  setup.model.config_hash = cfg.hash();

  if (cfg.problem == "advdiff") {
    const AdvDiffConfig pc = cfg.advdiff;
    auto mesh = std::make_shared<Mesh>(build_unit_square_mesh(pc.nx));
    auto mass = std::make_shared<SparseMatrix>(mass_matrix(*mesh));
    setup.model.param_dim = 7;
    setup.model.state_dim = mesh->node_count();
    setup.model.meta = {{"mesh", {{"type", "unit_square"}, {"nx", pc.nx}}},
                        {"problem_config", pc.to_json()}};
    setup.model.solve = [mesh, pc](const Eigen::VectorXd &mu) {
      return advdiff_solve(AdvDiffParams::from_vector(mu), pc, *mesh);
    };
    setup.sample = [](int count, std::uint64_t seed) {
      return sample_uniform(AdvDiffParams::bounds(), count, seed);
    };
    setup.norm = [mesh, mass](const Eigen::VectorXd &v) { return l2_norm(*mesh, *mass, v); };
    setup.norm_name = "l2";
    setup.grid_side = pc.nx + 1;
    return setup;
  }

  if (cfg.problem == "stoch_poisson") {
    auto mesh = std::make_shared<Mesh>(build_unit_square_mesh(cfg.mesh_nx));
    auto mass = std::make_shared<SparseMatrix>(mass_matrix(*mesh));
    const auto [c, m] = assemble_covariance_operator(*mesh, default_covariance_kernel());
    auto basis = std::make_shared<KLBasis>(solve_kl(c, m, cfg.kl_target_fraction));
    const int k = basis->truncation();
    setup.model.param_dim = k;
    setup.model.state_dim = mesh->node_count();
    setup.model.meta = {{"mesh", {{"type", "unit_square"}, {"nx", cfg.mesh_nx}}},
                        {"kl", {{"k", k}, {"explained_fraction", basis->explained_fraction}}}};
    setup.model.solve = [mesh, basis](const Eigen::VectorXd &mu) {
      return stoch_poisson_solve(*basis, mu, *mesh);
    };
    setup.sample = [k](int count, std::uint64_t seed) {
      return sample_gaussian(k, count, seed);
    };
    setup.norm = [mesh, mass](const Eigen::VectorXd &v) { return l2_norm(*mesh, *mass, v); };
    setup.norm_name = "l2";
    setup.grid_side = cfg.mesh_nx + 1;

    SnapshotSet kl_set;
    kl_set.params = basis->eigenvalues.transpose();  // 1 x k
    kl_set.states = basis->eigenfunctions;           // N_h x k
    kl_set.problem = "kl_basis";
    kl_set.config_hash = cfg.hash();
    kl_set.seed = 0;
    kl_set.meta = {{"mean", basis->mean},
                   {"explained_fraction", basis->explained_fraction},
                   {"total_variance", basis->total_variance},
                   {"mesh", {{"type", "unit_square"}, {"nx", cfg.mesh_nx}}}};
    setup.kl_artifact = std::move(kl_set);
    return setup;
  }

  if (cfg.problem == "circle_pde") {
    auto mesh = std::make_shared<Mesh>(build_unit_square_mesh(cfg.mesh_nx));
    auto mass = std::make_shared<SparseMatrix>(mass_matrix(*mesh));
    setup.model.param_dim = 1;
    setup.model.state_dim = mesh->node_count();
    setup.model.meta = {{"mesh", {{"type", "unit_square"}, {"nx", cfg.mesh_nx}}}};
    setup.model.solve = [mesh](const Eigen::VectorXd &mu) {
      return circle_problem_solve({mu[0]}, *mesh);
    };
    setup.sample = [](int count, std::uint64_t seed) {
      return sample_uniform({{0.0, 2.0 * M_PI}}, count, seed);
    };
    setup.norm = [mesh, mass](const Eigen::VectorXd &v) { return l2_norm(*mesh, *mass, v); };
    setup.norm_name = "l2";
    setup.grid_side = cfg.mesh_nx + 1;
    return setup;
  }

  if (cfg.problem == "curve_manifold") {
    auto grid = std::make_shared<Grid1D>(build_interval_mesh(0.0, M_PI, cfg.grid_n));
    setup.model.param_dim = 1;
    setup.model.state_dim = grid->node_count();
    setup.model.meta = {{"mesh", {{"type", "interval"}, {"a", 0.0}, {"b", M_PI},
                                  {"n", cfg.grid_n}}}};
    setup.model.solve = [grid](const Eigen::VectorXd &mu) {
      return curve_snapshot(mu[0], *grid);
    };
    setup.sample = [](int count, std::uint64_t seed) {
      return sample_uniform({{0.0, 1.0}}, count, seed);
    };
    setup.norm = [grid](const Eigen::VectorXd &v) { return l2_norm(*grid, v); };
    setup.norm_name = "l2";
    return setup;
  }

  // circle_points: the analytic unit-circle manifold in R^2
  setup.model.param_dim = 1;
  setup.model.state_dim = 2;
  setup.model.meta = {{"mesh", {{"type", "none"}}}};
  setup.model.solve = [](const Eigen::VectorXd &mu) {
    return Eigen::VectorXd(unit_circle_point(mu[0]));
  };
  setup.sample = [](int count, std::uint64_t seed) {
    return sample_uniform({{0.0, 2.0 * M_PI}}, count, seed);
  };
  setup.norm = euclidean_norm();
  return setup;
}

namespace detail {

inline void require_file(const std::string &path, const std::string &stage_hint) {
  if (!std::filesystem::exists(path))
    throw StageError("missing artifact " + path + "; run `" + stage_hint + "` first");
}

inline void write_json(const std::string &path, const nlohmann::json &j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path);
  os << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON: " + path);
  return j;
}

inline void check_hash(const nlohmann::json &manifest, const RunConfig &cfg,
                       const std::string &what) {
  if (manifest.value("config_hash", "") != cfg.hash_hex())
    throw StageError(what + " was produced by a different config (hash mismatch)");
}

inline void write_loss_csv(const std::string &path, const std::vector<double> &history) {
  CsvWriter csv(path);
  csv.row({"epoch", "loss"});
  for (std::size_t e = 0; e < history.size(); ++e)
    csv.row({csv_cell(static_cast<long long>(e)), csv_cell(history[e])});
}

}  // namespace detail

/// generate: sample parameters, run the FOM, write train.snp1 / test.snp1
/// (plus kl.snp1 for the stochastic problem) and meta.json.
inline void cmd_generate(const RunConfig &cfg, const std::string &out, int threads = 1) {
  std::filesystem::create_directories(out);
  ProblemSetup setup = make_problem(cfg);

  const Eigen::MatrixXd train_params = setup.sample(cfg.n_train, cfg.seed_train);
  const Eigen::MatrixXd test_params = setup.sample(cfg.n_test, cfg.seed_test);
  SnapshotSet train_set = generate(setup.model, train_params, cfg.seed_train, threads);
  SnapshotSet test_set = generate(setup.model, test_params, cfg.seed_test, threads);
  save(train_set, out + "/train.snp1");
  save(test_set, out + "/test.snp1");
  if (setup.kl_artifact) save(*setup.kl_artifact, out + "/kl.snp1");

  nlohmann::json meta = {{"command", "generate"},
                         {"problem", cfg.problem},
                         {"config_hash", cfg.hash_hex()},
                         {"param_dim", setup.model.param_dim},
                         {"state_dim", setup.model.state_dim},
                         {"grid_side", setup.grid_side},
                         {"norm", setup.norm_name},
                         {"n_train", cfg.n_train},
                         {"n_test", cfg.n_test}};
  detail::write_json(out + "/meta.json", meta);
}

/// train-reduction: stage 1 of the pipeline.
inline void cmd_train_reduction(const RunConfig &cfg, const std::string &out) {
  detail::require_file(out + "/meta.json", "generate");
  detail::require_file(out + "/train.snp1", "generate");
  detail::check_hash(detail::read_json(out + "/meta.json"), cfg, "snapshot set");

  const SnapshotSet train_set = load(out + "/train.snp1");
  ReductionConfig rc = cfg.reduction;
  if (rc.grid_side == 0)
    rc.grid_side = detail::read_json(out + "/meta.json").value("grid_side", 0);
  if (rc.mode == ReductionMode::TranscoderDecoder) rc.latent_dim = train_set.param_dim();

  const Reduction red = train_reduction(rc, train_set);
  red.encoder.save(out + "/reduction_encoder.nnw1");
  red.decoder.save(out + "/reduction_decoder.nnw1");
  detail::write_loss_csv(out + "/reduction_loss.csv", red.history);

  nlohmann::json manifest = {{"stage", "reduction"},
                             {"config_hash", cfg.hash_hex()},
                             {"mode", to_string(red.mode)},
                             {"latent_dim", red.latent_dim},
                             {"param_dim", red.param_dim},
                             {"state_dim", red.state_dim},
                             {"grid_side", rc.grid_side},
                             {"encoder_sha256", red.encoder.weights_digest()},
                             {"decoder_sha256", red.decoder.weights_digest()}};
  detail::write_json(out + "/reduction_manifest.json", manifest);
}

namespace detail {

inline Reduction load_reduction(const RunConfig &cfg, const std::string &out) {
  require_file(out + "/reduction_manifest.json", "train-reduction");
  const nlohmann::json manifest = read_json(out + "/reduction_manifest.json");
  check_hash(manifest, cfg, "reduction model");
  Reduction red;
  red.mode = reduction_mode_from_string(manifest.at("mode").get<std::string>());
  red.latent_dim = manifest.at("latent_dim").get<int>();
  red.param_dim = manifest.at("param_dim").get<int>();
  red.state_dim = manifest.at("state_dim").get<int>();
  red.encoder = Network::load(out + "/reduction_encoder.nnw1");
  red.decoder = Network::load(out + "/reduction_decoder.nnw1");
  if (red.encoder.weights_digest() != manifest.value("encoder_sha256", "") ||
      red.decoder.weights_digest() != manifest.value("decoder_sha256", ""))
    throw StageError("reduction model files do not match their manifest");
  return red;
}

}  // namespace detail

/// train-map: stage 2, requires the stage-1 artifacts.
inline void cmd_train_map(const RunConfig &cfg, const std::string &out) {
  const Reduction red = detail::load_reduction(cfg, out);
  detail::require_file(out + "/train.snp1", "generate");
  const SnapshotSet train_set = load(out + "/train.snp1");

  const Eigen::MatrixXd latents = encode_dataset(red, train_set);
  std::vector<double> history;
  const Network phi = train_reduced_map(latents, train_set.params, cfg.map, &history);
  phi.save(out + "/phi.nnw1");
  detail::write_loss_csv(out + "/phi_loss.csv", history);

  nlohmann::json manifest = {{"stage", "map"},
                             {"config_hash", cfg.hash_hex()},
                             {"decoder_sha256", red.decoder.weights_digest()},
                             {"phi_sha256", phi.weights_digest()}};
  detail::write_json(out + "/map_manifest.json", manifest);
}

namespace detail {

inline void write_error_rows(CsvWriter &csv, const std::string &split, const ErrorReport &r) {
  for (std::size_t j = 0; j < r.samples.size(); ++j) {
    const SampleError &s = r.samples[j];
    csv.row({split, "sample", csv_cell(static_cast<long long>(j)), csv_cell(s.state_norm),
             csv_cell(s.total), csv_cell(s.relative), csv_cell(s.recon),
             csv_cell(s.recon_relative), csv_cell(s.decoder_diff), csv_cell(s.latent_dist),
             csv_cell(s.slack)});
  }
  SampleError mean{}, mn{}, mx{};
  auto fold = [&](auto get) {
    double acc = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &s : r.samples) {
      const double v = get(s);
      acc += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::array<double, 3>{acc / static_cast<double>(r.samples.size()), lo, hi};
  };
  const char *names[3] = {"mean", "min", "max"};
  for (int which = 0; which < 3; ++which) {
    std::vector<std::string> row{split, names[which], csv_cell(-1LL)};
    auto push = [&](auto get) { row.push_back(csv_cell(fold(get)[static_cast<std::size_t>(which)])); };
    push([](const SampleError &s) { return s.state_norm; });
    push([](const SampleError &s) { return s.total; });
    push([](const SampleError &s) { return s.relative; });
    push([](const SampleError &s) { return s.recon; });
    push([](const SampleError &s) { return s.recon_relative; });
    push([](const SampleError &s) { return s.decoder_diff; });
    push([](const SampleError &s) { return s.latent_dist; });
    push([](const SampleError &s) { return s.slack; });
    csv.row(row);
  }
}

}  // namespace detail

/// eval: per-sample error decomposition and summary rows for both splits.
inline std::pair<ErrorReport, ErrorReport> cmd_eval(const RunConfig &cfg,
                                                    const std::string &out) {
  const Reduction red = detail::load_reduction(cfg, out);
  detail::require_file(out + "/map_manifest.json", "train-map");
  const nlohmann::json map_manifest = detail::read_json(out + "/map_manifest.json");
  detail::check_hash(map_manifest, cfg, "reduced map");
  if (map_manifest.value("decoder_sha256", "") != red.decoder.weights_digest())
    throw StageError("reduced map was trained against a different decoder");
  detail::require_file(out + "/train.snp1", "generate");
  detail::require_file(out + "/test.snp1", "generate");

  const SnapshotSet train_set = load(out + "/train.snp1");
  const SnapshotSet test_set = load(out + "/test.snp1");
  const Network phi = Network::load(out + "/phi.nnw1");
  const DlRom rom = compose(red, phi);
  const ProblemSetup setup = make_problem(cfg);

  const ErrorReport train_report = evaluate(rom, red, train_set, setup.norm, setup.norm_name);
  const ErrorReport test_report = evaluate(rom, red, test_set, setup.norm, setup.norm_name);

  CsvWriter csv(out + "/errors.csv");
  csv.row({"split", "kind", "index", "state_norm", "total_err", "rel_err", "recon_err",
           "recon_rel", "decoder_diff", "latent_dist", "triangle_slack"});
  detail::write_error_rows(csv, "train", train_report);
  detail::write_error_rows(csv, "test", test_report);
  return {train_report, test_report};
}

/// pod: projection error vs degrees-of-freedom table. For mesh problems the
/// main columns use the L2 (mass) norm and Euclidean columns are appended.
inline void cmd_pod(const RunConfig &cfg, const std::string &out) {
  detail::require_file(out + "/train.snp1", "generate");
  detail::require_file(out + "/test.snp1", "generate");
  detail::check_hash(detail::read_json(out + "/meta.json"), cfg, "snapshot set");
  const SnapshotSet train_set = load(out + "/train.snp1");
  const SnapshotSet test_set = load(out + "/test.snp1");
  const ProblemSetup setup = make_problem(cfg);

  const auto rows = error_dof_curve(train_set.states, test_set.states, cfg.pod_n_list, setup.norm);
  const bool with_euclid = setup.norm_name != "euclidean";
  std::vector<ErrorDofRow> euclid_rows;
  if (with_euclid)
    euclid_rows = error_dof_curve(train_set.states, test_set.states, cfg.pod_n_list);

  CsvWriter csv(out + "/pod_curve.csv");
  std::vector<std::string> header{"n", "dof", "train_mre", "test_mre"};
  if (with_euclid) {
    header.push_back("train_mre_euclid");
    header.push_back("test_mre_euclid");
  }
  csv.row(header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> row{csv_cell(rows[i].n), csv_cell(rows[i].dof),
                                 csv_cell(rows[i].train_mre), csv_cell(rows[i].test_mre)};
    if (with_euclid) {
      row.push_back(csv_cell(euclid_rows[i].train_mre));
      row.push_back(csv_cell(euclid_rows[i].test_mre));
    }
    csv.row(row);
  }
}

/// export-latents: phi over a parameter grid (1-parameter problems) or over
/// the test parameters.
inline void cmd_export_latents(const RunConfig &cfg, const std::string &out) {
  const Reduction red = detail::load_reduction(cfg, out);
  detail::require_file(out + "/phi.nnw1", "train-map");
  const Network phi = Network::load(out + "/phi.nnw1");

  Eigen::MatrixXd grid;
  if (red.param_dim == 1) {
    double lo = 0.0, hi = 2.0 * M_PI;
    if (cfg.problem == "curve_manifold") hi = 1.0;
    grid.resize(1, cfg.latent_grid);
    for (int j = 0; j < cfg.latent_grid; ++j)
      grid(0, j) = lo + (hi - lo) * j / std::max(1, cfg.latent_grid - 1);
  } else {
    detail::require_file(out + "/test.snp1", "generate");
    grid = load(out + "/test.snp1").params;
  }

  const Eigen::MatrixXd table = export_latents(phi, grid);
  CsvWriter csv(out + "/latents.csv");
  std::vector<std::string> header;
  for (int i = 0; i < red.param_dim; ++i) header.push_back("mu_" + std::to_string(i + 1));
  for (int i = 0; i < red.latent_dim; ++i) header.push_back("z_" + std::to_string(i + 1));
  csv.row(header);
  for (int r = 0; r < table.rows(); ++r) {
    std::vector<std::string> row;
    for (int c = 0; c < table.cols(); ++c) row.push_back(csv_cell(table(r, c)));
    csv.row(row);
  }
}

}  // namespace nlrom::cli

#endif  // NLROM_CLI_HPP
