// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nlrom/cli.hpp"

using namespace nlrom;
namespace fs = std::filesystem;

namespace {

nlohmann::json fast_circle_config() {
  return {
      {"problem", "circle_points"},
      {"problem_config", {{"grid_n", 0}}},
      {"sampling",
       {{"n_train", 64}, {"n_test", 16}, {"seed_train", 11}, {"seed_test", 12}}},
      {"reduction",
       {{"mode", "autoencoder"},
        {"latent_dim", 2},
        {"encoder_hidden", {16}},
        {"decoder_hidden", {16}},
        {"loss", "squared"},
        {"optimizer", {{"kind", "adamw"}, {"lr", 1e-3}, {"weight_decay", 0.0}}},
        {"epochs", 40},
        {"batch_size", 50},
        {"seed", 13}}},
      {"reduced_map",
       {{"hidden", {16}},
        {"loss", "squared"},
        {"optimizer", {{"kind", "adamw"}, {"lr", 1e-3}, {"weight_decay", 0.0}}},
        {"epochs", 40},
        {"batch_size", 50},
        {"seed", 14}}},
      {"pod", {{"n_list", {1, 2}}}},
      {"latents", {{"grid", 25}}}};
}

std::string scratch_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(NLROM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli pipeline: stage order, reruns, csv outputs") {
  const std::string out = scratch_dir("nlrom_cli_pipe");
  const std::string config_path = out + "/config.json";
  {
    std::ofstream os(config_path);
    os << fast_circle_config().dump(2);
  }
  const std::string base = "--config " + config_path + " --out " + out;

  SECTION("train-map before train-reduction is a stage error") {
    CHECK(run_cli("generate " + base) == cli::kExitOk);
    CHECK(run_cli("train-map " + base) == cli::kExitStageError);
    CHECK(run_cli("eval " + base) == cli::kExitStageError);
  }

  SECTION("full pipeline produces deterministic artifacts") {
    REQUIRE(run_cli("generate " + base) == cli::kExitOk);
    REQUIRE(run_cli("train-reduction " + base) == cli::kExitOk);
    REQUIRE(run_cli("train-map " + base) == cli::kExitOk);
    REQUIRE(run_cli("eval " + base) == cli::kExitOk);
    REQUIRE(run_cli("pod " + base) == cli::kExitOk);
    REQUIRE(run_cli("export-latents " + base) == cli::kExitOk);

    for (const char *name : {"train.snp1", "test.snp1", "meta.json", "reduction_encoder.nnw1",
                             "reduction_decoder.nnw1", "reduction_loss.csv", "phi.nnw1",
                             "phi_loss.csv", "errors.csv", "pod_curve.csv", "latents.csv"})
      CHECK(fs::exists(out + "/" + name));

    // loss CSV row count = epochs (+ header)
    CHECK(read_csv(out + "/reduction_loss.csv").size() == 41);
    CHECK(read_csv(out + "/phi_loss.csv").size() == 41);

    // pod curve echoes the requested n list
    const auto pod_rows = read_csv(out + "/pod_curve.csv");
    REQUIRE(pod_rows.size() == 3);
    CHECK(pod_rows[0][0] == "n");
    CHECK(pod_rows[1][0] == "1");
    CHECK(pod_rows[2][0] == "2");

    // latents grid size
    CHECK(read_csv(out + "/latents.csv").size() == 26);

    // rerunning every stage leaves byte-identical outputs
    const std::string train_bytes = slurp(out + "/train.snp1");
    const std::string errors_bytes = slurp(out + "/errors.csv");
    const std::string latents_bytes = slurp(out + "/latents.csv");
    const std::string decoder_bytes = slurp(out + "/reduction_decoder.nnw1");
    REQUIRE(run_cli("generate " + base) == cli::kExitOk);
    REQUIRE(run_cli("train-reduction " + base) == cli::kExitOk);
    REQUIRE(run_cli("train-map " + base) == cli::kExitOk);
    REQUIRE(run_cli("eval " + base) == cli::kExitOk);
    REQUIRE(run_cli("export-latents " + base) == cli::kExitOk);
    CHECK(slurp(out + "/train.snp1") == train_bytes);
    CHECK(slurp(out + "/errors.csv") == errors_bytes);
    CHECK(slurp(out + "/latents.csv") == latents_bytes);
    CHECK(slurp(out + "/reduction_decoder.nnw1") == decoder_bytes);
  }

  SECTION("config hash mismatch across stages is refused") {
    REQUIRE(run_cli("generate " + base) == cli::kExitOk);
    REQUIRE(run_cli("train-reduction " + base) == cli::kExitOk);
    auto altered = fast_circle_config();
    altered["sampling"]["seed_train"] = 999;
    const std::string altered_path = out + "/altered.json";
    {
      std::ofstream os(altered_path);
      os << altered.dump(2);
    }
    CHECK(run_cli("train-map --config " + altered_path + " --out " + out) ==
          cli::kExitStageError);
  }

  fs::remove_all(out);
}

TEST_CASE("cli rejects malformed configs") {
  const std::string out = scratch_dir("nlrom_cli_bad");
  const std::string config_path = out + "/bad.json";
  {
    std::ofstream os(config_path);
    os << "{ not json";
  }
  CHECK(run_cli("generate --config " + config_path + " --out " + out) == cli::kExitConfigError);

  {
    std::ofstream os(config_path, std::ios::trunc);
    nlohmann::json j = fast_circle_config();
    j["problem"] = "no_such_problem";
    os << j.dump();
  }
  CHECK(run_cli("generate --config " + config_path + " --out " + out) == cli::kExitConfigError);
  fs::remove_all(out);
}

TEST_CASE("eval of a perfect oracle model reports zero error columns") {
  // Hand-built artifacts: states = 2 mu, identity decoder, phi = 2 I. The
  // composed model reproduces every snapshot bitwise, so all error columns
  // are exactly zero.
  const std::string out = scratch_dir("nlrom_cli_oracle");
  nlohmann::json config = {
      {"problem", "circle_points"},
      {"problem_config", {{"grid_n", 0}}},
      {"sampling", {{"n_train", 8}, {"n_test", 4}, {"seed_train", 3}, {"seed_test", 4}}}};
  cli::RunConfig cfg = cli::RunConfig::parse(config);

  auto make_set = [&](int count, std::uint64_t seed) {
    SnapshotSet set;
    set.params = sample_uniform({{0.25, 1.0}}, count, seed);
    set.states.resize(2, count);
    for (int j = 0; j < count; ++j) {
      set.states(0, j) = 2.0 * set.params(0, j);
      set.states(1, j) = 2.0 * set.params(0, j);
    }
    set.problem = "circle_points";
    set.config_hash = cfg.hash();
    set.seed = seed;
    return set;
  };
  save(make_set(8, 3), out + "/train.snp1");
  save(make_set(4, 4), out + "/test.snp1");

  Network encoder;
  encoder.emplace<Dense>(2, 2).weights().setIdentity();
  Network decoder;
  decoder.emplace<Dense>(2, 2).weights().setIdentity();
  Network phi;
  auto &phi_dense = phi.emplace<Dense>(1, 2);
  phi_dense.weights() << 2.0, 2.0;
  encoder.save(out + "/reduction_encoder.nnw1");
  decoder.save(out + "/reduction_decoder.nnw1");
  phi.save(out + "/phi.nnw1");

  cli::detail::write_json(out + "/meta.json",
                          {{"config_hash", cfg.hash_hex()}, {"grid_side", 0}});
  cli::detail::write_json(out + "/reduction_manifest.json",
                          {{"stage", "reduction"},
                           {"config_hash", cfg.hash_hex()},
                           {"mode", "autoencoder"},
                           {"latent_dim", 2},
                           {"param_dim", 1},
                           {"state_dim", 2},
                           {"encoder_sha256", encoder.weights_digest()},
                           {"decoder_sha256", decoder.weights_digest()}});
  cli::detail::write_json(out + "/map_manifest.json",
                          {{"stage", "map"},
                           {"config_hash", cfg.hash_hex()},
                           {"decoder_sha256", decoder.weights_digest()},
                           {"phi_sha256", phi.weights_digest()}});

  const auto [train_report, test_report] = cli::cmd_eval(cfg, out);
  CHECK(train_report.mre == 0.0);
  CHECK(test_report.mre == 0.0);

  // the rel_err column of every sample row parses back to exactly zero
  const auto rows = read_csv(out + "/errors.csv");
  REQUIRE(rows.size() > 1);
  int samples_seen = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r][1] != "sample") continue;
    ++samples_seen;
    CHECK(std::stod(rows[r][5]) == 0.0);
  }
  CHECK(samples_seen == 12);
  fs::remove_all(out);
}

TEST_CASE("csv cells survive a parse round-trip at 17 significant digits") {
  for (double v : {1.0 / 3.0, 2.8075e4, -1.2345678901234567e-7, 0.1}) {
    const std::string cell = csv_cell(v);
    CHECK(std::stod(cell) == v);
  }
}
