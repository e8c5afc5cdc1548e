// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_SNAPSHOTS_HPP
#define NLROM_SNAPSHOTS_HPP

#include <atomic>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/hash.hpp"
#include "nlrom/rng.hpp"

namespace nlrom {

// Paired parameter and state matrices (one column per snapshot) plus the
// provenance needed to regenerate them bit-exactly.
struct SnapshotSet {
  Eigen::MatrixXd params;  // p x N
  Eigen::MatrixXd states;  // N_h x N
  std::string problem;
  Sha256Digest config_hash{};
  std::uint64_t seed = 0;
  nlohmann::json meta = nlohmann::json::object();

  int param_dim() const { return static_cast<int>(params.rows()); }
  int state_dim() const { return static_cast<int>(states.rows()); }
  int count() const { return static_cast<int>(params.cols()); }

  void validate() const {
    if (params.cols() != states.cols())
      throw ConfigError("SnapshotSet: params/states column mismatch");
    if (count() < 1) throw ConfigError("SnapshotSet: empty set");
    if (!params.allFinite() || !states.allFinite())
      throw ConfigError("SnapshotSet: non-finite entries");
  }
};

/// I.i.d. uniform samples over a product of intervals; column j is sample j.
/// Addressed draws make the result independent of evaluation order.
inline Eigen::MatrixXd sample_uniform(const std::vector<std::pair<double, double>> &bounds,
                                      int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("sample_uniform: count must be >= 1");
  const int p = static_cast<int>(bounds.size());
  for (const auto &[a, b] : bounds)
    if (!(a < b)) throw ConfigError("sample_uniform: empty interval");
  Eigen::MatrixXd m(p, count);
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < p; ++i)
      m(i, j) = bounds[static_cast<std::size_t>(i)].first +
                (bounds[static_cast<std::size_t>(i)].second -
                 bounds[static_cast<std::size_t>(i)].first) *
                    uniform01_at(seed, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(j));
  return m;
}

/// I.i.d. standard normal k x count matrix.
inline Eigen::MatrixXd sample_gaussian(int k, int count, std::uint64_t seed) {
  if (k < 1 || count < 1) throw ConfigError("sample_gaussian: dimensions must be >= 1");
  Eigen::MatrixXd m(k, count);
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < k; ++i)
      m(i, j) = normal_at(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
  return m;
}

// A full-order model presented to the snapshot generator: dimensions, a tag,
// the config hash, and the parameter-to-state solve.
struct ProblemModel {
  int param_dim = 0;
  int state_dim = 0;
  std::string tag;
  Sha256Digest config_hash{};
  nlohmann::json meta = nlohmann::json::object();
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> solve;
};

/// Runs the FOM over every parameter column. Columns are distributed over a
/// worker pool; each lands in its own slot, so the result does not depend on
/// scheduling. Any solve failure aborts with the smallest failing column.
inline SnapshotSet generate(const ProblemModel &model, const Eigen::MatrixXd &params,
                            std::uint64_t seed, int threads = 1) {
  if (params.rows() != model.param_dim)
    throw ConfigError("generate: parameter dimension mismatch");
  const int n = static_cast<int>(params.cols());
  if (n < 1) throw ConfigError("generate: empty parameter matrix");

  SnapshotSet set;
  set.params = params;
  set.states.resize(model.state_dim, n);
  set.problem = model.tag;
  set.config_hash = model.config_hash;
  set.seed = seed;
  set.meta = model.meta;

  std::atomic<int> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  int failed_col = -1;  // guarded by error_mutex
  std::string error_message;

  auto worker = [&]() {
    for (;;) {
      const int j = next.fetch_add(1);
      if (j >= n || abort.load()) return;
      try {
        Eigen::VectorXd u = model.solve(params.col(j));
        if (u.size() != model.state_dim)
          throw NumericalError("generate: state dimension mismatch");
        set.states.col(j) = u;
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (failed_col < 0 || j < failed_col) {
          failed_col = j;
          error_message = e.what();
        }
        abort.store(true);
        return;
      }
    }
  };

  const int pool = std::max(1, threads);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> team;
    team.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) team.emplace_back(worker);
    for (auto &th : team) th.join();
  }

  if (failed_col >= 0)
    throw NumericalError("generate: solve failed at column " + std::to_string(failed_col) +
                         ": " + error_message);
  set.validate();
  return set;
}

namespace detail {

inline void write_u32(std::ostream &os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char *>(b), 4);
}

inline void write_u64(std::ostream &os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char *>(b), 8);
}

inline std::uint32_t read_u32(std::istream &is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char *>(b), 4);
  if (!is) throw IoError("snapshot file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream &is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char *>(b), 8);
  if (!is) throw IoError("snapshot file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline Sha256Digest payload_digest(const Eigen::MatrixXd &params, const Eigen::MatrixXd &states) {
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  Sha256Digest out{};
  unsigned int out_len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, params.data(), sizeof(double) * static_cast<std::size_t>(params.size())) != 1 ||
      EVP_DigestUpdate(ctx, states.data(), sizeof(double) * static_cast<std::size_t>(states.size())) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &out_len) != 1 || out_len != 32) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256: digest computation failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

}  // namespace detail

constexpr std::uint32_t kSnapshotFormatVersion = 1;

/// Writes the SNP1 container: magic, version, dimensions, seed, config hash,
/// column-major float64 payload, then a JSON metadata trailer (with a payload
/// digest) prefixed by its byte length.
inline void save(const SnapshotSet &set, const std::string &path) {
  set.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save: cannot open " + path);
  os.write("SNP1", 4);
  detail::write_u32(os, kSnapshotFormatVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(set.param_dim()));
  detail::write_u32(os, static_cast<std::uint32_t>(set.state_dim()));
  detail::write_u32(os, static_cast<std::uint32_t>(set.count()));
  detail::write_u64(os, set.seed);
  os.write(reinterpret_cast<const char *>(set.config_hash.data()), 32);
  os.write(reinterpret_cast<const char *>(set.params.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(set.params.size())));
  os.write(reinterpret_cast<const char *>(set.states.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(set.states.size())));
  nlohmann::json trailer = set.meta;
  trailer["problem"] = set.problem;
  trailer["payload_sha256"] = hex(detail::payload_digest(set.params, set.states));
  const std::string trailer_str = trailer.dump();
  detail::write_u32(os, static_cast<std::uint32_t>(trailer_str.size()));
  os.write(trailer_str.data(), static_cast<std::streamsize>(trailer_str.size()));
  if (!os) throw IoError("save: write failed for " + path);
}

inline SnapshotSet load(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SNP1", 4) != 0) throw IoError("load: bad magic");
  const std::uint32_t version = detail::read_u32(is);
  if (version != kSnapshotFormatVersion) throw IoError("load: unsupported format version");
  const std::uint32_t p = detail::read_u32(is);
  const std::uint32_t nh = detail::read_u32(is);
  const std::uint32_t n = detail::read_u32(is);
  if (n < 1) throw IoError("load: empty snapshot set");

  SnapshotSet set;
  set.seed = detail::read_u64(is);
  is.read(reinterpret_cast<char *>(set.config_hash.data()), 32);
  if (!is) throw IoError("snapshot file truncated");
  set.params.resize(p, n);
  set.states.resize(nh, n);
  is.read(reinterpret_cast<char *>(set.params.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(set.params.size())));
  is.read(reinterpret_cast<char *>(set.states.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(set.states.size())));
  if (!is) throw IoError("snapshot file truncated");
  const std::uint32_t trailer_len = detail::read_u32(is);
  std::string trailer_str(trailer_len, '\0');
  is.read(trailer_str.data(), trailer_len);
  if (!is) throw IoError("snapshot file truncated");

  nlohmann::json trailer = nlohmann::json::parse(trailer_str, nullptr, false);
  if (trailer.is_discarded()) throw IoError("load: malformed metadata trailer");
  const std::string expected = trailer.value("payload_sha256", "");
  if (expected != hex(detail::payload_digest(set.params, set.states)))
    throw IoError("load: payload hash mismatch (file corrupted)");
  set.problem = trailer.value("problem", "");
  trailer.erase("problem");
  trailer.erase("payload_sha256");
  set.meta = trailer;
  set.validate();
  return set;
}

}  // namespace nlrom

#endif  // NLROM_SNAPSHOTS_HPP
