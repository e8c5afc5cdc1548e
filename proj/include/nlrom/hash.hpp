// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_HASH_HPP
#define NLROM_HASH_HPP

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"

namespace nlrom {

using Sha256Digest = std::array<std::uint8_t, 32>;

inline Sha256Digest sha256(const void *data, std::size_t len) {
  Sha256Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != 32) {
    throw IoError("sha256: digest computation failed");
  }
  return out;
}

inline Sha256Digest sha256(const std::string &s) { return sha256(s.data(), s.size()); }

inline std::string hex(const Sha256Digest &d) {
  static const char *digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : d) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

/// Canonical hash of a config document: keys sorted (nlohmann objects are
/// ordered maps), no insignificant whitespace.
inline Sha256Digest config_hash(const nlohmann::json &config) { return sha256(config.dump()); }

inline std::string config_hash_hex(const nlohmann::json &config) {
  return hex(config_hash(config));
}

}  // namespace nlrom

#endif  // NLROM_HASH_HPP
