// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "json.hpp"
#include "sptad/error.hpp"

namespace sptad {

namespace {

using nlohmann::ordered_json;

constexpr char kMagic[8] = {'S', 'P', 'T', 'A', 'D', 'P', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary parameter files assume a little-endian host");

Matrix segments_to_matrix(const std::vector<CenterLengthSegment>& segs) {
  Matrix m(segs.size(), 2);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    m(i, 0) = segs[i].center;
    m(i, 1) = segs[i].length;
  }
  return m;
}

template <class T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError("truncated parameter file while reading " + what);
  }
  return value;
}

}  // namespace

ParamStore collect_params(const ModelParams& params) {
  ParamStore store;
  visit_params(params, [&store](const std::string& name, const auto& value) {
    using T = std::decay_t<decltype(value)>;
    if constexpr (std::is_same_v<T, Matrix>) {
      store.emplace(name, value);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      store.emplace(name, Matrix(1, value.size(), value));
    } else {
      store.emplace(name, segments_to_matrix(value));
    }
  });
  return store;
}

void assign_params(ModelParams& params, const ParamStore& store) {
  visit_params(params, [&store](const std::string& name, auto& value) {
    auto it = store.find(name);
    if (it == store.end()) throw SchemaError("parameter '" + name + "' missing from store");
    const Matrix& src = it->second;
    using T = std::decay_t<decltype(value)>;
    auto mismatch = [&name, &src]() {
      return SchemaError("parameter '" + name + "' has shape " + std::to_string(src.rows()) +
                         "x" + std::to_string(src.cols()) + " which does not match the model");
    };
    if constexpr (std::is_same_v<T, Matrix>) {
      if (src.rows() != value.rows() || src.cols() != value.cols()) throw mismatch();
      value = src;
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (src.rows() != 1 || src.cols() != value.size()) throw mismatch();
      value.assign(src.values().begin(), src.values().end());
    } else {
      if (src.rows() != value.size() || src.cols() != 2) throw mismatch();
      for (std::size_t i = 0; i < value.size(); ++i) value[i] = {src(i, 0), src(i, 1)};
    }
  });
}

void write_params_json(const std::filesystem::path& path, const ParamStore& store) {
  ordered_json doc;
  doc["format"] = "sptad-params";
  doc["version"] = kVersion;
  ordered_json entries = ordered_json::object();
  for (const auto& [name, m] : store) {
    ordered_json e;
    e["shape"] = {m.rows(), m.cols()};
    e["data"] = std::vector<double>(m.values().begin(), m.values().end());
    entries[name] = std::move(e);
  }
  doc["params"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ParamStore read_params_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "sptad-params") {
    throw SchemaError(path.string() + ": not an sptad parameter file");
  }
  ParamStore store;
  try {
    for (const auto& [name, e] : doc.at("params").items()) {
      const auto shape = e.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw SchemaError("params." + name + ".shape must have 2 entries");
      auto data = e.at("data").get<std::vector<double>>();
      if (data.size() != shape[0] * shape[1]) {
        throw SchemaError("params." + name + ".data length does not match shape");
      }
      store.emplace(name, Matrix(shape[0], shape[1], std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return store;
}

void write_params_binary(const std::filesystem::path& path, const ParamStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(store.size()));
  for (const auto& [name, m] : store) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<std::uint64_t>(m.rows()));
    put(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.values().data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ParamStore read_params_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + ": bad magic, not an sptad parameter file");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw ParseError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto count = get<std::uint64_t>(in, "entry count");
  ParamStore store;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, "name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw ParseError("truncated parameter name");
    const auto rows = get<std::uint64_t>(in, name + " rows");
    const auto cols = get<std::uint64_t>(in, name + " cols");
    std::vector<double> data(rows * cols);
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw ParseError("truncated data for parameter '" + name + "'");
    }
    store.emplace(std::move(name), Matrix(rows, cols, std::move(data)));
  }
  return store;
}

}  // namespace sptad
