// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "sptad/detect_head.hpp"
#include "sptad/numerics.hpp"

namespace sptad {

/// Flat name -> row-major matrix view of a parameter bundle. Vectors are
/// stored as 1 x n, proposal segments as N x 2 (center, length).
using ParamStore = std::map<std::string, Matrix>;

ParamStore collect_params(const ModelParams& params);

/// Overwrites every parameter of `params` from `store`. Throws SchemaError
/// on a missing name or a shape that does not match.
void assign_params(ModelParams& params, const ParamStore& store);

/// {"format": "sptad-params", "version": 1,
///  "params": {name: {"shape": [rows, cols], "data": [...]}}}
void write_params_json(const std::filesystem::path& path, const ParamStore& store);
ParamStore read_params_json(const std::filesystem::path& path);

/// "SPTADPRM", u32 version, u64 count, then per entry: u32 name length, name
/// bytes, u64 rows, u64 cols, rows*cols little-endian IEEE-754 doubles.
void write_params_binary(const std::filesystem::path& path, const ParamStore& store);
ParamStore read_params_binary(const std::filesystem::path& path);

}  // namespace sptad
