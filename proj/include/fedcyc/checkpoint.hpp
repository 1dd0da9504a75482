#pragma once

#include <filesystem>
#include <iosfwd>

#include "fedcyc/params.hpp"

namespace fedcyc {

// Checkpoint layout: a plain-text header followed by raw values.
//
//   fedcyc-params 1
//   entries <E>
//   total <T>
//   <name> <d0>x<d1>x... <offset>      (E lines, declaration order)
//   data
//   <T little-endian IEEE-754 binary64 values>
//
// Scalars use the dimension string "scalar".
void write_checkpoint(std::ostream& os, const ParamVector& params);
ParamVector read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const ParamVector& params);
ParamVector load_checkpoint(const std::filesystem::path& path);

}  // namespace fedcyc
