#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnff/core.hpp"

namespace dnff {

// Extended-XYZ frames carrying species, positions and one 3-vector label per
// particle. Header line:
//   Lattice="Lx 0 0 0 Ly 0 0 0 Lz" Properties=species:S:1:pos:R:3:label:R:3 label_kind=force sigma=0
// Floats are written with 17 significant digits, which round-trips doubles.
inline constexpr const char* kExtxyzProperties = "species:S:1:pos:R:3:label:R:3";

void write_extxyz(std::ostream& out, const LabeledFrame& frame);
void write_extxyz(std::ostream& out, const std::vector<LabeledFrame>& frames);
void write_extxyz_file(const std::filesystem::path& path, const std::vector<LabeledFrame>& frames);

// Species names not already in `names` are appended in order of first
// appearance; every returned frame shares the final table.
std::vector<LabeledFrame> read_extxyz(std::istream& in, SpeciesTable names = {});
std::vector<LabeledFrame> read_extxyz_file(const std::filesystem::path& path,
                                           SpeciesTable names = {});

std::string format_double(double value);

}  // namespace dnff
