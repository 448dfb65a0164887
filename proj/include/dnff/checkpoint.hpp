#pragma once

#include <filesystem>
#include <iosfwd>

#include "dnff/model.hpp"

namespace dnff {

inline constexpr int kCheckpointFormatVersion = 1;

// JSON document holding hyperparameters, radial-basis layout, species table,
// per-pair layer shapes with flattened row-major weights, the training sigma
// and the best validation loss. Doubles are written in shortest round-trip
// form, so read(write(p)) reproduces p bit for bit.
void write_checkpoint(std::ostream& out, const ModelParameters& params);
void write_checkpoint_file(const std::filesystem::path& path, const ModelParameters& params);
ModelParameters read_checkpoint(std::istream& in);
ModelParameters read_checkpoint_file(const std::filesystem::path& path);

}  // namespace dnff
