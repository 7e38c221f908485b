#pragma once

#include <filesystem>

#include "splitlab/protocols/types.hpp"

namespace splitlab::proto {

/// Writes a checkpoint as JSON: a manifest (format tag, architecture hash,
/// epoch, validation loss, topology) followed by every segment's layers and
/// parameter arrays. Doubles are written with round-trip precision.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Reads a file written by save_checkpoint. Throws ValidationError on a
/// malformed file or an architecture hash that does not match the layers.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace splitlab::proto
