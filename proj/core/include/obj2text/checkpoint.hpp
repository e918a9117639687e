#pragma once

#include <filesystem>
#include <iosfwd>

#include "obj2text/training.hpp"

namespace obj2text {

/// Binary checkpoint layout:
///   "OBJ2TEXT" | u32 version | u64 header bytes | JSON header | f64 data
/// All integers and doubles are little-endian. The header holds the config,
/// both vocabularies, the iteration, the RNG state and a manifest of
/// {name, kind, shape, offset} for every value and Adam moment tensor.
void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// save never leaves a truncated checkpoint behind.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws ParseError for a corrupt or foreign file and StateError for an
/// unsupported format version.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace obj2text
