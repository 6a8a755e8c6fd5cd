#pragma once

#include "egat/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace egat {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout, little endian:
//   "EGAT" | u32 version | u32 metadata bytes | metadata (key=value lines)
//   | u32 array count | per array: u16 name bytes, name, u32 rank, u32 dims[rank],
//     f32 data[prod(dims)] | u32 CRC-32 of everything before it
std::string serialize_checkpoint(const Model& m);
void save_checkpoint(const Model& m, const std::string& path);

// Throws CorruptFile (bad magic, truncation, checksum), VersionMismatch,
// ShapeMismatch (array shapes differ from the stored or expected architecture)
// and ConfigHashMismatch (stored hash disagrees with the stored feature config).
Model deserialize_checkpoint(std::string_view bytes, const std::optional<ModelConfig>& expected = std::nullopt);
Model load_checkpoint(const std::string& path, const std::optional<ModelConfig>& expected = std::nullopt);

// Rounds every parameter to the nearest float32 so that the in-memory model
// equals its serialized form.
void quantize_to_float32(Model& m);

// Short identifier of a checkpoint file: hex CRC-32 of its bytes.
std::string checkpoint_id(const std::string& path);
// Same identifier for bytes already in memory.
std::string bytes_id(std::string_view bytes);

}  // namespace egat
