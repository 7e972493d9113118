#pragma once

#include <cstdint>
#include <filesystem>

#include "edgebin/graph.hpp"

namespace edgebin {

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

// Model container: a human-readable JSON manifest (nodes, attributes,
// shapes, label list, per-tensor blob offsets, blob CRC-32) followed by a
// single binary blob of little-endian weight data.
//
//   bytes 0..3   magic "EBIN"
//   bytes 4..7   format version, u32 LE
//   bytes 8..15  manifest length, u64 LE
//   manifest     UTF-8 JSON
//   bytes ..     blob length, u64 LE
//   blob         weight data, per-tensor offsets in the manifest
//
// save refuses structurally invalid graphs; load(save(g)) == g.
void save(const Graph& graph, const std::filesystem::path& path);
Graph load(const std::filesystem::path& path);

// Byte size of the JSON manifest alone (no weight blob), for file-size
// estimates.
size_t manifest_byte_size(const Graph& graph);

// Single-tensor file (".tensor"): magic "EBT1", u8 dtype, u8 rank,
// u32 dims[rank], optional quant params, raw little-endian data.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace edgebin
