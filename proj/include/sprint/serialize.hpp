#pragma once

#include <string>

#include "sprint/model.hpp"

namespace sprint {

// SPRM v1 container: "SPRM" magic, u32 version, u64 JSON length, a JSON
// config block, then named tensors (u16 name length, name, u8 rank,
// u64 dims, row-major f64 data), all little-endian. Writes are
// byte-deterministic for a given model.
void save_model(const std::string& path, const SublayerStack& model);
SublayerStack load_model(const std::string& path);

std::string model_to_bytes(const SublayerStack& model);

}  // namespace sprint
