// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "unguide/denoiser.hpp"
#include "unguide/lora.hpp"

namespace unguide {

/// Binary layout, all integers little-endian:
///   "UNGD" | u32 version | u32 metadata length | metadata (UTF-8 JSON) |
///   float32 payloads in metadata order | u32 CRC-32 of everything before it
/// The metadata lists every tensor's name, shape and CRC-32 together with
/// the role, role-specific info and a config snapshot.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointRole { kModel, kLora, kDelta };
std::string_view to_string(CheckpointRole role);

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  CheckpointRole role = CheckpointRole::kModel;
  nlohmann::json info = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
  std::vector<NamedTensor> tensors;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Checks magic (FormatError), version (VersionError) and then lengths,
/// metadata, per-tensor and whole-file checksums (CorruptionError).
Checkpoint decode_checkpoint(std::string_view bytes);

Checkpoint pack(const DenoiserModel& model, const nlohmann::json& config);
Checkpoint pack(const Adapter& adapter, const nlohmann::json& config);
/// Rebuilds the base model; any attached adapter is not part of a model file.
DenoiserModel unpack_model(const Checkpoint& ckpt);
Adapter unpack_adapter(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel& model,
                     const nlohmann::json& config);
void save_checkpoint(const std::filesystem::path& path, const Adapter& adapter,
                     const nlohmann::json& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);
DenoiserModel load_model(const std::filesystem::path& path);
Adapter load_adapter(const std::filesystem::path& path);

}  // namespace unguide
