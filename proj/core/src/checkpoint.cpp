// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <map>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/fileio.hpp"

namespace unguide {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host order");

std::string_view to_string(CheckpointRole role) {
  switch (role) {
    case CheckpointRole::kModel:
      return "model";
    case CheckpointRole::kLora:
      return "lora";
    default:
      return "delta";
  }
}

namespace {

constexpr char kMagic[4] = {'U', 'N', 'G', 'D'};
constexpr std::size_t kHeader = 12;

CheckpointRole parse_role(const std::string& s) {
  if (s == "model") return CheckpointRole::kModel;
  if (s == "lora") return CheckpointRole::kLora;
  if (s == "delta") return CheckpointRole::kDelta;
  throw CorruptionError("checkpoint metadata names unknown role '" + s + "'");
}

std::uint32_t crc_bytes(const void* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), static_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + at, 4);
  return v;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  json meta;
  meta["role"] = std::string(to_string(ckpt.role));
  meta["info"] = ckpt.info;
  meta["config"] = ckpt.config;
  json list = json::array();
  for (const NamedTensor& t : ckpt.tensors) {
    list.push_back({{"name", t.name},
                    {"shape", t.value.shape()},
                    {"crc32", crc_bytes(t.value.data(), t.value.size() * sizeof(float))}});
  }
  meta["tensors"] = std::move(list);
  const std::string text = meta.dump();

  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const NamedTensor& t : ckpt.tensors) {
    out.append(reinterpret_cast<const char*>(t.value.data()), t.value.size() * sizeof(float));
  }
  put_u32(out, crc_bytes(out.data(), out.size()));
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  if (bytes.size() < kHeader) throw CorruptionError("checkpoint truncated inside the header");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version == 0) throw FormatError("checkpoint version 0 is invalid");
  if (version > kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(version) +
                       " is newer than supported version " +
                       std::to_string(kCheckpointVersion));
  }
  const std::size_t meta_len = get_u32(bytes, 8);
  if (meta_len > bytes.size() - kHeader) {
    throw CorruptionError("checkpoint truncated inside the metadata");
  }

  json meta;
  Checkpoint ckpt;
  std::vector<std::pair<Shape, std::uint32_t>> entries;
  std::size_t payload = 0;
  try {
    meta = json::parse(bytes.substr(kHeader, meta_len));
    ckpt.role = parse_role(meta.at("role").get<std::string>());
    ckpt.info = meta.at("info");
    ckpt.config = meta.at("config");
    for (const json& t : meta.at("tensors")) {
      NamedTensor nt;
      nt.name = t.at("name").get<std::string>();
      Shape shape = t.at("shape").get<Shape>();
      if (shape.size() > 2) throw CorruptionError("tensor '" + nt.name + "' has rank > 2");
      const std::size_t n = shape_size(shape);
      if (n > (bytes.size() - kHeader) / sizeof(float)) {
        throw CorruptionError("tensor '" + nt.name + "' is larger than the file");
      }
      payload += n * sizeof(float);
      entries.emplace_back(std::move(shape), t.at("crc32").get<std::uint32_t>());
      ckpt.tensors.push_back(std::move(nt));
    }
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("checkpoint metadata is damaged: ") + e.what());
  }

  const std::size_t expected = kHeader + meta_len + payload + 4;
  if (bytes.size() != expected) {
    throw CorruptionError("checkpoint holds " + std::to_string(bytes.size()) +
                          " bytes, metadata implies " + std::to_string(expected));
  }
  std::size_t at = kHeader + meta_len;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [shape, crc] = entries[i];
    Tensor value(shape);
    const std::size_t n = value.size() * sizeof(float);
    std::memcpy(value.data(), bytes.data() + at, n);
    at += n;
    if (crc_bytes(value.data(), n) != crc) {
      throw CorruptionError("checksum mismatch in tensor '" + ckpt.tensors[i].name + "'");
    }
    ckpt.tensors[i].value = std::move(value);
  }
  if (crc_bytes(bytes.data(), at) != get_u32(bytes, at)) {
    throw CorruptionError("checkpoint file checksum mismatch");
  }
  return ckpt;
}

namespace {

json vocab_info(const ConceptVocabulary& vocab) {
  json concepts = json::array();
  for (const Concept& c : vocab.concepts()) {
    concepts.push_back({{"id", c.id},
                        {"name", c.name},
                        {"kind", std::string(to_string(c.kind))},
                        {"cluster", c.cluster},
                        {"primary", c.primary}});
  }
  json mapping = json::array();
  for (const auto& [from, to] : vocab.mappings()) mapping.push_back({from, to});
  return {{"embed_dim", vocab.embed_dim()}, {"concepts", concepts}, {"mapping", mapping}};
}

const Tensor& find_tensor(const Checkpoint& ckpt, const std::string& name) {
  for (const NamedTensor& t : ckpt.tensors) {
    if (t.name == name) return t.value;
  }
  throw FormatError("checkpoint lacks tensor '" + name + "'");
}

ConceptVocabulary vocab_from(const Checkpoint& ckpt) {
  const json& v = ckpt.info.at("vocabulary");
  ConceptVocabulary vocab(v.at("embed_dim").get<std::size_t>());
  for (const json& c : v.at("concepts")) {
    const auto id = c.at("id").get<ConceptId>();
    const auto name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    ConceptId got = 0;
    if (kind == "neutral") {
      got = vocab.add_neutral(name);
    } else if (kind == "primary") {
      got = vocab.add_primary(name, c.at("cluster").get<int>());
    } else if (kind == "synonym") {
      got = vocab.add_synonym(name, c.at("primary").get<ConceptId>(),
                              find_tensor(ckpt, "concept." + std::to_string(id) + ".offset"));
    } else {
      throw FormatError("unknown concept kind '" + kind + "'");
    }
    if (got != id) throw FormatError("concept ids in the checkpoint are not dense");
  }
  for (const json& m : v.at("mapping")) {
    vocab.set_mapping(m.at(0).get<ConceptId>(), m.at(1).get<ConceptId>());
  }
  return vocab;
}

void require_role(const Checkpoint& ckpt, CheckpointRole role) {
  if (ckpt.role != role) {
    throw FormatError("checkpoint holds a " + std::string(to_string(ckpt.role)) +
                      ", expected a " + std::string(to_string(role)));
  }
}

void copy_into(Tensor& dst, const Tensor& src, const std::string& name) {
  if (dst.shape() != src.shape()) {
    throw FormatError("tensor '" + name + "' has shape " + shape_string(src.shape()) +
                      ", model expects " + shape_string(dst.shape()));
  }
  dst = src;
}

}  // namespace

Checkpoint pack(const DenoiserModel& model, const json& config) {
  Checkpoint ckpt;
  ckpt.role = CheckpointRole::kModel;
  ckpt.config = config;
  const ModelConfig& mc = model.config();
  ckpt.info = {{"model",
                {{"data_dim", mc.data_dim},
                 {"hidden", mc.hidden},
                 {"depth", mc.depth},
                 {"embed_dim", mc.embed_dim},
                 {"time_dim", mc.time_dim},
                 {"neutral_overlap", mc.neutral_overlap}}},
               {"trained_steps", model.trained_steps()},
               {"vocabulary", vocab_info(model.vocab())}};
  for (std::size_t id = 0; id < model.layer_count(); ++id) {
    const Linear& l = model.layer(id);
    ckpt.tensors.push_back({l.name + ".weight", l.weight});
    if (!l.bias.empty()) ckpt.tensors.push_back({l.name + ".bias", l.bias});
  }
  ckpt.tensors.push_back({"embeddings", model.embeddings()});
  for (const Concept& c : model.vocab().concepts()) {
    if (c.kind == ConceptKind::kSynonym) {
      ckpt.tensors.push_back({"concept." + std::to_string(c.id) + ".offset", c.offset});
    }
  }
  return ckpt;
}

Checkpoint pack(const Adapter& adapter, const json& config) {
  Checkpoint ckpt;
  ckpt.config = config;
  if (const auto* lora = std::get_if<LoraAdapter>(&adapter)) {
    ckpt.role = CheckpointRole::kLora;
    ckpt.info = {{"rank", lora->rank}, {"scale", lora->scale}, {"layers", lora->target_layers()}};
    for (const LoraFactor& f : lora->factors) {
      ckpt.tensors.push_back({"layer." + std::to_string(f.layer) + ".b", f.b});
      ckpt.tensors.push_back({"layer." + std::to_string(f.layer) + ".a", f.a});
    }
  } else {
    ckpt.role = CheckpointRole::kDelta;
    json layers = json::array();
    for (const auto& [id, delta] : std::get<WeightDelta>(adapter).deltas) {
      layers.push_back(id);
      ckpt.tensors.push_back({"layer." + std::to_string(id) + ".delta", delta});
    }
    ckpt.info = {{"layers", layers}};
  }
  return ckpt;
}

DenoiserModel unpack_model(const Checkpoint& ckpt) {
  require_role(ckpt, CheckpointRole::kModel);
  try {
    const json& m = ckpt.info.at("model");
    ModelConfig mc;
    mc.data_dim = m.at("data_dim").get<std::size_t>();
    mc.hidden = m.at("hidden").get<std::size_t>();
    mc.depth = m.at("depth").get<std::size_t>();
    mc.embed_dim = m.at("embed_dim").get<std::size_t>();
    mc.time_dim = m.at("time_dim").get<std::size_t>();
    mc.neutral_overlap = m.at("neutral_overlap").get<double>();
    DenoiserModel model(mc, vocab_from(ckpt), 0);
    for (std::size_t id = 0; id < model.layer_count(); ++id) {
      Linear& l = model.layer(id);
      copy_into(l.weight, find_tensor(ckpt, l.name + ".weight"), l.name + ".weight");
      if (!l.bias.empty()) copy_into(l.bias, find_tensor(ckpt, l.name + ".bias"), l.name + ".bias");
    }
    copy_into(model.embeddings(), find_tensor(ckpt, "embeddings"), "embeddings");
    model.set_trained_steps(ckpt.info.at("trained_steps").get<std::int64_t>());
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model checkpoint info is incomplete: ") + e.what());
  }
}

Adapter unpack_adapter(const Checkpoint& ckpt) {
  try {
    if (ckpt.role == CheckpointRole::kLora) {
      LoraAdapter lora;
      lora.rank = ckpt.info.at("rank").get<std::size_t>();
      lora.scale = ckpt.info.at("scale").get<float>();
      for (std::size_t id : ckpt.info.at("layers").get<std::vector<std::size_t>>()) {
        LoraFactor f;
        f.layer = id;
        f.b = find_tensor(ckpt, "layer." + std::to_string(id) + ".b");
        f.a = find_tensor(ckpt, "layer." + std::to_string(id) + ".a");
        if (f.b.rank() != 2 || f.a.rank() != 2 || f.b.cols() != lora.rank ||
            f.a.rows() != lora.rank) {
          throw FormatError("LoRA factors for layer " + std::to_string(id) +
                            " do not match rank " + std::to_string(lora.rank));
        }
        lora.factors.push_back(std::move(f));
      }
      return lora;
    }
    require_role(ckpt, CheckpointRole::kDelta);
    WeightDelta delta;
    for (std::size_t id : ckpt.info.at("layers").get<std::vector<std::size_t>>()) {
      delta.deltas.emplace(id, find_tensor(ckpt, "layer." + std::to_string(id) + ".delta"));
    }
    return delta;
  } catch (const json::exception& e) {
    throw FormatError(std::string("adapter checkpoint info is incomplete: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel& model,
                     const json& config) {
  write_file_atomic(path, encode_checkpoint(pack(model, config)));
}

void save_checkpoint(const std::filesystem::path& path, const Adapter& adapter,
                     const json& config) {
  write_file_atomic(path, encode_checkpoint(pack(adapter, config)));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

DenoiserModel load_model(const std::filesystem::path& path) {
  return unpack_model(load_checkpoint(path));
}

Adapter load_adapter(const std::filesystem::path& path) {
  return unpack_adapter(load_checkpoint(path));
}

}  // namespace unguide
