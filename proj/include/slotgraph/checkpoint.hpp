#pragma once

#include "slotgraph/model.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace slotgraph::checkpoint {

struct VersionMismatch : std::runtime_error {
  explicit VersionMismatch(const std::string& what)
      : std::runtime_error("checkpoint: " + what) {}
};

/// Versioned binary container: model config, vocabularies, a free-form
/// config echo, and every named tensor (frozen ones included).
/// Round-trips bit-exactly.
void save(const model::Model& m, const std::filesystem::path& path,
          const std::map<std::string, std::string>& meta = {});

struct Loaded {
  model::ModelConfig config;
  corpus::LabelVocab labels;
  encoder::WordVocab words;
  std::map<std::string, std::string> meta;
  ad::ParamStore params;
};

Loaded load_raw(const std::filesystem::path& path);

model::Model load(const std::filesystem::path& path,
                  std::map<std::string, std::string>* meta_out = nullptr);

}  // namespace slotgraph::checkpoint
