// Copyright 2026 The Blindgait Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "blindgait/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace blindgait::checkpoint {

namespace {

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

uint64_t metadata_hash(const std::string& metadata_json) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : metadata_json) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save(const std::string& path, const ParamSet& params,
          const std::string& metadata_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint64_t>(out, metadata_hash(metadata_json));
  write_pod<uint32_t>(out, static_cast<uint32_t>(params.items().size()));
  for (const auto& [name, var] : params.items()) {
    write_pod<uint16_t>(out, static_cast<uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(var.rows()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(var.cols()));
    out.write(reinterpret_cast<const char*>(var.value().data()),
              static_cast<std::streamsize>(sizeof(double) * var.rows() * var.cols()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);

  std::ofstream sidecar(path + ".json");
  if (!sidecar) throw std::runtime_error("cannot open " + path + ".json");
  sidecar << metadata_json;
}

std::string load(const std::string& path, ParamSet* params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const uint64_t stored_hash = read_pod<uint64_t>(in);
  const std::string metadata = read_metadata(path);
  if (metadata_hash(metadata) != stored_hash) {
    throw std::runtime_error("checkpoint metadata hash mismatch: " + path);
  }
  const uint32_t count = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = read_pod<uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t rows = read_pod<uint32_t>(in);
    const uint32_t cols = read_pod<uint32_t>(in);
    MatX block(rows, cols);
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    if (!params->has(name)) {
      throw std::runtime_error("checkpoint block " + name +
                               " has no matching parameter");
    }
    ad::Var dst = ad::Var::wrap(params->get(name).node());
    if (dst.rows() != static_cast<int>(rows) || dst.cols() != static_cast<int>(cols)) {
      throw std::runtime_error("checkpoint block " + name + " shape mismatch");
    }
    dst.mutable_value() = block;
  }
  return metadata;
}

std::string read_metadata(const std::string& path) {
  std::ifstream sidecar(path + ".json");
  if (!sidecar) throw std::runtime_error("missing sidecar " + path + ".json");
  std::string metadata((std::istreambuf_iterator<char>(sidecar)),
                       std::istreambuf_iterator<char>());
  return metadata;
}

}  // namespace blindgait::checkpoint
