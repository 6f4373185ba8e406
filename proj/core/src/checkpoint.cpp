#include "titlegen/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <unordered_map>

#include "titlegen/errors.hpp"

namespace titlegen {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'C', 'K', 'P', 'T', '0', '\0'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  return value;
}

void save_impl(const std::string& path, const std::vector<NamedTensorData>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint32_t>(out, kVersion);
  write_pod<uint32_t>(out, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(e.shape.size()));
    for (int64_t d : e.shape) write_pod<int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(e.values.data()),
              static_cast<std::streamsize>(e.values.size() * sizeof(double)));
  }
  if (!out) throw IoError("short write: " + path);
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensorData>& entries) {
  save_impl(path, entries);
}

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& params) {
  save_impl(path, snapshot_parameters(params));
}

std::vector<NamedTensorData> snapshot_parameters(
    const std::vector<std::pair<std::string, Tensor>>& params) {
  std::vector<NamedTensorData> entries;
  entries.reserve(params.size());
  for (const auto& [name, tensor] : params) {
    entries.push_back({name, tensor.shape(), tensor.data()});
  }
  return entries;
}

std::vector<NamedTensorData> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  uint32_t version = read_pod<uint32_t>(in);
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  uint32_t count = read_pod<uint32_t>(in);
  std::vector<NamedTensorData> entries;
  entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensorData e;
    uint32_t name_len = read_pod<uint32_t>(in);
    e.name.resize(name_len);
    in.read(e.name.data(), name_len);
    uint32_t rank = read_pod<uint32_t>(in);
    e.shape.resize(rank);
    int64_t numel = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      e.shape[d] = read_pod<int64_t>(in);
      numel *= e.shape[d];
    }
    if (numel <= 0) throw IoError("checkpoint: bad shape for " + e.name);
    e.values.resize(static_cast<size_t>(numel));
    in.read(reinterpret_cast<char*>(e.values.data()),
            static_cast<std::streamsize>(e.values.size() * sizeof(double)));
    if (!in) throw IoError("checkpoint: truncated data for " + e.name);
    entries.push_back(std::move(e));
  }
  return entries;
}

void load_parameters(const std::vector<NamedTensorData>& entries,
                     std::vector<std::pair<std::string, Tensor>>& params) {
  std::unordered_map<std::string, const NamedTensorData*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  for (auto& [name, tensor] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw IoError("checkpoint missing parameter: " + name);
    }
    if (it->second->shape != tensor.shape()) {
      throw IoError("checkpoint shape mismatch for " + name + ": file " +
                    shape_string(it->second->shape) + " vs model " +
                    shape_string(tensor.shape()));
    }
    tensor.data() = it->second->values;
  }
}

}  // namespace titlegen
