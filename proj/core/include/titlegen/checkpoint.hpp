#pragma once

#include <string>
#include <vector>

#include "titlegen/tensor.hpp"

namespace titlegen {

struct NamedTensorData {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Flat little-endian container of (name, shape, float64 data) triples with
/// a version header.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& params);
void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensorData>& entries);
std::vector<NamedTensorData> load_checkpoint(const std::string& path);

/// Copies checkpoint values into matching parameters; every parameter must
/// be present with an identical shape.
void load_parameters(const std::vector<NamedTensorData>& entries,
                     std::vector<std::pair<std::string, Tensor>>& params);

std::vector<NamedTensorData> snapshot_parameters(
    const std::vector<std::pair<std::string, Tensor>>& params);

}  // namespace titlegen
