#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "melcond/nn/optim.h"
#include "melcond/nn/parameters.h"

namespace melcond::nn {

// Container layout:
//   8 bytes   magic "MCKPT001"
//   8 bytes   manifest length, little-endian u64
//   manifest  UTF-8 JSON: {"fingerprint", "fingerprint_hash", "epoch",
//             "optimizer_step", "metrics", "model",
//             "tensors": [{"path", "shape", "dtype": "float32", "offset",
//                          "bytes", "trainable"}]}
//   blobs     raw little-endian float32 data in manifest order; offsets are
//             relative to the first blob byte
// Tensor paths: "param/<p>" for values, "opt/m/<p>", "opt/v/<p>",
// "opt/v_max/<p>" for optimizer moments.
struct Checkpoint {
  std::string fingerprint;
  int epoch = 0;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  nlohmann::ordered_json model = nlohmann::ordered_json::object();  // architecture description
  ParameterStore params;
  OptimizerState optimizer;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace melcond::nn
