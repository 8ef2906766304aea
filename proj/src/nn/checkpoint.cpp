#include "melcond/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "melcond/error.h"
#include "melcond/rng.h"

namespace melcond::nn {

namespace {

constexpr std::string_view kMagic = "MCKPT001";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json manifest;
  manifest["fingerprint"] = ckpt.fingerprint;
  manifest["fingerprint_hash"] = hex64(fnv1a64(ckpt.fingerprint));
  manifest["epoch"] = ckpt.epoch;
  manifest["optimizer_step"] = ckpt.optimizer.step;
  manifest["metrics"] = ckpt.metrics;
  manifest["model"] = ckpt.model;

  std::string blobs;
  auto tensors = nlohmann::ordered_json::array();
  auto append = [&](const std::string& path, const Tensor& t, bool trainable) {
    nlohmann::ordered_json e;
    e["path"] = path;
    e["shape"] = t.shape();
    e["dtype"] = "float32";
    e["offset"] = blobs.size();
    e["bytes"] = t.size() * sizeof(float);
    e["trainable"] = trainable;
    tensors.push_back(std::move(e));
    blobs.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  };
  for (const auto& [path, p] : ckpt.params.entries()) append("param/" + path, p.value, p.trainable);
  for (const auto& [path, mb] : ckpt.optimizer.moments) {
    append("opt/m/" + path, mb.m, false);
    append("opt/v/" + path, mb.v, false);
    append("opt/v_max/" + path, mb.v_max, false);
  }
  manifest["tensors"] = std::move(tensors);

  const std::string text = manifest.dump();
  std::string out(kMagic);
  put_u64(out, text.size());
  out += text;
  out += blobs;
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != kMagic) fail(ErrorKind::SchemaViolation, "not a checkpoint file");
  const std::uint64_t len = get_u64(bytes.substr(8, 8));
  if (16 + len > bytes.size()) fail(ErrorKind::SchemaViolation, "truncated checkpoint manifest");
  nlohmann::ordered_json manifest;
  try {
    manifest = nlohmann::ordered_json::parse(bytes.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("checkpoint manifest: ") + e.what());
  }
  const std::string_view blobs = bytes.substr(16 + len);

  Checkpoint ckpt;
  try {
    ckpt.fingerprint = manifest.at("fingerprint").get<std::string>();
    if (manifest.at("fingerprint_hash").get<std::string>() != hex64(fnv1a64(ckpt.fingerprint))) {
      fail(ErrorKind::FingerprintMismatch, "checkpoint fingerprint hash does not match its fingerprint");
    }
    ckpt.epoch = manifest.at("epoch").get<int>();
    ckpt.optimizer.step = manifest.at("optimizer_step").get<long long>();
    ckpt.metrics = manifest.at("metrics");
    ckpt.model = manifest.at("model");
    for (const auto& e : manifest.at("tensors")) {
      const auto path = e.at("path").get<std::string>();
      const auto shape = e.at("shape").get<std::vector<int>>();
      const auto offset = e.at("offset").get<std::size_t>();
      const auto n_bytes = e.at("bytes").get<std::size_t>();
      if (e.at("dtype").get<std::string>() != "float32" || n_bytes != shape_size(shape) * sizeof(float) ||
          offset + n_bytes > blobs.size()) {
        fail(ErrorKind::SchemaViolation, "bad tensor entry " + path);
      }
      Tensor t(shape);
      std::memcpy(t.data(), blobs.data() + offset, n_bytes);
      if (path.rfind("param/", 0) == 0) {
        auto& p = ckpt.params.add(path.substr(6), shape, e.at("trainable").get<bool>());
        p.value = std::move(t);
      } else if (path.rfind("opt/m/", 0) == 0) {
        ckpt.optimizer.moments[path.substr(6)].m = std::move(t);
      } else if (path.rfind("opt/v/", 0) == 0) {
        ckpt.optimizer.moments[path.substr(6)].v = std::move(t);
      } else if (path.rfind("opt/v_max/", 0) == 0) {
        ckpt.optimizer.moments[path.substr(10)].v_max = std::move(t);
      } else {
        fail(ErrorKind::SchemaViolation, "unknown tensor path " + path);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("checkpoint manifest: ") + e.what());
  }
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace melcond::nn
