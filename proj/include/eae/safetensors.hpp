#pragma once

// Minimal safetensors reader/writer: an 8-byte little-endian header length,
// a JSON header {name: {dtype, shape, data_offsets}}, then raw tensor bytes.
// Writes F32; reads F32, F64, F16 and BF16.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "eae/error.hpp"

namespace eae::safetensors {

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

using TensorMap = std::map<std::string, Tensor>;

namespace detail {

inline float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = (h >> 15) & 1u;
  const std::uint32_t exp = (h >> 10) & 0x1fu;
  const std::uint32_t mant = h & 0x3ffu;
  float v;
  if (exp == 0) {
    v = std::ldexp(static_cast<float>(mant), -24);
  } else if (exp == 31) {
    v = mant ? NAN : INFINITY;
  } else {
    v = std::ldexp(static_cast<float>(mant | 0x400u), static_cast<int>(exp) - 25);
  }
  return sign ? -v : v;
}

inline float bf16_to_float(std::uint16_t h) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(h) << 16);
}

}  // namespace detail

inline void save(const std::filesystem::path& path, const TensorMap& tensors,
                 const std::map<std::string, std::string>& metadata = {}) {
  nlohmann::json header;
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const std::uint64_t bytes = static_cast<std::uint64_t>(t.data.size()) * 4;
    header[name] = {{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  if (!metadata.empty()) header["__metadata__"] = metadata;
  std::string h = header.dump();
  while (h.size() % 8 != 0) h += ' ';
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PathError("cannot write '" + path.string() + "'");
  const std::uint64_t n = h.size();
  unsigned char len[8];
  for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>((n >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(len), 8);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, t] : tensors) {
    for (float f : t.data) {
      const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
      unsigned char b[4] = {static_cast<unsigned char>(u & 0xff), static_cast<unsigned char>((u >> 8) & 0xff),
                            static_cast<unsigned char>((u >> 16) & 0xff),
                            static_cast<unsigned char>((u >> 24) & 0xff)};
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
  if (!out) throw PathError("failed writing '" + path.string() + "'");
}

inline TensorMap load(const std::filesystem::path& path,
                      std::map<std::string, std::string>* metadata = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open '" + path.string() + "'");
  unsigned char len[8];
  if (!in.read(reinterpret_cast<char*>(len), 8)) throw FormatError(path.string() + ": truncated header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(len[i]) << (8 * i);
  if (n > (1ull << 30)) throw FormatError(path.string() + ": implausible header length");
  std::string h(n, '\0');
  if (!in.read(h.data(), static_cast<std::streamsize>(n))) {
    throw FormatError(path.string() + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": bad header JSON (" + e.what() + ")");
  }
  std::vector<char> body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  TensorMap out;
  for (const auto& [name, info] : header.items()) {
    if (name == "__metadata__") {
      if (metadata != nullptr) {
        for (const auto& [k, v] : info.items()) (*metadata)[k] = v.get<std::string>();
      }
      continue;
    }
    Tensor t;
    t.shape = info.at("shape").get<std::vector<std::int64_t>>();
    const auto offs = info.at("data_offsets").get<std::vector<std::uint64_t>>();
    const std::string dtype = info.at("dtype").get<std::string>();
    if (offs.size() != 2 || offs[1] > body.size() || offs[0] > offs[1]) {
      throw FormatError(path.string() + ": bad offsets for '" + name + "'");
    }
    const char* p = body.data() + offs[0];
    const std::size_t bytes = offs[1] - offs[0];
    const auto count = static_cast<std::size_t>(t.numel());
    t.data.resize(count);
    auto need = [&](std::size_t width) {
      if (bytes != count * width) throw FormatError(path.string() + ": size mismatch for '" + name + "'");
    };
    if (dtype == "F32") {
      need(4);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t u;
        std::memcpy(&u, p + 4 * i, 4);
        t.data[i] = std::bit_cast<float>(u);
      }
    } else if (dtype == "F64") {
      need(8);
      for (std::size_t i = 0; i < count; ++i) {
        double d;
        std::memcpy(&d, p + 8 * i, 8);
        t.data[i] = static_cast<float>(d);
      }
    } else if (dtype == "F16" || dtype == "BF16") {
      need(2);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint16_t u;
        std::memcpy(&u, p + 2 * i, 2);
        t.data[i] = dtype == "F16" ? detail::half_to_float(u) : detail::bf16_to_float(u);
      }
    } else {
      throw FormatError(path.string() + ": unsupported dtype " + dtype + " for '" + name + "'");
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

}  // namespace eae::safetensors
