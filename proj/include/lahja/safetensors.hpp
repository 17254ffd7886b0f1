// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reader/writer for the safetensors layout: an 8-byte little-endian header
// length, a JSON header mapping tensor names to {dtype, shape, data_offsets}
// plus an optional "__metadata__" string map, followed by one contiguous
// byte buffer. Offsets are validated as in-bounds and non-overlapping.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace lahja {

enum class Dtype { F32, F16, BF16 };

inline std::string to_string(Dtype dtype) {
  switch (dtype) {
    case Dtype::F32: return "F32";
    case Dtype::F16: return "F16";
    case Dtype::BF16: return "BF16";
  }
  throw std::logic_error("unreachable dtype");
}

// In-memory tensor. Values are always held as F32; `dtype` records what the
// source archive stored. Half-precision payloads are widened on read and all
// writes emit F32.
struct TensorData {
  Dtype dtype = Dtype::F32;
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
  }
};

struct TensorArchive {
  std::map<std::string, TensorData> tensors;
  std::map<std::string, std::string> metadata;
};

class ArchiveError : public std::runtime_error {
 public:
  enum class Kind {
    Io,               // file could not be opened, read or written
    MalformedHeader,  // length prefix, JSON, dtype, shape or offset spans
    TruncatedPayload, // file ends inside the declared JSON header
    OutOfBounds,      // tensor extent past the end of the data buffer
    Overlap,          // two tensor extents share bytes
    DuplicateName,    // the same header key declared twice
  };

  ArchiveError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline float f16_to_f32(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  const std::uint32_t exponent = (h >> 10) & 0x1Fu;
  const std::uint32_t mantissa = h & 0x3FFu;
  std::uint32_t bits;
  if (exponent == 0) {
    if (mantissa == 0) {
      bits = sign;
    } else {
      // Subnormal: renormalize into the F32 exponent range.
      std::uint32_t m = mantissa;
      int e = -1;
      do {
        ++e;
        m <<= 1;
      } while (!(m & 0x400u));
      bits = sign | (static_cast<std::uint32_t>(112 - e) << 23) | ((m & 0x3FFu) << 13);
    }
  } else if (exponent == 31) {
    bits = sign | 0x7F800000u | (mantissa << 13);
  } else {
    bits = sign | ((exponent + 112) << 23) | (mantissa << 13);
  }
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

inline float bf16_to_f32(std::uint16_t h) {
  const std::uint32_t bits = static_cast<std::uint32_t>(h) << 16;
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

inline std::size_t dtype_size(Dtype dtype) {
  return dtype == Dtype::F32 ? 4 : 2;
}

inline Dtype parse_dtype(const std::string& name, const std::string& tensor) {
  if (name == "F32") return Dtype::F32;
  if (name == "F16") return Dtype::F16;
  if (name == "BF16") return Dtype::BF16;
  throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                     "tensor '" + tensor + "': unsupported dtype '" + name + "'");
}

}  // namespace detail

inline TensorArchive parse_archive(const std::vector<std::uint8_t>& bytes) {
  using nlohmann::json;

  if (bytes.size() < 8) {
    throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                       "file is shorter than the 8-byte header length prefix");
  }
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | bytes[static_cast<std::size_t>(i)];
  if (header_len > bytes.size() - 8) {
    throw ArchiveError(ArchiveError::Kind::TruncatedPayload,
                       "file ends inside the declared JSON header (header length " +
                           std::to_string(header_len) + ", " +
                           std::to_string(bytes.size() - 8) + " bytes available)");
  }

  std::set<std::string> seen;
  json::parser_callback_t dedup = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key && depth == 1) {
      if (!seen.insert(parsed.get<std::string>()).second) {
        throw ArchiveError(ArchiveError::Kind::DuplicateName,
                           "duplicate tensor name '" + parsed.get<std::string>() + "' in header");
      }
    }
    return true;
  };

  json header;
  try {
    header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len),
                         dedup);
  } catch (const ArchiveError&) {
    throw;
  } catch (const json::exception& e) {
    throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                       std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) {
    throw ArchiveError(ArchiveError::Kind::MalformedHeader, "header is not a JSON object");
  }

  const std::size_t payload_size = bytes.size() - 8 - header_len;
  const std::uint8_t* payload = bytes.data() + 8 + header_len;

  TensorArchive archive;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> extents;
  std::string widened_note;

  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") {
      if (!entry.is_object()) {
        throw ArchiveError(ArchiveError::Kind::MalformedHeader, "__metadata__ is not an object");
      }
      for (const auto& [key, value] : entry.items()) {
        if (!value.is_string()) {
          throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                             "__metadata__ value for '" + key + "' is not a string");
        }
        archive.metadata[key] = value.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
        !entry.contains("data_offsets") || !entry["dtype"].is_string()) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': entry is missing dtype, shape or data_offsets");
    }

    TensorData tensor;
    tensor.dtype = detail::parse_dtype(entry["dtype"].get<std::string>(), name);

    if (!entry["shape"].is_array()) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': shape is not an array");
    }
    std::int64_t numel = 1;
    for (const auto& dim : entry["shape"]) {
      if (!dim.is_number_integer() || dim.get<std::int64_t>() <= 0) {
        throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                           "tensor '" + name + "': shape dimensions must be positive integers");
      }
      const std::int64_t d = dim.get<std::int64_t>();
      if (numel > (std::int64_t{1} << 48) / d) {
        throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                           "tensor '" + name + "': element count overflows");
      }
      numel *= d;
      tensor.shape.push_back(d);
    }
    if (tensor.shape.empty()) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': empty shape");
    }

    const auto& offsets = entry["data_offsets"];
    if (!offsets.is_array() || offsets.size() != 2 || !offsets[0].is_number_unsigned() ||
        !offsets[1].is_number_unsigned()) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': data_offsets must be two unsigned integers");
    }
    const std::uint64_t begin = offsets[0].get<std::uint64_t>();
    const std::uint64_t end = offsets[1].get<std::uint64_t>();
    if (begin > end) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': data_offsets begin past end");
    }
    if (end > payload_size) {
      throw ArchiveError(ArchiveError::Kind::OutOfBounds,
                         "tensor '" + name + "': data_offsets [" + std::to_string(begin) + ", " +
                             std::to_string(end) + ") exceed the " + std::to_string(payload_size) +
                             "-byte data buffer");
    }
    const std::uint64_t expected =
        static_cast<std::uint64_t>(numel) * detail::dtype_size(tensor.dtype);
    if (end - begin != expected) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': data_offsets span " + std::to_string(end - begin) +
                             " bytes but shape and dtype require " + std::to_string(expected));
    }
    extents.emplace_back(begin, end);

    tensor.data.resize(static_cast<std::size_t>(numel));
    const std::uint8_t* src = payload + begin;
    if (tensor.dtype == Dtype::F32) {
      std::memcpy(tensor.data.data(), src, static_cast<std::size_t>(expected));
    } else {
      for (std::int64_t i = 0; i < numel; ++i) {
        std::uint16_t h;
        std::memcpy(&h, src + 2 * i, 2);
        tensor.data[static_cast<std::size_t>(i)] =
            tensor.dtype == Dtype::F16 ? detail::f16_to_f32(h) : detail::bf16_to_f32(h);
      }
      if (!widened_note.empty()) widened_note += ",";
      widened_note += name + ":" + to_string(tensor.dtype);
    }
    archive.tensors.emplace(name, std::move(tensor));
  }

  std::sort(extents.begin(), extents.end());
  for (std::size_t i = 1; i < extents.size(); ++i) {
    if (extents[i].first < extents[i - 1].second) {
      throw ArchiveError(ArchiveError::Kind::Overlap, "tensor extents overlap in the data buffer");
    }
  }

  if (!widened_note.empty()) archive.metadata["widened_to_f32"] = widened_note;
  return archive;
}

// Serializes with F32 payloads, tensors laid out in name order.
inline std::vector<std::uint8_t> serialize_archive(const TensorArchive& archive) {
  using nlohmann::json;

  json header = json::object();
  if (!archive.metadata.empty()) header["__metadata__"] = archive.metadata;

  std::uint64_t cursor = 0;
  for (const auto& [name, tensor] : archive.tensors) {
    if (name == "__metadata__") {
      throw ArchiveError(ArchiveError::Kind::DuplicateName,
                         "'__metadata__' is reserved and cannot name a tensor");
    }
    const std::int64_t numel = tensor.numel();
    if (tensor.shape.empty() || numel <= 0 ||
        tensor.data.size() != static_cast<std::size_t>(numel)) {
      throw ArchiveError(ArchiveError::Kind::MalformedHeader,
                         "tensor '" + name + "': data length does not match shape");
    }
    const std::uint64_t nbytes = static_cast<std::uint64_t>(numel) * 4;
    header[name] = {{"dtype", "F32"},
                    {"shape", tensor.shape},
                    {"data_offsets", {cursor, cursor + nbytes}}};
    cursor += nbytes;
  }

  const std::string header_text = header.dump();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + header_text.size() + cursor);
  const std::uint64_t header_len = header_text.size();
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>((header_len >> (8 * i)) & 0xFF));
  bytes.insert(bytes.end(), header_text.begin(), header_text.end());
  for (const auto& [name, tensor] : archive.tensors) {
    const std::size_t offset = bytes.size();
    bytes.resize(offset + tensor.data.size() * 4);
    std::memcpy(bytes.data() + offset, tensor.data.data(), tensor.data.size() * 4);
  }
  return bytes;
}

inline TensorArchive read_archive(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ArchiveError(ArchiveError::Kind::Io, "cannot open '" + path + "' for reading");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  if (file.bad()) {
    throw ArchiveError(ArchiveError::Kind::Io, "error while reading '" + path + "'");
  }
  try {
    return parse_archive(bytes);
  } catch (const ArchiveError& e) {
    throw ArchiveError(e.kind(), path + ": " + e.what());
  }
}

inline void write_archive(const TensorArchive& archive, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_archive(archive);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw ArchiveError(ArchiveError::Kind::Io, "cannot open '" + path + "' for writing");
  }
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) {
    throw ArchiveError(ArchiveError::Kind::Io, "error while writing '" + path + "'");
  }
}

}  // namespace lahja
