#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "volgaze/common.hpp"
#include "volgaze/image.hpp"

namespace volgaze {

/// 3D intensity grid. Voxel order is x-fastest, then y, then z; the axial
/// slice k is the z=k plane. Intensities are held as float regardless of the
/// on-disk scalar type.
struct Volume {
  std::array<int, 3> dims{0, 0, 0};           // nx, ny, nz
  std::array<double, 3> spacing{1, 1, 1};     // mm per voxel
  std::vector<float> voxels;

  int nx() const { return dims[0]; }
  int ny() const { return dims[1]; }
  int nz() const { return dims[2]; }

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * ny() + y) * nx() + x;
  }
  float at(int x, int y, int z) const { return voxels[index(x, y, z)]; }

  std::vector<float> slice(int z) const {
    if (z < 0 || z >= nz()) throw InputError("slice index out of range: " + std::to_string(z));
    const std::size_t n = static_cast<std::size_t>(nx()) * ny();
    std::vector<float> out(n);
    std::memcpy(out.data(), voxels.data() + index(0, 0, z), n * sizeof(float));
    return out;
  }

  /// Axial slice rendered to 8-bit via per-slice min-max normalization.
  Image8 slice_gray8(int z) const { return to_gray8(slice(z), nx(), ny()); }
};

/// Binary organ labels aligned voxel-for-voxel with a Volume.
struct SegMask {
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> labels;  // 0 background, 1 organ

  int nx() const { return dims[0]; }
  int ny() const { return dims[1]; }
  int nz() const { return dims[2]; }

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * ny() + y) * nx() + x;
  }
  bool at(int x, int y, int z) const { return labels[index(x, y, z)] != 0; }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto v : labels) n += (v != 0);
    return n;
  }
};

namespace detail {

inline void validate_geometry(const std::array<int, 3>& dims, const std::array<double, 3>& spacing,
                              const std::string& path) {
  for (int d : dims)
    if (d < 1) throw InputError(path + ": non-positive dimension " + std::to_string(d));
  for (double s : spacing)
    if (!(s > 0.0)) throw InputError(path + ": non-positive spacing " + format_double(s));
}

inline std::vector<char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
T byteswap_val(T v) {
  char* p = reinterpret_cast<char*>(&v);
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
  return v;
}

template <typename T>
std::vector<float> decode_payload(const char* p, std::size_t count, bool swap) {
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    T v = read_le<T>(p + i * sizeof(T));
    if (swap) v = byteswap_val(v);
    out[i] = static_cast<float>(v);
  }
  return out;
}

struct RawHeader {
  std::array<int, 3> dims;
  std::array<double, 3> spacing;
  std::string dtype;
  std::string payload_path;
};

inline RawHeader parse_raw_header(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw InputError("cannot open header file: " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(json_path + ": malformed JSON header: " + e.what());
  }
  if (!j.contains("dims") || !j.contains("spacing") || !j.contains("dtype"))
    throw InputError(json_path + ": header requires dims, spacing, dtype");
  RawHeader h;
  auto jd = j["dims"];
  auto js = j["spacing"];
  if (!jd.is_array() || jd.size() != 3 || !js.is_array() || js.size() != 3)
    throw InputError(json_path + ": dims and spacing must be 3-element arrays");
  for (int i = 0; i < 3; ++i) {
    h.dims[i] = jd[i].get<int>();
    h.spacing[i] = js[i].get<double>();
  }
  h.dtype = j["dtype"].get<std::string>();
  if (h.dtype != "u8" && h.dtype != "i16" && h.dtype != "f32")
    throw InputError(json_path + ": unsupported dtype '" + h.dtype + "'");
  // Payload convention: header foo.json pairs with foo.raw.
  std::string base = json_path;
  if (base.size() >= 5 && base.compare(base.size() - 5, 5, ".json") == 0)
    base.resize(base.size() - 5);
  h.payload_path = base + ".raw";
  return h;
}

inline std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "u8") return 1;
  if (dtype == "i16") return 2;
  return 4;
}

inline Volume load_raw_volume(const std::string& json_path) {
  const RawHeader h = parse_raw_header(json_path);
  validate_geometry(h.dims, h.spacing, json_path);
  const std::size_t count =
      static_cast<std::size_t>(h.dims[0]) * h.dims[1] * h.dims[2];
  const auto bytes = read_file_bytes(h.payload_path);
  if (bytes.size() != count * dtype_size(h.dtype))
    throw InputError(h.payload_path + ": payload holds " + std::to_string(bytes.size()) +
                     " bytes, header declares " + std::to_string(count * dtype_size(h.dtype)));
  Volume v;
  v.dims = h.dims;
  v.spacing = h.spacing;
  if (h.dtype == "u8")
    v.voxels = decode_payload<std::uint8_t>(bytes.data(), count, false);
  else if (h.dtype == "i16")
    v.voxels = decode_payload<std::int16_t>(bytes.data(), count, false);
  else
    v.voxels = decode_payload<float>(bytes.data(), count, false);
  return v;
}

// NIfTI-1 field offsets in the 348-byte header.
constexpr int kNiftiSizeofHdr = 0;
constexpr int kNiftiDim = 40;
constexpr int kNiftiDatatype = 70;
constexpr int kNiftiBitpix = 72;
constexpr int kNiftiPixdim = 76;
constexpr int kNiftiVoxOffset = 108;
constexpr int kNiftiMagic = 344;

inline Volume load_nifti_volume(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 352) throw InputError(path + ": file too short for a NIfTI-1 header");
  bool swap = false;
  std::int32_t sizeof_hdr = read_le<std::int32_t>(bytes.data() + kNiftiSizeofHdr);
  if (sizeof_hdr != 348) {
    if (byteswap_val(sizeof_hdr) == 348)
      swap = true;
    else
      throw InputError(path + ": not a NIfTI-1 file (sizeof_hdr != 348)");
  }
  if (std::memcmp(bytes.data() + kNiftiMagic, "n+1\0", 4) != 0)
    throw InputError(path + ": unsupported NIfTI magic (only single-file 'n+1' accepted)");

  auto rd_i16 = [&](int off) {
    auto v = read_le<std::int16_t>(bytes.data() + off);
    return swap ? byteswap_val(v) : v;
  };
  auto rd_f32 = [&](int off) {
    auto v = read_le<float>(bytes.data() + off);
    return swap ? byteswap_val(v) : v;
  };

  const std::int16_t ndim = rd_i16(kNiftiDim);
  if (ndim != 3) throw InputError(path + ": dim[0] must be 3, got " + std::to_string(ndim));
  Volume v;
  for (int i = 0; i < 3; ++i) {
    v.dims[i] = rd_i16(kNiftiDim + 2 * (i + 1));
    v.spacing[i] = rd_f32(kNiftiPixdim + 4 * (i + 1));
  }
  validate_geometry(v.dims, v.spacing, path);

  const std::int16_t datatype = rd_i16(kNiftiDatatype);
  const float vox_offset_f = rd_f32(kNiftiVoxOffset);
  if (!(vox_offset_f >= 348.0f))
    throw InputError(path + ": vox_offset below header size");
  const std::size_t vox_offset = static_cast<std::size_t>(vox_offset_f);
  const std::size_t count = static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];

  std::size_t elem = 0;
  switch (datatype) {
    case 2: elem = 1; break;   // DT_UINT8
    case 4: elem = 2; break;   // DT_INT16
    case 16: elem = 4; break;  // DT_FLOAT32
    default:
      throw InputError(path + ": unsupported NIfTI datatype " + std::to_string(datatype) +
                       " (subset reads uint8, int16, float32)");
  }
  if (bytes.size() < vox_offset + count * elem)
    throw InputError(path + ": payload holds " +
                     std::to_string((bytes.size() - std::min(bytes.size(), vox_offset)) / elem) +
                     " voxels, header declares " + std::to_string(count));
  const char* p = bytes.data() + vox_offset;
  if (datatype == 2)
    v.voxels = decode_payload<std::uint8_t>(p, count, false);
  else if (datatype == 4)
    v.voxels = decode_payload<std::int16_t>(p, count, swap);
  else
    v.voxels = decode_payload<float>(p, count, swap);
  return v;
}

}  // namespace detail

/// Load a volume from a raw+JSON pair (pass the .json path) or a NIfTI-1
/// subset file (.nii). The format is chosen by extension.
inline Volume load_volume(const std::string& path) {
  auto ends_with = [&](const char* suf) {
    const std::string s(suf);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".json")) return detail::load_raw_volume(path);
  if (ends_with(".nii")) return detail::load_nifti_volume(path);
  throw InputError(path + ": unrecognized volume format (expected .json header or .nii)");
}

/// Load a segmentation mask in the same formats as load_volume and binarize it.
/// Dims must match the paired volume exactly.
inline SegMask load_mask(const std::string& path, const Volume& vol) {
  const Volume raw = load_volume(path);
  if (raw.dims != vol.dims)
    throw InputError(path + ": mask dims " + std::to_string(raw.dims[0]) + "x" +
                     std::to_string(raw.dims[1]) + "x" + std::to_string(raw.dims[2]) +
                     " do not match volume dims " + std::to_string(vol.dims[0]) + "x" +
                     std::to_string(vol.dims[1]) + "x" + std::to_string(vol.dims[2]));
  SegMask m;
  m.dims = raw.dims;
  m.labels.resize(raw.voxels.size());
  for (std::size_t i = 0; i < raw.voxels.size(); ++i) m.labels[i] = raw.voxels[i] != 0.0f ? 1 : 0;
  return m;
}

/// Exact foreground pixel set of axial slice z, in scan order (x fastest).
inline std::vector<std::pair<int, int>> mask_slice_points(const SegMask& mask, int z) {
  if (z < 0 || z >= mask.nz())
    throw InputError("mask slice index out of range: " + std::to_string(z));
  std::vector<std::pair<int, int>> pts;
  for (int y = 0; y < mask.ny(); ++y)
    for (int x = 0; x < mask.nx(); ++x)
      if (mask.at(x, y, z)) pts.emplace_back(x, y);
  return pts;
}

/// Write a volume as sidecar JSON header plus raw little-endian payload.
/// json_path must end in .json; the payload lands next to it as .raw.
inline void save_volume_raw(const Volume& vol, const std::string& json_path,
                            const std::string& dtype = "f32") {
  if (dtype != "u8" && dtype != "i16" && dtype != "f32")
    throw InputError("unsupported dtype for save: " + dtype);
  nlohmann::json j;
  j["dims"] = vol.dims;
  j["spacing"] = vol.spacing;
  j["dtype"] = dtype;
  std::ofstream hdr(json_path);
  if (!hdr) throw InputError("cannot open header for writing: " + json_path);
  hdr << j.dump(2) << "\n";

  std::string base = json_path;
  base.resize(base.size() - 5);
  std::ofstream out(base + ".raw", std::ios::binary);
  if (!out) throw InputError("cannot open payload for writing: " + base + ".raw");
  if (dtype == "f32") {
    out.write(reinterpret_cast<const char*>(vol.voxels.data()),
              static_cast<std::streamsize>(vol.voxels.size() * 4));
  } else if (dtype == "u8") {
    std::vector<std::uint8_t> buf(vol.voxels.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<std::uint8_t>(vol.voxels[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    std::vector<std::int16_t> buf(vol.voxels.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<std::int16_t>(vol.voxels[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * 2));
  }
}

inline void save_mask_raw(const SegMask& mask, const std::string& json_path) {
  Volume v;
  v.dims = mask.dims;
  v.spacing = {1, 1, 1};
  v.voxels.assign(mask.labels.begin(), mask.labels.end());
  save_volume_raw(v, json_path, "u8");
}

}  // namespace volgaze
