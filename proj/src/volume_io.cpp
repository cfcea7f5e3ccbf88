#include "lesioneval/volume_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"

namespace lesioneval {
namespace {

// NIfTI-1: 348-byte header, single-file magic "n+1\0", voxel data at
// vox_offset. Field offsets below follow the published layout.
constexpr std::size_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiDataOffset = 352;  // header + 4 extension bytes

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;
constexpr std::int16_t kDtUint16 = 512;

bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::strlen(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

std::uint16_t bswap16(std::uint16_t v) { return static_cast<std::uint16_t>((v >> 8) | (v << 8)); }
std::uint32_t bswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}
std::uint64_t bswap64(std::uint64_t v) {
  return (static_cast<std::uint64_t>(bswap32(static_cast<std::uint32_t>(v))) << 32) |
         bswap32(static_cast<std::uint32_t>(v >> 32));
}

struct HeaderView {
  const unsigned char* buf;
  bool swap;

  std::int16_t i16(std::size_t off) const {
    std::uint16_t v;
    std::memcpy(&v, buf + off, 2);
    if (swap) v = bswap16(v);
    std::int16_t out;
    std::memcpy(&out, &v, 2);
    return out;
  }
  std::int32_t i32(std::size_t off) const {
    std::uint32_t v;
    std::memcpy(&v, buf + off, 4);
    if (swap) v = bswap32(v);
    std::int32_t out;
    std::memcpy(&out, &v, 4);
    return out;
  }
  float f32(std::size_t off) const {
    std::uint32_t v;
    std::memcpy(&v, buf + off, 4);
    if (swap) v = bswap32(v);
    float out;
    std::memcpy(&out, &v, 4);
    return out;
  }
};

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::vector<unsigned char> read_gzip_bytes(const std::filesystem::path& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path.string() + " for reading");
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    if (probe.gcount() < 2 || magic[0] != 0x1f || magic[1] != 0x8b)
      throw FormatError(path.string() + " has a .gz name but is not gzip data");
  }
  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (gz == nullptr) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<unsigned char> bytes;
  unsigned char chunk[1 << 16];
  int got;
  while ((got = gzread(gz, chunk, sizeof(chunk))) > 0) {
    bytes.insert(bytes.end(), chunk, chunk + got);
  }
  const bool failed = got < 0;
  gzclose(gz);
  if (failed) throw FormatError("gzip stream in " + path.string() + " is corrupt");
  return bytes;
}

std::size_t element_size(std::int16_t datatype) {
  switch (datatype) {
    case kDtUint8: return 1;
    case kDtInt16: return 2;
    case kDtUint16: return 2;
    case kDtInt32: return 4;
    case kDtFloat32: return 4;
    case kDtFloat64: return 8;
    default: return 0;
  }
}

std::int16_t expected_bitpix(std::int16_t datatype) {
  return static_cast<std::int16_t>(element_size(datatype) * 8);
}

double decode_element(const unsigned char* p, std::int16_t datatype, bool swap) {
  switch (datatype) {
    case kDtUint8:
      return static_cast<double>(*p);
    case kDtInt16: {
      std::uint16_t v;
      std::memcpy(&v, p, 2);
      if (swap) v = bswap16(v);
      std::int16_t s;
      std::memcpy(&s, &v, 2);
      return static_cast<double>(s);
    }
    case kDtUint16: {
      std::uint16_t v;
      std::memcpy(&v, p, 2);
      if (swap) v = bswap16(v);
      return static_cast<double>(v);
    }
    case kDtInt32: {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      if (swap) v = bswap32(v);
      std::int32_t s;
      std::memcpy(&s, &v, 4);
      return static_cast<double>(s);
    }
    case kDtFloat32: {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      if (swap) v = bswap32(v);
      float f;
      std::memcpy(&f, &v, 4);
      return static_cast<double>(f);
    }
    case kDtFloat64: {
      std::uint64_t v;
      std::memcpy(&v, p, 8);
      if (swap) v = bswap64(v);
      double d;
      std::memcpy(&d, &v, 8);
      return d;
    }
    default:
      throw FormatError("unsupported datatype " + std::to_string(datatype));
  }
}

LabelVolume parse_nifti(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < kNiftiHeaderSize)
    throw FormatError(name + ": file shorter than a NIfTI-1 header");

  std::int32_t size_field;
  std::memcpy(&size_field, bytes.data(), 4);
  bool swap = false;
  if (size_field != 348) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data(), 4);
    u = bswap32(u);
    std::memcpy(&size_field, &u, 4);
    if (size_field != 348) throw FormatError(name + ": sizeof_hdr is not 348, not NIfTI-1");
    swap = true;
  }
  const HeaderView h{bytes.data(), swap};

  const char* magic = reinterpret_cast<const char*>(bytes.data() + 344);
  if (std::memcmp(magic, "n+1", 4) != 0) {
    if (std::memcmp(magic, "ni1", 4) == 0)
      throw FormatError(name + ": two-file (.hdr/.img) NIfTI is not supported");
    throw FormatError(name + ": bad NIfTI magic");
  }

  const std::int16_t ndim = h.i16(40);
  if (ndim < 1 || ndim > 7) throw FormatError(name + ": dim[0] = " + std::to_string(ndim));
  GridGeometry geom;
  for (int axis = 1; axis <= 3; ++axis) {
    const std::int16_t d = axis <= ndim ? h.i16(40 + 2 * axis) : std::int16_t{1};
    if (d < 1) throw FormatError(name + ": dim[" + std::to_string(axis) + "] = " + std::to_string(d));
    geom.dims[axis - 1] = d;
  }
  for (int axis = 4; axis <= ndim; ++axis) {
    if (h.i16(40 + 2 * axis) > 1)
      throw FormatError(name + ": only 3D label volumes are supported");
  }
  for (int axis = 1; axis <= 3; ++axis) {
    const float p = axis <= ndim ? h.f32(76 + 4 * axis) : 1.0f;
    if (!std::isfinite(p) || p <= 0.0f)
      throw FormatError(name + ": pixdim[" + std::to_string(axis) + "] must be positive");
    geom.spacing[axis - 1] = static_cast<double>(p);
  }

  const std::int16_t datatype = h.i16(70);
  const std::size_t elem = element_size(datatype);
  if (elem == 0) throw FormatError(name + ": unsupported datatype " + std::to_string(datatype));
  const std::int16_t bitpix = h.i16(72);
  if (bitpix != expected_bitpix(datatype))
    throw FormatError(name + ": bitpix " + std::to_string(bitpix) + " does not match datatype " +
                      std::to_string(datatype));

  const float vox_offset_f = h.f32(108);
  if (!std::isfinite(vox_offset_f) || vox_offset_f < static_cast<float>(kNiftiHeaderSize))
    throw FormatError(name + ": bad vox_offset");
  const std::size_t vox_offset = static_cast<std::size_t>(std::llround(vox_offset_f));

  const float slope = h.f32(112);
  const float inter = h.f32(116);
  const bool apply_scaling = std::isfinite(slope) && slope != 0.0f && slope != 1.0f;
  if (apply_scaling && !std::isfinite(inter))
    throw FormatError(name + ": non-finite scl_inter");

  const std::size_t n = geom.voxel_count();
  if (bytes.size() < vox_offset + n * elem)
    throw FormatError(name + ": truncated voxel data");

  std::vector<std::uint8_t> labels(n);
  const unsigned char* data = bytes.data() + vox_offset;
  for (std::size_t i = 0; i < n; ++i) {
    double v = decode_element(data + i * elem, datatype, swap);
    if (!std::isfinite(v))
      throw FormatError(name + ": non-finite voxel value at index " + std::to_string(i));
    if (apply_scaling) v = v * static_cast<double>(slope) + static_cast<double>(inter);
    const long long nearest = std::llround(v);
    if (std::fabs(v - static_cast<double>(nearest)) > 1e-6)
      throw FormatError(name + ": voxel value " + format_g17(v) + " at index " +
                        std::to_string(i) + " is not integral");
    if (nearest < 0 || nearest > kMaxLabel)
      throw LabelDomainError(name + ": label value " + std::to_string(nearest) +
                             " at voxel index " + std::to_string(i) + " is outside {0,1,2,3}");
    labels[i] = static_cast<std::uint8_t>(nearest);
  }
  return LabelVolume(geom, std::move(labels));
}

LabelVolume parse_rawvol(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string magic;
  in >> magic;
  if (magic != "RAWVOL") throw FormatError(path.string() + ": missing RAWVOL header");
  long long nx, ny, nz;
  double sx, sy, sz;
  if (!(in >> nx >> ny >> nz >> sx >> sy >> sz))
    throw FormatError(path.string() + ": bad RAWVOL header line");
  if (nx < 1 || ny < 1 || nz < 1) throw FormatError(path.string() + ": RAWVOL dims must be >= 1");
  if (!(sx > 0) || !(sy > 0) || !(sz > 0))
    throw FormatError(path.string() + ": RAWVOL spacing must be positive");
  if (nx * ny * nz > (1LL << 31))
    throw FormatError(path.string() + ": RAWVOL volume too large");

  GridGeometry geom{{static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)},
                    {sx, sy, sz}};
  const std::size_t n = geom.voxel_count();
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long v;
    if (!(in >> v))
      throw FormatError(path.string() + ": expected " + std::to_string(n) +
                        " labels, failed at index " + std::to_string(i));
    if (v < 0 || v > kMaxLabel)
      throw LabelDomainError(path.string() + ": label value " + std::to_string(v) +
                             " at voxel index " + std::to_string(i) + " is outside {0,1,2,3}");
    labels[i] = static_cast<std::uint8_t>(v);
  }
  std::string extra;
  if (in >> extra)
    throw FormatError(path.string() + ": trailing content '" + extra + "' after voxel data");
  return LabelVolume(geom, std::move(labels));
}

void put_i16(std::vector<unsigned char>& buf, std::size_t off, std::int16_t v) {
  std::memcpy(buf.data() + off, &v, 2);
}
void put_i32(std::vector<unsigned char>& buf, std::size_t off, std::int32_t v) {
  std::memcpy(buf.data() + off, &v, 4);
}
void put_f32(std::vector<unsigned char>& buf, std::size_t off, float v) {
  std::memcpy(buf.data() + off, &v, 4);
}

std::vector<unsigned char> build_nifti_bytes(const LabelVolume& vol) {
  const GridGeometry& g = vol.geometry();
  std::vector<unsigned char> out(kNiftiDataOffset + vol.voxels().size(), 0);

  put_i32(out, 0, 348);
  out[38] = 'r';  // "regular" flag, as conventional writers emit
  put_i16(out, 40, 3);
  for (int axis = 0; axis < 3; ++axis) put_i16(out, 42 + 2 * axis, static_cast<std::int16_t>(g.dims[axis]));
  for (int axis = 4; axis <= 7; ++axis) put_i16(out, 40 + 2 * axis, 1);
  put_i16(out, 70, kDtUint8);
  put_i16(out, 72, 8);
  put_f32(out, 76, 1.0f);  // qfac
  for (int axis = 0; axis < 3; ++axis) put_f32(out, 80 + 4 * axis, static_cast<float>(g.spacing[axis]));
  put_f32(out, 108, static_cast<float>(kNiftiDataOffset));
  put_f32(out, 112, 1.0f);  // scl_slope
  put_f32(out, 116, 0.0f);  // scl_inter
  out[123] = 2;             // spatial units: mm
  const char descrip[] = "label volume";
  std::memcpy(out.data() + 148, descrip, sizeof(descrip));
  put_i16(out, 254, 1);  // sform_code: scaled axis-aligned affine
  put_f32(out, 280, static_cast<float>(g.spacing[0]));
  put_f32(out, 300, static_cast<float>(g.spacing[1]));
  put_f32(out, 320, static_cast<float>(g.spacing[2]));
  std::memcpy(out.data() + 344, "n+1", 4);
  // 4 zero bytes at 348: no header extensions.
  std::memcpy(out.data() + kNiftiDataOffset, vol.voxels().data(), vol.voxels().size());
  return out;
}

void write_rawvol(const LabelVolume& vol, const std::filesystem::path& path) {
  std::ostringstream out;
  const GridGeometry& g = vol.geometry();
  out << "RAWVOL " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << ' '
      << format_g17(g.spacing[0]) << ' ' << format_g17(g.spacing[1]) << ' '
      << format_g17(g.spacing[2]) << '\n';
  const auto& v = vol.voxels();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << int(v[i]);
    out << ((i % 16 == 15 || i + 1 == v.size()) ? '\n' : ' ');
  }
  write_text_file(path, out.str());
}

}  // namespace

LabelVolume read_label_volume(const std::filesystem::path& path) {
  const std::string name = path.string();
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + name);
  if (ends_with(name, ".rawvol")) return parse_rawvol(path);
  if (ends_with(name, ".gz")) return parse_nifti(read_gzip_bytes(path), name);
  return parse_nifti(read_file_bytes(path), name);
}

void write_label_volume(const LabelVolume& vol, const std::filesystem::path& path) {
  const std::string name = path.string();
  if (ends_with(name, ".rawvol")) {
    write_rawvol(vol, path);
    return;
  }
  const std::vector<unsigned char> bytes = build_nifti_bytes(vol);
  if (ends_with(name, ".gz")) {
    gzFile gz = gzopen(name.c_str(), "wb");
    if (gz == nullptr) throw IoError("cannot open " + name + " for writing");
    const int wrote = gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    const int rc = gzclose(gz);
    if (wrote != static_cast<int>(bytes.size()) || rc != Z_OK)
      throw IoError("failed writing " + name);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + name + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + name);
}

GridGeometry validate_pair(const LabelVolume& gt, const LabelVolume& pred) {
  if (!geometry_compatible(gt.geometry(), pred.geometry())) {
    throw GeometryMismatchError("geometry mismatch: gt " + describe_geometry(gt.geometry()) +
                                " vs pred " + describe_geometry(pred.geometry()));
  }
  return gt.geometry();
}

}  // namespace lesioneval
