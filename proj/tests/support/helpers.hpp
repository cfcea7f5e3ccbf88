#ifndef LESIONEVAL_TESTS_HELPERS_HPP
#define LESIONEVAL_TESTS_HELPERS_HPP

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lesioneval/label_volume.hpp"
#include "lesioneval/regions.hpp"

namespace testutil {

using lesioneval::BinaryMask;
using lesioneval::GridGeometry;
using lesioneval::LabelVolume;

inline GridGeometry iso_grid(int n, double spacing = 1.0) {
  return GridGeometry{{n, n, n}, {spacing, spacing, spacing}};
}

inline BinaryMask make_mask(const GridGeometry& g, const std::vector<std::size_t>& set_voxels) {
  BinaryMask mask;
  mask.geometry = g;
  mask.bits.assign(g.voxel_count(), 0);
  for (std::size_t v : set_voxels) mask.bits[v] = 1;
  return mask;
}

/// Axis-aligned solid cube [lo, hi] inclusive, as linear indices.
inline std::vector<std::size_t> cube_indices(const GridGeometry& g, std::array<int, 3> lo,
                                             std::array<int, 3> hi) {
  std::vector<std::size_t> out;
  for (int z = lo[2]; z <= hi[2]; ++z)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int x = lo[0]; x <= hi[0]; ++x) out.push_back(g.linear_index(x, y, z));
  return out;
}

inline BinaryMask random_mask(const GridGeometry& g, std::uint64_t seed, double fill = 0.15) {
  std::mt19937_64 rng(seed);
  BinaryMask mask;
  mask.geometry = g;
  mask.bits.assign(g.voxel_count(), 0);
  const std::uint64_t threshold =
      static_cast<std::uint64_t>(fill * 18446744073709551615.0);
  for (auto& b : mask.bits) b = rng() < threshold ? 1 : 0;
  return mask;
}

inline LabelVolume random_volume(const GridGeometry& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> voxels(g.voxel_count());
  for (auto& v : voxels) v = static_cast<std::uint8_t>(rng() % 4);
  return LabelVolume(g, std::move(voxels));
}

/// Fresh scratch directory under the system temp dir; removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a shell command with stdout/stderr captured to files.
inline CmdResult run_cmd(const std::string& cmd) {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path() /
                    ("cmd_capture_" + std::to_string(counter.fetch_add(1)) + "_" +
                     std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  const std::string out_file = base.string() + ".out";
  const std::string err_file = base.string() + ".err";
  const std::string full = cmd + " >" + out_file + " 2>" + err_file;
  const int raw = std::system(full.c_str());
  CmdResult r;
  r.exit_code = raw == -1 ? -1 : WEXITSTATUS(raw);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  std::remove(out_file.c_str());
  std::remove(err_file.c_str());
  return r;
}

}  // namespace testutil

#endif
