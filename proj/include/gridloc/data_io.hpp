#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gridloc/grid_env.hpp"

namespace gridloc {

struct Case {
  std::string id;
  Image image;  // [0,1], multiples of 1/255
  Mask mask;    // 0 or 1
};

struct Dataset {
  GridSpec spec;
  std::vector<Case> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

/// 8-bit grayscale PNG as row-major bytes.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

GrayImage read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const GrayImage& image);

Image to_unit_image(const GrayImage& g);
GrayImage from_unit_image(const Image& image);
Mask to_mask(const GrayImage& g);
GrayImage from_mask(const Mask& mask);

/// Reads every <id>_img.png / <id>_mask.png pair in `dir`, sorted by id. All problems
/// (missing partner, wrong size, unreadable file, empty mask) are collected and
/// reported together in one DataError.
Dataset load_dataset(const std::filesystem::path& dir, const GridSpec& spec = {});
/// Writes <id>_img.png and <id>_mask.png for every case into `dir` (created if needed).
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Seeded shuffle, then the first n_train items train and the rest test.
std::pair<Dataset, Dataset> split(const Dataset& ds, int n_train, std::uint64_t seed);

std::vector<GridEnv> make_envs(const Dataset& ds, const EnvOptions& options);

struct SynthConfig {
  int count = 60;
  std::uint64_t seed = 7;
  GridSpec spec;
  double min_semi_axis = 12.0;
  double max_semi_axis = 40.0;
  double lesion_min = 0.75;
  double lesion_max = 0.95;
  double noise_sigma = 0.03;

  void validate() const;
};

/// Generating parameters of one synthetic case, as listed in manifest.txt.
struct LesionParams {
  double center_row = 0.0;
  double center_col = 0.0;
  double semi_axis_a = 0.0;  // along the rotated column axis
  double semi_axis_b = 0.0;
  double angle = 0.0;        // radians
  std::uint64_t seed = 0;    // per-case seed
};

struct SynthCase {
  Case item;
  LesionParams lesion;
};

/// Case `index` of the synthetic set; depends only on (cfg, index). Ellipse semi-axes
/// are drawn first, so their distribution does not depend on placement.
SynthCase synth_case(const SynthConfig& cfg, int index);
/// Pixels whose centers fall inside the (rotated) ellipse.
Mask rasterize_ellipse(const GridSpec& spec, const LesionParams& p);

struct SynthDataset {
  Dataset dataset;
  std::vector<LesionParams> lesions;
};

SynthDataset gen_synthetic(const SynthConfig& cfg);
/// Generates, writes all pairs plus manifest.txt into `out_dir`, and returns the set.
SynthDataset gen_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir);
std::string manifest_text(const SynthDataset& ds);

}  // namespace gridloc
