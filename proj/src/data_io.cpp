#include "gridloc/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/random.hpp"

namespace gridloc {

Image to_unit_image(const GrayImage& g) {
  Image out(g.height, g.width);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) out.data()[i] = static_cast<float>(g.pixels[i]) / 255.0f;
  return out;
}

GrayImage from_unit_image(const Image& image) {
  GrayImage g{static_cast<int>(image.rows()), static_cast<int>(image.cols()), {}};
  g.pixels.resize(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i)
    g.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.data()[i], 0.0f, 1.0f) * 255.0f));
  return g;
}

Mask to_mask(const GrayImage& g) {
  Mask out(g.height, g.width);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) out.data()[i] = g.pixels[i] > 0 ? 1 : 0;
  return out;
}

GrayImage from_mask(const Mask& mask) {
  GrayImage g{static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), {}};
  g.pixels.resize(static_cast<std::size_t>(mask.size()));
  for (Eigen::Index i = 0; i < mask.size(); ++i) g.pixels[i] = mask.data()[i] != 0 ? 255 : 0;
  return g;
}

Dataset load_dataset(const std::filesystem::path& dir, const GridSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(fmt::format("{}: not a directory", dir.string()));
  struct Pair {
    fs::path image, mask;
  };
  std::map<std::string, Pair> pairs;
  const auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with(name, "_img.png")) pairs[name.substr(0, name.size() - 8)].image = entry.path();
    else if (ends_with(name, "_mask.png")) pairs[name.substr(0, name.size() - 9)].mask = entry.path();
  }

  Dataset ds{spec, {}};
  std::vector<std::string> problems;
  for (const auto& [id, pair] : pairs) {
    if (pair.mask.empty()) {
      problems.push_back(fmt::format("{}: missing mask", id));
      continue;
    }
    if (pair.image.empty()) {
      problems.push_back(fmt::format("{}: missing image", id));
      continue;
    }
    try {
      const GrayImage img = read_png_gray(pair.image);
      const GrayImage msk = read_png_gray(pair.mask);
      bool ok = true;
      for (const auto* g : {&img, &msk})
        if (g->height != spec.image_height || g->width != spec.image_width) {
          problems.push_back(fmt::format("{}: dimension mismatch ({}x{} vs grid {}x{})", id, g->height, g->width,
                                         spec.image_height, spec.image_width));
          ok = false;
          break;
        }
      if (!ok) continue;
      Case c{id, to_unit_image(img), to_mask(msk)};
      if ((c.mask != 0).count() == 0) {
        problems.push_back(fmt::format("{}: empty mask", id));
        continue;
      }
      ds.items.push_back(std::move(c));
    } catch (const DataError& e) {
      problems.push_back(fmt::format("{}: {}", id, e.what()));
    }
  }
  if (!problems.empty()) {
    std::string msg = fmt::format("{}: {} problem(s) loading dataset", dir.string(), problems.size());
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  if (ds.items.empty()) throw DataError(fmt::format("{}: no <id>_img.png/<id>_mask.png pairs found", dir.string()));
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("{}: cannot create directory ({})", dir.string(), ec.message()));
  for (const auto& c : ds.items) {
    write_png_gray(dir / (c.id + "_img.png"), from_unit_image(c.image));
    write_png_gray(dir / (c.id + "_mask.png"), from_mask(c.mask));
  }
}

std::pair<Dataset, Dataset> split(const Dataset& ds, int n_train, std::uint64_t seed) {
  if (n_train < 0 || static_cast<std::size_t>(n_train) >= ds.size())
    throw ConfigError(fmt::format("split: n_train={} must be in [0, {})", n_train, ds.size()));
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates with an explicit draw so the permutation is library independent.
  std::mt19937_64 rng(derive_seed(seed, seed_stream::kSplit));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  Dataset train{ds.spec, {}}, test{ds.spec, {}};
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < static_cast<std::size_t>(n_train) ? train : test).items.push_back(ds.items[order[k]]);
  const auto by_id = [](const Case& a, const Case& b) { return a.id < b.id; };
  std::sort(train.items.begin(), train.items.end(), by_id);
  std::sort(test.items.begin(), test.items.end(), by_id);
  return {std::move(train), std::move(test)};
}

std::vector<GridEnv> make_envs(const Dataset& ds, const EnvOptions& options) {
  std::vector<GridEnv> envs;
  envs.reserve(ds.size());
  for (const auto& c : ds.items) envs.emplace_back(ds.spec, c.image, c.mask, options);
  return envs;
}

void SynthConfig::validate() const {
  spec.validate();
  if (count < 1) throw ConfigError("synthetic: count must be >= 1");
  if (!(min_semi_axis > 0 && min_semi_axis <= max_semi_axis)) throw ConfigError("synthetic: bad semi-axis range");
  if (2 * max_semi_axis + 2 >= std::min(spec.image_height, spec.image_width))
    throw ConfigError("synthetic: lesion does not fit in the image");
  if (!(0 <= lesion_min && lesion_min <= lesion_max && lesion_max <= 1)) throw ConfigError("synthetic: bad intensity band");
  if (spec.rows() * spec.cols() < 2) throw ConfigError("synthetic: grid needs a block other than (0,0)");
}

Mask rasterize_ellipse(const GridSpec& spec, const LesionParams& p) {
  Mask m = Mask::Zero(spec.image_height, spec.image_width);
  const double c = std::cos(p.angle), s = std::sin(p.angle);
  const double ex = std::sqrt(p.semi_axis_a * p.semi_axis_a * c * c + p.semi_axis_b * p.semi_axis_b * s * s);
  const double ey = std::sqrt(p.semi_axis_a * p.semi_axis_a * s * s + p.semi_axis_b * p.semi_axis_b * c * c);
  const int y0 = std::max(0, static_cast<int>(std::floor(p.center_row - ey)));
  const int y1 = std::min(spec.image_height - 1, static_cast<int>(std::ceil(p.center_row + ey)));
  const int x0 = std::max(0, static_cast<int>(std::floor(p.center_col - ex)));
  const int x1 = std::min(spec.image_width - 1, static_cast<int>(std::ceil(p.center_col + ex)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - p.center_col, dy = y - p.center_row;
      const double u = (dx * c + dy * s) / p.semi_axis_a;
      const double v = (-dx * s + dy * c) / p.semi_axis_b;
      if (u * u + v * v <= 1.0) m(y, x) = 1;
    }
  return m;
}

SynthCase synth_case(const SynthConfig& cfg, int index) {
  const GridSpec& spec = cfg.spec;
  const int h = spec.image_height, w = spec.image_width, b = spec.block_size;
  SynthCase out;
  LesionParams& p = out.lesion;
  p.seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  p.semi_axis_a = uniform(cfg.min_semi_axis, cfg.max_semi_axis);
  p.semi_axis_b = uniform(cfg.min_semi_axis, cfg.max_semi_axis);
  p.angle = uniform(0.0, std::numbers::pi);
  const double c = std::cos(p.angle), s = std::sin(p.angle);
  const double ex = std::sqrt(p.semi_axis_a * p.semi_axis_a * c * c + p.semi_axis_b * p.semi_axis_b * s * s);
  const double ey = std::sqrt(p.semi_axis_a * p.semi_axis_a * s * s + p.semi_axis_b * p.semi_axis_b * c * c);

  // Center: uniform inside a uniformly chosen block other than (0,0), pulled inward
  // so the whole ellipse is in the image; redrawn while the lesion touches (0,0).
  const int blocks = spec.rows() * spec.cols();
  Mask mask;
  for (;;) {
    const int k = 1 + static_cast<int>(unit(rng) * (blocks - 1));
    const int br = k / spec.cols(), bc = k % spec.cols();
    p.center_row = std::clamp(br * b + uniform(0.0, b), ey + 1.0, h - 2.0 - ey);
    p.center_col = std::clamp(bc * b + uniform(0.0, b), ex + 1.0, w - 2.0 - ex);
    mask = rasterize_ellipse(spec, p);
    if ((mask.block(0, 0, b, b) != 0).count() == 0) break;
  }

  // Smooth background: a base level plus three low-frequency cosine waves.
  const double base = uniform(0.15, 0.30);
  struct Wave {
    double amp, fy, fx, phase;
  };
  Wave waves[3];
  for (auto& wv : waves)
    wv = {uniform(0.02, 0.08), uniform(-2.0, 2.0) / h, uniform(-2.0, 2.0) / w, uniform(0.0, 2.0 * std::numbers::pi)};
  const double lesion_level = uniform(cfg.lesion_min, cfg.lesion_max);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);

  Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = base;
      for (const auto& wv : waves) v += wv.amp * std::cos(2.0 * std::numbers::pi * (wv.fy * y + wv.fx * x) + wv.phase);
      if (mask(y, x)) v = lesion_level;
      v += noise(rng);
      img(y, x) = static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
    }
  out.item = Case{fmt::format("case{:03d}", index), std::move(img), std::move(mask)};
  return out;
}

SynthDataset gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset out;
  out.dataset.spec = cfg.spec;
  for (int i = 0; i < cfg.count; ++i) {
    SynthCase sc = synth_case(cfg, i);
    out.dataset.items.push_back(std::move(sc.item));
    out.lesions.push_back(sc.lesion);
  }
  return out;
}

std::string manifest_text(const SynthDataset& ds) {
  std::string out = "# id center_row center_col semi_axis_a semi_axis_b angle_rad seed\n";
  for (std::size_t i = 0; i < ds.dataset.items.size(); ++i) {
    const auto& p = ds.lesions[i];
    out += fmt::format("{} {:.3f} {:.3f} {:.3f} {:.3f} {:.6f} {}\n", ds.dataset.items[i].id, p.center_row, p.center_col,
                       p.semi_axis_a, p.semi_axis_b, p.angle, p.seed);
  }
  return out;
}

SynthDataset gen_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  SynthDataset ds = gen_synthetic(cfg);
  write_dataset(ds.dataset, out_dir);
  write_text_file(out_dir / "manifest.txt", manifest_text(ds));
  return ds;
}

}  // namespace gridloc
