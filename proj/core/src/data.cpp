#include "retune/data.hpp"

#include "retune/io.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

namespace retune {

Signal synth_image(Shape shape, Rng& rng) {
  Vec data(static_cast<Eigen::Index>(shape.size()));
  const int H = shape.height, W = shape.width, C = shape.channels;
  std::vector<double> base(C), gy(C), gx(C);
  for (int c = 0; c < C; ++c) {
    base[c] = rng.uniform(0.2, 0.6);
    gy[c] = rng.uniform(-0.2, 0.2);
    gx[c] = rng.uniform(-0.2, 0.2);
  }
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < H; ++r)
      for (int q = 0; q < W; ++q)
        data[static_cast<Eigen::Index>((static_cast<std::size_t>(c) * H + r) * W + q)] =
            base[c] + gy[c] * r / H + gx[c] * q / W;
  const int rects = 3 + static_cast<int>(rng.index(4));
  for (int k = 0; k < rects; ++k) {
    const int r0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(H)));
    const int q0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(W)));
    const int rh = 2 + static_cast<int>(rng.index(static_cast<std::uint64_t>(std::max(1, H / 2))));
    const int qw = 2 + static_cast<int>(rng.index(static_cast<std::uint64_t>(std::max(1, W / 2))));
    std::vector<double> colour(C);
    for (auto& v : colour) v = rng.uniform();
    for (int c = 0; c < C; ++c)
      for (int r = r0; r < std::min(H, r0 + rh); ++r)
        for (int q = q0; q < std::min(W, q0 + qw); ++q)
          data[static_cast<Eigen::Index>((static_cast<std::size_t>(c) * H + r) * W + q)] = colour[c];
  }
  data = data.cwiseMax(0.0).cwiseMin(1.0);
  return Signal(shape, std::move(data));
}

Signal add_channel_noise(const Signal& x, const std::vector<double>& sigmas, Rng& rng) {
  const Shape& s = x.shape();
  if (static_cast<int>(sigmas.size()) != s.channels) {
    throw std::invalid_argument("add_channel_noise: need one standard deviation per channel");
  }
  Vec y = x.data();
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < s.channels; ++c)
    for (std::size_t i = 0; i < plane; ++i) y[static_cast<Eigen::Index>(c * plane + i)] += sigmas[c] * rng.normal();
  return Signal(s, std::move(y));
}

Dataset make_pairs(const std::vector<Signal>& clean, const LinearOp* A,
                   const std::vector<double>& sigmas, std::uint64_t seed) {
  Dataset d;
  d.seed = seed;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng rng(Rng::mix(seed, 2 * i + 1));
    const Signal degraded = A ? A->apply(clean[i]) : clean[i];
    d.pairs.push_back({clean[i], add_channel_noise(degraded, sigmas, rng)});
  }
  d.validate();
  return d;
}

Dataset make_denoising_dataset(int count, Shape shape, const std::vector<double>& sigmas,
                               std::uint64_t seed) {
  std::vector<Signal> clean;
  for (int i = 0; i < count; ++i) {
    Rng rng(Rng::mix(seed, 2 * static_cast<std::uint64_t>(i)));
    clean.push_back(synth_image(shape, rng));
  }
  return make_pairs(clean, nullptr, sigmas, seed);
}

Dataset make_restoration_dataset(int count, Shape shape, const LinearOp& A, double noise,
                                 std::uint64_t seed) {
  std::vector<Signal> clean;
  for (int i = 0; i < count; ++i) {
    Rng rng(Rng::mix(seed, 2 * static_cast<std::uint64_t>(i)));
    clean.push_back(synth_image(shape, rng));
  }
  return make_pairs(clean, &A, std::vector<double>(static_cast<std::size_t>(shape.channels), noise),
                    seed);
}

std::vector<Signal> load_image_dir(const std::string& dir, int size) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Signal> out;
  for (const auto& f : files) {
    const Signal img = read_pnm(f.string());
    const Shape& s = img.shape();
    if (s.height < size || s.width < size) continue;
    const Shape cs{size, size, s.channels};
    Vec data(static_cast<Eigen::Index>(cs.size()));
    for (int c = 0; c < s.channels; ++c)
      for (int r = 0; r < size; ++r)
        for (int q = 0; q < size; ++q)
          data[static_cast<Eigen::Index>((static_cast<std::size_t>(c) * size + r) * size + q)] = img.at(c, r, q);
    out.emplace_back(cs, std::move(data));
  }
  if (out.empty()) throw std::runtime_error("load_image_dir: no usable PPM/PGM images in " + dir);
  return out;
}

}  // namespace retune
