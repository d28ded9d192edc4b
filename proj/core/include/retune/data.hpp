#pragma once

#include "retune/core.hpp"
#include "retune/forward_models.hpp"
#include "retune/random.hpp"

#include <string>
#include <vector>

namespace retune {

/// Piecewise-smooth test image in [0, 1]: a smooth gradient per channel plus
/// a few flat rectangles.
Signal synth_image(Shape shape, Rng& rng);

/// Adds independent Gaussian noise with one standard deviation per channel.
Signal add_channel_noise(const Signal& x, const std::vector<double>& sigmas, Rng& rng);

/// Pairs (x, x + noise) of synthetic images.
Dataset make_denoising_dataset(int count, Shape shape, const std::vector<double>& sigmas,
                               std::uint64_t seed);

/// Pairs (x, A x + noise) of synthetic images.
Dataset make_restoration_dataset(int count, Shape shape, const LinearOp& A, double noise,
                                 std::uint64_t seed);

/// Clean images from the PPM files of a directory (sorted by name), cropped to
/// size x size from the top-left corner.
std::vector<Signal> load_image_dir(const std::string& dir, int size);

/// Builds pairs from given clean images with an observation model.
Dataset make_pairs(const std::vector<Signal>& clean, const LinearOp* A,
                   const std::vector<double>& sigmas, std::uint64_t seed);

}  // namespace retune
