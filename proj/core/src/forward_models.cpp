#include "retune/forward_models.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace retune {

namespace {

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

void require_length(const Vec& x, const Shape& s, const char* what) {
  if (static_cast<std::size_t>(x.size()) != s.size()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

// sign = +1 applies the convolution, -1 its adjoint (correlation).
Vec periodic_conv(const Vec& x, const Shape& s, const std::vector<std::vector<Tap>>& kernels,
                  int sign) {
  Vec out = Vec::Zero(x.size());
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < s.channels; ++c) {
    const double* in = x.data() + c * plane;
    double* dst = out.data() + c * plane;
    for (const Tap& t : kernels[c]) {
      for (int r = 0; r < s.height; ++r) {
        const int sr = wrap(r - sign * t.dy, s.height);
        for (int q = 0; q < s.width; ++q) {
          dst[static_cast<std::size_t>(r) * s.width + q] +=
              t.weight * in[static_cast<std::size_t>(sr) * s.width + wrap(q - sign * t.dx, s.width)];
        }
      }
    }
  }
  return out;
}

}  // namespace

LinearOp LinearOp::identity(Shape shape) {
  LinearOp A;
  A.kind_ = Kind::Identity;
  A.shape_ = shape;
  return A;
}

LinearOp LinearOp::mask(Shape shape, Vec mask) {
  if (mask.size() != static_cast<Eigen::Index>(shape.height) * shape.width) {
    throw std::invalid_argument("LinearOp::mask: mask must have one entry per pixel");
  }
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0 && mask[i] != 1.0) throw std::invalid_argument("LinearOp::mask: entries must be 0 or 1");
  }
  LinearOp A;
  A.kind_ = Kind::Mask;
  A.shape_ = shape;
  A.mask_ = std::move(mask);
  return A;
}

LinearOp LinearOp::conv(Shape shape, std::vector<std::vector<Tap>> kernels) {
  if (static_cast<int>(kernels.size()) != shape.channels) {
    throw std::invalid_argument("LinearOp::conv: need one kernel per channel");
  }
  LinearOp A;
  A.kind_ = Kind::Conv;
  A.shape_ = shape;
  A.kernels_ = std::move(kernels);
  return A;
}

Vec LinearOp::apply(const Vec& x) const {
  require_length(x, shape_, "LinearOp::apply");
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::Mask: {
      Vec out = x;
      const Eigen::Index plane = mask_.size();
      for (int c = 0; c < shape_.channels; ++c) out.segment(c * plane, plane).array() *= mask_.array();
      return out;
    }
    case Kind::Conv: return periodic_conv(x, shape_, kernels_, +1);
  }
  return x;
}

Vec LinearOp::adjoint(const Vec& r) const {
  require_length(r, shape_, "LinearOp::adjoint");
  if (kind_ == Kind::Conv) return periodic_conv(r, shape_, kernels_, -1);
  return apply(r);
}

Signal LinearOp::apply(const Signal& x) const {
  if (!(x.shape() == shape_)) throw std::invalid_argument("LinearOp::apply: shape mismatch");
  return Signal(shape_, apply(x.data()));
}

Signal LinearOp::adjoint(const Signal& r) const {
  if (!(r.shape() == shape_)) throw std::invalid_argument("LinearOp::adjoint: shape mismatch");
  return Signal(shape_, adjoint(r.data()));
}

GramBounds gram_bounds(const LinearOp& A) {
  switch (A.kind()) {
    case LinearOp::Kind::Identity: return {1.0, 1.0};
    case LinearOp::Kind::Mask: {
      const Vec& m = A.mask_values();
      return {m.minCoeff(), m.maxCoeff()};
    }
    case LinearOp::Kind::Conv: break;
  }
  const Shape& s = A.shape();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (const auto& kernel : A.kernels()) {
    for (int f1 = 0; f1 < s.height; ++f1) {
      for (int f2 = 0; f2 < s.width; ++f2) {
        std::complex<double> acc = 0.0;
        for (const Tap& t : kernel) {
          const double phase = -two_pi * (static_cast<double>(f1) * wrap(t.dy, s.height) / s.height +
                                          static_cast<double>(f2) * wrap(t.dx, s.width) / s.width);
          acc += t.weight * std::polar(1.0, phase);
        }
        const double mag2 = std::norm(acc);
        lo = std::min(lo, mag2);
        hi = std::max(hi, mag2);
      }
    }
  }
  return {lo, hi};
}

LinearOp make_inpainting_mask(Shape shape, double keep_prob, Rng& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw std::invalid_argument("make_inpainting_mask: keep probability must lie in (0, 1]");
  }
  Vec m(static_cast<Eigen::Index>(shape.height) * shape.width);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = rng.bernoulli(keep_prob) ? 1.0 : 0.0;
  return LinearOp::mask(shape, std::move(m));
}

LinearOp make_anisotropic_blur(Shape shape, int width) {
  if (width < 1) throw std::invalid_argument("make_anisotropic_blur: width must be >= 1");
  std::vector<std::vector<Tap>> kernels(static_cast<std::size_t>(shape.channels));
  const double w = 1.0 / width;
  const int first = -(width - 1) / 2;
  for (int c = 0; c < shape.channels; ++c) {
    for (int i = 0; i < width; ++i) {
      const int o = first + i;
      switch (c % 3) {
        case 0: kernels[c].push_back({0, o, w}); break;
        case 1: kernels[c].push_back({o, 0, w}); break;
        default: kernels[c].push_back({o, o, w}); break;
      }
    }
  }
  return LinearOp::conv(shape, std::move(kernels));
}

LinearOp make_dirac_conv(Shape shape) {
  return LinearOp::conv(shape, std::vector<std::vector<Tap>>(
                                   static_cast<std::size_t>(shape.channels), {Tap{0, 0, 1.0}}));
}

}  // namespace retune
