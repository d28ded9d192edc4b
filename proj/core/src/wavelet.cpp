#include "retune/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace retune {

namespace {

// Spectral factor of the degree-7 Daubechies polynomial, minimum phase,
// normalized so that the taps sum to sqrt(2).
constexpr std::array<double, 8> kLowpass = {
    0.2303778133088965,   0.7148465705529157,  0.6308807679298589,  -0.027983769416859854,
    -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032};

std::array<double, 8> make_highpass() {
  std::array<double, 8> g{};
  for (int m = 0; m < 8; ++m) g[m] = ((m % 2) ? -1.0 : 1.0) * kLowpass[7 - m];
  return g;
}

const std::array<double, 8> kHighpass = make_highpass();

// One periodic analysis pass over n samples read with the given stride.
void analyze(const double* in, int n, int stride, double* lo, double* hi) {
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int m = 0; m < 8; ++m) {
      const double v = in[static_cast<std::ptrdiff_t>((2 * k + m) % n) * stride];
      a += kLowpass[m] * v;
      d += kHighpass[m] * v;
    }
    lo[k] = a;
    hi[k] = d;
  }
}

// Transpose of analyze; overwrites out.
void synthesize(const double* lo, const double* hi, int n, double* out, int stride) {
  for (int i = 0; i < n; ++i) out[static_cast<std::ptrdiff_t>(i) * stride] = 0.0;
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    for (int m = 0; m < 8; ++m) {
      out[static_cast<std::ptrdiff_t>((2 * k + m) % n) * stride] +=
          kLowpass[m] * lo[k] + kHighpass[m] * hi[k];
    }
  }
}

// Single-level 2-D analysis of an h x w row-major block in place: the result
// holds LL | (lo rows, hi cols) in the top half and the high-height bands below.
void analyze_level(std::vector<double>& a, int h, int w) {
  std::vector<double> lo(static_cast<std::size_t>(std::max(h, w) / 2));
  std::vector<double> hi(lo.size());
  for (int r = 0; r < h; ++r) {
    double* row = a.data() + static_cast<std::size_t>(r) * w;
    analyze(row, w, 1, lo.data(), hi.data());
    for (int k = 0; k < w / 2; ++k) {
      row[k] = lo[k];
      row[w / 2 + k] = hi[k];
    }
  }
  for (int c = 0; c < w; ++c) {
    double* col = a.data() + c;
    analyze(col, h, w, lo.data(), hi.data());
    for (int k = 0; k < h / 2; ++k) {
      col[static_cast<std::size_t>(k) * w] = lo[k];
      col[static_cast<std::size_t>(h / 2 + k) * w] = hi[k];
    }
  }
}

void synthesize_level(std::vector<double>& a, int h, int w) {
  std::vector<double> lo(static_cast<std::size_t>(std::max(h, w) / 2));
  std::vector<double> hi(lo.size());
  std::vector<double> out(static_cast<std::size_t>(std::max(h, w)));
  for (int c = 0; c < w; ++c) {
    double* col = a.data() + c;
    for (int k = 0; k < h / 2; ++k) {
      lo[k] = col[static_cast<std::size_t>(k) * w];
      hi[k] = col[static_cast<std::size_t>(h / 2 + k) * w];
    }
    synthesize(lo.data(), hi.data(), h, out.data(), 1);
    for (int i = 0; i < h; ++i) col[static_cast<std::size_t>(i) * w] = out[i];
  }
  for (int r = 0; r < h; ++r) {
    double* row = a.data() + static_cast<std::size_t>(r) * w;
    for (int k = 0; k < w / 2; ++k) {
      lo[k] = row[k];
      hi[k] = row[w / 2 + k];
    }
    synthesize(lo.data(), hi.data(), w, out.data(), 1);
    for (int i = 0; i < w; ++i) row[i] = out[i];
  }
}

// Quadrant origin (row, col) of a band inside the level's h x w block.
std::pair<int, int> quadrant(Band b, int hh, int hw) {
  switch (b) {
    case Band::H: return {hh, 0};   // high along height, low along width
    case Band::V: return {0, hw};   // low along height, high along width
    case Band::D: return {hh, hw};
  }
  return {0, 0};
}

}  // namespace

WaveletLayout::WaveletLayout(Shape shape, int levels) : shape_(shape), levels_(levels) {
  if (levels < 1) throw std::invalid_argument("WaveletLayout: levels must be >= 1");
  if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
    throw std::invalid_argument("WaveletLayout: empty shape");
  }
  const int block = 1 << levels;
  if (shape.height % block != 0 || shape.width % block != 0) {
    throw std::invalid_argument("WaveletLayout: " + std::to_string(shape.height) + "x" +
                                std::to_string(shape.width) + " not divisible by 2^" +
                                std::to_string(levels));
  }
  detail_size_ = shape.size() - static_cast<std::size_t>(shape.channels) * band_size(levels);
}

std::size_t WaveletLayout::band_offset(int j, Band b, int c) const {
  std::size_t off = 0;
  for (int i = 1; i < j; ++i) off += 3 * static_cast<std::size_t>(shape_.channels) * band_size(i);
  const std::size_t bs = band_size(j);
  return off + (static_cast<std::size_t>(b) * shape_.channels + c) * bs;
}

std::size_t WaveletLayout::approx_offset(int c) const {
  return detail_size_ + static_cast<std::size_t>(c) * band_size(levels_);
}

const std::array<double, 8>& db4_lowpass() { return kLowpass; }

Vec dwt2(const Vec& x, const WaveletLayout& layout) {
  const Shape& s = layout.shape();
  if (static_cast<std::size_t>(x.size()) != layout.size()) {
    throw std::invalid_argument("dwt2: signal length does not match layout");
  }
  Vec out(x.size());
  std::vector<double> a;
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < s.channels; ++c) {
    a.assign(x.data() + c * plane, x.data() + (c + 1) * plane);
    int h = s.height, w = s.width;
    std::vector<double> block;
    for (int j = 1; j <= layout.levels(); ++j) {
      block.resize(static_cast<std::size_t>(h) * w);
      for (int r = 0; r < h; ++r)
        for (int q = 0; q < w; ++q) block[static_cast<std::size_t>(r) * w + q] = a[static_cast<std::size_t>(r) * s.width + q];
      analyze_level(block, h, w);
      const int hh = h / 2, hw = w / 2;
      for (Band b : {Band::H, Band::V, Band::D}) {
        const auto [r0, c0] = quadrant(b, hh, hw);
        double* dst = out.data() + layout.band_offset(j, b, c);
        for (int r = 0; r < hh; ++r)
          for (int q = 0; q < hw; ++q) dst[static_cast<std::size_t>(r) * hw + q] = block[static_cast<std::size_t>(r0 + r) * w + c0 + q];
      }
      for (int r = 0; r < hh; ++r)
        for (int q = 0; q < hw; ++q) a[static_cast<std::size_t>(r) * s.width + q] = block[static_cast<std::size_t>(r) * w + q];
      h = hh;
      w = hw;
    }
    double* dst = out.data() + layout.approx_offset(c);
    for (int r = 0; r < h; ++r)
      for (int q = 0; q < w; ++q) dst[static_cast<std::size_t>(r) * w + q] = a[static_cast<std::size_t>(r) * s.width + q];
  }
  return out;
}

Vec idwt2(const Vec& coeffs, const WaveletLayout& layout) {
  const Shape& s = layout.shape();
  if (static_cast<std::size_t>(coeffs.size()) != layout.size()) {
    throw std::invalid_argument("idwt2: coefficient length does not match layout");
  }
  Vec out(coeffs.size());
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  std::vector<double> approx, block;
  for (int c = 0; c < s.channels; ++c) {
    int h = layout.band_height(layout.levels());
    int w = layout.band_width(layout.levels());
    approx.assign(coeffs.data() + layout.approx_offset(c),
                  coeffs.data() + layout.approx_offset(c) + static_cast<std::size_t>(h) * w);
    for (int j = layout.levels(); j >= 1; --j) {
      const int H = 2 * h, W = 2 * w;
      block.assign(static_cast<std::size_t>(H) * W, 0.0);
      for (int r = 0; r < h; ++r)
        for (int q = 0; q < w; ++q) block[static_cast<std::size_t>(r) * W + q] = approx[static_cast<std::size_t>(r) * w + q];
      for (Band b : {Band::H, Band::V, Band::D}) {
        const auto [r0, c0] = quadrant(b, h, w);
        const double* src = coeffs.data() + layout.band_offset(j, b, c);
        for (int r = 0; r < h; ++r)
          for (int q = 0; q < w; ++q) block[static_cast<std::size_t>(r0 + r) * W + c0 + q] = src[static_cast<std::size_t>(r) * w + q];
      }
      synthesize_level(block, H, W);
      approx.swap(block);
      h = H;
      w = W;
    }
    std::copy(approx.begin(), approx.end(), out.data() + c * plane);
  }
  return out;
}

WaveletCoeffs dwt2(const Signal& x, int levels) {
  WaveletLayout layout(x.shape(), levels);
  return {layout, dwt2(x.data(), layout)};
}

Signal idwt2(const WaveletCoeffs& w) {
  if (static_cast<std::size_t>(w.data.size()) != w.layout.size() || w.layout.levels() < 1) {
    throw std::invalid_argument("idwt2: inconsistent coefficient metadata");
  }
  return Signal(w.layout.shape(), idwt2(w.data, w.layout));
}

int band_weight_index(PriorKind kind, Band b, int c, int channels) {
  return kind == PriorKind::Bands ? static_cast<int>(b) : static_cast<int>(b) * channels + c;
}

Vec theta_diag(const WaveletLayout& layout, const HyperParams& p) {
  const int C = layout.channels();
  if (p.log_lambda.size() != layout.levels() ||
      p.log_Lambda.size() != band_weight_count(p.prior_kind, C)) {
    throw std::invalid_argument("theta_diag: hyperparameters do not match the band structure");
  }
  Vec theta = Vec::Ones(static_cast<Eigen::Index>(layout.size()));
  for (int j = 1; j <= layout.levels(); ++j) {
    const std::size_t bs = layout.band_size(j);
    for (Band b : {Band::H, Band::V, Band::D}) {
      for (int c = 0; c < C; ++c) {
        const double wt = std::exp(p.log_lambda[j - 1] +
                                   0.5 * p.log_Lambda[band_weight_index(p.prior_kind, b, c, C)]);
        theta.segment(static_cast<Eigen::Index>(layout.band_offset(j, b, c)),
                      static_cast<Eigen::Index>(bs))
            .setConstant(wt);
      }
    }
  }
  return theta;
}

WaveletCoeffs weight_map_apply(const WaveletCoeffs& w, const HyperParams& p, int power) {
  if (power != 1 && power != -1 && power != -2 && power != 2) {
    throw std::invalid_argument("weight_map_apply: power must be one of -2, -1, 1, 2");
  }
  const Vec theta = theta_diag(w.layout, p);
  WaveletCoeffs out{w.layout, w.data};
  out.data.array() *= theta.array().pow(power);
  return out;
}

Vec pack_weights(const HyperParams& p) {
  Vec s(p.log_lambda.size() + p.log_Lambda.size());
  s << p.log_lambda, p.log_Lambda;
  return s;
}

HyperParams unpack_weights(const Vec& s, int levels, int channels, PriorKind kind) {
  const int nb = band_weight_count(kind, channels);
  if (s.size() != levels + nb) throw std::invalid_argument("unpack_weights: length mismatch");
  HyperParams p;
  p.prior_kind = kind;
  p.log_lambda = s.head(levels);
  p.log_Lambda = s.tail(nb);
  return p;
}

}  // namespace retune
