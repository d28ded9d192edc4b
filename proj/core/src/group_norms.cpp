#include "retune/group_norms.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace retune {

namespace {

std::shared_ptr<const GroupStructure> build_groups(const WaveletLayout& layout,
                                                   PriorKind grouping) {
  auto gs = std::make_shared<GroupStructure>();
  gs->layout = layout;
  gs->grouping = grouping;
  gs->offsets.push_back(0);
  const int C = layout.channels();
  const Band bands[3] = {Band::H, Band::V, Band::D};
  for (int j = 1; j <= layout.levels(); ++j) {
    const int npos = static_cast<int>(layout.band_size(j));
    if (grouping == PriorKind::BandsChannels) {
      for (int k = 0; k < npos; ++k) {
        for (Band b : bands)
          for (int c = 0; c < C; ++c)
            gs->indices.push_back(static_cast<int>(layout.band_offset(j, b, c)) + k);
        gs->offsets.push_back(static_cast<int>(gs->indices.size()));
      }
    } else {
      for (int k = 0; k < npos; ++k) {
        for (int c = 0; c < C; ++c) {
          for (Band b : bands) gs->indices.push_back(static_cast<int>(layout.band_offset(j, b, c)) + k);
          gs->offsets.push_back(static_cast<int>(gs->indices.size()));
        }
      }
    }
  }
  return gs;
}

double block_norm(const Vec& u, const GroupStructure& gs, int g) {
  double s = 0.0;
  for (int i = gs.offsets[g]; i < gs.offsets[g + 1]; ++i) {
    const double x = u[gs.indices[i]];
    s += x * x;
  }
  return std::sqrt(s);
}

// Structures built from a layout need the full coefficient vector; hand-built
// ones (empty layout) only need to cover their indices.
void require_size(const Vec& u, const GroupStructure& gs, const char* what) {
  bool ok = gs.layout.size() == 0 ? true : static_cast<std::size_t>(u.size()) == gs.layout.size();
  for (int idx : gs.indices) ok = ok && idx >= 0 && idx < u.size();
  if (!ok) {
    throw std::invalid_argument(std::string(what) + ": length does not match group structure");
  }
}

}  // namespace

std::shared_ptr<const GroupStructure> group_structure(const WaveletLayout& layout,
                                                      PriorKind grouping) {
  using Key = std::tuple<int, int, int, int, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const GroupStructure>> cache;
  const Shape& s = layout.shape();
  const Key key{s.height, s.width, s.channels, layout.levels(), static_cast<int>(grouping)};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto gs = build_groups(layout, grouping);
  cache.emplace(key, gs);
  return gs;
}

double group_norm(const Vec& u, const GroupStructure& groups) {
  require_size(u, groups, "group_norm");
  double total = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) total += block_norm(u, groups, g);
  return total;
}

double weighted_norm(const WaveletCoeffs& w, const HyperParams& p) {
  const Vec scaled = w.data.cwiseProduct(theta_diag(w.layout, p));
  return group_norm(scaled, *group_structure(w.layout, p.prior_kind));
}

Vec prox_group_l21(const Vec& u, double t, const GroupStructure& groups) {
  require_size(u, groups, "prox_group_l21");
  if (!(t > 0.0)) throw std::invalid_argument("prox_group_l21: threshold must be positive");
  Vec out = u;
  for (int g = 0; g < groups.group_count(); ++g) {
    const double nrm = block_norm(u, groups, g);
    const double scale = nrm > t ? 1.0 - t / nrm : 0.0;
    for (int i = groups.offsets[g]; i < groups.offsets[g + 1]; ++i) out[groups.indices[i]] *= scale;
  }
  return out;
}

WaveletCoeffs prox_group_l21(const WaveletCoeffs& u, double t, PriorKind grouping) {
  return {u.layout, prox_group_l21(u.data, t, *group_structure(u.layout, grouping))};
}

Vec prox_vjp(const Vec& u, double t, const Vec& v, const GroupStructure& groups) {
  require_size(u, groups, "prox_vjp");
  Vec out = v;
  for (int g = 0; g < groups.group_count(); ++g) {
    const double nrm = block_norm(u, groups, g);
    const int b = groups.offsets[g], e = groups.offsets[g + 1];
    if (nrm > t) {
      double uv = 0.0;
      for (int i = b; i < e; ++i) uv += u[groups.indices[i]] * v[groups.indices[i]];
      const double a = 1.0 - t / nrm;
      const double c = t / (nrm * nrm * nrm) * uv;
      for (int i = b; i < e; ++i) {
        const int idx = groups.indices[i];
        out[idx] = a * v[idx] + c * u[idx];
      }
    } else {
      for (int i = b; i < e; ++i) out[groups.indices[i]] = 0.0;
    }
  }
  return out;
}

WaveletCoeffs prox_vjp(const WaveletCoeffs& u, double t, const WaveletCoeffs& v,
                       PriorKind grouping) {
  return {u.layout, prox_vjp(u.data, t, v.data, *group_structure(u.layout, grouping))};
}

double prox_threshold_vjp(const Vec& u, double t, const Vec& v, const GroupStructure& groups) {
  double acc = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) {
    const double nrm = block_norm(u, groups, g);
    if (nrm <= t) continue;
    double uv = 0.0;
    for (int i = groups.offsets[g]; i < groups.offsets[g + 1]; ++i)
      uv += u[groups.indices[i]] * v[groups.indices[i]];
    acc -= uv / nrm;
  }
  return acc;
}

Vec prox_threshold_derivative(const Vec& u, double t, const GroupStructure& groups) {
  Vec out = Vec::Zero(u.size());
  for (int g = 0; g < groups.group_count(); ++g) {
    const double nrm = block_norm(u, groups, g);
    if (nrm <= t) continue;
    for (int i = groups.offsets[g]; i < groups.offsets[g + 1]; ++i)
      out[groups.indices[i]] = -u[groups.indices[i]] / nrm;
  }
  return out;
}

double kink_distance(const Vec& u, double t, const GroupStructure& groups) {
  double d = std::numeric_limits<double>::infinity();
  for (int g = 0; g < groups.group_count(); ++g) d = std::min(d, std::abs(block_norm(u, groups, g) - t));
  return d;
}

}  // namespace retune
