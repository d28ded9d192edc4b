#pragma once

#include "retune/core.hpp"
#include "retune/wavelet.hpp"

#include <memory>
#include <vector>

namespace retune {

/// Partition of the detail coefficients into groups, stored in CSR form.
/// The approximation band belongs to no group.
struct GroupStructure {
  WaveletLayout layout;
  PriorKind grouping = PriorKind::BandsChannels;
  std::vector<int> offsets;  // size groups + 1
  std::vector<int> indices;  // flat coefficient indices

  int group_count() const { return static_cast<int>(offsets.size()) - 1; }
  int group_size(int g) const { return offsets[g + 1] - offsets[g]; }
};

/// Groups for (layout, grouping). Built once and cached; the returned object is immutable.
std::shared_ptr<const GroupStructure> group_structure(const WaveletLayout& layout,
                                                      PriorKind grouping);

/// Sum of Euclidean group norms of u (unweighted).
double group_norm(const Vec& u, const GroupStructure& groups);

/// Weighted prior: the group norm of theta * w.
double weighted_norm(const WaveletCoeffs& w, const HyperParams& p);

/// Block soft-thresholding: u_g * max(0, 1 - t / ||u_g||); ungrouped entries pass through.
Vec prox_group_l21(const Vec& u, double t, const GroupStructure& groups);
WaveletCoeffs prox_group_l21(const WaveletCoeffs& u, double t, PriorKind grouping);

/// Product of v with the almost-everywhere Jacobian of the prox at u. The
/// Jacobian is symmetric, so this also serves as the forward derivative.
/// Groups with ||u_g|| <= t map to zero.
Vec prox_vjp(const Vec& u, double t, const Vec& v, const GroupStructure& groups);
WaveletCoeffs prox_vjp(const WaveletCoeffs& u, double t, const WaveletCoeffs& v,
                       PriorKind grouping);

/// <v, d prox(u, t) / dt> = -sum over active groups of <v_g, u_g> / ||u_g||.
double prox_threshold_vjp(const Vec& u, double t, const Vec& v, const GroupStructure& groups);
/// d prox(u, t) / dt as a vector.
Vec prox_threshold_derivative(const Vec& u, double t, const GroupStructure& groups);

/// min over groups of | ||u_g|| - t |, the distance to the nearest kink.
double kink_distance(const Vec& u, double t, const GroupStructure& groups);

}  // namespace retune
