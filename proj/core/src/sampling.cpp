#include "iirpl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "iirpl/errors.hpp"
#include "iirpl/sos.hpp"

namespace iirpl {

namespace {

constexpr double kEdgeTol = 1e-12;

bool interior_edge(double edge) { return edge > kEdgeTol && edge < std::numbers::pi - kEdgeTol; }

void validate(std::span<const BandSpec> bands) {
  if (bands.empty()) throw Error(ErrorCode::InvalidArgument, "no bands given");
  for (const BandSpec& b : bands) {
    if (!(b.lo >= 0.0 && b.lo < b.hi && b.hi <= std::numbers::pi + kEdgeTol)) {
      throw Error(ErrorCode::InvalidArgument, "band edges must satisfy 0 <= lo < hi <= pi");
    }
    if (b.actual_count < 1 || b.virtual_count < 2 || b.actual_count > b.virtual_count) {
      throw Error(ErrorCode::InvalidArgument, "band sample counts must satisfy 1 <= actual <= virtual");
    }
  }
  for (std::size_t i = 1; i < bands.size(); ++i) {
    if (bands[i].lo < bands[i - 1].hi - kEdgeTol) {
      throw Error(ErrorCode::InvalidArgument, "bands must be sorted and must not overlap");
    }
  }
}

// Fixed points plus the index range of free virtual points.
struct Layout {
  std::vector<double> fixed;
  std::vector<double> virt;
  std::size_t free_begin = 0;
  std::size_t free_end = 0;  // exclusive
  bool full = false;         // actual == virtual: return the virtual grid as-is
};

Layout layout_band(const BandSpec& band) {
  Layout l;
  l.virt = virtual_points(band);
  if (band.actual_count >= band.virtual_count) {
    l.full = true;
    return l;
  }
  const bool has_clusters = band.kind != BandKind::Transition && band.fixed_edge_count > 0;
  const bool low = has_clusters && interior_edge(band.lo);
  const bool high = has_clusters && interior_edge(band.hi);
  const int per_edge = has_clusters ? band.fixed_edge_count : 0;
  const double span = band.hi - band.lo;
  const int clusters = (low ? 1 : 0) + (high ? 1 : 0);
  if (clusters > 0 && span < per_edge * band.fixed_edge_spacing * clusters) {
    throw Error(ErrorCode::BandTooNarrow, "band [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                                              "] cannot hold its edge clusters");
  }
  double low_limit = -std::numeric_limits<double>::infinity();
  double high_limit = std::numeric_limits<double>::infinity();
  if (low) {
    for (int i = 0; i < per_edge; ++i) l.fixed.push_back(band.lo + i * band.fixed_edge_spacing);
    low_limit = l.fixed.back();
  }
  if (high) {
    for (int i = per_edge - 1; i >= 0; --i) l.fixed.push_back(band.hi - i * band.fixed_edge_spacing);
    high_limit = band.hi - (per_edge - 1) * band.fixed_edge_spacing;
  }
  std::sort(l.fixed.begin(), l.fixed.end());
  const double guard = 0.25 * band.fixed_edge_spacing;
  l.free_begin = static_cast<std::size_t>(
      std::find_if(l.virt.begin(), l.virt.end(), [&](double w) { return w > low_limit + guard; }) - l.virt.begin());
  l.free_end = static_cast<std::size_t>(
      std::find_if(l.virt.begin(), l.virt.end(), [&](double w) { return w >= high_limit - guard; }) - l.virt.begin());
  const int needed = band.actual_count - static_cast<int>(l.fixed.size());
  if (needed < 0 || static_cast<int>(l.free_end - l.free_begin) < needed) {
    throw Error(ErrorCode::BandTooNarrow, "band has too few virtual points for its actual count");
  }
  return l;
}

std::vector<std::size_t> uniform_pick(std::size_t begin, std::size_t end, int k) {
  std::vector<std::size_t> idx;
  if (k <= 0) return idx;
  const std::size_t n = end - begin;
  if (k == 1) {
    idx.push_back(begin + (n - 1) / 2);
    return idx;
  }
  for (int j = 0; j < k; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(k - 1);
    idx.push_back(begin + static_cast<std::size_t>(std::lround(pos)));
  }
  return idx;
}

std::vector<double> assemble_points(const Layout& l, const std::vector<std::size_t>& picked) {
  std::vector<double> pts = l.fixed;
  for (std::size_t i : picked) pts.push_back(l.virt[i]);
  std::sort(pts.begin(), pts.end());
  return pts;
}

// Error envelopes on the free virtual points; one or two curves per band.
std::vector<std::vector<double>> envelopes(const BandSpec& band, const Layout& l, const DesignState& state) {
  const std::size_t n = l.free_end - l.free_begin;
  std::vector<std::vector<double>> env;
  if (band.kind == BandKind::Passband) {
    std::vector<double> gd(n), mag(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = l.virt[l.free_begin + i];
      gd[i] = std::abs(eval_group_delay(state.cascade, w) - state.tau);
      mag[i] = std::abs(std::norm(eval_response(state.cascade, w)) - 1.0);
    }
    env.push_back(std::move(gd));
    env.push_back(std::move(mag));
  } else {
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(eval_response(state.cascade, l.virt[l.free_begin + i]));
    env.push_back(std::move(mag));
  }
  return env;
}

std::vector<std::size_t> nvs_pick(const BandSpec& band, const Layout& l, const DesignState& state) {
  const int k = band.actual_count - static_cast<int>(l.fixed.size());
  const std::size_t n = l.free_end - l.free_begin;
  if (k <= 0) return {};

  std::vector<std::vector<double>> env = envelopes(band, l, state);
  std::vector<double> density(n, 0.0);
  struct Peak {
    double value;
    std::size_t index;
  };
  std::vector<Peak> peaks;
  for (std::vector<double>& e : env) {
    const double top = *std::max_element(e.begin(), e.end());
    if (!(top > 0.0) || !std::isfinite(top)) continue;
    for (double& v : e) v /= top;
    for (std::size_t i = 0; i < n; ++i) {
      density[i] = std::max(density[i], e[i]);
      const bool left = i == 0 || e[i] >= e[i - 1];
      const bool right = i + 1 == n || e[i] > e[i + 1];
      if (left && right) peaks.push_back({e[i], i});
    }
  }
  // Larger maxima first; equal maxima toward lower frequency.
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.index < b.index;
  });

  std::vector<char> taken(n, 0);
  int used = 0;
  for (const Peak& p : peaks) {
    if (used == k) break;
    if (taken[p.index]) continue;
    taken[p.index] = 1;
    ++used;
  }

  // Remaining points by inverse-CDF of 1 + normalized envelope.
  const int rest = k - used;
  if (rest > 0) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 + density[i];
      cdf[i] = acc;
    }
    for (int j = 0; j < rest; ++j) {
      const double target = (static_cast<double>(j) + 0.5) / static_cast<double>(rest) * acc;
      std::size_t i = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
      i = std::min(i, n - 1);
      // Nearest free slot; lower frequency wins ties.
      for (std::size_t d = 0; d < n; ++d) {
        if (i >= d && !taken[i - d]) {
          i -= d;
          break;
        }
        if (i + d < n && !taken[i + d]) {
          i += d;
          break;
        }
      }
      taken[i] = 1;
    }
  }

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) picked.push_back(l.free_begin + i);
  }
  return picked;
}

FrequencyGrid collect(std::vector<BandSamples> bands) {
  FrequencyGrid g;
  for (const BandSamples& b : bands) {
    std::vector<double>* dst = nullptr;
    switch (b.spec.kind) {
      case BandKind::Passband: dst = &g.passband; break;
      case BandKind::Stopband: dst = &g.stopband; break;
      case BandKind::Transition: dst = &g.transition; break;
    }
    for (double w : b.points) {
      // Shared edges between neighbouring bands of the same kind are kept once.
      if (dst->empty() || w > dst->back()) dst->push_back(w);
    }
  }
  g.bands = std::move(bands);
  return g;
}

FrequencyGrid build(std::span<const BandSpec> bands, const DesignState* state) {
  validate(bands);
  std::vector<BandSamples> out;
  for (const BandSpec& band : bands) {
    const Layout l = layout_band(band);
    BandSamples bs;
    bs.spec = band;
    if (l.full) {
      bs.points = l.virt;
    } else {
      bs.fixed = l.fixed;
      const int k = band.actual_count - static_cast<int>(l.fixed.size());
      const std::vector<std::size_t> picked =
          state ? nvs_pick(band, l, *state) : uniform_pick(l.free_begin, l.free_end, k);
      bs.points = assemble_points(l, picked);
    }
    out.push_back(std::move(bs));
  }
  return collect(std::move(out));
}

}  // namespace

const char* to_string(BandKind kind) noexcept {
  switch (kind) {
    case BandKind::Passband: return "passband";
    case BandKind::Stopband: return "stopband";
    case BandKind::Transition: return "transition";
  }
  return "unknown";
}

BandSpec BandSpec::standard(BandKind kind, double lo, double hi) {
  BandSpec b;
  b.kind = kind;
  b.lo = lo;
  b.hi = hi;
  if (kind == BandKind::Transition) {
    b.virtual_count = 500;
    b.actual_count = 18;
    b.fixed_edge_count = 0;
  }
  return b;
}

std::vector<double> virtual_points(const BandSpec& band) {
  std::vector<double> v(static_cast<std::size_t>(band.virtual_count));
  const double step = (band.hi - band.lo) / (band.virtual_count - 1);
  for (int i = 0; i < band.virtual_count; ++i) v[static_cast<std::size_t>(i)] = band.lo + i * step;
  v.back() = band.hi;
  return v;
}

FrequencyGrid build_grid(std::span<const BandSpec> bands) { return build(bands, nullptr); }

FrequencyGrid build_grid(std::span<const BandSpec> bands, const DesignState& state) {
  return build(bands, &state);
}

FrequencyGrid refresh_grid(const FrequencyGrid& grid, const DesignState& state) {
  std::vector<BandSamples> out;
  for (const BandSamples& old : grid.bands) {
    const Layout l = layout_band(old.spec);
    BandSamples bs;
    bs.spec = old.spec;
    if (l.full) {
      bs.points = l.virt;
    } else {
      bs.fixed = old.fixed;
      bs.points = assemble_points(l, nvs_pick(old.spec, l, state));
    }
    out.push_back(std::move(bs));
  }
  return collect(std::move(out));
}

FrequencyGrid dense_grid(std::span<const BandSpec> bands, int count) {
  std::vector<BandSpec> dense(bands.begin(), bands.end());
  for (BandSpec& b : dense) {
    b.virtual_count = count;
    b.actual_count = count;
  }
  return build_grid(dense);
}

void write_grid_csv(std::ostream& os, const FrequencyGrid& grid) {
  os << "omega,band\n";
  os << std::setprecision(17);
  for (const BandSamples& b : grid.bands) {
    for (double w : b.points) os << w << ',' << to_string(b.spec.kind) << '\n';
  }
}

}  // namespace iirpl
