#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace iirpl {

struct DesignState;

enum class BandKind { Passband, Stopband, Transition };

const char* to_string(BandKind kind) noexcept;

struct BandSpec {
  BandKind kind = BandKind::Passband;
  double lo = 0.0;
  double hi = 0.0;
  int virtual_count = 2000;
  int actual_count = 68;
  // Points pinned next to every edge that borders another band (edges at 0
  // and pi get no cluster). The edge itself is the outermost fixed point.
  int fixed_edge_count = 6;
  double fixed_edge_spacing = 7.8e-4;

  /// Passband/stopband: 68 of 2000 with a 6-point edge cluster.
  /// Transition: 18 of 500, no cluster.
  static BandSpec standard(BandKind kind, double lo, double hi);
};

struct BandSamples {
  BandSpec spec;
  std::vector<double> fixed;   // edge cluster points, never moved by refresh
  std::vector<double> points;  // all actual points, sorted, includes `fixed`
};

/// Actual sample frequencies grouped by band type. Each of `passband`,
/// `stopband` and `transition` concatenates every band of that kind in
/// ascending frequency order.
struct FrequencyGrid {
  std::vector<double> passband;
  std::vector<double> stopband;
  std::vector<double> transition;
  std::vector<BandSamples> bands;

  bool operator==(const FrequencyGrid& other) const {
    return passband == other.passband && stopband == other.stopband && transition == other.transition;
  }
};

/// Uniform virtual frequencies of a band, both edges included.
std::vector<double> virtual_points(const BandSpec& band);

/// Grid with the non-fixed points spread uniformly over each band.
FrequencyGrid build_grid(std::span<const BandSpec> bands);

/// Grid whose non-fixed points follow the error envelope of `state`.
FrequencyGrid build_grid(std::span<const BandSpec> bands, const DesignState& state);

/// Reselects the non-fixed points of every band from its virtual set so that
/// local maxima of the error envelope are sampled and the remaining points
/// are spread with a density that grows with the error.
FrequencyGrid refresh_grid(const FrequencyGrid& grid, const DesignState& state);

/// Uniform verification grid (`count` points per band, edges included).
FrequencyGrid dense_grid(std::span<const BandSpec> bands, int count = 4096);

/// CSV with header `omega,band`.
void write_grid_csv(std::ostream& os, const FrequencyGrid& grid);

}  // namespace iirpl
