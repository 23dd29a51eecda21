#pragma once

/// \file
/// Information structures (stopping sets) and the per-node local view they
/// induce: which receivers a transmitter observes exactly, and the radius
/// beyond which the remaining receivers are replaced by their mean density.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saloha/model.hpp"

namespace saloha {

enum class StoppingSetKind { Empty, Disk, NearestK, NearestKCapped, FullPlane };

/// One of the five ball-shaped stopping-set families centred at the node.
class StoppingSetSpec {
 public:
  static StoppingSetSpec empty();
  static StoppingSetSpec disk(double radius);
  static StoppingSetSpec nearest(int k);
  static StoppingSetSpec nearest_capped(int k, double radius);
  static StoppingSetSpec full_plane();

  /// Parses `empty`, `disk:R=<val>`, `nearest:k=<int>`,
  /// `nearestcap:k=<int>,R=<val>` or `full`. Throws std::invalid_argument.
  static StoppingSetSpec parse(std::string_view text);

  StoppingSetKind kind() const { return kind_; }
  /// Disk radius (Disk, NearestKCapped); 0 otherwise.
  double radius() const { return radius_; }
  /// Neighbour count (NearestK, NearestKCapped); 0 otherwise.
  int k() const { return k_; }

  /// True for sets that do not depend on the point pattern (Empty, Disk, FullPlane).
  bool is_deterministic() const;

  /// Canonical text encoding; parse(to_string()) round-trips.
  std::string to_string() const;

  friend bool operator==(const StoppingSetSpec&, const StoppingSetSpec&) = default;

 private:
  StoppingSetSpec(StoppingSetKind kind, double radius, int k)
      : kind_(kind), radius_(radius), k_(k) {}

  StoppingSetKind kind_ = StoppingSetKind::Empty;
  double radius_ = 0.0;
  int k_ = 0;
};

/// What one transmitter knows: exact b-coefficients of the receivers inside
/// its stopping set, and the radius of the centred ball whose complement is
/// treated through the mean receiver density (0 for Empty, +inf for FullPlane).
struct LocalView {
  std::vector<double> observed_b;  ///< ascending
  double outer_radius = 0.0;
};

/// k-th smallest distance from transmitter i to the receivers of the other
/// nodes (ties kept by multiplicity).
double kth_nearest_receiver_distance(std::size_t i, const NetworkRealization& net, int k);

/// Local view of transmitter i.
LocalView local_view(std::size_t i, const NetworkRealization& net, const StoppingSetSpec& spec,
                     const ModelParams& params);

/// Local view of a transmitter at `origin` given an explicit receiver list;
/// receiver `own_receiver` (if any) is excluded. Used for tagged-node
/// experiments with extra receivers.
LocalView local_view_from_receivers(Point origin, std::span<const Point> receivers,
                                    std::optional<std::size_t> own_receiver,
                                    const StoppingSetSpec& spec, const ModelParams& params);

}  // namespace saloha
