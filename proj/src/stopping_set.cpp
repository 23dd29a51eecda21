#include "saloha/stopping_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace saloha {

namespace {

std::invalid_argument spec_error(std::string_view text, const std::string& why) {
  return std::invalid_argument("invalid stopping set '" + std::string(text) + "': " + why);
}

double parse_double(std::string_view text, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw spec_error(text, "malformed number '" + std::string(value) + "'");
  }
  return out;
}

int parse_int(std::string_view text, std::string_view value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw spec_error(text, "malformed integer '" + std::string(value) + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Splits "k=2,R=5" into key/value pairs.
std::vector<std::pair<std::string_view, std::string_view>> parse_fields(std::string_view text,
                                                                        std::string_view body) {
  std::vector<std::pair<std::string_view, std::string_view>> fields;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw spec_error(text, "expected key=value");
    fields.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return fields;
}

struct Candidate {
  double d2;
  std::size_t index;
};

bool closer(const Candidate& a, const Candidate& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

}  // namespace

StoppingSetSpec StoppingSetSpec::empty() { return {StoppingSetKind::Empty, 0.0, 0}; }

StoppingSetSpec StoppingSetSpec::disk(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("StoppingSetSpec::disk: R must be finite and > 0");
  }
  return {StoppingSetKind::Disk, radius, 0};
}

StoppingSetSpec StoppingSetSpec::nearest(int k) {
  if (k < 1) throw std::invalid_argument("StoppingSetSpec::nearest: k must be >= 1");
  return {StoppingSetKind::NearestK, 0.0, k};
}

StoppingSetSpec StoppingSetSpec::nearest_capped(int k, double radius) {
  if (k < 1) throw std::invalid_argument("StoppingSetSpec::nearest_capped: k must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("StoppingSetSpec::nearest_capped: R must be finite and > 0");
  }
  return {StoppingSetKind::NearestKCapped, radius, k};
}

StoppingSetSpec StoppingSetSpec::full_plane() { return {StoppingSetKind::FullPlane, 0.0, 0}; }

StoppingSetSpec StoppingSetSpec::parse(std::string_view text) {
  if (text == "empty") return empty();
  if (text == "full") return full_plane();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw spec_error(text, "unknown kind");
  const std::string_view kind = text.substr(0, colon);
  const auto fields = parse_fields(text, text.substr(colon + 1));

  std::optional<double> radius;
  std::optional<int> k;
  for (const auto& [key, value] : fields) {
    if (key == "R") {
      if (radius) throw spec_error(text, "duplicate R");
      radius = parse_double(text, value);
    } else if (key == "k") {
      if (k) throw spec_error(text, "duplicate k");
      k = parse_int(text, value);
    } else {
      throw spec_error(text, "unknown field '" + std::string(key) + "'");
    }
  }
  try {
    if (kind == "disk" && radius && !k) return disk(*radius);
    if (kind == "nearest" && k && !radius) return nearest(*k);
    if (kind == "nearestcap" && k && radius) return nearest_capped(*k, *radius);
  } catch (const std::invalid_argument& e) {
    throw spec_error(text, e.what());
  }
  throw spec_error(text, "unknown kind or wrong fields for kind");
}

bool StoppingSetSpec::is_deterministic() const {
  return kind_ == StoppingSetKind::Empty || kind_ == StoppingSetKind::Disk ||
         kind_ == StoppingSetKind::FullPlane;
}

std::string StoppingSetSpec::to_string() const {
  switch (kind_) {
    case StoppingSetKind::Empty:
      return "empty";
    case StoppingSetKind::Disk:
      return "disk:R=" + format_double(radius_);
    case StoppingSetKind::NearestK:
      return "nearest:k=" + std::to_string(k_);
    case StoppingSetKind::NearestKCapped:
      return "nearestcap:k=" + std::to_string(k_) + ",R=" + format_double(radius_);
    case StoppingSetKind::FullPlane:
      return "full";
  }
  return {};
}

double kth_nearest_receiver_distance(std::size_t i, const NetworkRealization& net, int k) {
  if (i >= net.size()) throw std::out_of_range("kth_nearest_receiver_distance: bad node index");
  if (k < 1) throw std::invalid_argument("kth_nearest_receiver_distance: k must be >= 1");
  if (net.size() < static_cast<std::size_t>(k) + 1) {
    throw std::invalid_argument("kth_nearest_receiver_distance: fewer than k other receivers");
  }
  const Point origin = net.transmitters()[i];
  std::vector<double> d2;
  d2.reserve(net.size() - 1);
  const auto rx = net.receivers();
  for (std::size_t j = 0; j < rx.size(); ++j) {
    if (j != i) d2.push_back(squared_distance(origin, rx[j]));
  }
  std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
  return std::sqrt(d2[k - 1]);
}

LocalView local_view_from_receivers(Point origin, std::span<const Point> receivers,
                                    std::optional<std::size_t> own_receiver,
                                    const StoppingSetSpec& spec, const ModelParams& params) {
  LocalView view;
  if (spec.kind() == StoppingSetKind::Empty) return view;

  std::vector<Candidate> cand;
  cand.reserve(receivers.size());
  const double r2_cap = spec.radius() * spec.radius();
  const bool capped =
      spec.kind() == StoppingSetKind::Disk || spec.kind() == StoppingSetKind::NearestKCapped;
  for (std::size_t j = 0; j < receivers.size(); ++j) {
    if (own_receiver && *own_receiver == j) continue;
    const double d2 = squared_distance(origin, receivers[j]);
    if (capped && !(d2 < r2_cap)) continue;
    cand.push_back({d2, j});
  }

  std::size_t keep = cand.size();
  switch (spec.kind()) {
    case StoppingSetKind::Disk:
      view.outer_radius = spec.radius();
      break;
    case StoppingSetKind::FullPlane:
      view.outer_radius = std::numeric_limits<double>::infinity();
      break;
    case StoppingSetKind::NearestK: {
      const auto k = static_cast<std::size_t>(spec.k());
      if (cand.size() < k) {
        throw std::invalid_argument("local_view: fewer than k = " + std::to_string(k) +
                                    " other receivers");
      }
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), closer);
      keep = k;
      view.outer_radius = std::sqrt(cand[k - 1].d2);
      break;
    }
    case StoppingSetKind::NearestKCapped: {
      const auto k = static_cast<std::size_t>(spec.k());
      if (cand.size() >= k) {
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), closer);
        keep = k;
        view.outer_radius = std::sqrt(cand[k - 1].d2);
      } else {
        view.outer_radius = spec.radius();
      }
      break;
    }
    case StoppingSetKind::Empty:
      break;
  }
  if (keep == 0) return view;
  if (keep < cand.size()) cand.resize(keep);
  std::sort(cand.begin(), cand.end(), closer);
  view.observed_b.reserve(cand.size());
  for (const Candidate& c : cand) {
    if (c.d2 == 0.0) throw std::domain_error("local_view: receiver coincides with transmitter");
    view.observed_b.push_back(b_from_squared_distance(c.d2, params));
  }
  return view;
}

LocalView local_view(std::size_t i, const NetworkRealization& net, const StoppingSetSpec& spec,
                     const ModelParams& params) {
  if (i >= net.size()) throw std::out_of_range("local_view: bad node index");
  return local_view_from_receivers(net.transmitters()[i], net.receivers(), i, spec, params);
}

}  // namespace saloha
