#include "scorescope/rdc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scorescope/error.hpp"

namespace scorescope {

namespace {

__extension__ typedef unsigned __int128 u128;

// [first, last] run of bins strictly inside (left_bin, right_bin) that contains
// `seed` and whose heights stay <= level.
std::pair<std::size_t, std::size_t> run_below(const std::vector<double>& h,
                                              std::size_t seed,
                                              std::size_t left_bin,
                                              std::size_t right_bin,
                                              double level) {
  std::size_t first = seed;
  std::size_t last = seed;
  while (first > left_bin + 1 && h[first - 1] <= level) --first;
  while (last + 1 < right_bin && h[last + 1] <= level) ++last;
  return {first, last};
}

}  // namespace

std::vector<double> Rdc::frequencies() const {
  std::vector<double> f(counts.size(), 0.0);
  if (n == 0) return f;
  const double total = static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    f[i] = static_cast<double>(counts[i]) / total;
  }
  return f;
}

RdcAccumulator::RdcAccumulator(std::size_t bin_count) {
  if (bin_count < 2) {
    throw PreconditionError("an RDC needs at least 2 bins");
  }
  rdc_.edges.resize(bin_count + 1);
  for (std::size_t i = 0; i <= bin_count; ++i) {
    rdc_.edges[i] = static_cast<double>(i) / static_cast<double>(bin_count);
  }
  rdc_.counts.assign(bin_count, 0);
}

std::size_t RdcAccumulator::bin_of(double score) const {
  const std::size_t bins = rdc_.counts.size();
  if (score >= 1.0) return bins - 1;
  auto idx = static_cast<std::size_t>(
      std::clamp(std::floor(score * static_cast<double>(bins)), 0.0,
                 static_cast<double>(bins - 1)));
  // Agree with the stored edges when score * bins rounds across a boundary.
  while (idx > 0 && score < rdc_.edges[idx]) --idx;
  while (idx + 1 < bins && score >= rdc_.edges[idx + 1]) ++idx;
  return idx;
}

void RdcAccumulator::add(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    std::ostringstream os;
    os << "score " << score << " outside [0, 1]";
    throw PreconditionError(os.str());
  }
  ++rdc_.counts[bin_of(score)];
  ++rdc_.n;
}

void RdcAccumulator::reset() {
  std::fill(rdc_.counts.begin(), rdc_.counts.end(), 0);
  rdc_.n = 0;
}

Rdc build_rdc(std::span<const double> scores, std::size_t bin_count) {
  if (scores.empty()) {
    throw PreconditionError("cannot build an RDC from zero scores");
  }
  RdcAccumulator acc(bin_count);
  for (double s : scores) acc.add(s);
  return acc.rdc();
}

std::vector<double> log_view(const Rdc& rdc) {
  std::vector<double> out(rdc.counts.size());
  std::transform(rdc.counts.begin(), rdc.counts.end(), out.begin(),
                 [](std::uint64_t c) { return std::log1p(static_cast<double>(c)); });
  return out;
}

SmoothedRdc smooth(const Rdc& rdc, std::size_t window) {
  const std::size_t bins = rdc.bin_count();
  if (window == 0 || window % 2 == 0 || window > bins) {
    throw PreconditionError("smoothing window must be odd and in [1, bin_count]");
  }
  if (rdc.n == 0) {
    throw PreconditionError("cannot smooth an empty RDC");
  }
  SmoothedRdc out;
  out.base = rdc;
  out.window = window;

  const auto f = rdc.frequencies();
  const std::size_t half = (window - 1) / 2;
  out.heights.resize(bins);
  double total = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(bins - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += f[j];
    out.heights[i] = sum / static_cast<double>(hi - lo + 1);
    total += out.heights[i];
  }
  for (auto& h : out.heights) h /= total;

  double roughness = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    roughness += std::fabs(f[i] - out.heights[i]);
  }
  out.roughness = roughness;
  return out;
}

Valley valley_between(const SmoothedRdc& smoothed, const Mode& left,
                      const Mode& right) {
  const auto& h = smoothed.heights;
  if (right.bin_index <= left.bin_index + 1) {
    throw PreconditionError("modes must be separated by at least one bin");
  }
  std::size_t first_min = left.bin_index + 1;
  for (std::size_t i = left.bin_index + 1; i < right.bin_index; ++i) {
    if (h[i] < h[first_min]) first_min = i;
  }
  // Centre of the lowest run so that flat floors resolve deterministically.
  std::size_t last_min = first_min;
  while (last_min + 1 < right.bin_index && h[last_min + 1] == h[first_min]) {
    ++last_min;
  }
  Valley v;
  v.min_bin = first_min + (last_min - first_min) / 2;
  v.min_height = h[v.min_bin];
  v.depth = std::max(0.0, std::min(left.height, right.height) - v.min_height);
  const auto [first, last] = run_below(h, v.min_bin, left.bin_index,
                                       right.bin_index,
                                       v.min_height + 0.5 * v.depth);
  v.lo = smoothed.base.edges[first];
  v.hi = smoothed.base.edges[last + 1];
  return v;
}

ModeSet detect_modes(const SmoothedRdc& smoothed, double prominence_min) {
  const auto& h = smoothed.heights;
  const std::size_t bins = h.size();
  ModeSet out;
  if (bins == 0) return out;
  const double max_height = *std::max_element(h.begin(), h.end());

  struct Candidate {
    std::size_t start, end, peak;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < bins;) {
    std::size_t e = s;
    while (e + 1 < bins && h[e + 1] == h[s]) ++e;
    const bool rises = s == 0 || h[s - 1] < h[s];
    const bool falls = e == bins - 1 || h[e + 1] < h[e];
    if (rises && falls) candidates.push_back({s, e, s + (e - s) / 2});
    s = e + 1;
  }

  for (const auto& c : candidates) {
    const double height = h[c.peak];
    std::optional<double> left_base;
    std::optional<double> right_base;
    if (c.start > 0) {
      double m = height;
      for (std::size_t j = c.start; j-- > 0;) {
        if (h[j] > height) break;
        m = std::min(m, h[j]);
      }
      left_base = m;
    }
    if (c.end + 1 < bins) {
      double m = height;
      for (std::size_t j = c.end + 1; j < bins; ++j) {
        if (h[j] > height) break;
        m = std::min(m, h[j]);
      }
      right_base = m;
    }
    double base = 0.0;
    if (left_base && right_base) {
      base = std::max(*left_base, *right_base);
    } else if (left_base) {
      base = *left_base;
    } else if (right_base) {
      base = *right_base;
    }
    const double prominence = height - base;
    if (prominence >= prominence_min * max_height && prominence > 0.0) {
      Mode m;
      m.bin_index = c.peak;
      m.location = smoothed.base.bin_center(c.peak);
      m.height = height;
      m.prominence = prominence;
      out.modes.push_back(m);
    }
  }

  for (std::size_t k = 0; k + 1 < out.modes.size(); ++k) {
    Valley v = valley_between(smoothed, out.modes[k], out.modes[k + 1]);
    v.left_mode = k;
    v.right_mode = k + 1;
    out.valleys.push_back(v);
  }

  // Basin masses: each valley bin is shared equally by its two neighbours.
  for (std::size_t k = 0; k < out.modes.size(); ++k) {
    const std::size_t lo = k == 0 ? 0 : out.valleys[k - 1].min_bin;
    const std::size_t hi =
        k + 1 == out.modes.size() ? bins - 1 : out.valleys[k].min_bin;
    double mass = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) mass += h[i];
    if (k > 0) mass -= 0.5 * h[lo];
    if (k + 1 < out.modes.size()) mass -= 0.5 * h[hi];
    out.modes[k].mass = mass;
  }
  return out;
}

ThresholdBand recommend_threshold(const SmoothedRdc& smoothed,
                                  const ModeSet& modes, double band_epsilon) {
  if (modes.modes.size() != 2) {
    throw PreconditionError("a threshold band needs exactly two modes, found " +
                            std::to_string(modes.modes.size()));
  }
  const Mode& left = modes.modes[0];
  const Mode& right = modes.modes[1];
  const Valley v = valley_between(smoothed, left, right);
  const auto [first, last] =
      run_below(smoothed.heights, v.min_bin, left.bin_index, right.bin_index,
                (1.0 + band_epsilon) * v.min_height);
  ThresholdBand band;
  band.lower = smoothed.base.edges[first];
  band.upper = smoothed.base.edges[last + 1];
  band.recommended = 0.5 * (band.lower + band.upper);
  return band;
}

std::string_view to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::kHealthyBimodal: return "HEALTHY_BIMODAL";
    case Pattern::kCentralUnimodal: return "CENTRAL_UNIMODAL";
    case Pattern::kExtremeSpike: return "EXTREME_SPIKE";
    case Pattern::kNoisy: return "NOISY";
    case Pattern::kIndeterminate: return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

std::optional<Pattern> pattern_from_string(std::string_view name) {
  for (auto p : {Pattern::kHealthyBimodal, Pattern::kCentralUnimodal,
                 Pattern::kExtremeSpike, Pattern::kNoisy, Pattern::kIndeterminate}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

void RdcConfig::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError(what); };
  if (bins < 2) fail("bins must be >= 2");
  if (window == 0 || window % 2 == 0 || window > bins) {
    fail("window must be odd and <= bins");
  }
  if (!(prominence_min >= 0.0 && prominence_min <= 1.0)) {
    fail("prominence_min must lie in [0, 1]");
  }
  if (min_samples == 0) fail("min_samples must be positive");
  if (!(spike_share > 0.0 && spike_share <= 1.0)) fail("spike_share must lie in (0, 1]");
  if (!(spike_second_mode_mass >= 0.0 && spike_second_mode_mass <= 1.0)) {
    fail("spike_second_mode_mass must lie in [0, 1]");
  }
  if (!(roughness_max >= 0.0)) fail("roughness_max must be >= 0");
  if (!(central_lo >= 0.0 && central_lo < central_hi && central_hi <= 1.0)) {
    fail("central region must satisfy 0 <= central_lo < central_hi <= 1");
  }
  if (!(valley_depth_floor >= 0.0 && valley_depth_floor <= 1.0)) {
    fail("valley_depth_floor must lie in [0, 1]");
  }
  if (!(band_epsilon >= 0.0)) fail("band_epsilon must be >= 0");
}

RdcDiagnosis diagnose(const Rdc& rdc, const RdcConfig& config) {
  config.validate();
  if (rdc.n < config.min_samples) {
    throw PreconditionError("RDC has " + std::to_string(rdc.n) +
                            " samples; diagnosis needs at least " +
                            std::to_string(config.min_samples));
  }
  const SmoothedRdc smoothed = smooth(rdc, config.window);

  RdcDiagnosis d;
  Evidence& ev = d.evidence;
  ev.roughness = smoothed.roughness;
  ev.modes = detect_modes(smoothed, config.prominence_min);
  const auto spike_it = std::max_element(rdc.counts.begin(), rdc.counts.end());
  ev.spike_bin = static_cast<std::size_t>(spike_it - rdc.counts.begin());
  ev.spike_share = static_cast<double>(*spike_it) / static_cast<double>(rdc.n);
  const auto& modes = ev.modes.modes;

  if (ev.spike_share >= config.spike_share) {
    // The mode closest to the spike is the spike itself; any other mode with
    // real mass means a second population, i.e. not a lone spike.
    std::size_t own = 0;
    for (std::size_t k = 1; k < modes.size(); ++k) {
      const auto dist = [&](std::size_t i) {
        const auto b = modes[i].bin_index;
        return b > ev.spike_bin ? b - ev.spike_bin : ev.spike_bin - b;
      };
      if (dist(k) < dist(own)) own = k;
    }
    bool second = false;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (k != own && modes[k].mass >= config.spike_second_mode_mass) second = true;
    }
    if (!second) {
      d.pattern = Pattern::kExtremeSpike;
      ev.rule = "extreme_spike";
      return d;
    }
  }

  if (ev.roughness > config.roughness_max) {
    d.pattern = Pattern::kNoisy;
    ev.rule = "roughness";
    return d;
  }

  if (modes.size() >= 2) {
    std::vector<std::size_t> order(modes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return modes[a].mass > modes[b].mass;
    });
    std::size_t left = std::min(order[0], order[1]);
    std::size_t right = std::max(order[0], order[1]);
    ev.primary_modes = {left, right};
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (k != left && k != right) ev.extra_modes.push_back(k);
    }
    Valley v = valley_between(smoothed, modes[left], modes[right]);
    v.left_mode = left;
    v.right_mode = right;
    ev.valley = v;
    const double lower_peak = std::min(modes[left].height, modes[right].height);
    if (v.depth >= config.valley_depth_floor * lower_peak && v.depth > 0.0) {
      ModeSet pair;
      pair.modes = {modes[left], modes[right]};
      pair.valleys = {v};
      d.threshold_band = recommend_threshold(smoothed, pair, config.band_epsilon);
      d.pattern = Pattern::kHealthyBimodal;
      ev.rule = "bimodal_valley";
      return d;
    }
  }

  if (modes.size() == 1 && modes[0].location >= config.central_lo &&
      modes[0].location <= config.central_hi) {
    d.pattern = Pattern::kCentralUnimodal;
    ev.rule = "central_mode";
    return d;
  }

  d.pattern = Pattern::kIndeterminate;
  ev.rule = "no_rule_matched";
  return d;
}

std::map<std::string, Rdc> one_vs_rest(std::span<const ScoreRecord> records,
                                       std::size_t bin_count) {
  std::map<std::string, RdcAccumulator> acc;
  for (const auto& r : records) {
    if (!r.class_label) {
      throw InputError("record for model '" + r.model_id + "' at ts " +
                       std::to_string(r.ts) + " has no class label");
    }
    acc.try_emplace(*r.class_label, bin_count).first->second.add(r.score);
  }
  std::map<std::string, Rdc> out;
  for (const auto& [label, a] : acc) out.emplace(label, a.rdc());
  return out;
}

double rdc_distance(const Rdc& a, const Rdc& b) {
  if (a.bin_count() != b.bin_count() || a.edges != b.edges) {
    throw PreconditionError("RDCs use incompatible binning");
  }
  if (a.n == 0 || b.n == 0) {
    throw PreconditionError("distance is undefined for an empty RDC");
  }
  // Integer cross-multiplication keeps identity and disjointness exact.
  u128 sum = 0;
  for (std::size_t i = 0; i < a.bin_count(); ++i) {
    const u128 x = static_cast<u128>(a.counts[i]) * b.n;
    const u128 y = static_cast<u128>(b.counts[i]) * a.n;
    sum += x > y ? x - y : y - x;
  }
  const long double denom =
      2.0L * static_cast<long double>(a.n) * static_cast<long double>(b.n);
  return static_cast<double>(static_cast<long double>(sum) / denom);
}

}  // namespace scorescope
