// Feature enumeration, evaluation, partitions and rendering.

#include "musrover/features.h"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "musrover/error.h"

namespace musrover {

namespace {

constexpr std::array<std::string_view, kVoiceCount> kVoiceNames = {"soprano", "alto",
                                                                   "tenor", "bass"};
constexpr std::array<std::string_view, 12> kIntervalClassLabels = {
    "P1/P8", "m2", "M2", "m3", "M3", "P4", "TT", "P5", "m6", "M6", "m7", "M7"};
constexpr std::array<std::string_view, 12> kPitchClassNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

int mod12(int x) { return ((x % 12) + 12) % 12; }

int sign(int x) { return (x > 0) - (x < 0); }

std::string voiceList(const Window& w) {
  const auto& v = w.voices();
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += (i + 1 == v.size()) ? " and " : ", ";
    out += kVoiceNames[v[i] - 1];
  }
  return out;
}

std::string noteName(int midi) {
  return fmt::format("{}{}", kPitchClassNames[mod12(midi)], midi / 12 - 1);
}

}  // namespace

std::string_view descriptorName(Descriptor d) {
  switch (d) {
    case Descriptor::kPitch: return "pitch";
    case Descriptor::kPitch12: return "pitch12";
    case Descriptor::kInterv: return "interv";
    case Descriptor::kInterv12: return "interv12";
    case Descriptor::kOrder: return "order";
  }
  return "?";
}

int minWindowSize(Descriptor d) {
  return (d == Descriptor::kPitch || d == Descriptor::kPitch12) ? 1 : 2;
}

Window::Window(std::vector<int> voices) : voices_(std::move(voices)) {
  if (voices_.empty()) throw DataError("window must select at least one voice");
  for (std::size_t i = 0; i < voices_.size(); ++i) {
    if (voices_[i] < 1 || voices_[i] > kVoiceCount) {
      throw DataError(fmt::format("voice {} out of range 1..4", voices_[i]));
    }
    if (i > 0 && voices_[i] == voices_[i - 1]) {
      throw DataError(fmt::format("duplicate voice {}", voices_[i]));
    }
    if (i > 0 && voices_[i] < voices_[i - 1]) {
      throw DataError("window voices must be ascending");
    }
  }
}

const std::vector<Window>& allWindows() {
  static const std::vector<Window> windows = [] {
    std::vector<Window> out;
    for (unsigned mask = 1; mask < (1u << kVoiceCount); ++mask) {
      std::vector<int> v;
      for (int i = 0; i < kVoiceCount; ++i) {
        if (mask & (1u << i)) v.push_back(i + 1);
      }
      out.emplace_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return windows;
}

std::string Feature::str() const {
  std::string out{descriptorName(descriptor)};
  out += '@';
  for (std::size_t i = 0; i < window.voices().size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(window.voices()[i]);
  }
  return out;
}

bool Feature::isRaw() const {
  return descriptor == Descriptor::kPitch && window.size() == kVoiceCount;
}

Feature rawFeature() { return {Descriptor::kPitch, Window({1, 2, 3, 4})}; }

const std::vector<Feature>& enumerateFeatures() {
  static const std::vector<Feature> features = [] {
    std::vector<Feature> out;
    for (Descriptor d : kDescriptors) {
      for (const Window& w : allWindows()) {
        if (w.size() >= minWindowSize(d)) out.push_back({d, w});
      }
    }
    return out;
  }();
  return features;
}

std::size_t featureIndex(const Feature& f) {
  const auto& all = enumerateFeatures();
  auto it = std::find(all.begin(), all.end(), f);
  if (it == all.end()) throw DataError("feature '" + f.str() + "' is not in the universe");
  return static_cast<std::size_t>(it - all.begin());
}

FeatureValue applyFeature(const Feature& f, const Sonority& s) {
  const auto& voices = f.window.voices();
  FeatureValue value;
  value.kind = f.descriptor;
  const int m = static_cast<int>(voices.size());
  auto q = [&](int j) { return s[voices[j] - 1]; };
  switch (f.descriptor) {
    case Descriptor::kPitch:
      for (int j = 0; j < m; ++j) value.data[j] = q(j);
      value.size = static_cast<std::uint8_t>(m);
      break;
    case Descriptor::kPitch12:
      for (int j = 0; j < m; ++j) value.data[j] = mod12(q(j));
      value.size = static_cast<std::uint8_t>(m);
      break;
    case Descriptor::kInterv:
      for (int j = 0; j + 1 < m; ++j) value.data[j] = q(j) - q(j + 1);
      value.size = static_cast<std::uint8_t>(m - 1);
      break;
    case Descriptor::kInterv12:
      for (int j = 0; j + 1 < m; ++j) value.data[j] = mod12(q(j) - q(j + 1));
      value.size = static_cast<std::uint8_t>(m - 1);
      break;
    case Descriptor::kOrder:
      for (int j = 0; j + 1 < m; ++j) value.data[j] = sign(q(j) - q(j + 1));
      value.size = static_cast<std::uint8_t>(m - 1);
      break;
  }
  return value;
}

std::string_view intervalClassLabel(int ic) { return kIntervalClassLabels[mod12(ic)]; }

std::string valueLabel(const FeatureValue& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size; ++i) {
    if (i > 0) out += ' ';
    int x = v.data[i];
    switch (v.kind) {
      case Descriptor::kPitch: out += noteName(x); break;
      case Descriptor::kPitch12: out += kPitchClassNames[mod12(x)]; break;
      case Descriptor::kInterv: out += std::to_string(x); break;
      case Descriptor::kInterv12: out += intervalClassLabel(x); break;
      case Descriptor::kOrder: out += x > 0 ? "+" : (x < 0 ? "-" : "0"); break;
    }
  }
  return out;
}

std::string describeFeature(const Feature& f) {
  const bool single = f.window.size() == 1;
  const bool pair = f.window.size() == 2;
  const std::string voices = voiceList(f.window);
  switch (f.descriptor) {
    case Descriptor::kPitch:
      return single ? "pitch of the " + voices : "pitches of " + voices;
    case Descriptor::kPitch12:
      return single ? "pitch class of the " + voices : "pitch classes of " + voices;
    case Descriptor::kInterv:
      return pair ? "interval (semitone distance) between " + voices
                  : "intervals (semitone distance) between adjacent voices of " + voices;
    case Descriptor::kInterv12:
      return pair ? "interval class (semitone distance mod 12) between " + voices
                  : "interval classes (semitone distance mod 12) between adjacent voices of " +
                        voices;
    case Descriptor::kOrder:
      if (pair) {
        return fmt::format("relative ordering (above/equal/below) of {} vs {}",
                           kVoiceNames[f.window.voices()[0] - 1],
                           kVoiceNames[f.window.voices()[1] - 1]);
      }
      return "relative ordering (above/equal/below) of adjacent voices of " + voices;
  }
  return f.str();
}

Feature parseFeature(std::string_view text) {
  auto at = text.find('@');
  if (at == std::string_view::npos) {
    throw DataError(fmt::format("feature '{}' must look like <descriptor>@<voices>", text));
  }
  std::string_view name = text.substr(0, at);
  std::string_view rest = text.substr(at + 1);
  const Descriptor* found = nullptr;
  for (const Descriptor& d : kDescriptors) {
    if (descriptorName(d) == name) found = &d;
  }
  if (found == nullptr) throw DataError(fmt::format("unknown descriptor '{}'", name));

  std::vector<int> voices;
  while (true) {
    auto comma = rest.find(',');
    std::string_view token = rest.substr(0, comma);
    int v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw DataError(fmt::format("bad voice index '{}' in feature '{}'", token, text));
    }
    voices.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  Feature f{*found, Window(std::move(voices))};
  if (f.window.size() < minWindowSize(f.descriptor)) {
    throw DataError(fmt::format("descriptor '{}' needs at least {} voices", name,
                                minWindowSize(f.descriptor)));
  }
  return f;
}

Partition::Partition(const Feature& f, const Omega& omega)
    : feature_(f), omega_size_(omega.size()) {
  const auto& voices = f.window.voices();
  const std::size_t m = voices.size();
  omega_strides_.resize(m);
  radices_.resize(m);
  window_strides_.resize(m);
  std::size_t sub = 1;
  for (std::size_t i = m; i-- > 0;) {
    omega_strides_[i] = omega.stride(voices[i] - 1);
    radices_[i] = static_cast<std::size_t>(omega.range(voices[i] - 1).size());
    window_strides_[i] = sub;
    sub *= radices_[i];
  }

  std::vector<FeatureValue> raw_values(sub);
  for (std::size_t j = 0; j < sub; ++j) {
    Sonority s{};
    for (int v = 0; v < kVoiceCount; ++v) s[v] = omega.range(v).lo;
    for (std::size_t i = 0; i < m; ++i) {
      s[voices[i] - 1] += static_cast<int>((j / window_strides_[i]) % radices_[i]);
    }
    raw_values[j] = applyFeature(f, s);
  }
  values_ = raw_values;
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());

  window_cells_.resize(sub);
  cell_sizes_.assign(values_.size(), 0);
  const std::size_t fiber = omega_size_ / sub;
  for (std::size_t j = 0; j < sub; ++j) {
    auto it = std::lower_bound(values_.begin(), values_.end(), raw_values[j]);
    auto cell = static_cast<std::int32_t>(it - values_.begin());
    window_cells_[j] = cell;
    cell_sizes_[cell] += fiber;
  }
}

std::size_t Partition::windowIndex(std::size_t omega_index) const {
  std::size_t j = 0;
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    j += ((omega_index / omega_strides_[i]) % radices_[i]) * window_strides_[i];
  }
  return j;
}

std::int32_t Partition::cellOf(std::size_t omega_index) const {
  return window_cells_[windowIndex(omega_index)];
}

std::vector<std::int32_t> Partition::materialize() const {
  std::vector<std::int32_t> cells(omega_size_);
  for (std::size_t x = 0; x < omega_size_; ++x) cells[x] = cellOf(x);
  return cells;
}

std::int64_t Partition::indexOf(const FeatureValue& v) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), v);
  if (it == values_.end() || *it != v) return -1;
  return it - values_.begin();
}

std::vector<double> pushforward(std::span<const double> p, const Partition& partition) {
  std::vector<double> out(partition.cellCount(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) out[partition.cellOf(x)] += p[x];
  return out;
}

std::vector<double> pushforward(std::span<const double> p,
                                std::span<const std::int32_t> cell_of,
                                std::size_t cell_count) {
  std::vector<double> out(cell_count, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) out[cell_of[x]] += p[x];
  return out;
}

FeatureSpace::FeatureSpace(Omega omega)
    : omega_(std::move(omega)),
      partitions_(enumerateFeatures().size()),
      cells_(enumerateFeatures().size()) {}

const Partition& FeatureSpace::partition(std::size_t feature_index) const {
  auto& slot = partitions_.at(feature_index);
  if (!slot) slot = std::make_unique<Partition>(enumerateFeatures()[feature_index], omega_);
  return *slot;
}

const Partition& FeatureSpace::partition(const Feature& f) const {
  return partition(featureIndex(f));
}

std::span<const std::int32_t> FeatureSpace::cellsOf(std::size_t feature_index) const {
  auto& cells = cells_.at(feature_index);
  if (cells.empty() && omega_.size() > 0) cells = partition(feature_index).materialize();
  return cells;
}

std::vector<double> FeatureSpace::pushforward(std::span<const double> p,
                                              std::size_t feature_index) const {
  return musrover::pushforward(p, cellsOf(feature_index),
                               partition(feature_index).cellCount());
}

}  // namespace musrover
