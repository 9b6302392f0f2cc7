// The feature universe: descriptors composed with voice-selection windows.

#ifndef MUSROVER_FEATURES_H
#define MUSROVER_FEATURES_H

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musrover/corpus.h"

namespace musrover {

enum class Descriptor : std::uint8_t { kPitch, kPitch12, kInterv, kInterv12, kOrder };

inline constexpr std::array<Descriptor, 5> kDescriptors = {
    Descriptor::kPitch, Descriptor::kPitch12, Descriptor::kInterv,
    Descriptor::kInterv12, Descriptor::kOrder};

std::string_view descriptorName(Descriptor d);
int minWindowSize(Descriptor d);

/// Nonempty ascending subset of the voices, stored as 1-based indices.
class Window {
 public:
  Window() = default;
  /// Throws DataError unless voices is nonempty, ascending and within 1..4.
  explicit Window(std::vector<int> voices);

  const std::vector<int>& voices() const { return voices_; }
  int size() const { return static_cast<int>(voices_.size()); }

  auto operator<=>(const Window&) const = default;
  bool operator==(const Window&) const = default;

 private:
  std::vector<int> voices_;
};

/// All 15 nonempty windows in lexicographic order.
const std::vector<Window>& allWindows();

struct Feature {
  Descriptor descriptor = Descriptor::kPitch;
  Window window;

  /// Canonical address, e.g. "interv12@1,4".
  std::string str() const;
  bool isRaw() const;

  bool operator==(const Feature&) const = default;
};

/// pitch@1,2,3,4: the identity feature on the raw space.
Feature rawFeature();

/// Value of a feature on one sonority. Only the first `size` entries of data
/// are meaningful; order values hold signs in {-1, 0, +1}.
struct FeatureValue {
  Descriptor kind = Descriptor::kPitch;
  std::uint8_t size = 0;
  std::array<int, kVoiceCount> data{};

  std::span<const int> values() const { return {data.data(), size}; }
  auto operator<=>(const FeatureValue&) const = default;
  bool operator==(const FeatureValue&) const = default;
};

/// The 63 features in canonical order: descriptor (pitch, pitch12, interv,
/// interv12, order), then window in lexicographic order.
const std::vector<Feature>& enumerateFeatures();

/// Position of f in enumerateFeatures().
std::size_t featureIndex(const Feature& f);

FeatureValue applyFeature(const Feature& f, const Sonority& s);

/// Short label for one value, e.g. "TT" for interval class 6.
std::string valueLabel(const FeatureValue& v);

/// Interval-class label: 0 "P1/P8", 1 "m2", ..., 11 "M7".
std::string_view intervalClassLabel(int ic);

std::string describeFeature(const Feature& f);

/// Parses "<descriptor>@<v1,v2,...>"; throws DataError on bad input.
Feature parseFeature(std::string_view text);

/// Preimage structure of a feature over omega.
///
/// The feature only reads the window voices, so the cell of a sonority is
/// looked up from its coordinates in the window sub-product.
class Partition {
 public:
  Partition(const Feature& f, const Omega& omega);

  const Feature& feature() const { return feature_; }
  /// Realizable values, sorted ascending; cell i holds values()[i].
  const std::vector<FeatureValue>& values() const { return values_; }
  std::size_t cellCount() const { return values_.size(); }
  /// Number of omega elements in each cell.
  const std::vector<std::size_t>& cellSizes() const { return cell_sizes_; }
  std::size_t omegaSize() const { return omega_size_; }

  std::int32_t cellOf(std::size_t omega_index) const;
  /// Cell index for every omega element.
  std::vector<std::int32_t> materialize() const;
  /// Index of v in values(), or -1 if v is not realizable.
  std::int64_t indexOf(const FeatureValue& v) const;

 private:
  std::size_t windowIndex(std::size_t omega_index) const;

  Feature feature_;
  std::size_t omega_size_ = 0;
  std::vector<FeatureValue> values_;
  std::vector<std::size_t> cell_sizes_;
  std::vector<std::int32_t> window_cells_;
  // Per window voice: omega stride, range size and window sub-product stride.
  std::vector<std::size_t> omega_strides_;
  std::vector<std::size_t> radices_;
  std::vector<std::size_t> window_strides_;
};

/// Mass of each cell under p (p indexed by omega).
std::vector<double> pushforward(std::span<const double> p, const Partition& partition);
std::vector<double> pushforward(std::span<const double> p,
                                std::span<const std::int32_t> cell_of,
                                std::size_t cell_count);

/// Lazily built partitions and cell arrays for all 63 features over one omega.
/// Not thread-safe: caches fill on first access.
class FeatureSpace {
 public:
  explicit FeatureSpace(Omega omega);

  const Omega& omega() const { return omega_; }
  const Partition& partition(const Feature& f) const;
  const Partition& partition(std::size_t feature_index) const;
  std::span<const std::int32_t> cellsOf(std::size_t feature_index) const;
  std::vector<double> pushforward(std::span<const double> p, std::size_t feature_index) const;

 private:
  Omega omega_;
  mutable std::vector<std::unique_ptr<Partition>> partitions_;
  mutable std::vector<std::vector<std::int32_t>> cells_;
};

}  // namespace musrover

#endif  // MUSROVER_FEATURES_H
