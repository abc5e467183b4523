#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aerosar/particle_filter.hpp"

namespace aerosar {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// Row-major RGB image patch (a detection crop).
struct Patch {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel binary foreground mask with the same extent as the patch.
struct PatchMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> foreground;  // nonzero = foreground

  bool at(int x, int y) const {
    return foreground[static_cast<std::size_t>(y) * width + x] != 0;
  }
  int foreground_count() const;
};

/// Hue-saturation histogram. Freshly computed histograms are normalized to
/// total mass 1; loaded histograms may carry other scalings, in which case
/// total tracks the actual bin sum (the Intersection self-mass).
struct ColorHistogram {
  Eigen::MatrixXd bins;  // hue_bins x sat_bins
  double total = 0.0;
  bool normalized = false;
};

inline constexpr int kDefaultHueBins = 30;
inline constexpr int kDefaultSatBins = 32;

/// Hue in [0, 360), saturation and value in [0, 1].
void rgb_to_hsv(const Rgb& c, double& hue, double& sat, double& val);

/// Hue-saturation histogram over the (masked) patch, normalized to sum 1.
/// Throws EmptyForeground when the mask leaves no pixels.
ColorHistogram histogram_of(const Patch& patch, const PatchMask* mask = nullptr,
                            int hue_bins = kDefaultHueBins, int sat_bins = kDefaultSatBins);

/// Centered ellipse with semi-axes ellipse_scale * (w/2, h/2) marked as
/// foreground; stands in for an external person/background segmentation.
PatchMask center_prior_mask(int width, int height, double ellipse_scale = 0.8);

enum class HistMetric { correlation, chi_square, intersection, bhattacharyya };

std::string to_string(HistMetric m);
HistMetric metric_from_string(const std::string& s);

/// Histogram similarity. Correlation is the Pearson correlation of the bin
/// vectors; Chi-square sums (a-b)^2/a over bins with a > 0; Intersection
/// sums min(a, b); Bhattacharyya is sqrt(1 - sum(sqrt(a*b)) /
/// sqrt(mean(a)*mean(b)*M^2)) with M the bin count. Throws LayoutMismatch.
double compare(const ColorHistogram& a, const ColorHistogram& b, HistMetric metric);

struct ReidConfig {
  double t_redetect = 1e-4;
  double sigmoid_scale = 0.25;   // a
  double sigmoid_center = 0.5;   // b; 0.5 * self-mass of a normalized histogram
  HistMetric metric = HistMetric::intersection;
  int max_reference_histograms = 5;
};

/// Map an Intersection similarity to a probability: 1/(1+exp(-(sim-b)/a)).
double appearance_prior(double sim, const ReidConfig& cfg);

/// One previously observed human: its id, particle filter, and the most
/// recent reference histograms.
struct HumanRecord {
  int human_id = 0;
  ParticleSet filter;
  std::vector<ColorHistogram> references;
  int last_frame = 0;
  double last_time = 0.0;
};

/// Gaussian likelihood of a position under the record's filter estimate,
/// covariance inflated by the measurement noise R = sigma_z^2 * I.
double spatial_likelihood(const Eigen::Vector2d& z, const HumanRecord& h, const PfConfig& cfg);

struct ReidObservation {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // UTM meters
  double time = 0.0;
  int frame = 0;
  std::optional<ColorHistogram> histogram;
};

/// The set of all humans seen so far. associate() implements the Bayes
/// decision: score every record with p(z|h_i) * p(h_i); below t_redetect for
/// all records a new human (with a fresh particle filter) is created,
/// otherwise the argmax record absorbs the observation.
class HumanRegistry {
 public:
  HumanRegistry(ReidConfig reid_cfg, PfConfig pf_cfg, std::uint64_t seed)
      : reid_cfg_(reid_cfg), pf_cfg_(pf_cfg), seed_(seed) {}

  /// Unnormalized scores p(z|h_i) * p(h_i), one per record. Advances every
  /// live filter to the observation time first.
  std::vector<double> scores(const ReidObservation& z);

  /// Returns the id the observation was associated with (possibly new).
  int associate(const ReidObservation& z);

  /// Feed an observation to a known identity (same track continuing).
  void update(int human_id, const ReidObservation& z);

  const std::vector<HumanRecord>& humans() const { return humans_; }
  const ReidConfig& reid_config() const { return reid_cfg_; }
  const PfConfig& pf_config() const { return pf_cfg_; }

 private:
  int create(const ReidObservation& z);
  void absorb(HumanRecord& h, const ReidObservation& z);
  void propagate_all(double time);
  double prior_of(const HumanRecord& h, const ReidObservation& z) const;

  ReidConfig reid_cfg_;
  PfConfig pf_cfg_;
  std::uint64_t seed_;
  std::vector<HumanRecord> humans_;
  int next_id_ = 1;
};

}  // namespace aerosar
