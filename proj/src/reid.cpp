#include "aerosar/reid.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aerosar/errors.hpp"

namespace aerosar {

int PatchMask::foreground_count() const {
  int count = 0;
  for (std::uint8_t f : foreground) count += f != 0;
  return count;
}

void rgb_to_hsv(const Rgb& c, double& hue, double& sat, double& val) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  const double delta = maxc - minc;
  val = maxc;
  sat = maxc > 0.0 ? delta / maxc : 0.0;
  if (delta <= 0.0) {
    hue = 0.0;
    return;
  }
  if (maxc == r) hue = 60.0 * std::fmod((g - b) / delta, 6.0);
  else if (maxc == g) hue = 60.0 * ((b - r) / delta + 2.0);
  else hue = 60.0 * ((r - g) / delta + 4.0);
  if (hue < 0.0) hue += 360.0;
}

ColorHistogram histogram_of(const Patch& patch, const PatchMask* mask, int hue_bins,
                            int sat_bins) {
  if (patch.width <= 0 || patch.height <= 0) throw EmptyForeground();
  ColorHistogram hist;
  hist.bins = Eigen::MatrixXd::Zero(hue_bins, sat_bins);
  long count = 0;
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      if (mask && !mask->at(x, y)) continue;
      double hue, sat, val;
      rgb_to_hsv(patch.at(x, y), hue, sat, val);
      const int hb = std::min(static_cast<int>(hue / 360.0 * hue_bins), hue_bins - 1);
      const int sb = std::min(static_cast<int>(sat * sat_bins), sat_bins - 1);
      hist.bins(hb, sb) += 1.0;
      ++count;
    }
  }
  if (count == 0) throw EmptyForeground();
  hist.bins /= static_cast<double>(count);
  hist.total = 1.0;
  hist.normalized = true;
  return hist;
}

PatchMask center_prior_mask(int width, int height, double ellipse_scale) {
  PatchMask mask;
  mask.width = width;
  mask.height = height;
  mask.foreground.assign(static_cast<std::size_t>(width) * height, 0);
  const double cx = 0.5 * width, cy = 0.5 * height;
  const double ax = ellipse_scale * 0.5 * width, ay = ellipse_scale * 0.5 * height;
  if (ax <= 0.0 || ay <= 0.0) return mask;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double nx = (x + 0.5 - cx) / ax;
      const double ny = (y + 0.5 - cy) / ay;
      if (nx * nx + ny * ny <= 1.0) {
        mask.foreground[static_cast<std::size_t>(y) * width + x] = 1;
      }
    }
  }
  return mask;
}

std::string to_string(HistMetric m) {
  switch (m) {
    case HistMetric::correlation: return "correlation";
    case HistMetric::chi_square: return "chi_square";
    case HistMetric::intersection: return "intersection";
    case HistMetric::bhattacharyya: return "bhattacharyya";
  }
  return "intersection";
}

HistMetric metric_from_string(const std::string& s) {
  if (s == "correlation") return HistMetric::correlation;
  if (s == "chi_square") return HistMetric::chi_square;
  if (s == "intersection") return HistMetric::intersection;
  if (s == "bhattacharyya") return HistMetric::bhattacharyya;
  throw SchemaError("metric", "unknown value '" + s + "'");
}

double compare(const ColorHistogram& a, const ColorHistogram& b, HistMetric metric) {
  if (a.bins.rows() != b.bins.rows() || a.bins.cols() != b.bins.cols()) {
    throw LayoutMismatch();
  }
  const auto av = a.bins.reshaped();
  const auto bv = b.bins.reshaped();
  const double m = static_cast<double>(av.size());

  switch (metric) {
    case HistMetric::correlation: {
      const double mean_a = av.mean(), mean_b = bv.mean();
      double num = 0.0, da = 0.0, db = 0.0;
      for (Eigen::Index i = 0; i < av.size(); ++i) {
        const double xa = av[i] - mean_a, xb = bv[i] - mean_b;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
      }
      const double denom = std::sqrt(da * db);
      if (denom <= 0.0) return (a.bins - b.bins).cwiseAbs().maxCoeff() == 0.0 ? 1.0 : 0.0;
      return num / denom;
    }
    case HistMetric::chi_square: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < av.size(); ++i) {
        if (av[i] > 0.0) {
          const double d = av[i] - bv[i];
          sum += d * d / av[i];
        }
      }
      return sum;
    }
    case HistMetric::intersection:
      return av.cwiseMin(bv).sum();
    case HistMetric::bhattacharyya: {
      double dot = 0.0;
      for (Eigen::Index i = 0; i < av.size(); ++i) dot += std::sqrt(av[i] * bv[i]);
      const double denom = std::sqrt(av.mean() * bv.mean() * m * m);
      if (denom <= 0.0) return 1.0;
      return std::sqrt(std::max(0.0, 1.0 - dot / denom));
    }
  }
  return 0.0;
}

double appearance_prior(double sim, const ReidConfig& cfg) {
  return 1.0 / (1.0 + std::exp(-(sim - cfg.sigmoid_center) / cfg.sigmoid_scale));
}

double spatial_likelihood(const Eigen::Vector2d& z, const HumanRecord& h, const PfConfig& cfg) {
  const PfEstimate est = pf_estimate(h.filter);
  const Eigen::Matrix2d sigma =
      est.covariance + cfg.sigma_z * cfg.sigma_z * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d d = z - est.mean;
  const double det = sigma.determinant();
  const double quad = d.dot(sigma.inverse() * d);
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double HumanRegistry::prior_of(const HumanRecord& h, const ReidObservation& z) const {
  if (!z.histogram || h.references.empty()) return 1.0;  // no appearance evidence
  double best = -std::numeric_limits<double>::infinity();
  for (const ColorHistogram& ref : h.references) {
    best = std::max(best, compare(*z.histogram, ref, reid_cfg_.metric));
  }
  return appearance_prior(best, reid_cfg_);
}

void HumanRegistry::propagate_all(double time) {
  for (HumanRecord& h : humans_) {
    const double dt = time - h.last_time;
    if (dt > 0.0) {
      h.filter = pf_propagate(h.filter, dt, pf_cfg_);
      h.last_time = time;
    }
  }
}

std::vector<double> HumanRegistry::scores(const ReidObservation& z) {
  propagate_all(z.time);
  std::vector<double> out;
  out.reserve(humans_.size());
  for (const HumanRecord& h : humans_) {
    out.push_back(spatial_likelihood(z.position, h, pf_cfg_) * prior_of(h, z));
  }
  return out;
}

int HumanRegistry::create(const ReidObservation& z) {
  HumanRecord h;
  h.human_id = next_id_++;
  h.filter = pf_init(z.position, pf_cfg_, derive_seed(seed_, h.human_id));
  h.last_frame = z.frame;
  h.last_time = z.time;
  if (z.histogram) h.references.push_back(*z.histogram);
  humans_.push_back(std::move(h));
  return humans_.back().human_id;
}

void HumanRegistry::absorb(HumanRecord& h, const ReidObservation& z) {
  const double dt = z.time - h.last_time;
  if (dt > 0.0) h.filter = pf_propagate(h.filter, dt, pf_cfg_);
  try {
    h.filter = pf_measure(h.filter, z.position, pf_cfg_);
    const bool resample = !pf_cfg_.resample_by_ess ||
                          effective_sample_size(h.filter) <
                              pf_cfg_.ess_fraction * h.filter.size();
    if (resample) h.filter = pf_resample(h.filter);
  } catch (const DegenerateWeights&) {
    // Filter diverged from its observations; restart it at the measurement.
    h.filter = pf_init(z.position, pf_cfg_, derive_seed(seed_, h.human_id * 7919 + z.frame));
  }
  h.last_frame = z.frame;
  h.last_time = z.time;
  if (z.histogram) {
    h.references.push_back(*z.histogram);
    const int max_refs = reid_cfg_.max_reference_histograms;
    if (static_cast<int>(h.references.size()) > max_refs) {
      h.references.erase(h.references.begin());
    }
  }
}

int HumanRegistry::associate(const ReidObservation& z) {
  const std::vector<double> s = scores(z);
  int best = -1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= reid_cfg_.t_redetect && (best < 0 || s[i] > s[best])) {
      best = static_cast<int>(i);  // ties keep the lower id
    }
  }
  if (best < 0) return create(z);
  absorb(humans_[best], z);
  return humans_[best].human_id;
}

void HumanRegistry::update(int human_id, const ReidObservation& z) {
  for (HumanRecord& h : humans_) {
    if (h.human_id == human_id) {
      absorb(h, z);
      return;
    }
  }
  throw Error("unknown human id " + std::to_string(human_id));
}

}  // namespace aerosar
