#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenred/model.hpp"

namespace scenred {

/// Result of a "cover every target by a scaled convex combination" check.
struct CoverFactor {
  double factor = 0.0;               // max over targets, +inf if any fails
  std::vector<double> per_target;    // individual factors
  Matrix witnesses;                  // per target, convex weights over generators
};

/// Smallest scaling s with target <= s * generator componentwise.
/// 0/0 dimensions are skipped, x/0 with x > 0 gives +inf.
double dominating_scale(std::span<const double> target,
                        std::span<const double> generator);

/// Smallest alpha with c^i <= alpha * (point of conv(C)) for every i.
CoverFactor alpha_one_stage(const UncertaintySet& u, std::span<const Scenario> reduced);

/// Smallest beta with chat^k <= beta * (point of conv(U)) for every k.
CoverFactor beta_one_stage(std::span<const Scenario> reduced, const UncertaintySet& u);

double guarantee_single_one_stage(const UncertaintySet& u, const Scenario& candidate);
double guarantee_single_two_stage(const UncertaintySet& u, const Scenario& candidate);

struct TwoStageFactors {
  double alpha = 1.0;
  double beta = 1.0;
  double guarantee() const { return alpha * beta; }
};

/// Two-stage factors (both clamped at 1) for an arbitrary reduced set; the
/// covering witness must be a single scenario on both sides.
TwoStageFactors two_stage_factors(const UncertaintySet& u, std::span<const Scenario> reduced);

/// d[i][l] = largest t with t * c^i <= c^l; +inf rows for zero scenarios.
struct DMatrix {
  Matrix d;

  std::size_t size() const { return d.size(); }
  double operator()(std::size_t i, std::size_t l) const { return d[i][l]; }
};

DMatrix d_matrix(const UncertaintySet& u);

struct GuaranteeCertificate {
  int stage = 1;
  double alpha = 0.0;
  double beta = 0.0;
  Matrix alpha_witnesses;  // N x K convex weights over C
  Matrix beta_witnesses;   // K x N convex weights over U (unit rows in stage 2)
  std::vector<int> alpha_choice;  // stage 2: covering reduced scenario per i
  std::vector<int> beta_choice;   // stage 2: index into U per k
};

struct CertificateFailure {
  std::string condition;
  int index = -1;  // offending scenario, -1 when not scenario specific
  double observed = 0.0;
  double required = 0.0;

  std::string message() const;
};

struct Verification {
  std::optional<GuaranteeCertificate> certificate;
  std::optional<CertificateFailure> failure;

  bool ok() const { return certificate.has_value(); }
};

Verification verify_certificate(const UncertaintySet& u, const ReductionResult& result);

struct GridAxis {
  double min = 0.1;
  double max = 6.0;
  double step = 0.01;

  std::size_t count() const;
  double at(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

struct HeatmapCell {
  double x = 0.0;
  double y = 0.0;
  double guarantee = 0.0;  // capped value
  bool capped = false;
};

inline constexpr double kHeatmapCap = 3.0;

/// Guarantee of every grid point as a single representative scenario (n = 2).
/// Rows follow y; x varies fastest.
std::vector<HeatmapCell> heatmap(const UncertaintySet& u, const GridAxis& x_axis,
                                 const GridAxis& y_axis, int stage,
                                 double cap = kHeatmapCap);

std::string heatmap_csv(const std::vector<HeatmapCell>& cells);

/// Largest cluster size: the guarantee of averaging each cluster.
int partition_bound(std::span<const int> cluster_sizes);

}  // namespace scenred
