#pragma once

// Whitney coverings of central balls on the radialized star metric: tangent
// packings of balls along each ray with the Whitney radius law, their strings
// back to the central ball, covering verification, and the combined couple-
// constant upper bound for the central Poincare constant.

#include <iosfwd>
#include <string>
#include <vector>

#include "endslab/mesh.hpp"
#include "endslab/spectral.hpp"

namespace endslab::whitney {

struct WhitneyParams {
  double eta = 1.0 / 200;
  double kappa = 2.0;

  // eta < 1/20 and eta < 1/(kappa(36 kappa + 6)), kappa >= 1.
  bool valid() const;
};

struct Ball {
  int end = 0;
  double center = 0;  // radial coordinate of the ball center on its ray
  double radius = 0;
};

struct WhitneyCovering {
  double r = 0;                 // covered central ball B(o, r)
  WhitneyParams params;
  int num_ends = 0;
  double b0_radius = 0;         // 12 kappa eta r
  double b1_radius = 0;         // (36 kappa + 6) eta r
  double stop_scale = 0;        // sliver size at which the packing stopped
  std::vector<Ball> balls;
  std::vector<std::vector<int>> per_ray;  // ball indices ordered outward

  // String of ball `b`: consecutive balls from the first one (tangent to B0)
  // out to b; the central ball B0 is the implicit head.
  std::vector<int> string_of(int ball_index) const;
};

// Tangent packing per ray: the first ball abuts B0 and consecutive balls are
// tangent, each with the exact Whitney radius s = eta * d(F, B(o,r)^c).
// Packing stops once triple dilations reach within `stop_scale` of r
// (default r * 1e-9).
WhitneyCovering build_whitney(double r, const WhitneyParams& p, int num_ends,
                              double stop_scale = -1);

struct CoveringReport {
  bool pass = false;
  std::string first_failure;
  int max_overlap_1 = 0, max_overlap_3 = 0, max_overlap_12k = 0;
  int max_balls_per_ray = 0;
  double reach = 0;  // outermost coordinate covered by triple dilations
};

// Checks disjointness, coverage, the radius law, bounded overlap, the string
// radius ratios, the dilation inclusion along strings, and the geometric
// inclusions relating B0, B1 and the rays. Coverage is checked on the graph's
// vertices when one is supplied, otherwise on a synthetic probe grid.
CoveringReport verify_covering(const WhitneyCovering& c,
                               const mesh::WeightedGraph* g = nullptr);

// Lambda(3B0, 3kB0) + Lambda(B1, kB1) + max_F max{Lambda(3F, 3kF),
// Lambda(12F, 12kF)} with couple constants from the spectral module; the
// unknown comparison constant is not applied.
double combined_upper_bound(const mesh::WeightedGraph& g, const WhitneyCovering& c,
                            const spectral::SolverOptions& opt = {}, int threads = 1);

// Debug dump: one line per ball "F <end> <center> <radius> <string-length>".
void dump(const WhitneyCovering& c, std::ostream& os);

}  // namespace endslab::whitney
