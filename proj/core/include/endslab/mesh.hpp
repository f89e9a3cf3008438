#pragma once

// Radial weighted star graphs discretizing connected sums of model manifolds:
// shell measures and conductances per end, ball and annulus extraction.

#include <iosfwd>
#include <vector>

#include "endslab/model.hpp"

namespace endslab::mesh {

constexpr int kCenter = -1;

struct Vertex {
  int end = kCenter;   // end id, or kCenter for the compact block
  double radius = 0;   // distance from the reference point o
  double mu = 0;       // vertex measure
};

struct Edge {
  int u = 0, v = 0;
  double c = 0;        // conductance
};

struct WeightedGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  int center = 0;
  double r0 = 0;
  std::vector<std::vector<int>> chains;        // per end, ordered by radius
  std::vector<model::VolumeProfile> profiles;  // per end (empty for ad-hoc graphs)

  double total_measure() const;
  double ball_measure(double R) const;  // center + shells with radius <= R
};

struct Discretization {
  double delta = 1.0;  // uniform step, used when grading == 0
  double grading = 0;  // if > 0: geometric steps, delta_j = r_j / grading
};

// Vertex j of end i sits at radius r_j with shell measure
// mu_j = V_i(r_j + d+/2) - V_i(r_j - d-/2) and edge conductance
// c_j = (V_i(r_{j+1}) - V_i(r_j)) / (r_{j+1} - r_j)^2; the center carries
// mu_o = sum_i V_i(r0) and one edge into each chain.
WeightedGraph build_connected_sum(const std::vector<model::VolumeProfile>& ends,
                                  double r0, const Discretization& disc,
                                  double R_max);

// A read-only vertex subset with its induced edges (Neumann restriction: the
// quadratic form keeps interior edges and drops the rest).
struct GraphView {
  const WeightedGraph* g = nullptr;
  std::vector<int> verts;     // sorted ascending
  std::vector<int> edge_ids;  // induced edges
  double radius = 0;

  size_t size() const { return verts.size(); }
  double measure() const;
  bool contains_all(const GraphView& other) const;  // other subset of *this
};

GraphView ball_subgraph(const WeightedGraph& g, double R);

// Vertices of end i with radius in (r/2, r].
GraphView annulus_set(const WeightedGraph& g, int end, double r);

// Metric ball at radial coordinate `center` on ray `end` (or the central ball
// when end == kCenter) with the star distance d(x,y) = x_r + y_r across rays.
GraphView metric_ball_view(const WeightedGraph& g, int end, double center,
                           double radius);

// Debug dump: lines "v <id> <end> <radius> <mu>" then "e <u> <v> <c>".
void dump(const WeightedGraph& g, std::ostream& os);

}  // namespace endslab::mesh
