#include "endslab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace endslab::mesh {

double WeightedGraph::total_measure() const {
  double s = 0;
  for (const auto& v : vertices) s += v.mu;
  return s;
}

double WeightedGraph::ball_measure(double R) const {
  double s = vertices[center].mu;
  for (const auto& ch : chains)
    for (int id : ch) {
      if (vertices[id].radius > R) break;
      s += vertices[id].mu;
    }
  return s;
}

WeightedGraph build_connected_sum(const std::vector<model::VolumeProfile>& ends,
                                  double r0, const Discretization& disc,
                                  double R_max) {
  if (ends.empty()) throw std::invalid_argument("need at least one end");
  if (!(r0 > 0)) throw std::invalid_argument("r0 must be positive");
  if (disc.grading == 0 && !(disc.delta <= r0 / 4))
    throw std::invalid_argument("uniform step must satisfy delta <= r0/4");
  if (disc.grading != 0 && !(disc.grading >= 8))
    throw std::invalid_argument("grading must be >= 8");
  if (!(R_max >= 100 * r0)) throw std::invalid_argument("R_max must be >= 100*r0");

  WeightedGraph g;
  g.r0 = r0;
  g.profiles = ends;

  // Per-end radii grid, shared shape across ends.
  std::vector<double> radii;
  if (disc.grading == 0) {
    for (double r = r0 + disc.delta; r <= R_max * (1 + 1e-12); r += disc.delta)
      radii.push_back(r);
  } else {
    double q = 1.0 + 1.0 / disc.grading;
    for (double r = r0 * q; r <= R_max * (1 + 1e-12); r *= q) radii.push_back(r);
  }
  if (radii.size() < 4) throw std::invalid_argument("chain shorter than 4 vertices");

  g.center = 0;
  Vertex o;
  o.end = kCenter;
  o.radius = 0;
  o.mu = 0;
  for (const auto& p : ends) o.mu += p.value(r0);
  g.vertices.push_back(o);

  for (size_t i = 0; i < ends.size(); ++i) {
    const auto& V = ends[i];
    std::vector<int> chain;
    chain.reserve(radii.size());
    int prev = g.center;
    double prev_r = r0;
    for (size_t j = 0; j < radii.size(); ++j) {
      double r = radii[j];
      double lo = 0.5 * (prev_r + r);
      double hi = j + 1 < radii.size() ? 0.5 * (r + radii[j + 1])
                                       : r + 0.5 * (r - prev_r);
      Vertex v;
      v.end = static_cast<int>(i);
      v.radius = r;
      v.mu = V.value(hi) - V.value(lo);
      double dr = r - prev_r;
      double c = (V.value(r) - V.value(prev_r)) / (dr * dr);
      if (!(v.mu > 0) || !std::isfinite(v.mu) || !(c > 0) || !std::isfinite(c))
        throw std::domain_error("non-finite or non-positive measure/conductance");
      int id = static_cast<int>(g.vertices.size());
      g.vertices.push_back(v);
      g.edges.push_back({prev, id, c});
      chain.push_back(id);
      prev = id;
      prev_r = r;
    }
    g.chains.push_back(std::move(chain));
  }
  return g;
}

double GraphView::measure() const {
  double s = 0;
  for (int id : verts) s += g->vertices[id].mu;
  return s;
}

bool GraphView::contains_all(const GraphView& other) const {
  return g == other.g &&
         std::includes(verts.begin(), verts.end(), other.verts.begin(),
                       other.verts.end());
}

namespace {

GraphView finish_view(const WeightedGraph& g, std::vector<int> verts, double radius) {
  GraphView view;
  view.g = &g;
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  view.verts = std::move(verts);
  std::vector<char> in(g.vertices.size(), 0);
  for (int id : view.verts) in[id] = 1;
  for (size_t e = 0; e < g.edges.size(); ++e)
    if (in[g.edges[e].u] && in[g.edges[e].v])
      view.edge_ids.push_back(static_cast<int>(e));
  view.radius = radius;
  return view;
}

}  // namespace

GraphView ball_subgraph(const WeightedGraph& g, double R) {
  if (!(R > g.r0)) throw std::invalid_argument("ball radius must exceed r0");
  std::vector<int> verts{g.center};
  for (const auto& ch : g.chains) {
    size_t count = 0;
    for (int id : ch) {
      if (g.vertices[id].radius > R) break;
      verts.push_back(id);
      ++count;
    }
    if (count == 0) throw std::domain_error("ball leaves an end chain empty");
  }
  return finish_view(g, std::move(verts), R);
}

GraphView annulus_set(const WeightedGraph& g, int end, double r) {
  if (end < 0 || end >= static_cast<int>(g.chains.size()))
    throw std::out_of_range("end index");
  if (!(r / 2 > g.r0)) throw std::invalid_argument("annulus needs r/2 > r0");
  std::vector<int> verts;
  for (int id : g.chains[end]) {
    double rad = g.vertices[id].radius;
    if (rad > r) break;
    if (rad > r / 2) verts.push_back(id);
  }
  if (verts.empty()) throw std::domain_error("empty annulus");
  return finish_view(g, std::move(verts), r);
}

GraphView metric_ball_view(const WeightedGraph& g, int end, double center,
                           double radius) {
  std::vector<int> verts;
  if (end == kCenter || radius >= center) {
    // Contains o; reaches radius - center down every other ray.
    double reach_own = center + radius;
    double reach_other = end == kCenter ? radius : radius - center;
    verts.push_back(g.center);
    for (size_t i = 0; i < g.chains.size(); ++i) {
      double reach = static_cast<int>(i) == end ? reach_own : reach_other;
      for (int id : g.chains[i]) {
        if (g.vertices[id].radius > reach) break;
        verts.push_back(id);
      }
    }
  } else {
    for (int id : g.chains[end]) {
      double rad = g.vertices[id].radius;
      if (rad > center + radius) break;
      if (rad >= center - radius) verts.push_back(id);
    }
  }
  return finish_view(g, std::move(verts), radius);
}

void dump(const WeightedGraph& g, std::ostream& os) {
  for (size_t id = 0; id < g.vertices.size(); ++id) {
    const auto& v = g.vertices[id];
    os << "v " << id << " " << v.end << " " << v.radius << " " << v.mu << "\n";
  }
  for (const auto& e : g.edges)
    os << "e " << e.u << " " << e.v << " " << e.c << "\n";
}

}  // namespace endslab::mesh
